#include "elens/model_io.hpp"

#include <istream>
#include <ostream>

#include <json.hpp>

#include "elens/errors.hpp"
#include "elens/txmodel.hpp"

namespace elens {

namespace {

using json = nlohmann::ordered_json;

std::string hash_hex(std::uint64_t h) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json class_array() {
    json a = json::array();
    for (int c = 0; c < kNumCategories; ++c) a.push_back(kCategoryNames[c]);
    return a;
}

json parse_header(std::istream& in, const char* kind, const std::uint64_t* expect_schema,
                  json& doc) {
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
    if (!doc.is_object())
        throw ParseError("model file: not a JSON object");
    if (doc.value("format_version", -1) != kModelFormatVersion)
        throw ParseError("model file: unsupported format_version");
    if (doc.value("model", "") != kind)
        throw ParseError(std::string("model file: expected kind '") + kind + "', got '" +
                         doc.value("model", "") + "'");
    if (doc["classes"] != class_array())
        throw ParseError("model file: class order does not match this build");
    if (expect_schema && doc.value("schema_hash", "") != hash_hex(*expect_schema))
        throw ParseError("model file: schema hash mismatch");
    return doc;
}

json tree_to_json(const Tree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes)
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"value", n.value},
                         {"gain", n.gain}});
    return json{{"nodes", nodes}};
}

Tree tree_from_json(const json& j) {
    Tree t;
    for (const auto& n : j.at("nodes")) {
        TreeNode node;
        node.feature = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
        node.value = n.at("value").get<double>();
        node.gain = n.at("gain").get<double>();
        t.nodes.push_back(node);
    }
    if (t.nodes.empty())
        throw ParseError("model file: empty tree");
    return t;
}

} // namespace

void save_gbdt_model(const BoostedEnsemble& model, std::uint64_t schema_hash,
                     std::ostream& out) {
    json j;
    j["format_version"] = kModelFormatVersion;
    j["model"] = "gbdt";
    j["schema_hash"] = hash_hex(schema_hash);
    j["classes"] = class_array();
    j["n_classes"] = model.n_classes;
    j["n_features"] = model.n_features;
    j["params"] = {{"learning_rate", model.params.learning_rate},
                   {"max_leaves", model.params.max_leaves},
                   {"min_samples_leaf", model.params.min_samples_leaf},
                   {"max_iters", model.params.max_iters},
                   {"early_stopping_rounds", model.params.early_stopping_rounds}};
    j["init_scores"] = std::vector<double>(model.init_scores.data(),
                                           model.init_scores.data() + model.init_scores.size());
    j["best_iteration"] = model.best_iteration;
    json stages = json::array();
    for (const auto& stage : model.stages) {
        json trees = json::array();
        for (const auto& t : stage) trees.push_back(tree_to_json(t));
        stages.push_back(trees);
    }
    j["stages"] = stages;
    out << j.dump(2) << '\n';
}

BoostedEnsemble load_gbdt_model(std::istream& in, const std::uint64_t* expect_schema) {
    json doc;
    parse_header(in, "gbdt", expect_schema, doc);
    BoostedEnsemble m;
    try {
        m.n_classes = doc.at("n_classes").get<int>();
        m.n_features = doc.at("n_features").get<int>();
        const auto& p = doc.at("params");
        m.params.learning_rate = p.at("learning_rate").get<double>();
        m.params.max_leaves = p.at("max_leaves").get<int>();
        m.params.min_samples_leaf = p.at("min_samples_leaf").get<int>();
        m.params.max_iters = p.at("max_iters").get<int>();
        m.params.early_stopping_rounds = p.at("early_stopping_rounds").get<int>();
        auto init = doc.at("init_scores").get<std::vector<double>>();
        m.init_scores = Eigen::Map<Eigen::VectorXd>(init.data(), Eigen::Index(init.size()));
        m.best_iteration = doc.at("best_iteration").get<int>();
        for (const auto& stage : doc.at("stages")) {
            std::vector<Tree> trees;
            for (const auto& t : stage) trees.push_back(tree_from_json(t));
            m.stages.push_back(std::move(trees));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
    if (m.n_classes < 2 || m.init_scores.size() != m.n_classes)
        throw ParseError("model file: inconsistent class count");
    for (const auto& stage : m.stages)
        if (int(stage.size()) != m.n_classes)
            throw ParseError("model file: stage tree count != class count");
    if (m.best_iteration < 0 || m.best_iteration > int(m.stages.size()))
        throw ParseError("model file: best_iteration out of range");
    return m;
}

void save_logreg_model(const LogisticModel& model, std::uint64_t schema_hash,
                       std::ostream& out) {
    json j;
    j["format_version"] = kModelFormatVersion;
    j["model"] = "logreg";
    j["schema_hash"] = hash_hex(schema_hash);
    j["classes"] = class_array();
    j["inverse_l2"] = model.inverse_l2;
    json rows = json::array();
    for (Eigen::Index c = 0; c < model.weights.rows(); ++c) {
        std::vector<double> w(std::size_t(model.weights.cols()));
        for (Eigen::Index i = 0; i < model.weights.cols(); ++i) w[std::size_t(i)] =
            model.weights(c, i);
        rows.push_back(w);
    }
    j["weights"] = rows;
    out << j.dump(2) << '\n';
}

LogisticModel load_logreg_model(std::istream& in, const std::uint64_t* expect_schema) {
    json doc;
    parse_header(in, "logreg", expect_schema, doc);
    LogisticModel m;
    try {
        m.inverse_l2 = doc.at("inverse_l2").get<double>();
        const auto& rows = doc.at("weights");
        if (rows.empty())
            throw ParseError("model file: no weights");
        m.weights.resize(Eigen::Index(rows.size()), Eigen::Index(rows[0].size()));
        for (Eigen::Index c = 0; c < m.weights.rows(); ++c) {
            auto w = rows[std::size_t(c)].get<std::vector<double>>();
            if (Eigen::Index(w.size()) != m.weights.cols())
                throw ParseError("model file: ragged weight rows");
            for (Eigen::Index i = 0; i < m.weights.cols(); ++i) m.weights(c, i) =
                w[std::size_t(i)];
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
    return m;
}

std::string model_kind(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("model"))
        throw ParseError("model file: missing 'model' field");
    return doc["model"].get<std::string>();
}

} // namespace elens
