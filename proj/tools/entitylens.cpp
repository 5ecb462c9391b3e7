// entitylens: pipeline driver for entity clustering, motif analysis, feature
// extraction, and classification over UTXO transaction dumps.

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "elens/cluster.hpp"
#include "elens/dataset.hpp"
#include "elens/errors.hpp"
#include "elens/features.hpp"
#include "elens/gbdt.hpp"
#include "elens/graph.hpp"
#include "elens/io.hpp"
#include "elens/logreg.hpp"
#include "elens/metrics.hpp"
#include "elens/model_io.hpp"
#include "elens/motifs.hpp"
#include "elens/rng.hpp"
#include "elens/studies.hpp"
#include "elens/synth.hpp"
#include "elens/txmodel.hpp"

namespace {

using namespace elens;
namespace fs = std::filesystem;

constexpr const char* kToolVersion = "1.0.0";

class StageClock {
public:
    explicit StageClock(RunManifest& manifest) : manifest_(manifest) {}

    template <typename F> auto run(const std::string& stage, F&& f) {
        auto t0 = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            record(stage, t0);
        } else {
            auto out = f();
            record(stage, t0);
            return out;
        }
    }

private:
    void record(const std::string& stage, std::chrono::steady_clock::time_point t0) {
        std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        manifest_.stage_seconds.emplace_back(stage, dt.count());
    }

    RunManifest& manifest_;
};

std::vector<TxRecord> load_tx_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open --tx file " + path.string());
    return parse_transactions(in);
}

LabelSet load_label_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open --labels file " + path.string());
    return load_labels(in);
}

PriceTable load_price_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open --prices file " + path.string());
    return load_prices(in);
}

FeatureMatrix load_feature_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open --features file " + path.string());
    return read_feature_matrix_csv(in);
}

struct Pipeline {
    AddressTxGraph addr;
    EntityMap entities;
    EntityTxGraph graph;
    std::map<EntityIdx, Category> labels; // dense index -> category
};

Pipeline build_pipeline(std::vector<TxRecord> txs, const LabelSet* labels) {
    Pipeline p;
    p.entities = cluster_common_spending(txs);
    p.addr = build_address_graph(std::move(txs));
    p.graph = project_entity_graph(p.addr, p.entities);
    if (labels) {
        EntityLabels el = label_entities(p.entities, *labels);
        for (const auto& [canonical, cat] : el.by_entity)
            p.labels.emplace(p.graph.index_of(canonical), cat);
    }
    return p;
}

RunManifest make_manifest(const std::string& command, std::uint64_t seed) {
    RunManifest m;
    m.version = kToolVersion;
    m.command = command;
    m.seed = seed;
    return m;
}

fs::path manifest_path(const std::string& chosen, const fs::path& primary_out) {
    if (!chosen.empty()) return chosen;
    fs::path p = primary_out;
    p += ".manifest.json";
    return p;
}

void finish(RunManifest& manifest, const std::string& chosen, const fs::path& primary_out) {
    atomic_write(manifest_path(chosen, primary_out),
                 [&](std::ostream& out) { manifest.write_json(out); });
}

// ---- synth ----

struct SynthOpts {
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int days = 60;
    int per_class = 20;
    std::vector<int> counts;
    std::string manifest;
};

void run_synth(const SynthOpts& o) {
    SynthConfig cfg;
    cfg.seed = o.seed;
    cfg.duration_days = o.days;
    cfg.entity_counts.fill(o.per_class);
    if (!o.counts.empty())
        for (int c = 0; c < kNumCategories; ++c)
            cfg.entity_counts[std::size_t(c)] = o.counts[std::size_t(c)];

    RunManifest manifest = make_manifest("synth", o.seed);
    manifest.params["days"] = std::to_string(cfg.duration_days);
    for (int c = 0; c < kNumCategories; ++c)
        manifest.params[std::string("count_") + kCategoryNames[c]] =
            std::to_string(cfg.entity_counts[std::size_t(c)]);
    StageClock clock(manifest);

    SynthData data = clock.run("generate", [&] { return generate_synth(cfg); });

    fs::path dir = o.out_dir;
    auto emit = [&](const char* name, auto&& fill) {
        fs::path p = dir / name;
        atomic_write(p, fill);
        manifest.add_output(p);
        return p;
    };
    clock.run("write", [&] {
        emit("txs.jsonl", [&](std::ostream& out) { serialize_transactions(data.txs, out); });
        emit("labels.csv", [&](std::ostream& out) { write_labels_csv(data, out); });
        emit("prices.csv", [&](std::ostream& out) { write_prices(data.prices, out); });
        emit("ground_truth_entities.csv",
             [&](std::ostream& out) { write_ground_truth_csv(data, out); });
    });
    std::cout << "synth: " << data.txs.size() << " txs, " << data.ground_truth.size()
              << " addresses\n";
    finish(manifest, o.manifest, dir / "txs.jsonl");
}

// ---- cluster ----

struct ClusterOpts {
    std::string tx;
    std::string out;
    std::string manifest;
};

void run_cluster(const ClusterOpts& o) {
    RunManifest manifest = make_manifest("cluster", 0);
    StageClock clock(manifest);
    manifest.add_input(o.tx);

    auto txs = clock.run("parse", [&] { return load_tx_file(o.tx); });
    EntityMap map = clock.run("cluster", [&] { return cluster_common_spending(txs); });

    atomic_write(o.out, [&](std::ostream& out) {
        out << "address,entity_id\n";
        for (EntityId e : map.entities())
            for (AddressId a : map.addresses_of(e))
                out << map.address_name(a) << ',' << e << '\n';
    });
    manifest.add_output(o.out);
    std::cout << "cluster: " << map.address_count() << " addresses -> " << map.entity_count()
              << " entities\n";
    finish(manifest, o.manifest, o.out);
}

// ---- graph-stats ----

struct GraphStatsOpts {
    std::string tx;
    std::string labels;
    std::string out;
    std::string format = "csv";
    std::string manifest;
};

void run_graph_stats(const GraphStatsOpts& o) {
    RunManifest manifest = make_manifest("graph-stats", 0);
    StageClock clock(manifest);
    manifest.add_input(o.tx);
    std::unique_ptr<LabelSet> labels;
    if (!o.labels.empty()) {
        manifest.add_input(o.labels);
        labels = std::make_unique<LabelSet>(load_label_file(o.labels));
    }

    Pipeline p = clock.run("build", [&] { return build_pipeline(load_tx_file(o.tx),
                                                                labels.get()); });

    std::uint64_t coinbase = 0;
    Sats fees = 0;
    for (const auto& tx : p.addr.txs()) {
        coinbase += tx.coinbase ? 1 : 0;
        fees += tx.fee;
    }
    std::vector<std::pair<std::string, std::string>> stats;
    auto add = [&](const char* k, auto v) {
        if constexpr (std::is_arithmetic_v<decltype(v)>)
            stats.emplace_back(k, std::to_string(v));
        else
            stats.emplace_back(k, v);
    };
    char buf[32];
    add("transactions", p.addr.txs().size());
    add("coinbase_transactions", coinbase);
    add("addresses", p.addr.addresses().size());
    add("address_edges", p.addr.edge_count());
    add("entities", p.graph.entity_count());
    add("labeled_entities", p.labels.size());
    std::snprintf(buf, sizeof buf, "%.8f", to_btc(fees));
    add("total_fees_btc", std::string(buf));
    add("span_begin", p.addr.txs().empty() ? 0 : p.graph.span_begin());
    add("span_end", p.addr.txs().empty() ? 0 : p.graph.span_end());

    auto fill = [&](std::ostream& out) {
        if (o.format == "json") {
            nlohmann::ordered_json j;
            for (const auto& [k, v] : stats) j[k] = v;
            out << j.dump(2) << '\n';
        } else {
            out << "stat,value\n";
            for (const auto& [k, v] : stats) out << k << ',' << v << '\n';
        }
    };
    if (o.out.empty()) {
        fill(std::cout);
        return; // nothing persisted, nothing to record
    }
    atomic_write(o.out, fill);
    manifest.add_output(o.out);
    finish(manifest, o.manifest, o.out);
}

// ---- motifs ----

struct MotifOpts {
    std::string tx;
    std::string labels;
    std::string out;
    int n = 3;
    int threads = 1;
    std::uint64_t budget = MotifLimits{}.max_paths_per_entity;
    std::string format = "csv";
    std::string manifest;
};

void run_motifs(const MotifOpts& o) {
    if (o.n < 1 || o.n > 3)
        throw ConfigError("--n must be 1, 2 or 3");
    RunManifest manifest = make_manifest("motifs", 0);
    manifest.params["n"] = std::to_string(o.n);
    manifest.params["threads"] = std::to_string(o.threads);
    StageClock clock(manifest);
    manifest.add_input(o.tx);
    manifest.add_input(o.labels);

    LabelSet labels = load_label_file(o.labels);
    Pipeline p = clock.run("build", [&] { return build_pipeline(load_tx_file(o.tx), &labels); });

    MotifStats stats;
    MotifLimits limits;
    limits.max_paths_per_entity = o.budget;
    clock.run("enumerate", [&] {
        for_each_1motif(p.graph, [&](const MotifInstance& m) { stats.count(m, p.labels); });
        for (int n = 2; n <= o.n; ++n) {
            MotifSummary s = for_each_direct_motif(
                p.graph, p.addr, n, limits, o.threads,
                [&](const MotifInstance& m) { stats.count(m, p.labels); });
            stats.truncated_entities += s.truncated.size();
        }
    });

    auto fill = [&](std::ostream& out) {
        if (o.format == "json") {
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            for (const auto& [key, row] : stats.rows) {
                nlohmann::ordered_json r;
                r["n"] = key.first;
                r["loop"] = key.second;
                r["quantity"] = row.quantity;
                auto shares = row.shares();
                for (int c = 0; c < kNumCategories; ++c)
                    r[kCategoryNames[c]] = shares[std::size_t(c)];
                rows.push_back(std::move(r));
            }
            nlohmann::ordered_json j;
            j["rows"] = std::move(rows);
            j["truncated_entities"] = stats.truncated_entities;
            out << j.dump(2) << '\n';
        } else {
            write_motif_stats_csv(stats, out);
        }
    };
    if (o.out.empty()) {
        fill(std::cout);
        return;
    }
    atomic_write(o.out, fill);
    manifest.add_output(o.out);
    finish(manifest, o.manifest, o.out);
}

// ---- features ----

struct FeatureOpts {
    std::string tx;
    std::string labels;
    std::string prices;
    std::string out;
    std::string schema;
    int threads = 1;
    std::uint64_t budget = MotifLimits{}.max_paths_per_entity;
    std::string manifest;
};

void run_features(const FeatureOpts& o) {
    RunManifest manifest = make_manifest("features", 0);
    manifest.params["threads"] = std::to_string(o.threads);
    StageClock clock(manifest);
    manifest.add_input(o.tx);
    manifest.add_input(o.labels);
    manifest.add_input(o.prices);

    LabelSet labels = load_label_file(o.labels);
    PriceTable prices = load_price_file(o.prices);
    Pipeline p = clock.run("build", [&] { return build_pipeline(load_tx_file(o.tx), &labels); });
    if (p.labels.empty())
        throw ValidationError("no labeled entities; nothing to extract");

    MotifLimits limits;
    limits.max_paths_per_entity = o.budget;
    FeatureMatrix m = clock.run("extract", [&] {
        FeatureExtractor extractor(p.addr, p.graph, p.entities, prices, limits, o.threads);
        return extractor.assemble(p.labels);
    });

    atomic_write(o.out, [&](std::ostream& out) { write_feature_matrix_csv(m, out); });
    manifest.add_output(o.out);
    fs::path schema_out = o.schema;
    if (o.schema.empty()) {
        schema_out = o.out;
        schema_out += ".schema.json";
    }
    atomic_write(schema_out, [&](std::ostream& out) { m.schema.write_json(out); });
    manifest.add_output(schema_out);
    std::cout << "features: " << m.rows() << " entities x " << m.schema.width()
              << " features\n";
    finish(manifest, o.manifest, o.out);
}

// ---- train ----

struct TrainOpts {
    std::string features;
    std::string model = "gbdt";
    std::string out;
    std::uint64_t seed = 0;
    double split = 0.7;
    GbdtParams gbdt;
    double inverse_l2 = 1.0;
    std::string manifest;
};

void run_train(const TrainOpts& o) {
    RunManifest manifest = make_manifest("train", o.seed);
    manifest.params["model"] = o.model;
    manifest.params["split"] = std::to_string(o.split);
    StageClock clock(manifest);
    manifest.add_input(o.features);

    FeatureMatrix m = load_feature_file(o.features);
    Dataset d = split_dataset(m, derive_seed(o.seed, "split"), o.split);
    std::vector<int> y = label_indices(d.train);

    if (o.model == "gbdt") {
        BoostedEnsemble model = clock.run("train", [&] {
            return train_gbdt_holdout(d.train.values, y, o.gbdt,
                                      derive_seed(o.seed, "gbdt-holdout"));
        });
        atomic_write(o.out, [&](std::ostream& out) {
            save_gbdt_model(model, m.schema.hash(), out);
        });
        std::cout << "train gbdt: " << model.stages.size() << " stages, best iteration "
                  << model.best_iteration << '\n';
    } else if (o.model == "logreg") {
        LogisticModel model =
            clock.run("train", [&] { return train_logreg(d.train.values, y, o.inverse_l2); });
        atomic_write(o.out, [&](std::ostream& out) {
            save_logreg_model(model, m.schema.hash(), out);
        });
        std::cout << "train logreg: " << model.n_classes() << " classes, C = " << o.inverse_l2
                  << '\n';
    } else {
        throw ConfigError("--model must be gbdt or logreg");
    }
    manifest.add_output(o.out);
    finish(manifest, o.manifest, o.out);
}

// ---- tune ----

struct TuneOpts {
    std::string features;
    std::string model = "gbdt";
    std::string out;
    std::string trace;
    int iters = 50;
    std::uint64_t seed = 0;
    double split = 0.7;
    std::string manifest;
};

void run_tune(const TuneOpts& o) {
    RunManifest manifest = make_manifest("tune", o.seed);
    manifest.params["model"] = o.model;
    manifest.params["iters"] = std::to_string(o.iters);
    StageClock clock(manifest);
    manifest.add_input(o.features);

    FeatureMatrix m = load_feature_file(o.features);
    Dataset d = split_dataset(m, derive_seed(o.seed, "split"), o.split);
    std::uint64_t tune_seed = derive_seed(o.seed, "tune");

    GpResult search;
    if (o.model == "gbdt") {
        TunedGbdt tuned = clock.run("tune", [&] { return tune_gbdt(d.train, tune_seed,
                                                                   o.iters); });
        atomic_write(o.out, [&](std::ostream& out) {
            save_gbdt_model(tuned.model, m.schema.hash(), out);
        });
        search = std::move(tuned.search);
        std::cout << "tune gbdt: learning rate " << search.best_theta << ", objective "
                  << search.best_objective << '\n';
    } else if (o.model == "logreg") {
        TunedLogreg tuned = clock.run("tune", [&] { return tune_logreg(d.train, tune_seed,
                                                                       o.iters); });
        atomic_write(o.out, [&](std::ostream& out) {
            save_logreg_model(tuned.model, m.schema.hash(), out);
        });
        search = std::move(tuned.search);
        std::cout << "tune logreg: C " << search.best_theta << ", objective "
                  << search.best_objective << '\n';
    } else {
        throw ConfigError("--model must be gbdt or logreg");
    }
    manifest.add_output(o.out);
    if (!o.trace.empty()) {
        atomic_write(o.trace, [&](std::ostream& out) { write_gp_trace_csv(search, out); });
        manifest.add_output(o.trace);
    }
    finish(manifest, o.manifest, o.out);
}

// ---- eval ----

struct EvalOpts {
    std::string features;
    std::string model;
    std::string out;
    std::string on = "test";
    std::uint64_t seed = 0;
    double split = 0.7;
    std::string manifest;
};

void run_eval(const EvalOpts& o) {
    RunManifest manifest = make_manifest("eval", o.seed);
    manifest.params["on"] = o.on;
    StageClock clock(manifest);
    manifest.add_input(o.features);
    manifest.add_input(o.model);

    FeatureMatrix m = load_feature_file(o.features);
    const FeatureMatrix* part = &m;
    Dataset d;
    if (o.on != "all") {
        d = split_dataset(m, derive_seed(o.seed, "split"), o.split);
        if (o.on == "test")
            part = &d.test;
        else if (o.on == "train")
            part = &d.train;
        else
            throw ConfigError("--on must be test, train or all");
    }

    std::string kind;
    {
        std::ifstream in(o.model);
        if (!in)
            throw ConfigError("cannot open --model file " + o.model);
        kind = model_kind(in);
    }
    std::uint64_t schema_hash = m.schema.hash();
    Metrics metrics = clock.run("evaluate", [&] {
        std::ifstream in(o.model);
        if (kind == "gbdt")
            return evaluate_model(load_gbdt_model(in, &schema_hash), *part);
        if (kind == "logreg")
            return evaluate_model(load_logreg_model(in, &schema_hash), *part);
        throw ParseError("unknown model kind '" + kind + "'");
    });

    atomic_write(o.out, [&](std::ostream& out) { write_metrics_csv(metrics, out); });
    manifest.add_output(o.out);
    char buf[64];
    std::snprintf(buf, sizeof buf, "accuracy %.4f, macro F1 %.4f", metrics.accuracy,
                  metrics.macro_f1);
    std::cout << "eval " << kind << " on " << o.on << ": " << buf << '\n';
    finish(manifest, o.manifest, o.out);
}

// ---- studies ----

struct GroupsOpts {
    std::string features;
    std::string out;
    std::uint64_t seed = 0;
    double split = 0.7;
    std::string manifest;
};

void run_study_groups(const GroupsOpts& o) {
    RunManifest manifest = make_manifest("study-groups", o.seed);
    StageClock clock(manifest);
    manifest.add_input(o.features);

    FeatureMatrix m = load_feature_file(o.features);
    Dataset d = split_dataset(m, derive_seed(o.seed, "split"), o.split);
    auto rows = clock.run("study", [&] {
        return incremental_groups_study(d.train, d.test, derive_seed(o.seed, "study"));
    });
    atomic_write(o.out, [&](std::ostream& out) { write_study_rows_csv(rows, out); });
    manifest.add_output(o.out);
    finish(manifest, o.manifest, o.out);
}

struct SelectionOpts {
    std::string features;
    std::string out;
    std::string importance;
    std::string stability;
    int bootstrap = 20;
    std::uint64_t seed = 0;
    double split = 0.7;
    std::string manifest;
};

void run_study_selection(const SelectionOpts& o) {
    RunManifest manifest = make_manifest("study-selection", o.seed);
    StageClock clock(manifest);
    manifest.add_input(o.features);

    FeatureMatrix m = load_feature_file(o.features);
    Dataset d = split_dataset(m, derive_seed(o.seed, "split"), o.split);
    std::uint64_t curve_seed = derive_seed(o.seed, "selection");

    BoostedEnsemble ranker = clock.run("rank", [&] {
        return train_gbdt_holdout(d.train.values, label_indices(d.train), GbdtParams{},
                                  curve_seed);
    });
    auto ranked = feature_importance(ranker);
    std::vector<int> ranking;
    for (const auto& [feature, gain] : ranked) ranking.push_back(feature);

    std::vector<int> ks;
    for (int k : kSelectionKs)
        if (k <= m.schema.width()) ks.push_back(k);
    if (ks.empty() || ks.back() != m.schema.width()) ks.push_back(m.schema.width());

    auto points = clock.run("curve", [&] {
        return selection_curve(d.train, d.test, ranking, ks, curve_seed);
    });
    atomic_write(o.out, [&](std::ostream& out) { write_selection_curve_csv(points, out); });
    manifest.add_output(o.out);

    if (!o.importance.empty()) {
        atomic_write(o.importance,
                     [&](std::ostream& out) { write_importance_csv(m.schema, ranked, out); });
        manifest.add_output(o.importance);
    }
    if (!o.stability.empty()) {
        auto stability = clock.run("bootstrap", [&] {
            return bootstrap_rank_stability(d.train, GbdtParams{}, o.bootstrap,
                                            derive_seed(o.seed, "bootstrap"));
        });
        atomic_write(o.stability, [&](std::ostream& out) {
            write_rank_stability_csv(m.schema, stability, out);
        });
        manifest.add_output(o.stability);
    }
    finish(manifest, o.manifest, o.out);
}

void add_manifest_option(CLI::App* cmd, std::string& slot) {
    cmd->add_option("--manifest", slot,
                    "manifest path (default: <primary output>.manifest.json)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"entity clustering, motif, feature and classification pipeline"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value file mirroring long flags ([subcommand] sections)");

    auto synth_opts = std::make_shared<SynthOpts>();
    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic dataset");
    synth->add_option("--out-dir", synth_opts->out_dir, "output directory")->required();
    synth->add_option("--seed", synth_opts->seed, "generator seed")->envname("ELENS_SEED");
    synth->add_option("--days", synth_opts->days, "duration in days");
    synth->add_option("--per-class", synth_opts->per_class, "entities per class");
    synth->add_option("--counts", synth_opts->counts,
                      "per-class entity counts (Exchange Service Gambling Mining Darknet)")
        ->expected(kNumCategories);
    add_manifest_option(synth, synth_opts->manifest);
    synth->callback([synth_opts] { run_synth(*synth_opts); });

    auto cluster_opts = std::make_shared<ClusterOpts>();
    auto* cluster = app.add_subcommand("cluster", "common-spending entity clustering");
    cluster->add_option("--tx", cluster_opts->tx, "transactions JSONL")->required();
    cluster->add_option("--out", cluster_opts->out, "entity CSV output")->required();
    add_manifest_option(cluster, cluster_opts->manifest);
    cluster->callback([cluster_opts] { run_cluster(*cluster_opts); });

    auto gs_opts = std::make_shared<GraphStatsOpts>();
    auto* gs = app.add_subcommand("graph-stats", "transaction graph summary");
    gs->add_option("--tx", gs_opts->tx, "transactions JSONL")->required();
    gs->add_option("--labels", gs_opts->labels, "address labels CSV");
    gs->add_option("--out", gs_opts->out, "output file (default: stdout)");
    gs->add_option("--format", gs_opts->format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    add_manifest_option(gs, gs_opts->manifest);
    gs->callback([gs_opts] { run_graph_stats(*gs_opts); });

    auto motif_opts = std::make_shared<MotifOpts>();
    auto* motifs = app.add_subcommand("motifs", "direct N-motif distribution by category");
    motifs->add_option("--tx", motif_opts->tx, "transactions JSONL")->required();
    motifs->add_option("--labels", motif_opts->labels, "address labels CSV")->required();
    motifs->add_option("--out", motif_opts->out, "stats output (default: stdout)");
    motifs->add_option("--n", motif_opts->n, "largest motif size (1-3)");
    motifs->add_option("--threads", motif_opts->threads, "worker threads")
        ->envname("ELENS_THREADS");
    motifs->add_option("--budget", motif_opts->budget, "max paths per starting entity");
    motifs->add_option("--format", motif_opts->format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    add_manifest_option(motifs, motif_opts->manifest);
    motifs->callback([motif_opts] { run_motifs(*motif_opts); });

    auto feat_opts = std::make_shared<FeatureOpts>();
    auto* features = app.add_subcommand("features", "315-feature extraction per entity");
    features->add_option("--tx", feat_opts->tx, "transactions JSONL")->required();
    features->add_option("--labels", feat_opts->labels, "address labels CSV")->required();
    features->add_option("--prices", feat_opts->prices, "daily prices CSV")->required();
    features->add_option("--out", feat_opts->out, "feature matrix CSV")->required();
    features->add_option("--schema", feat_opts->schema,
                         "schema JSON path (default: <out>.schema.json)");
    features->add_option("--threads", feat_opts->threads, "worker threads")
        ->envname("ELENS_THREADS");
    features->add_option("--budget", feat_opts->budget, "max paths per starting entity");
    add_manifest_option(features, feat_opts->manifest);
    features->callback([feat_opts] { run_features(*feat_opts); });

    auto train_opts = std::make_shared<TrainOpts>();
    auto* train = app.add_subcommand("train", "fit a classifier on the train split");
    train->add_option("--features", train_opts->features, "feature matrix CSV")->required();
    train->add_option("--model", train_opts->model, "gbdt or logreg")
        ->check(CLI::IsMember({"gbdt", "logreg"}));
    train->add_option("--out", train_opts->out, "model JSON output")->required();
    train->add_option("--seed", train_opts->seed, "split/holdout seed")->envname("ELENS_SEED");
    train->add_option("--split", train_opts->split, "train fraction");
    train->add_option("--learning-rate", train_opts->gbdt.learning_rate, "gbdt learning rate");
    train->add_option("--max-leaves", train_opts->gbdt.max_leaves, "gbdt leaves per tree");
    train->add_option("--min-samples-leaf", train_opts->gbdt.min_samples_leaf,
                      "gbdt min rows per leaf");
    train->add_option("--max-iters", train_opts->gbdt.max_iters, "gbdt stage cap");
    train->add_option("--early-stopping", train_opts->gbdt.early_stopping_rounds,
                      "gbdt early-stopping rounds (0 disables)");
    train->add_option("--inverse-l2", train_opts->inverse_l2, "logreg C");
    add_manifest_option(train, train_opts->manifest);
    train->callback([train_opts] { run_train(*train_opts); });

    auto tune_opts = std::make_shared<TuneOpts>();
    auto* tune = app.add_subcommand("tune", "GP hyperparameter search");
    tune->add_option("--features", tune_opts->features, "feature matrix CSV")->required();
    tune->add_option("--model", tune_opts->model, "gbdt or logreg")
        ->check(CLI::IsMember({"gbdt", "logreg"}));
    tune->add_option("--out", tune_opts->out, "model JSON output")->required();
    tune->add_option("--trace", tune_opts->trace, "tuning trace CSV");
    tune->add_option("--iters", tune_opts->iters, "objective evaluations");
    tune->add_option("--seed", tune_opts->seed, "search seed")->envname("ELENS_SEED");
    tune->add_option("--split", tune_opts->split, "train fraction");
    add_manifest_option(tune, tune_opts->manifest);
    tune->callback([tune_opts] { run_tune(*tune_opts); });

    auto eval_opts = std::make_shared<EvalOpts>();
    auto* eval = app.add_subcommand("eval", "metrics for a saved model");
    eval->add_option("--features", eval_opts->features, "feature matrix CSV")->required();
    eval->add_option("--model", eval_opts->model, "model JSON")->required();
    eval->add_option("--out", eval_opts->out, "metrics CSV output")->required();
    eval->add_option("--on", eval_opts->on, "test, train or all")
        ->check(CLI::IsMember({"test", "train", "all"}));
    eval->add_option("--seed", eval_opts->seed, "split seed")->envname("ELENS_SEED");
    eval->add_option("--split", eval_opts->split, "train fraction");
    add_manifest_option(eval, eval_opts->manifest);
    eval->callback([eval_opts] { run_eval(*eval_opts); });

    auto groups_opts = std::make_shared<GroupsOpts>();
    auto* groups = app.add_subcommand("study-groups", "incremental feature-group study");
    groups->add_option("--features", groups_opts->features, "feature matrix CSV")->required();
    groups->add_option("--out", groups_opts->out, "study CSV output")->required();
    groups->add_option("--seed", groups_opts->seed, "split seed")->envname("ELENS_SEED");
    groups->add_option("--split", groups_opts->split, "train fraction");
    add_manifest_option(groups, groups_opts->manifest);
    groups->callback([groups_opts] { run_study_groups(*groups_opts); });

    auto sel_opts = std::make_shared<SelectionOpts>();
    auto* sel = app.add_subcommand("study-selection", "top-k feature selection curve");
    sel->add_option("--features", sel_opts->features, "feature matrix CSV")->required();
    sel->add_option("--out", sel_opts->out, "curve CSV output")->required();
    sel->add_option("--importance", sel_opts->importance, "importance ranking CSV output");
    sel->add_option("--stability", sel_opts->stability, "bootstrap rank-stability CSV output");
    sel->add_option("--bootstrap", sel_opts->bootstrap, "bootstrap resamples");
    sel->add_option("--seed", sel_opts->seed, "split seed")->envname("ELENS_SEED");
    sel->add_option("--split", sel_opts->split, "train fraction");
    add_manifest_option(sel, sel_opts->manifest);
    sel->callback([sel_opts] { run_study_selection(*sel_opts); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const LookupError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
