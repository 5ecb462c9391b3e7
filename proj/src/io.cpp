#include "elens/io.hpp"

#include <cstdio>
#include <fstream>
#include <system_error>

#include <json.hpp>

#include "elens/digest.hpp"
#include "elens/errors.hpp"

namespace elens {

void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& fill) {
    auto parent = path.parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
        if (ec)
            throw ConfigError("cannot create " + parent.string() + ": " + ec.message());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw ConfigError("cannot open " + tmp.string() + " for writing");
        fill(out);
        out.flush();
        if (!out)
            throw ConfigError("write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw ConfigError("cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read " + path.string());
    std::uint64_t h = kFnvOffset;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        h = fnv1a(std::string_view(buf, std::size_t(in.gcount())), h);
    char hex[19];
    std::snprintf(hex, sizeof hex, "0x%016llx", static_cast<unsigned long long>(h));
    return hex;
}

void RunManifest::add_input(const std::filesystem::path& path) {
    inputs.emplace_back(path.string(), file_digest(path));
}

void RunManifest::add_output(const std::filesystem::path& path) {
    outputs.emplace_back(path.string(), file_digest(path));
}

void RunManifest::write_json(std::ostream& out) const {
    nlohmann::ordered_json j;
    j["tool"] = tool;
    j["version"] = version;
    j["command"] = command;
    j["seed"] = seed;
    j["params"] = params;
    auto files = [](const std::vector<std::pair<std::string, std::string>>& v) {
        nlohmann::ordered_json a = nlohmann::ordered_json::array();
        for (const auto& [path, digest] : v) a.push_back({{"path", path}, {"digest", digest}});
        return a;
    };
    j["inputs"] = files(inputs);
    j["outputs"] = files(outputs);
    nlohmann::ordered_json stages = nlohmann::ordered_json::array();
    for (const auto& [name, secs] : stage_seconds)
        stages.push_back({{"stage", name}, {"seconds", secs}});
    j["stages"] = stages;
    out << j.dump(2) << '\n';
}

} // namespace elens
