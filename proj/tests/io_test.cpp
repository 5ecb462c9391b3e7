#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "elens/digest.hpp"
#include "elens/errors.hpp"
#include "elens/io.hpp"
#include "elens/rng.hpp"

using namespace elens;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("elens-io-test-" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("atomic_write leaves no temp files and replaces content whole") {
    TempDir tmp;
    fs::path target = tmp.path / "out.csv";

    atomic_write(target, [](std::ostream& os) { os << "a,b\n1,2\n"; });
    {
        std::ifstream in(target);
        std::stringstream ss;
        ss << in.rdbuf();
        CHECK(ss.str() == "a,b\n1,2\n");
    }
    atomic_write(target, [](std::ostream& os) { os << "new\n"; });
    {
        std::ifstream in(target);
        std::stringstream ss;
        ss << in.rdbuf();
        CHECK(ss.str() == "new\n");
    }
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(tmp.path)) ++entries;
    CHECK(entries == 1); // no stray temp siblings

    // missing parents are created on the way
    fs::path nested = tmp.path / "no" / "such" / "dir" / "f";
    atomic_write(nested, [](std::ostream& os) { os << "x"; });
    CHECK(fs::exists(nested));

    // a file squatting on the parent path is a genuine failure
    CHECK_THROWS_AS(atomic_write(target / "child", [](std::ostream&) {}), ConfigError);
}

TEST_CASE("file digests match the in-memory hash") {
    TempDir tmp;
    fs::path f = tmp.path / "data.bin";
    std::string payload = "entity lens digest probe";
    atomic_write(f, [&](std::ostream& os) { os << payload; });

    char expect[32];
    std::snprintf(expect, sizeof expect, "0x%016llx",
                  static_cast<unsigned long long>(fnv1a(payload)));
    CHECK(file_digest(f) == expect);
    CHECK_THROWS_AS(file_digest(tmp.path / "missing"), ConfigError);
}

TEST_CASE("run manifests record inputs, outputs, and parameters") {
    TempDir tmp;
    fs::path in_file = tmp.path / "in.txt";
    fs::path out_file = tmp.path / "out.txt";
    atomic_write(in_file, [](std::ostream& os) { os << "in"; });
    atomic_write(out_file, [](std::ostream& os) { os << "out"; });

    RunManifest m;
    m.version = "test";
    m.command = "probe";
    m.seed = 42;
    m.params["alpha"] = "0.5";
    m.add_input(in_file);
    m.add_output(out_file);
    m.stage_seconds.emplace_back("load", 0.25);

    std::ostringstream os;
    m.write_json(os);
    auto j = nlohmann::json::parse(os.str());
    CHECK(j.at("tool") == "entitylens");
    CHECK(j.at("command") == "probe");
    CHECK(j.at("seed").get<std::uint64_t>() == 42);
    CHECK(j.at("params").at("alpha") == "0.5");
    REQUIRE(j.at("inputs").size() == 1);
    CHECK(j.at("inputs")[0].at("digest") == file_digest(in_file));
    REQUIRE(j.at("outputs").size() == 1);
    CHECK(j.at("outputs")[0].at("path").get<std::string>().find("out.txt") != std::string::npos);
}

TEST_CASE("seed derivation separates stages without losing determinism") {
    CHECK(derive_seed(7, "split") == derive_seed(7, "split"));
    CHECK(derive_seed(7, "split") != derive_seed(7, "tune"));
    CHECK(derive_seed(7, "split") != derive_seed(8, "split"));

    std::mt19937_64 rng(5);
    for (int n : {1, 2, 3, 10, 1000}) {
        auto v = uniform_index(rng, std::uint64_t(n));
        CHECK(v < std::uint64_t(n));
    }
    for (int i = 0; i < 100; ++i) {
        double u = uniform01(rng);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}
