#ifndef ELENS_IO_HPP
#define ELENS_IO_HPP

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace elens {

// Fills a sibling temp file and renames it into place, so readers never see a
// partial file. Throws ConfigError on filesystem failures.
void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& fill);

// FNV-1a of the file bytes, as "0x" + 16 hex digits. Throws ConfigError when
// the file cannot be read.
std::string file_digest(const std::filesystem::path& path);

// Reproducibility record written next to a subcommand's outputs, last.
// Timings vary between runs; everything else is deterministic.
struct RunManifest {
    std::string tool = "entitylens";
    std::string version;
    std::string command;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> params;
    std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
    std::vector<std::pair<std::string, std::string>> outputs; // path, digest
    std::vector<std::pair<std::string, double>> stage_seconds;

    void add_input(const std::filesystem::path& path);
    void add_output(const std::filesystem::path& path);
    void write_json(std::ostream& out) const;
};

} // namespace elens

#endif
