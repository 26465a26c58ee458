#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace starqb {

// Run provenance written as '#' comment lines atop every CSV.  Comment lines
// are the only place a timestamp may appear; data bodies are deterministic.
struct RunManifest {
    std::string subcommand;
    std::vector<std::pair<std::string, std::string>> resolved;  // key, value
    std::string software_version;
    std::string timestamp;  // ISO-8601, comment-only
    bool deterministic = true;
};

// Shortest round-trippable decimal representation, stable across runs.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const RunManifest& manifest,
              const std::vector<std::string>& columns)
        : out_(path) {
        if (!out_) throw std::runtime_error("cannot open output file: " + path);
        out_ << "# starqb " << manifest.software_version << " :: " << manifest.subcommand << "\n";
        for (const auto& [k, v] : manifest.resolved) out_ << "# " << k << ": " << v << "\n";
        if (!manifest.timestamp.empty()) out_ << "# generated: " << manifest.timestamp << "\n";
        out_ << "# deterministic: " << (manifest.deterministic ? "true" : "false") << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
        ncols_ = columns.size();
    }

    void row(const std::vector<double>& values) {
        if (values.size() != ncols_) throw std::logic_error("CsvWriter: column count mismatch");
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << format_number(values[i]) << (i + 1 < values.size() ? "," : "\n");
    }

  private:
    std::ofstream out_;
    std::size_t ncols_ = 0;
};

}  // namespace starqb
