#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace nvm {

using Json = nlohmann::json;

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Shortest round-trip decimal representation (std::to_chars).
std::string format_double(double v);

// Minimal CSV table with a fixed header; numeric cells use format_double,
// so emitted files are byte-stable across runs and platforms.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> cells);
    std::string to_string() const;
    void write(const std::string& path) const;
    size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace nvm
