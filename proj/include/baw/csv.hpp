#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace baw {

// Shortest round-trip decimal representation (%.17g trimmed); identical
// input always renders identical bytes, keeping file outputs deterministic.
std::string format_number(double v);

struct csv_table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

// Atomic writes: the content lands in a temp file in the target directory
// and is renamed over the destination.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
void write_csv(const std::filesystem::path& path, const csv_table& table);

}  // namespace baw
