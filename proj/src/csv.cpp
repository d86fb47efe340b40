#include "baw/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <system_error>

#include "baw/errors.hpp"

namespace baw {

std::string format_number(double v) {
    char buf[64];
    // integers stay in fixed notation (exact below 2^53), everything else
    // gets the shortest representation that round-trips exactly
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        std::snprintf(buf, sizeof buf, "%.0f", v);
        return buf;
    }
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto dir = path.parent_path().empty() ? "." : path.parent_path();
    const auto tmp = dir / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw error("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw error("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw error("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

void write_csv(const std::filesystem::path& path, const csv_table& table) {
    std::string text;
    for (size_t i = 0; i < table.header.size(); ++i) {
        if (i) text += ',';
        text += table.header[i];
    }
    text += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw argument_error("write_csv: row width differs from header");
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) text += ',';
            text += format_number(row[i]);
        }
        text += '\n';
    }
    write_text_atomic(path, text);
}

}  // namespace baw
