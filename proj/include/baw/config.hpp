#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "baw/errors.hpp"

namespace baw {

// Strict key-value run configuration: "[section]" headers, "key = value"
// lines, '#'/';' comments. Every key must be consumed by the command that
// runs the config; require_consumed() rejects leftovers so typos never
// pass silently.
class run_config {
public:
    static run_config from_file(const std::filesystem::path& path);
    static run_config from_string(const std::string& text,
                                  const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;
    bool has_section(const std::string& section) const;

    // Typed getters; the non-optional forms throw parse_error when the key
    // is absent or malformed. All getters mark the key consumed.
    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long get_int(const std::string& section, const std::string& key) const;
    long get_int(const std::string& section, const std::string& key, long fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    // Whitespace-separated number list.
    std::vector<double> get_numbers(const std::string& section, const std::string& key) const;

    // Throws parse_error listing every key no getter has touched.
    void require_consumed() const;

    const std::filesystem::path& origin() const { return origin_; }

private:
    struct entry {
        std::string value;
        long line = 0;
    };
    std::map<std::string, std::map<std::string, entry>> sections_;
    std::filesystem::path origin_;
    mutable std::set<std::pair<std::string, std::string>> consumed_;

    const entry* find(const std::string& section, const std::string& key, bool consume) const;
};

}  // namespace baw
