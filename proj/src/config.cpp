#include "baw/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace baw {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

run_config run_config::from_string(const std::string& text, const std::string& origin) {
    run_config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        if (auto pos = line.find(';'); pos != std::string::npos) line.erase(pos);
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3)
                throw parse_error("malformed section header", origin, lineno);
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw parse_error("expected `key = value`", origin, lineno);
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw parse_error("empty key", origin, lineno);
        auto [it, inserted] = cfg.sections_[section].insert({key, {value, lineno}});
        if (!inserted)
            throw parse_error("duplicate key " + section + "." + key, origin, lineno);
    }
    return cfg;
}

run_config run_config::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open config", path, 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str(), path.string());
}

const run_config::entry* run_config::find(const std::string& section, const std::string& key,
                                          bool consume) const {
    const auto sit = sections_.find(section);
    if (sit == sections_.end()) return nullptr;
    const auto kit = sit->second.find(key);
    if (kit == sit->second.end()) return nullptr;
    if (consume) consumed_.insert({section, key});
    return &kit->second;
}

bool run_config::has(const std::string& section, const std::string& key) const {
    return find(section, key, false) != nullptr;
}

bool run_config::has_section(const std::string& section) const {
    return sections_.count(section) != 0;
}

std::string run_config::get_string(const std::string& section, const std::string& key) const {
    const entry* e = find(section, key, true);
    if (!e) throw parse_error("missing key " + section + "." + key, origin_, 0);
    return e->value;
}

std::string run_config::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
    const entry* e = find(section, key, true);
    return e ? e->value : fallback;
}

double run_config::get_double(const std::string& section, const std::string& key) const {
    const entry* e = find(section, key, true);
    if (!e) throw parse_error("missing key " + section + "." + key, origin_, 0);
    char* end = nullptr;
    const double v = std::strtod(e->value.c_str(), &end);
    if (end == e->value.c_str() || *end != '\0')
        throw parse_error("bad number for " + section + "." + key, origin_, e->line);
    return v;
}

double run_config::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

long run_config::get_int(const std::string& section, const std::string& key) const {
    const double v = get_double(section, key);
    const long n = static_cast<long>(v);
    if (static_cast<double>(n) != v)
        throw parse_error(section + "." + key + " must be an integer",
                          origin_, find(section, key, false)->line);
    return n;
}

long run_config::get_int(const std::string& section, const std::string& key, long fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
}

bool run_config::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
    const entry* e = find(section, key, true);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no") return false;
    throw parse_error("bad boolean for " + section + "." + key, origin_, e->line);
}

std::vector<double> run_config::get_numbers(const std::string& section,
                                            const std::string& key) const {
    const entry* e = find(section, key, true);
    if (!e) throw parse_error("missing key " + section + "." + key, origin_, 0);
    std::istringstream ls(e->value);
    std::vector<double> out;
    double v;
    while (ls >> v) out.push_back(v);
    if (!ls.eof())
        throw parse_error("bad number list for " + section + "." + key, origin_, e->line);
    return out;
}

void run_config::require_consumed() const {
    std::string leftovers;
    for (const auto& [section, keys] : sections_)
        for (const auto& [key, e] : keys)
            if (!consumed_.count({section, key}))
                leftovers += (leftovers.empty() ? "" : ", ") +
                             (section.empty() ? key : section + "." + key);
    if (!leftovers.empty())
        throw parse_error("unknown config keys: " + leftovers, origin_, 0);
}

}  // namespace baw
