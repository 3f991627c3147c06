#include "bb/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bb/errors.hpp"

namespace bb {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream in(s);
    std::string part;
    while (std::getline(in, part, ',')) {
        part = trim(part);
        if (!part.empty()) parts.push_back(part);
    }
    return parts;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_text(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (cfg.entries_.count(key))
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key +
                              "' (first at line " + std::to_string(cfg.entries_[key].line) +
                              ")");
        cfg.entries_[key] = {value, lineno};
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    entries_[key] = {value, 0};
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

const std::string& KeyValueConfig::raw(const std::string& key) const {
    return entries_.at(key).value;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
    return has(key) ? raw(key) : fallback;
}

long KeyValueConfig::get_long(const std::string& key, long fallback) const {
    if (!has(key)) return fallback;
    try {
        return std::stol(raw(key));
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': not an integer: " + raw(key));
    }
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
    return static_cast<int>(get_long(key, fallback));
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    try {
        return std::stod(raw(key));
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': not a number: " + raw(key));
    }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    std::string v = raw(key);
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("key '" + key + "': not a boolean: " + raw(key));
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    try {
        return std::stoull(raw(key));
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': not an unsigned integer: " + raw(key));
    }
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key,
                                                const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    for (const auto& part : split_list(raw(key))) {
        try {
            out.push_back(std::stod(part));
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': bad list element: " + part);
        }
    }
    return out;
}

std::vector<int> KeyValueConfig::get_ints(const std::string& key,
                                          const std::vector<int>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<int> out;
    for (const auto& part : split_list(raw(key))) {
        try {
            out.push_back(std::stoi(part));
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': bad list element: " + part);
        }
    }
    return out;
}

std::vector<std::uint64_t> KeyValueConfig::get_u64s(
    const std::string& key, const std::vector<std::uint64_t>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<std::uint64_t> out;
    for (const auto& part : split_list(raw(key))) {
        try {
            out.push_back(std::stoull(part));
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': bad list element: " + part);
        }
    }
    return out;
}

std::vector<std::string> KeyValueConfig::unknown_keys(const std::set<std::string>& known) const {
    std::vector<std::string> out;
    for (const auto& [key, entry] : entries_)
        if (!known.count(key)) out.push_back(key);
    return out;
}

std::uint64_t KeyValueConfig::hash() const {
    std::uint64_t h = 1469598103934665603ull;
    auto feed = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        h ^= 0x1f;
        h *= 1099511628211ull;
    };
    for (const auto& [key, entry] : entries_) {
        feed(key);
        feed(entry.value);
    }
    return h;
}

}  // namespace bb
