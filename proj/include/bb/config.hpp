#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace bb {

/// Line-oriented `key = value` configuration text. Blank lines and lines
/// starting with '#' are ignored. Duplicate keys are an error. Command-line
/// overrides replace file values via set().
class KeyValueConfig {
public:
    static KeyValueConfig parse_text(const std::string& text);
    static KeyValueConfig parse_file(const std::string& path);

    void set(const std::string& key, const std::string& value);  // override wins
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    long get_long(const std::string& key, long fallback) const;
    int get_int(const std::string& key, int fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::vector<double> get_doubles(const std::string& key,
                                    const std::vector<double>& fallback) const;
    std::vector<int> get_ints(const std::string& key, const std::vector<int>& fallback) const;
    std::vector<std::uint64_t> get_u64s(const std::string& key,
                                        const std::vector<std::uint64_t>& fallback) const;

    /// Keys present in the config but never listed as known.
    std::vector<std::string> unknown_keys(const std::set<std::string>& known) const;

    /// FNV-1a hash over sorted key=value pairs, for provenance.
    std::uint64_t hash() const;

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::map<std::string, Entry> entries_;
    const std::string& raw(const std::string& key) const;
};

}  // namespace bb
