#pragma once

#include <map>
#include <string>
#include <vector>

namespace sdg {

/// Flat key=value configuration text: one `key = value` pair per line, dotted
/// keys as sections (`grid.radius`), `#` comments, duplicate keys rejected.
class Config {
  public:
    Config() = default;

    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& key) const { return kv_.count(key) != 0; }
    std::string get(const std::string& key) const;  // throws InvalidInput if absent
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    double get_double(const std::string& key) const;
    long get_long(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    /// Comma-separated list of doubles.
    std::vector<double> get_doubles(const std::string& key) const;

    void set(const std::string& key, const std::string& value);
    void set_double(const std::string& key, double value);
    void set_long(const std::string& key, long value);

    /// Keys in a section ("grid" matches "grid.*").
    std::vector<std::string> section_keys(const std::string& section) const;
    const std::map<std::string, std::string>& entries() const { return kv_; }

    /// Serialization sorted by key; parses back to an equal Config.
    std::string serialize() const;
    void write_file(const std::string& path) const;

  private:
    std::map<std::string, std::string> kv_;
};

}  // namespace sdg
