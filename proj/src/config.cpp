#include "sdg/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "sdg/errors.hpp"
#include "sdg/grid.hpp"  // format_double

namespace sdg {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw InvalidInput("config: key '" + key + "' has non-numeric value '" + v + "'");
    }
}

}  // namespace

Config Config::parse_string(const std::string& text) {
    Config c;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidInput("config: line " + std::to_string(lineno) + " has no '='");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw InvalidInput("config: line " + std::to_string(lineno) + " has an empty key");
        if (c.kv_.count(key))
            throw InvalidInput("config: duplicate key '" + key + "' at line " +
                               std::to_string(lineno));
        c.kv_[key] = value;
    }
    return c;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidInput("config: cannot open " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_string(buf.str());
}

std::string Config::get(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw InvalidInput("config: missing required key '" + key + "'");
    return it->second;
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : parse_double(key, it->second);
}

double Config::get_double(const std::string& key) const { return parse_double(key, get(key)); }

long Config::get_long(const std::string& key, long fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const double d = parse_double(key, it->second);
    const long l = static_cast<long>(d);
    if (static_cast<double>(l) != d)
        throw InvalidInput("config: key '" + key + "' must be an integer");
    return l;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw InvalidInput("config: key '" + key + "' must be true/false");
}

std::vector<double> Config::get_doubles(const std::string& key) const {
    const std::string v = get(key);
    std::vector<double> out;
    std::istringstream is(v);
    std::string item;
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(parse_double(key, item));
    }
    if (out.empty()) throw InvalidInput("config: key '" + key + "' holds no numbers");
    return out;
}

void Config::set(const std::string& key, const std::string& value) { kv_[key] = value; }
void Config::set_double(const std::string& key, double value) { kv_[key] = format_double(value); }
void Config::set_long(const std::string& key, long value) { kv_[key] = std::to_string(value); }

std::vector<std::string> Config::section_keys(const std::string& section) const {
    std::vector<std::string> out;
    const std::string prefix = section + ".";
    for (const auto& [k, _] : kv_)
        if (k.rfind(prefix, 0) == 0) out.push_back(k);
    return out;
}

std::string Config::serialize() const {
    std::ostringstream os;
    for (const auto& [k, v] : kv_) os << k << " = " << v << '\n';
    return os.str();
}

void Config::write_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw InvalidInput("config: cannot open " + path + " for writing");
    os << serialize();
}

}  // namespace sdg
