#include "jamdet/kv.hpp"

#include "jamdet/error.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace jamdet {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& source) {
    KeyValueFile kv;
    kv.source_ = source;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ParseError(source, lineno, "expected key=value");
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) throw ParseError(source, lineno, "empty key");
        kv.entries_[key] = trim(t.substr(eq + 1));
    }
    return kv;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

void KeyValueFile::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << to_string();
    if (!out) throw IoError(path, "write failed");
}

std::string KeyValueFile::to_string() const {
    std::string s;
    for (const auto& [k, v] : entries_) s += k + "=" + v + "\n";
    return s;
}

void KeyValueFile::set(const std::string& key, double value) { entries_[key] = format_double(value); }

void KeyValueFile::set(const std::string& key, long long value) { entries_[key] = std::to_string(value); }

const std::string& KeyValueFile::get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ParseError(source_, 0, "missing key '" + key + "'");
    return it->second;
}

std::string KeyValueFile::get_or(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double KeyValueFile::get_double(const std::string& key) const {
    const std::string& v = get(key);
    char* end = nullptr;
    errno = 0;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || errno == ERANGE)
        throw ParseError(source_, 0, "key '" + key + "': not a number: '" + v + "'");
    return d;
}

double KeyValueFile::get_double_or(const std::string& key, double fallback) const {
    return contains(key) ? get_double(key) : fallback;
}

long long KeyValueFile::get_int(const std::string& key) const {
    const std::string& v = get(key);
    char* end = nullptr;
    errno = 0;
    const long long i = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || *end != '\0' || errno == ERANGE)
        throw ParseError(source_, 0, "key '" + key + "': not an integer: '" + v + "'");
    return i;
}

long long KeyValueFile::get_int_or(const std::string& key, long long fallback) const {
    return contains(key) ? get_int(key) : fallback;
}

bool KeyValueFile::get_bool_or(const std::string& key, bool fallback) const {
    if (!contains(key)) return fallback;
    const std::string& v = get(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ParseError(source_, 0, "key '" + key + "': not a boolean: '" + v + "'");
}

std::vector<long long> KeyValueFile::get_int_list_or(const std::string& key, std::vector<long long> fallback) const {
    if (!contains(key)) return fallback;
    std::vector<long long> out;
    for (const auto& item : split_list(get(key))) {
        char* end = nullptr;
        const long long i = std::strtoll(item.c_str(), &end, 10);
        if (*end != '\0') throw ParseError(source_, 0, "key '" + key + "': not an integer: '" + item + "'");
        out.push_back(i);
    }
    return out;
}

std::vector<std::string> KeyValueFile::get_list_or(const std::string& key, std::vector<std::string> fallback) const {
    return contains(key) ? split_list(get(key)) : fallback;
}

}  // namespace jamdet
