#pragma once

#include <map>
#include <string>
#include <vector>

namespace jamdet {

// Flat `key=value` text files: sidecar metadata, dataset manifests and run
// configs. Blank lines and lines starting with '#' are ignored; whitespace
// around keys and values is trimmed. Keys are kept sorted on write.
class KeyValueFile {
public:
    KeyValueFile() = default;

    static KeyValueFile parse(const std::string& text, const std::string& source = "<string>");
    static KeyValueFile load(const std::string& path);
    void save(const std::string& path) const;
    std::string to_string() const;

    bool contains(const std::string& key) const { return entries_.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { entries_[key] = value; }
    void set(const std::string& key, double value);
    void set(const std::string& key, long long value);
    void set(const std::string& key, int value) { set(key, static_cast<long long>(value)); }
    void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

    // Typed getters throw ParseError naming the key when missing or malformed.
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int_or(const std::string& key, long long fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;
    std::vector<long long> get_int_list_or(const std::string& key, std::vector<long long> fallback) const;
    std::vector<std::string> get_list_or(const std::string& key, std::vector<std::string> fallback) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }
    const std::string& source() const { return source_; }

private:
    std::map<std::string, std::string> entries_;
    std::string source_ = "<memory>";
};

// `v` printed with 17 significant digits; parses back bit-identically.
std::string format_double(double v);

}  // namespace jamdet
