#pragma once

#include <map>
#include <string>
#include <vector>

namespace pedgnn {

// Flat key = value configuration with dotted keys. Lines starting with '#'
// are comments. CLI overrides ("key=value") win over file values. Consumers
// declare the allowed key set; unknown keys are a configuration error.
class KvConfig {
public:
    KvConfig() = default;

    static KvConfig from_file(const std::string& path);
    static KvConfig from_string(const std::string& text);

    void apply_override(const std::string& assignment); // "key=value"

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Comma-separated lists.
    std::vector<std::string> get_list(const std::string& key) const;
    std::vector<int> get_int_list(const std::string& key,
                                  const std::vector<int>& fallback) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const;

    // Throws listing every key not in `allowed`.
    void require_known_keys(const std::vector<std::string>& allowed) const;

    std::string echo() const; // re-parseable key = value dump, sorted

private:
    std::map<std::string, std::string> values_;
};

} // namespace pedgnn
