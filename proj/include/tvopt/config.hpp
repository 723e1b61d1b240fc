#pragma once

// Flat key = value configuration with optional [section] headers and '#'
// comments. Section keys flatten to "section.key". No nesting, no quoting.

#include <map>
#include <string>

namespace tvopt {

struct ConfigFile {
    std::map<std::string, std::string> values;

    static ConfigFile parse_string(const std::string& text);
    static ConfigFile parse_file(const std::string& path);

    bool has(const std::string& key) const { return values.count(key) != 0; }
    std::string get(const std::string& key, const std::string& fallback = "") const;
    double get_num(const std::string& key, double fallback) const;
    long get_int(const std::string& key, long fallback) const;
};

}  // namespace tvopt
