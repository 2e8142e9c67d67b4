#pragma once

#include "tubeflow/potentials.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace tubeflow {

// INI-style experiment config: "[section]" headers and "key = value" lines,
// comments start with ';' or '#'. Relative paths resolve against the
// directory holding the config file.
class Config {
public:
    static Config load(const std::filesystem::path& path);
    static Config parse(std::istream& in, const std::filesystem::path& base_dir = ".");

    bool has(const std::string& section, const std::string& key) const;
    bool has_section(const std::string& section) const { return data_.count(section) != 0; }
    std::string str(const std::string& section, const std::string& key) const;  // required
    std::string str(const std::string& section, const std::string& key, const std::string& dflt) const;
    double num(const std::string& section, const std::string& key) const;
    double num(const std::string& section, const std::string& key, double dflt) const;
    long integer(const std::string& section, const std::string& key, long dflt) const;
    uint64_t seed(const std::string& section, const std::string& key) const;
    bool flag(const std::string& section, const std::string& key, bool dflt) const;
    // Numbers separated by spaces or commas.
    std::vector<double> list(const std::string& section, const std::string& key) const;
    Vec vec(const std::string& section, const std::string& key) const;
    // Every key of a section except those listed, as catalog parameters.
    Params params(const std::string& section, const std::vector<std::string>& skip = {}) const;
    // ConfigError when a section holds a key outside the allowed set.
    void only_keys(const std::string& section, const std::vector<std::string>& allowed) const;
    // Overrides or adds a key (used to redirect outputs).
    void set(const std::string& section, const std::string& key, const std::string& value);

    std::filesystem::path resolve(const std::string& p) const;
    const std::filesystem::path& base_dir() const { return base_; }

private:
    std::map<std::string, std::map<std::string, std::string>> data_;
    std::filesystem::path base_;
};

}  // namespace tubeflow
