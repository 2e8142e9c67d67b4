#include "tubeflow/config.hpp"

#include "tubeflow/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace tubeflow {

namespace {

std::string where(const std::string& s, const std::string& k) { return "[" + s + "] " + k; }

}  // namespace

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    return parse(in, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

Config Config::parse(std::istream& in, const std::filesystem::path& base_dir) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }
    Config c;
    c.base_ = base_dir;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("key '" + section + "' outside any section");
        auto& sec = c.data_[section];
        for (const auto& [key, value] : body) sec[key] = value.get_value<std::string>();
    }
    return c;
}

bool Config::has(const std::string& section, const std::string& key) const {
    auto it = data_.find(section);
    return it != data_.end() && it->second.count(key) != 0;
}

std::string Config::str(const std::string& section, const std::string& key) const {
    if (!has(section, key)) throw ConfigError("missing " + where(section, key));
    return data_.at(section).at(key);
}

std::string Config::str(const std::string& section, const std::string& key, const std::string& dflt) const {
    return has(section, key) ? data_.at(section).at(key) : dflt;
}

double Config::num(const std::string& section, const std::string& key) const {
    std::string s = str(section, key);
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where(section, key) + " is not a number: '" + s + "'");
    }
}

double Config::num(const std::string& section, const std::string& key, double dflt) const {
    return has(section, key) ? num(section, key) : dflt;
}

long Config::integer(const std::string& section, const std::string& key, long dflt) const {
    if (!has(section, key)) return dflt;
    double v = num(section, key);
    if (v != static_cast<double>(static_cast<long>(v))) throw ConfigError(where(section, key) + " must be an integer");
    return static_cast<long>(v);
}

uint64_t Config::seed(const std::string& section, const std::string& key) const {
    std::string s = str(section, key);
    try {
        size_t used = 0;
        unsigned long long v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where(section, key) + " must be a non-negative integer seed");
    }
}

bool Config::flag(const std::string& section, const std::string& key, bool dflt) const {
    if (!has(section, key)) return dflt;
    std::string s = str(section, key);
    if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
    if (s == "false" || s == "no" || s == "0" || s == "off") return false;
    throw ConfigError(where(section, key) + " must be true or false");
}

std::vector<double> Config::list(const std::string& section, const std::string& key) const {
    std::string s = str(section, key);
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream ls(s);
    std::vector<double> out;
    std::string tok;
    while (ls >> tok) {
        try {
            size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError(where(section, key) + " has a non-numeric entry '" + tok + "'");
        }
    }
    if (out.empty()) throw ConfigError(where(section, key) + " is empty");
    return out;
}

Vec Config::vec(const std::string& section, const std::string& key) const {
    std::vector<double> v = list(section, key);
    return Eigen::Map<Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Params Config::params(const std::string& section, const std::vector<std::string>& skip) const {
    Params p;
    auto it = data_.find(section);
    if (it == data_.end()) return p;
    for (const auto& [k, v] : it->second) {
        if (std::find(skip.begin(), skip.end(), k) != skip.end()) continue;
        if (k == "path") p.set(k, resolve(v).string());
        else p.set(k, v);
    }
    return p;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    data_[section][key] = value;
}

void Config::only_keys(const std::string& section, const std::vector<std::string>& allowed) const {
    auto it = data_.find(section);
    if (it == data_.end()) return;
    for (const auto& kv : it->second)
        if (std::find(allowed.begin(), allowed.end(), kv.first) == allowed.end())
            throw ConfigError("unknown key " + where(section, kv.first));
}

std::filesystem::path Config::resolve(const std::string& p) const {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_ / path;
}

}  // namespace tubeflow
