#include "clusterpool/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <sstream>

namespace clusterpool {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Boost's INI reader only knows ';' comments; '#' lines are dropped here first.
std::string strip_hash_comments(std::istream& in) {
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (!t.empty() && t[0] == '#') {
      out << '\n';
      continue;
    }
    out << line << '\n';
  }
  return out.str();
}

Config from_stream(std::istream& in) {
  std::istringstream cleaned(strip_hash_comments(in));
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(cleaned, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config parse error at line " + std::to_string(e.line()) + ": " + e.message());
  }
  Config cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("key '" + section + "' outside any [section]");
    for (const auto& [key, value] : body) cfg.set(section, key, trim(value.data()));
  }
  return cfg;
}

}  // namespace

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  return from_stream(in);
}

Config Config::parse(const std::string& text) {
  std::istringstream in(text);
  return from_stream(in);
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  values_[section][key] = value;
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto it = values_.find(section);
  return it != values_.end() && it->second.count(key) > 0;
}

std::optional<std::string> Config::take(const std::string& section, const std::string& key) {
  consumed_.insert({section, key});
  auto it = values_.find(section);
  if (it == values_.end()) return std::nullopt;
  auto kv = it->second.find(key);
  if (kv == it->second.end()) return std::nullopt;
  return kv->second;
}

std::string Config::get_string(const std::string& section, const std::string& key, const std::string& def) {
  auto v = take(section, key).value_or(def);
  resolved_[section][key] = v;
  return v;
}

double Config::get_double(const std::string& section, const std::string& key, double def) {
  const auto raw = take(section, key);
  double v = def;
  if (raw) {
    const auto* b = raw->data();
    const auto* e = b + raw->size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) throw ConfigError("[" + section + "] " + key + ": not a number: " + *raw);
  }
  std::ostringstream os;
  os.precision(17);
  os << v;
  resolved_[section][key] = os.str();
  return v;
}

std::int64_t Config::get_int(const std::string& section, const std::string& key, std::int64_t def) {
  const auto raw = take(section, key);
  std::int64_t v = def;
  if (raw) {
    const auto* b = raw->data();
    const auto* e = b + raw->size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) throw ConfigError("[" + section + "] " + key + ": not an integer: " + *raw);
  }
  resolved_[section][key] = std::to_string(v);
  return v;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool def) {
  const auto raw = take(section, key);
  bool v = def;
  if (raw) {
    if (*raw == "true" || *raw == "1" || *raw == "yes") v = true;
    else if (*raw == "false" || *raw == "0" || *raw == "no") v = false;
    else throw ConfigError("[" + section + "] " + key + ": not a boolean: " + *raw);
  }
  resolved_[section][key] = v ? "true" : "false";
  return v;
}

std::vector<std::string> Config::get_list(const std::string& section, const std::string& key,
                                          const std::vector<std::string>& def) {
  const auto raw = take(section, key);
  std::vector<std::string> out;
  if (!raw) {
    out = def;
  } else {
    std::string item;
    std::istringstream in(*raw);
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
  }
  std::string joined;
  for (std::size_t i = 0; i < out.size(); ++i) joined += (i ? ", " : "") + out[i];
  resolved_[section][key] = joined;
  return out;
}

void Config::require_all_consumed() const {
  std::string unknown;
  for (const auto& [section, kv] : values_)
    for (const auto& [key, value] : kv)
      if (!consumed_.count({section, key})) unknown += (unknown.empty() ? "" : ", ") + ("[" + section + "] " + key);
  if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

std::string Config::dump() const {
  std::ostringstream os;
  for (const auto& [section, kv] : resolved_) {
    os << '[' << section << "]\n";
    for (const auto& [key, value] : kv) os << key << " = " << value << '\n';
  }
  return os.str();
}

}  // namespace clusterpool
