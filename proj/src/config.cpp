#include "aggiv/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "aggiv/dataset.hpp"
#include "aggiv/errors.hpp"

namespace aggiv {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

std::vector<std::string> split_top_level(const std::string& body) {
  // Splits "x, y, [a, b]" on commas that are not inside brackets.
  std::vector<std::string> parts;
  int depth = 0;
  std::string current;
  for (const char ch : body) {
    if (ch == '[') ++depth;
    if (ch == ']') --depth;
    if (ch == ',' && depth == 0) {
      parts.push_back(current);
      current.clear();
    } else {
      current += ch;
    }
  }
  parts.push_back(current);
  return parts;
}

std::vector<double> parse_number_array(const std::string& key, const std::string& inner) {
  std::vector<double> values;
  if (trim(inner).empty()) return values;
  for (const auto& part : split_top_level(inner)) {
    try {
      values.push_back(parse_double(part));
    } catch (const ConfigError&) {
      throw ConfigError("config: key '" + key + "': bad array element '" + trim(part) + "'");
    }
  }
  return values;
}

Config::Value parse_value(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v.empty()) throw ConfigError("config: key '" + key + "' has no value");
  if (v.front() == '[') {
    if (v.back() != ']') throw ConfigError("config: key '" + key + "': unterminated array");
    const std::string inner = trim(v.substr(1, v.size() - 2));
    if (!inner.empty() && inner.front() == '[') {
      // Matrix: a list of equally sized rows.
      std::vector<std::vector<double>> rows;
      for (const auto& part : split_top_level(inner)) {
        const std::string row = trim(part);
        if (row.size() < 2 || row.front() != '[' || row.back() != ']') {
          throw ConfigError("config: key '" + key + "': malformed matrix row '" + row + "'");
        }
        rows.push_back(parse_number_array(key, row.substr(1, row.size() - 2)));
        if (rows.back().size() != rows.front().size()) {
          throw ConfigError("config: key '" + key + "': matrix rows differ in length");
        }
      }
      return rows;
    }
    return parse_number_array(key, inner);
  }
  try {
    return parse_double(v);
  } catch (const ConfigError&) {
    return v;  // bare string value, e.g. acid.kind = gaussian
  }
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw ConfigError("config: line " + std::to_string(line_no) + ": empty key");
    if (config.values_.count(key)) throw ConfigError("config: duplicate key '" + key + "'");
    config.values_.emplace(key, parse_value(key, body.substr(eq + 1)));
    config.order_.push_back(key);
  }
  return config;
}

Config Config::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

const Config::Value& Config::at(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("config: missing key '" + key + "'");
  return it->second;
}

double Config::number(const std::string& key) const {
  const auto& v = at(key);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw ConfigError("config: key '" + key + "' is not a number");
}

double Config::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::int64_t Config::integer(const std::string& key) const {
  const double d = number(key);
  const double r = std::nearbyint(d);
  if (d != r) throw ConfigError("config: key '" + key + "' is not an integer");
  return static_cast<std::int64_t>(r);
}

std::int64_t Config::integer_or(const std::string& key, std::int64_t fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::string Config::text(const std::string& key) const {
  const auto& v = at(key);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw ConfigError("config: key '" + key + "' is not a string");
}

std::string Config::text_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

Eigen::VectorXd Config::vector(const std::string& key) const {
  const auto& v = at(key);
  if (const auto* a = std::get_if<std::vector<double>>(&v)) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(a->size()));
    for (std::size_t i = 0; i < a->size(); ++i) out(static_cast<Eigen::Index>(i)) = (*a)[i];
    return out;
  }
  if (const auto* d = std::get_if<double>(&v)) {
    // A scalar is accepted as a length-one vector.
    Eigen::VectorXd out(1);
    out(0) = *d;
    return out;
  }
  throw ConfigError("config: key '" + key + "' is not a numeric array");
}

Eigen::MatrixXd Config::matrix(const std::string& key) const {
  const auto& v = at(key);
  if (const auto* rows = std::get_if<std::vector<std::vector<double>>>(&v)) {
    const Eigen::Index r = static_cast<Eigen::Index>(rows->size());
    const Eigen::Index c = r > 0 ? static_cast<Eigen::Index>(rows->front().size()) : 0;
    Eigen::MatrixXd out(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < c; ++j) {
        out(i, j) = (*rows)[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
    }
    return out;
  }
  if (std::get_if<std::vector<double>>(&v) || std::get_if<double>(&v)) {
    // A flat array (or scalar) is accepted as a single-row matrix.
    const Eigen::VectorXd row = vector(key);
    Eigen::MatrixXd out(1, row.size());
    out.row(0) = row.transpose();
    return out;
  }
  throw ConfigError("config: key '" + key + "' is not a numeric matrix");
}

}  // namespace aggiv
