#include "aggiv/dataset.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "aggiv/errors.hpp"

namespace aggiv {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

Dataset::Dataset(std::vector<std::string> labels, Eigen::MatrixXd values)
    : labels_(std::move(labels)), values_(std::move(values)) {
  if (static_cast<Eigen::Index>(labels_.size()) != values_.cols()) {
    throw ValidationError("dataset: label count does not match column count");
  }
}

bool Dataset::has_column(const std::string& label) const {
  for (const auto& l : labels_) {
    if (l == label) return true;
  }
  return false;
}

Eigen::Index Dataset::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return static_cast<Eigen::Index>(i);
  }
  throw ValidationError("dataset: unknown column '" + label + "'");
}

Eigen::VectorXd Dataset::column(const std::string& label) const {
  return values_.col(index_of(label));
}

std::string format_double(double x) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

double parse_double(const std::string& text) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError("not a number: '" + text + "'");
  }
  return value;
}

void write_csv(const Dataset& data, std::ostream& out) {
  if (data.intervention_value) {
    out << "# intervention_value = " << format_double(*data.intervention_value) << "\n";
  }
  const auto& labels = data.labels();
  for (std::size_t c = 0; c < labels.size(); ++c) {
    if (c > 0) out << ",";
    out << labels[c];
  }
  out << "\n";
  const auto& v = data.values();
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      if (c > 0) out << ",";
      out << format_double(v(r, c));
    }
    out << "\n";
  }
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  write_csv(data, out);
  if (!out) throw ConfigError("failed while writing '" + path.string() + "'");
}

std::string to_csv_string(const Dataset& data) {
  std::ostringstream out;
  write_csv(data, out);
  return out.str();
}

Dataset read_csv(std::istream& in) {
  std::string line;
  std::optional<double> intervention;
  std::vector<std::string> labels;

  // Header: optional metadata comment rows, then the label row.
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const auto eq = t.find('=');
      if (eq != std::string::npos) {
        const std::string key = trim(t.substr(1, eq - 1));
        if (key == "intervention_value") intervention = parse_double(t.substr(eq + 1));
      }
      continue;
    }
    for (auto& field : split_csv_line(t)) {
      labels.push_back(trim(field));
      if (labels.back().empty()) throw ConfigError("csv: empty column label");
    }
    break;
  }
  if (labels.empty()) throw ConfigError("csv: missing header row");

  std::vector<double> cells;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto fields = split_csv_line(t);
    if (fields.size() != labels.size()) {
      throw ConfigError("csv: row " + std::to_string(rows + 1) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(labels.size()));
    }
    for (const auto& field : fields) cells.push_back(parse_double(field));
    ++rows;
  }

  Eigen::MatrixXd values(rows, static_cast<Eigen::Index>(labels.size()));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      values(r, c) = cells[static_cast<std::size_t>(r * values.cols() + c)];
    }
  }
  Dataset data(std::move(labels), std::move(values));
  data.intervention_value = intervention;
  return data;
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "' for reading");
  return read_csv(in);
}

}  // namespace aggiv
