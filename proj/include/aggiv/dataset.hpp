#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace aggiv {

/// A named-column matrix of draws. Observational datasets carry the columns
/// i1..im, u, a1..ak, a, y; interventional component datasets carry a1..ak
/// and record the intervention value that produced them.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> labels, Eigen::MatrixXd values);

  const std::vector<std::string>& labels() const { return labels_; }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }

  bool has_column(const std::string& label) const;
  /// Index of a labelled column; throws ValidationError for unknown labels.
  Eigen::Index index_of(const std::string& label) const;
  Eigen::VectorXd column(const std::string& label) const;

  /// Intervention value for interventional datasets; empty otherwise.
  std::optional<double> intervention_value;

 private:
  std::vector<std::string> labels_;
  Eigen::MatrixXd values_;
};

/// Shortest decimal string that round-trips to exactly the same double.
std::string format_double(double x);

/// Parses a decimal string produced by format_double (or any strtod-style
/// number); throws ConfigError on trailing garbage or empty input.
double parse_double(const std::string& text);

/// CSV layout: one header row of labels, then one row per draw. Numbers are
/// written with format_double so that read_csv(write_csv(d)) reproduces the
/// exact same values. Interventional datasets carry a leading metadata row
/// "# intervention_value = <a>".
void write_csv(const Dataset& data, std::ostream& out);
void write_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_csv(std::istream& in);
Dataset read_csv(const std::filesystem::path& path);

/// The whole CSV document as a string (useful for byte-level comparisons).
std::string to_csv_string(const Dataset& data);

}  // namespace aggiv
