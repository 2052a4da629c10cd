#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace aggiv {

/// Line-oriented "key = value" configuration format.
///
///   # comment
///   k = 2
///   alpha = [1, 1]            # numeric array
///   delta = [[1, 1], [0, 2]]  # numeric matrix, one inner array per row
///   acid.kind = gaussian      # bare string
///
/// Keys may be dotted to group related settings; the parser treats the full
/// dotted name as the key. Duplicate keys are rejected.
class Config {
 public:
  using Value = std::variant<double, std::string, std::vector<double>,
                             std::vector<std::vector<double>>>;

  static Config parse(const std::string& text);
  static Config parse_file(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  /// Keys in first-seen order.
  const std::vector<std::string>& keys() const { return order_; }

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key) const;
  std::int64_t integer_or(const std::string& key, std::int64_t fallback) const;
  std::string text(const std::string& key) const;
  std::string text_or(const std::string& key, const std::string& fallback) const;
  Eigen::VectorXd vector(const std::string& key) const;
  Eigen::MatrixXd matrix(const std::string& key) const;

 private:
  const Value& at(const std::string& key) const;
  std::map<std::string, Value> values_;
  std::vector<std::string> order_;
};

}  // namespace aggiv
