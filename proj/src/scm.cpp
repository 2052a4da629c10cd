#include "aggiv/scm.hpp"

#include <cmath>
#include <sstream>

#include "aggiv/errors.hpp"
#include "aggiv/rng.hpp"

namespace aggiv {

namespace {

std::vector<std::string> observational_labels(Eigen::Index m, Eigen::Index k) {
  std::vector<std::string> labels;
  for (Eigen::Index l = 0; l < m; ++l) labels.push_back("i" + std::to_string(l + 1));
  labels.push_back("u");
  for (Eigen::Index j = 0; j < k; ++j) labels.push_back("a" + std::to_string(j + 1));
  labels.push_back("a");
  labels.push_back("y");
  return labels;
}

std::string format_vector(const Eigen::VectorXd& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_double(v(i));
  }
  return out + "]";
}

std::string format_matrix(const Eigen::MatrixXd& m) {
  std::string out = "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r > 0) out += ", ";
    out += format_vector(m.row(r).transpose());
  }
  return out + "]";
}

}  // namespace

bool AggregateIvScm::unit_variances() const {
  const auto is_one = [](double v) { return v == 1.0; };
  if (!is_one(var_u) || !is_one(var_y)) return false;
  for (Eigen::Index l = 0; l < var_i.size(); ++l) {
    if (!is_one(var_i(l))) return false;
  }
  for (Eigen::Index j = 0; j < var_a.size(); ++j) {
    if (!is_one(var_a(j))) return false;
  }
  return true;
}

AggregateIvScm make_unit_variance_scm(Eigen::VectorXd alpha, Eigen::VectorXd beta,
                                      Eigen::MatrixXd delta, Eigen::VectorXd gamma_a,
                                      double gamma_y) {
  AggregateIvScm scm;
  scm.var_i = Eigen::VectorXd::Ones(delta.rows());
  scm.var_a = Eigen::VectorXd::Ones(alpha.size());
  scm.alpha = std::move(alpha);
  scm.beta = std::move(beta);
  scm.delta = std::move(delta);
  scm.gamma_a = std::move(gamma_a);
  scm.gamma_y = gamma_y;
  return scm;
}

std::vector<std::string> validate_scm(const AggregateIvScm& scm) {
  std::vector<std::string> violations;
  const auto k = scm.k();
  const auto m = scm.m();
  if (k < 1) violations.push_back("alpha must have at least one component (k >= 1)");
  if (m < 1) violations.push_back("delta must have at least one instrument row (m >= 1)");

  const auto expect_length = [&](const char* name, Eigen::Index got, Eigen::Index want) {
    if (got != want) {
      violations.push_back(std::string(name) + " has length " + std::to_string(got) +
                           ", expected " + std::to_string(want));
    }
  };
  expect_length("beta", scm.beta.size(), k);
  expect_length("gamma_a", scm.gamma_a.size(), k);
  expect_length("var_a", scm.var_a.size(), k);
  expect_length("var_i", scm.var_i.size(), m);
  if (scm.delta.cols() != k) {
    violations.push_back("delta has " + std::to_string(scm.delta.cols()) +
                         " columns, expected k = " + std::to_string(k));
  }

  const auto expect_positive = [&](const char* name, double v) {
    if (!(v > 0.0)) violations.push_back(std::string(name) + " must be strictly positive");
  };
  expect_positive("var_u", scm.var_u);
  expect_positive("var_y", scm.var_y);
  for (Eigen::Index l = 0; l < scm.var_i.size(); ++l) {
    expect_positive(("var_i[" + std::to_string(l + 1) + "]").c_str(), scm.var_i(l));
  }
  for (Eigen::Index j = 0; j < scm.var_a.size(); ++j) {
    expect_positive(("var_a[" + std::to_string(j + 1) + "]").c_str(), scm.var_a(j));
  }

  bool all_zero = k >= 1;
  for (Eigen::Index j = 0; j < scm.alpha.size(); ++j) {
    if (scm.alpha(j) != 0.0) all_zero = false;
  }
  if (all_zero) violations.push_back("degenerate aggregate: every alpha(j) is zero");
  return violations;
}

void require_valid(const AggregateIvScm& scm) {
  const auto violations = validate_scm(scm);
  if (violations.empty()) return;
  std::string message = "invalid SCM:";
  for (const auto& v : violations) message += "\n  - " + v;
  throw ValidationError(message);
}

Eigen::Index PopulationMoments::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<Eigen::Index>(i);
  }
  throw ValidationError("population moments: unknown variable '" + label + "'");
}

double PopulationMoments::covariance(const std::string& x, const std::string& y) const {
  return cov(index_of(x), index_of(y));
}

double PopulationMoments::correlation(const std::string& x, const std::string& y) const {
  const double vx = variance(x);
  const double vy = variance(y);
  if (!(vx > 0.0) || !(vy > 0.0)) {
    throw ValidationError("correlation undefined: '" + x + "' or '" + y + "' has zero variance");
  }
  return covariance(x, y) / std::sqrt(vx * vy);
}

PopulationMoments population_moments(const AggregateIvScm& scm) {
  require_valid(scm);
  const auto k = scm.k();
  const auto m = scm.m();

  // Coefficients of the base variables (i1..im, u, a1..ak, y) on the
  // independent errors (eps_i 1..m, eps_u, eps_a 1..k, eps_y).
  const Eigen::Index n_err = m + 1 + k + 1;
  const Eigen::Index n_base = m + 1 + k + 1;
  const Eigen::Index y_base = m + 1 + k;
  Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(n_base, n_err);
  Eigen::VectorXd err_var(n_err);
  for (Eigen::Index l = 0; l < m; ++l) {
    coef(l, l) = 1.0;
    err_var(l) = scm.var_i(l);
  }
  coef(m, m) = 1.0;
  err_var(m) = scm.var_u;
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::Index row = m + 1 + j;
    for (Eigen::Index l = 0; l < m; ++l) coef(row, l) = scm.delta(l, j);
    coef(row, m) = scm.gamma_a(j);
    coef(row, row) = 1.0;
    err_var(row) = scm.var_a(j);
  }
  for (Eigen::Index j = 0; j < k; ++j) coef.row(y_base) += scm.beta(j) * coef.row(m + 1 + j);
  coef(y_base, m) += scm.gamma_y;
  coef(y_base, y_base) = 1.0;
  err_var(y_base) = scm.var_y;

  Eigen::MatrixXd base = coef * err_var.asDiagonal() * coef.transpose();
  base = Eigen::MatrixXd(base.selfadjointView<Eigen::Lower>());  // exact symmetry

  // Insert the aggregate between the components and the outcome. Its row and
  // column are the alpha-weighted combination of the component rows, summed
  // in ascending j, so cov(a, x) == sum_j alpha(j) cov(a_j, x) exactly.
  PopulationMoments pm;
  pm.labels = observational_labels(m, k);
  const Eigen::Index n_full = n_base + 1;
  const Eigen::Index a_full = m + 1 + k;
  pm.cov = Eigen::MatrixXd::Zero(n_full, n_full);

  const auto to_full = [&](Eigen::Index base_index) {
    return base_index < m + 1 + k ? base_index : base_index + 1;
  };
  for (Eigen::Index r = 0; r < n_base; ++r) {
    for (Eigen::Index c = 0; c < n_base; ++c) pm.cov(to_full(r), to_full(c)) = base(r, c);
  }
  for (Eigen::Index other = 0; other < n_base; ++other) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) sum += scm.alpha(j) * base(m + 1 + j, other);
    pm.cov(a_full, to_full(other)) = sum;
    pm.cov(to_full(other), a_full) = sum;
  }
  double var_a = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) var_a += scm.alpha(j) * pm.cov(m + 1 + j, a_full);
  pm.cov(a_full, a_full) = var_a;
  return pm;
}

double iv_estimand_population(const AggregateIvScm& scm, Eigen::Index instrument) {
  require_valid(scm);
  if (instrument < 0 || instrument >= scm.m()) {
    throw ValidationError("instrument index " + std::to_string(instrument) +
                          " out of range [0, " + std::to_string(scm.m()) + ")");
  }
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index j = 0; j < scm.k(); ++j) {
    num += scm.beta(j) * scm.delta(instrument, j);
    den += scm.alpha(j) * scm.delta(instrument, j);
  }
  if (den == 0.0) {
    throw ValidationError("irrelevant instrument " + std::to_string(instrument + 1) +
                          ": sum_j alpha(j) * delta(l,j) is zero");
  }
  return num / den;
}

std::optional<double> check_proportional_aggregation(const AggregateIvScm& scm, double tol) {
  require_valid(scm);
  for (Eigen::Index j = 0; j < scm.k(); ++j) {
    if (scm.alpha(j) == 0.0) {
      throw ValidationError("proportionality undefined: alpha(" + std::to_string(j + 1) +
                            ") is zero");
    }
  }
  const double tau = scm.beta(0) / scm.alpha(0);
  // Relative tolerance with an absolute floor of tol for tau near zero.
  const double bound = tol * std::max(1.0, std::fabs(tau));
  for (Eigen::Index j = 1; j < scm.k(); ++j) {
    if (std::fabs(scm.beta(j) / scm.alpha(j) - tau) > bound) return std::nullopt;
  }
  return tau;
}

Dataset sample_observational(const AggregateIvScm& scm, std::int64_t n, std::uint64_t seed) {
  require_valid(scm);
  if (n < 0) throw ValidationError("sample size must be non-negative");
  const auto k = scm.k();
  const auto m = scm.m();
  const Eigen::Index rows = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd values(rows, m + 1 + k + 2);

  // One substream per error column: eps_i 0..m-1, eps_u m, eps_a m+1..m+k,
  // eps_y m+1+k. Drawing column-by-column keeps the draws independent of the
  // total column count and of each other.
  const auto fill_normals = [&](Eigen::Index col, std::uint64_t stream, double sd) {
    rng::NormalStream s(rng::derive_stream(seed, stream));
    for (Eigen::Index r = 0; r < rows; ++r) values(r, col) = sd * s.normal();
  };
  for (Eigen::Index l = 0; l < m; ++l) fill_normals(l, static_cast<std::uint64_t>(l), std::sqrt(scm.var_i(l)));
  fill_normals(m, static_cast<std::uint64_t>(m), std::sqrt(scm.var_u));

  const Eigen::Index a_col = m + 1 + k;
  const Eigen::Index y_col = m + 1 + k + 1;
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::Index col = m + 1 + j;
    fill_normals(col, static_cast<std::uint64_t>(m + 1 + j), std::sqrt(scm.var_a(j)));
    for (Eigen::Index l = 0; l < m; ++l) values.col(col) += scm.delta(l, j) * values.col(l);
    values.col(col) += scm.gamma_a(j) * values.col(m);
  }
  fill_normals(y_col, static_cast<std::uint64_t>(m + 1 + k), std::sqrt(scm.var_y));
  for (Eigen::Index j = 0; j < k; ++j) values.col(y_col) += scm.beta(j) * values.col(m + 1 + j);
  values.col(y_col) += scm.gamma_y * values.col(m);

  // The aggregate is definitional: accumulate alpha(j) * a_j in ascending j
  // per row so the column equals the combination exactly.
  for (Eigen::Index r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) sum += scm.alpha(j) * values(r, m + 1 + j);
    values(r, a_col) = sum;
  }

  return Dataset(observational_labels(m, k), std::move(values));
}

double aggregate_outcome_estimand(const AggregateIvScm& scm, const AggregateOutcomeSpec& outcome) {
  require_valid(scm);
  if (scm.m() != 1) {
    throw ValidationError("aggregate outcome estimand requires a single instrument (m = 1)");
  }
  const auto k = scm.k();
  const Eigen::Index m_y = outcome.omega.size();
  if (m_y < 1) throw ValidationError("aggregate outcome: omega must be non-empty");
  if (outcome.beta_matrix.rows() != k || outcome.beta_matrix.cols() != m_y) {
    throw ValidationError("aggregate outcome: beta_matrix must be k x m_y");
  }
  if (outcome.gamma_y_vec.size() != m_y || outcome.var_y_vec.size() != m_y) {
    throw ValidationError("aggregate outcome: gamma_y_vec and var_y_vec must have length m_y");
  }
  for (Eigen::Index i = 0; i < m_y; ++i) {
    if (!(outcome.var_y_vec(i) > 0.0)) {
      throw ValidationError("aggregate outcome: var_y_vec must be strictly positive");
    }
  }

  double den = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) den += scm.alpha(j) * scm.delta(0, j);
  if (den == 0.0) throw ValidationError("irrelevant instrument: sum_j alpha(j) * delta(1,j) is zero");

  double total = 0.0;
  for (Eigen::Index i = 0; i < m_y; ++i) {
    double num = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) num += outcome.beta_matrix(j, i) * scm.delta(0, j);
    total += outcome.omega(i) * (num / den);
  }
  return total;
}

Eigen::VectorXd aggregate_instrument_projection(const AggregateIvScm& scm,
                                                const AggregateInstrumentSpec& inst) {
  require_valid(scm);
  if (inst.eta.size() != scm.m()) {
    throw ValidationError("aggregate instrument: eta must have length m");
  }
  // var(i) = sum_l eta(l)^2 var_i(l); cov(a_j, i) = sum_l eta(l) delta(l,j) var_i(l).
  double var_i = 0.0;
  for (Eigen::Index l = 0; l < scm.m(); ++l) var_i += inst.eta(l) * inst.eta(l) * scm.var_i(l);
  if (!(var_i > 0.0)) throw ValidationError("aggregate instrument: eta gives zero variance");
  Eigen::VectorXd xi(scm.k());
  for (Eigen::Index j = 0; j < scm.k(); ++j) {
    double cov = 0.0;
    for (Eigen::Index l = 0; l < scm.m(); ++l) cov += inst.eta(l) * scm.delta(l, j) * scm.var_i(l);
    xi(j) = cov / var_i;
  }
  return xi;
}

double aggregate_instrument_estimand(const AggregateIvScm& scm,
                                     const AggregateInstrumentSpec& inst) {
  const Eigen::VectorXd xi = aggregate_instrument_projection(scm, inst);
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index j = 0; j < scm.k(); ++j) {
    num += scm.beta(j) * xi(j);
    den += scm.alpha(j) * xi(j);
  }
  if (den == 0.0) {
    throw ValidationError("irrelevant aggregate instrument: sum_j alpha(j) * xi(j) is zero");
  }
  return num / den;
}

AggregateIvScm scm_from_config(const Config& config) {
  const auto k = config.integer("k");
  const auto m = config.integer("m");
  if (k < 1) throw ConfigError("config: k must be at least 1");
  if (m < 1) throw ConfigError("config: m must be at least 1");

  AggregateIvScm scm;
  scm.alpha = config.vector("alpha");
  scm.beta = config.vector("beta");
  scm.delta = config.matrix("delta");
  scm.gamma_a = config.vector("gamma_a");
  scm.gamma_y = config.number("gamma_y");
  scm.var_u = config.number_or("var_u", 1.0);
  scm.var_y = config.number_or("var_y", 1.0);
  scm.var_i = config.has("var_i") ? config.vector("var_i") : Eigen::VectorXd::Ones(m).eval();
  scm.var_a = config.has("var_a") ? config.vector("var_a") : Eigen::VectorXd::Ones(k).eval();

  if (scm.k() != k) throw ConfigError("config: alpha length does not match k");
  if (scm.m() != m) throw ConfigError("config: delta row count does not match m");
  return scm;
}

std::string to_config_text(const AggregateIvScm& scm) {
  std::ostringstream out;
  out << "k = " << scm.k() << "\n";
  out << "m = " << scm.m() << "\n";
  out << "alpha = " << format_vector(scm.alpha) << "\n";
  out << "beta = " << format_vector(scm.beta) << "\n";
  out << "delta = " << format_matrix(scm.delta) << "\n";
  out << "gamma_a = " << format_vector(scm.gamma_a) << "\n";
  out << "gamma_y = " << format_double(scm.gamma_y) << "\n";
  out << "var_u = " << format_double(scm.var_u) << "\n";
  out << "var_i = " << format_vector(scm.var_i) << "\n";
  out << "var_a = " << format_vector(scm.var_a) << "\n";
  out << "var_y = " << format_double(scm.var_y) << "\n";
  return out.str();
}

}  // namespace aggiv
