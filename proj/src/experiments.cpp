#include "aggiv/experiments.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "aggiv/errors.hpp"
#include "aggiv/estimators.hpp"
#include "aggiv/rng.hpp"
#include "aggiv/version.hpp"

namespace aggiv {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw ConfigError("failed while writing '" + path.string() + "'");
}

// Shared sweep driver for the two estimand-vs-ACE figures: for each grid
// value, build the SCM and ACID, evaluate both closed forms, and estimate
// from one fresh dataset per sample size.
std::vector<SimulationRow> run_estimand_sweep(
    const ExperimentConfig& config, const std::vector<double>& grid,
    const std::function<AggregateIvScm(double)>& make_scm,
    const std::function<GaussianAcid(double, const AggregateIvScm&)>& make_acid) {
  const std::vector<std::int64_t> sizes =
      config.sample_sizes.empty() ? std::vector<std::int64_t>{10, 100, 1000}
                                  : config.sample_sizes;
  std::vector<SimulationRow> rows;
  rows.reserve(grid.size() * sizes.size());
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const double x = grid[gi];
    const AggregateIvScm scm = make_scm(x);
    const GaussianAcid acid = make_acid(x, scm);
    const double beta_iv = iv_estimand_population(scm, 0);
    const double ace = ace_gaussian(acid, scm.beta);
    const std::uint64_t grid_seed = rng::derive_stream(config.master_seed, gi);
    for (std::size_t ni = 0; ni < sizes.size(); ++ni) {
      SimulationRow row;
      row.x = x;
      row.n = sizes[ni];
      row.beta_iv_theoretical = beta_iv;
      row.ace_theoretical = ace;
      try {
        const Dataset data =
            sample_observational(scm, sizes[ni], rng::derive_stream(grid_seed, ni));
        row.sample_estimate = fit_2sls(data, "a", "y", {"i1"}).point_estimate;
      } catch (const Error& e) {
        row.sample_estimate = kNan;
        row.status = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// Default model for the table2 study when the caller supplies none: a
// two-component model where both zero restrictions change the estimand.
AggregateIvScm default_table2_scm() {
  Eigen::MatrixXd delta(1, 2);
  delta << 2.0, 1.0;
  return make_unit_variance_scm(Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(1.0, 2.0), delta,
                                Eigen::Vector2d(1.0, 1.0), 1.0);
}

GaussianAcid default_table2_acid(const AggregateIvScm& scm) {
  GaussianAcid acid;
  acid.alpha = scm.alpha;
  acid.c = Eigen::VectorXd::Zero(2);
  acid.d = Eigen::Vector2d(0.7, 0.3);
  acid.sigma = Eigen::MatrixXd::Identity(2, 2) -
               (scm.alpha * scm.alpha.transpose()) / scm.alpha.squaredNorm();
  return acid;
}

std::uint64_t fnv1a(std::uint64_t hash, const std::string& text) {
  for (const unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001B3ull;
  }
  return hash;
}

}  // namespace

ExperimentId experiment_id_from_string(const std::string& name) {
  if (name == "figure2a") return ExperimentId::Figure2a;
  if (name == "figure2b") return ExperimentId::Figure2b;
  if (name == "figure4") return ExperimentId::Figure4;
  if (name == "table1") return ExperimentId::Table1;
  if (name == "table2") return ExperimentId::Table2;
  if (name == "counterexample") return ExperimentId::Counterexample;
  throw ConfigError("unknown experiment '" + name +
                    "' (expected figure2a, figure2b, figure4, table1, table2 or counterexample)");
}

std::string to_string(ExperimentId id) {
  switch (id) {
    case ExperimentId::Figure2a: return "figure2a";
    case ExperimentId::Figure2b: return "figure2b";
    case ExperimentId::Figure4: return "figure4";
    case ExperimentId::Table1: return "table1";
    case ExperimentId::Table2: return "table2";
    case ExperimentId::Counterexample: return "counterexample";
  }
  throw ValidationError("unknown experiment id");
}

std::vector<std::string> validate(const ExperimentConfig& config) {
  std::vector<std::string> violations;
  if (config.replicates < 1) violations.push_back("replicates must be at least 1");
  if (config.n < 1) violations.push_back("n must be at least 1");
  if (config.jobs < 1) violations.push_back("jobs must be at least 1");
  for (const auto size : config.sample_sizes) {
    if (size < 1) violations.push_back("sample sizes must be at least 1");
  }
  if (config.levels.empty()) violations.push_back("at least one significance level required");
  for (const double level : config.levels) {
    if (!(level > 0.0 && level < 1.0)) {
      violations.push_back("levels must lie strictly between 0 and 1");
    }
  }
  for (const double x : config.grid) {
    if (!std::isfinite(x)) violations.push_back("grid values must be finite");
  }
  return violations;
}

AggregateIvScm two_component_scm(double beta1) {
  Eigen::MatrixXd delta(1, 2);
  delta << 1.0, 1.0;
  return make_unit_variance_scm(Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(beta1, 2.0), delta,
                                Eigen::Vector2d(1.0, 1.0), 1.0);
}

AggregateIvScm two_instrument_scm(double beta1, const Eigen::MatrixXd& delta) {
  if (delta.rows() != 2 || delta.cols() != 2) {
    throw ValidationError("two_instrument_scm: delta must be 2 x 2");
  }
  return make_unit_variance_scm(Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(beta1, 2.0), delta,
                                Eigen::Vector2d(0.5, 0.5), 2.0);
}

std::vector<InstrumentConfig> table1_instrument_configs() {
  const auto matrix = [](double a, double b, double c, double d) {
    Eigen::MatrixXd m(2, 2);
    m << a, b, c, d;
    return m;
  };
  return {
      {"Strong-Weak", matrix(5.0, 3.0, 0.1, 0.2)},
      {"Strong-Strong", matrix(5.0, 3.0, 4.0, 2.0)},
      {"Weak-Weak", matrix(0.15, 0.1, 0.08, 0.05)},
  };
}

std::vector<SimulationRow> run_figure2a(const ExperimentConfig& config) {
  const std::vector<double> grid =
      config.grid.empty() ? linear_grid(-1.0, 4.0, 0.1) : config.grid;
  return run_estimand_sweep(
      config, grid, two_component_scm,
      [](double, const AggregateIvScm& scm) {
        GaussianAcid acid;
        acid.alpha = scm.alpha;
        acid.c = Eigen::VectorXd::Zero(2);
        acid.d = Eigen::Vector2d(2.0, -1.0);
        acid.sigma = Eigen::MatrixXd::Zero(2, 2);
        return acid;
      });
}

std::vector<SimulationRow> run_figure2b(const ExperimentConfig& config) {
  const std::vector<double> grid =
      config.grid.empty() ? linear_grid(-2.0, 2.0, 0.1) : config.grid;
  return run_estimand_sweep(
      config, grid, [](double) { return two_component_scm(1.0); },
      [](double d1, const AggregateIvScm& scm) {
        GaussianAcid acid;
        acid.alpha = scm.alpha;
        acid.c = Eigen::VectorXd::Zero(2);
        acid.d = Eigen::Vector2d(d1, 1.0 - d1);  // keeps alpha . d = 1
        acid.sigma = Eigen::MatrixXd::Zero(2, 2);
        return acid;
      });
}

std::vector<SarganPowerPoint> run_figure4(const ExperimentConfig& config) {
  const std::vector<double> grid =
      config.grid.empty() ? linear_grid(-1.0, 4.0, 0.1) : config.grid;
  return sargan_power_curve(two_instrument_scm, grid, table1_instrument_configs(),
                            config.replicates, config.n, config.levels, config.master_seed,
                            config.jobs);
}

std::vector<Table1Row> run_table1() {
  std::vector<Table1Row> rows;
  for (const auto& config : table1_instrument_configs()) {
    // The correlations do not depend on beta; any grid value gives the same
    // row, so the proportional anchor beta1 = 2 is used.
    const AggregateIvScm scm = two_instrument_scm(2.0, config.delta);
    Table1Row row;
    row.config = config.name;
    row.cor_i1 = instrument_treatment_correlation(scm, 0);
    row.cor_i2 = instrument_treatment_correlation(scm, 1);
    row.class_i1 = to_string(classify_instrument_strength(row.cor_i1));
    row.class_i2 = to_string(classify_instrument_strength(row.cor_i2));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Table2Row> run_table2(const AggregateIvScm& scm, const GaussianAcid& acid) {
  require_valid(scm);
  if (scm.k() != 2) throw ValidationError("table2: the model must have two components");
  require_valid(acid);
  if (acid.k() != 2) throw ValidationError("table2: the acid must have two components");

  const auto evaluate = [&](const std::string& name, bool zero_beta2, bool zero_delta2) {
    AggregateIvScm restricted = scm;
    if (zero_beta2) restricted.beta(1) = 0.0;
    if (zero_delta2) restricted.delta(0, 1) = 0.0;
    Table2Row row;
    row.case_name = name;
    row.beta_iv = iv_estimand_population(restricted, 0);
    row.ace = ace_gaussian(acid, restricted.beta);
    return row;
  };

  return {
      evaluate("general", false, false),
      evaluate("beta2_zero", true, false),
      evaluate("delta2_zero", false, true),
      evaluate("both_zero", true, true),
  };
}

std::vector<CounterexampleRow> run_counterexample(const ExperimentConfig& config) {
  const std::vector<double> grid =
      config.grid.empty() ? linear_grid(-3.0, 2.0, 0.1) : config.grid;
  std::vector<CounterexampleRow> rows;
  rows.reserve(grid.size());
  for (const double a : grid) {
    CounterexampleRow row;
    row.a = a;
    row.mean_a2 = uniform_counterexample_component2_mean(a);
    row.mean_a2_shifted = uniform_counterexample_component2_mean(a + 1.0);
    row.delta = uniform_counterexample_delta(a);
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> linear_grid(double start, double stop, double step) {
  if (!(step > 0.0)) throw ValidationError("linear_grid: step must be positive");
  if (!(stop >= start)) throw ValidationError("linear_grid: stop must be at least start");
  const auto count = static_cast<std::int64_t>(std::floor((stop - start) / step + 1e-9));
  const double start_in_steps = start / step;
  const double rounded = std::nearbyint(start_in_steps);
  const bool on_step_grid = std::fabs(start_in_steps - rounded) < 1e-9;
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count + 1));
  for (std::int64_t i = 0; i <= count; ++i) {
    grid.push_back(on_step_grid ? (rounded + static_cast<double>(i)) * step
                                : start + static_cast<double>(i) * step);
  }
  return grid;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  std::ostringstream canonical;
  canonical << to_string(config.id) << "|" << config.master_seed << "|";
  for (const double x : config.grid) canonical << format_double(x) << ",";
  canonical << "|";
  for (const auto n : config.sample_sizes) canonical << n << ",";
  canonical << "|" << config.replicates << "|" << config.n << "|";
  for (const double level : config.levels) canonical << format_double(level) << ",";
  return fnv1a(0xCBF29CE484222325ull, canonical.str());
}

std::filesystem::path run_experiment(const ExperimentConfig& config,
                                     const std::filesystem::path& out_root) {
  const auto violations = validate(config);
  if (!violations.empty()) {
    std::string message = "invalid experiment config:";
    for (const auto& v : violations) message += "\n  - " + v;
    throw ValidationError(message);
  }

  const std::filesystem::path dir = out_root / to_string(config.id);
  std::filesystem::create_directories(dir);

  switch (config.id) {
    case ExperimentId::Figure2a:
      write_text_file(dir / "results.csv", to_csv_string(run_figure2a(config), "beta1"));
      break;
    case ExperimentId::Figure2b:
      write_text_file(dir / "results.csv", to_csv_string(run_figure2b(config), "d1"));
      break;
    case ExperimentId::Figure4: {
      const auto points = run_figure4(config);
      write_text_file(dir / "results.csv", to_csv_string(points));
      std::ostringstream warnings;
      for (const auto& p : points) {
        if (p.failures > 0 && p.level == config.levels.front()) {
          warnings << p.config << "," << format_double(p.beta1) << "," << p.failures << "\n";
        }
      }
      if (!warnings.str().empty()) {
        write_text_file(dir / "warnings.csv", "config,beta1,failed_replicates\n" + warnings.str());
      }
      break;
    }
    case ExperimentId::Table1:
      write_text_file(dir / "results.csv", to_csv_string(run_table1()));
      break;
    case ExperimentId::Table2: {
      const AggregateIvScm scm = default_table2_scm();
      write_text_file(dir / "results.csv",
                      to_csv_string(run_table2(scm, default_table2_acid(scm))));
      break;
    }
    case ExperimentId::Counterexample:
      write_text_file(dir / "results.csv", to_csv_string(run_counterexample(config)));
      break;
  }

  std::ostringstream manifest;
  manifest << "experiment = " << to_string(config.id) << "\n";
  manifest << "master_seed = " << config.master_seed << "\n";
  manifest << "version = " << kVersion << "\n";
  std::ostringstream hash_hex;
  hash_hex << std::hex << config_hash(config);
  manifest << "config_hash = " << hash_hex.str() << "\n";
  write_text_file(dir / "manifest", manifest.str());
  return dir;
}

std::string to_csv_string(const std::vector<SimulationRow>& rows, const std::string& x_label) {
  // Status strings may be error messages; keep them one CSV cell.
  const auto sanitize = [](std::string text) {
    for (char& ch : text) {
      if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    }
    return text;
  };
  std::ostringstream out;
  out << x_label << ",n,sample_estimate,beta_iv_theoretical,ace_theoretical,status\n";
  for (const auto& row : rows) {
    out << format_double(row.x) << "," << row.n << "," << format_double(row.sample_estimate)
        << "," << format_double(row.beta_iv_theoretical) << ","
        << format_double(row.ace_theoretical) << "," << sanitize(row.status) << "\n";
  }
  return out.str();
}

std::string to_csv_string(const std::vector<Table1Row>& rows) {
  std::ostringstream out;
  out << "config,cor_i1,cor_i2,class_i1,class_i2\n";
  for (const auto& row : rows) {
    out << row.config << "," << format_double(row.cor_i1) << "," << format_double(row.cor_i2)
        << "," << row.class_i1 << "," << row.class_i2 << "\n";
  }
  return out.str();
}

std::string to_csv_string(const std::vector<Table2Row>& rows) {
  std::ostringstream out;
  out << "case,beta_iv,ace\n";
  for (const auto& row : rows) {
    out << row.case_name << "," << format_double(row.beta_iv) << "," << format_double(row.ace)
        << "\n";
  }
  return out.str();
}

std::string to_csv_string(const std::vector<CounterexampleRow>& rows) {
  std::ostringstream out;
  out << "a,mean_a2,mean_a2_shifted,delta\n";
  for (const auto& row : rows) {
    out << format_double(row.a) << "," << format_double(row.mean_a2) << ","
        << format_double(row.mean_a2_shifted) << "," << format_double(row.delta) << "\n";
  }
  return out.str();
}

}  // namespace aggiv
