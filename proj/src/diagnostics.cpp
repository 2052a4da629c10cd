#include "aggiv/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "aggiv/errors.hpp"
#include "aggiv/estimators.hpp"
#include "aggiv/rng.hpp"
#include "aggiv/stats.hpp"

namespace aggiv {

SarganReport sargan_test(const Dataset& data, const std::string& treatment,
                         const std::string& outcome,
                         const std::vector<std::string>& instruments, double level) {
  if (instruments.size() < 2) {
    throw ValidationError("sargan test: under-identified, at least two instruments required");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw ValidationError("sargan test: level must lie strictly between 0 and 1");
  }

  const auto fit = detail::two_stage_least_squares(data, treatment, outcome, instruments);
  const Eigen::VectorXd a = data.column(treatment);
  const Eigen::VectorXd y = data.column(outcome);
  const Eigen::VectorXd u =
      y - Eigen::VectorXd::Constant(y.size(), fit.intercept) - fit.slope * a;

  SarganReport report;
  report.dof = static_cast<int>(instruments.size()) - 1;
  report.level = level;

  const double tss = (u.array() - u.mean()).matrix().squaredNorm();
  // Exact fits leave residuals that are pure rounding noise; regressing that
  // noise on the instruments would produce an arbitrary R^2. Compare against
  // the outcome scale to decide whether there is any signal left to explain.
  const double y_tss = (y.array() - y.mean()).matrix().squaredNorm();
  if (tss > 1e-24 * std::max(y_tss, 1.0)) {
    const Eigen::Index n = data.rows();
    const Eigen::Index m = static_cast<Eigen::Index>(instruments.size());
    Eigen::MatrixXd design(n, m + 1);
    design.col(0).setOnes();
    for (Eigen::Index l = 0; l < m; ++l) {
      design.col(l + 1) = data.column(instruments[static_cast<std::size_t>(l)]);
    }
    const auto aux = detail::ols(design, u);
    const double r2 = std::clamp(1.0 - aux.residuals.squaredNorm() / tss, 0.0, 1.0);
    report.statistic = static_cast<double>(n) * r2;
  } else {
    report.statistic = 0.0;  // residuals are constant, nothing to explain
  }
  report.p_value = stats::chi_squared_sf(report.statistic, static_cast<double>(report.dof));
  report.reject = report.p_value < level;
  return report;
}

std::vector<SarganPowerPoint> sargan_power_curve(
    const ScmTemplate& make_scm, const std::vector<double>& beta1_grid,
    const std::vector<InstrumentConfig>& configs, int replicates, std::int64_t n,
    const std::vector<double>& levels, std::uint64_t master_seed, int jobs) {
  if (beta1_grid.empty()) throw ValidationError("power curve: beta1 grid must be non-empty");
  if (configs.empty()) throw ValidationError("power curve: at least one configuration required");
  if (replicates < 1) throw ValidationError("power curve: replicates must be positive");
  if (levels.empty()) throw ValidationError("power curve: at least one level required");
  for (const double level : levels) {
    if (!(level > 0.0 && level < 1.0)) {
      throw ValidationError("power curve: levels must lie strictly between 0 and 1");
    }
  }
  if (jobs < 1) throw ValidationError("power curve: jobs must be positive");

  // One cell per (config, grid point); each cell tallies every level.
  struct Cell {
    std::vector<int> rejections;  // indexed by level
    int failures = 0;
  };
  const std::size_t n_cells = configs.size() * beta1_grid.size();
  std::vector<Cell> cells(n_cells);

  const auto run_cell = [&](std::size_t cell_index) {
    const std::size_t ci = cell_index / beta1_grid.size();
    const std::size_t gi = cell_index % beta1_grid.size();
    const AggregateIvScm scm = make_scm(beta1_grid[gi], configs[ci].delta);
    std::vector<std::string> instrument_labels;
    for (Eigen::Index l = 0; l < scm.m(); ++l) {
      instrument_labels.push_back("i" + std::to_string(l + 1));
    }

    Cell cell;
    cell.rejections.assign(levels.size(), 0);
    const std::uint64_t config_seed = rng::derive_stream(master_seed, ci);
    const std::uint64_t grid_seed = rng::derive_stream(config_seed, gi);
    // The decision "p < level" shares one p-value across levels, so the
    // test runs once per replicate (the smallest level would do, but any
    // valid level gives the same statistic and p-value).
    for (int r = 0; r < replicates; ++r) {
      const std::uint64_t seed = rng::derive_stream(grid_seed, static_cast<std::uint64_t>(r));
      try {
        const Dataset data = sample_observational(scm, n, seed);
        const SarganReport report = sargan_test(data, "a", "y", instrument_labels, levels[0]);
        for (std::size_t li = 0; li < levels.size(); ++li) {
          if (report.p_value < levels[li]) ++cell.rejections[li];
        }
      } catch (const Error&) {
        ++cell.failures;  // counted as a non-rejection at every level
      }
    }
    cells[cell_index] = std::move(cell);
  };

  const int workers = std::min<int>(jobs, static_cast<int>(n_cells));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n_cells; ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= n_cells) break;
          run_cell(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  std::vector<SarganPowerPoint> points;
  points.reserve(n_cells * levels.size());
  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    for (std::size_t li = 0; li < levels.size(); ++li) {
      for (std::size_t gi = 0; gi < beta1_grid.size(); ++gi) {
        const Cell& cell = cells[ci * beta1_grid.size() + gi];
        SarganPowerPoint point;
        point.config = configs[ci].name;
        point.level = levels[li];
        point.beta1 = beta1_grid[gi];
        point.replicates = replicates;
        point.rejections = cell.rejections[li];
        point.frequency = static_cast<double>(cell.rejections[li]) / replicates;
        point.failures = cell.failures;
        points.push_back(std::move(point));
      }
    }
  }
  return points;
}

double instrument_treatment_correlation(const AggregateIvScm& scm, Eigen::Index instrument) {
  if (instrument < 0 || instrument >= scm.m()) {
    throw ValidationError("instrument index " + std::to_string(instrument) +
                          " out of range [0, " + std::to_string(scm.m()) + ")");
  }
  const PopulationMoments pm = population_moments(scm);
  return pm.correlation("i" + std::to_string(instrument + 1), "a");
}

InstrumentStrength classify_instrument_strength(double correlation) {
  const double r = std::fabs(correlation);
  if (r > 0.5) return InstrumentStrength::Strong;
  if (r < 0.2) return InstrumentStrength::Weak;
  return InstrumentStrength::Intermediate;
}

const char* to_string(InstrumentStrength strength) {
  switch (strength) {
    case InstrumentStrength::Weak: return "weak";
    case InstrumentStrength::Intermediate: return "intermediate";
    case InstrumentStrength::Strong: return "strong";
  }
  return "unknown";
}

std::string to_csv_string(const std::vector<SarganPowerPoint>& points) {
  std::ostringstream out;
  out << "config,level,beta1,replicates,rejections,frequency\n";
  for (const auto& p : points) {
    out << p.config << "," << format_double(p.level) << "," << format_double(p.beta1) << ","
        << p.replicates << "," << p.rejections << "," << format_double(p.frequency) << "\n";
  }
  return out.str();
}

}  // namespace aggiv
