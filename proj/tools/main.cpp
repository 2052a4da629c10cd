// aggiv: command line front end for the aggregate-treatment IV toolkit.
//
// One binary with subcommands; every run either writes its artifacts under
// the output directory (--out, then $AGGIV_OUT, then ./out) and exits 0, or
// prints a single machine-readable line
//   error: <kind>: <message>
// to stderr and exits with a stable code: 2 for configuration problems,
// 3 for model validation failures, 4 for numerical estimation failures,
// 1 for anything unexpected.

#include <CLI11.hpp>

#include <Eigen/Core>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aggiv/acid.hpp"
#include "aggiv/config.hpp"
#include "aggiv/dataset.hpp"
#include "aggiv/diagnostics.hpp"
#include "aggiv/equivalence.hpp"
#include "aggiv/errors.hpp"
#include "aggiv/estimators.hpp"
#include "aggiv/experiments.hpp"
#include "aggiv/scm.hpp"
#include "aggiv/version.hpp"

namespace {

namespace fs = std::filesystem;
using namespace aggiv;

std::string flatten(const std::string& message) {
  std::string out = message;
  for (char& c : out) {
    if (c == '\n' || c == '\r') c = ';';
  }
  return out;
}

void emit_error(const std::string& kind, const std::string& message) {
  std::cerr << "error: " << kind << ": " << flatten(message) << "\n";
}

fs::path resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("AGGIV_OUT"); env != nullptr && *env != '\0') return env;
  return "out";
}

void write_text_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

std::vector<std::string> split_csv_list(const std::string& text) {
  std::vector<std::string> items;
  std::string current;
  std::istringstream in(text);
  while (std::getline(in, current, ',')) {
    const auto begin = current.find_first_not_of(" \t");
    const auto end = current.find_last_not_of(" \t");
    if (begin == std::string::npos) continue;
    items.push_back(current.substr(begin, end - begin + 1));
  }
  return items;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  for (const auto& item : split_csv_list(text)) values.push_back(parse_double(item));
  if (values.empty()) throw ConfigError(flag + ": expected at least one number");
  return values;
}

/// Grid specification: either "start:stop:step" or a comma-separated list.
std::vector<double> parse_grid_spec(const std::string& spec) {
  if (spec.find(':') != std::string::npos) {
    const auto parts = [&] {
      std::vector<std::string> out;
      std::string part;
      std::istringstream in(spec);
      while (std::getline(in, part, ':')) out.push_back(part);
      return out;
    }();
    if (parts.size() != 3) {
      throw ConfigError("--grid: expected start:stop:step, got '" + spec + "'");
    }
    return linear_grid(parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2]));
  }
  return parse_number_list(spec, "--grid");
}

Config load_config(const std::string& path) {
  if (path.empty()) throw ConfigError("--config is required for this subcommand");
  return Config::parse_file(path);
}

AggregateIvScm load_scm(const Config& config) {
  AggregateIvScm scm = scm_from_config(config);
  require_valid(scm);
  return scm;
}

/// Instrument labels for estimation: the --instruments list when given,
/// otherwise every column named i1, i2, ... present in the data.
std::vector<std::string> select_instruments(const Dataset& data, const std::string& flag_value) {
  if (!flag_value.empty()) {
    const auto labels = split_csv_list(flag_value);
    if (labels.empty()) throw ConfigError("--instruments: expected at least one label");
    return labels;
  }
  std::vector<std::string> labels;
  for (int l = 1;; ++l) {
    const std::string label = "i" + std::to_string(l);
    if (!data.has_column(label)) break;
    labels.push_back(label);
  }
  if (labels.empty()) {
    throw ConfigError("no instrument columns i1, i2, ... found; pass --instruments");
  }
  return labels;
}

void check_sample_size(std::int64_t n) {
  if (n < 1) throw ConfigError("--n must be at least 1");
}

struct CommonIo {
  std::string config_path;
  std::string data_path;
  std::string out_flag;
  std::uint64_t seed = 42;
  std::int64_t n = 1000;
};

/// Loads --data if given, otherwise simulates from --config.
Dataset load_or_simulate(const CommonIo& io) {
  if (!io.data_path.empty()) return read_csv(fs::path(io.data_path));
  check_sample_size(io.n);
  return sample_observational(load_scm(load_config(io.config_path)), io.n, io.seed);
}

std::string format_bool(bool value) { return value ? "1" : "0"; }

// ---------------------------------------------------------------------------
// Subcommand actions
// ---------------------------------------------------------------------------

int run_simulate(const CommonIo& io) {
  check_sample_size(io.n);
  const AggregateIvScm scm = load_scm(load_config(io.config_path));
  const Dataset data = sample_observational(scm, io.n, io.seed);
  const fs::path path = resolve_out_dir(io.out_flag) / "simulate" / "dataset.csv";
  write_text_file(path, to_csv_string(data));
  std::cout << "wrote " << path.string() << " (" << data.rows() << " rows, "
            << data.cols() << " columns)\n";
  return 0;
}

int run_estimate(const CommonIo& io, const std::string& treatment, const std::string& outcome,
                 const std::string& instruments_flag) {
  const Dataset data = load_or_simulate(io);
  const auto instruments = select_instruments(data, instruments_flag);
  const EstimateReport report = fit_2sls(data, treatment, outcome, instruments);
  const fs::path path = resolve_out_dir(io.out_flag) / "estimate" / "estimate.csv";
  write_text_file(path, to_csv_string(report));
  std::cout << "estimate = " << format_double(report.point_estimate)
            << " (first-stage F = " << format_double(report.first_stage_f)
            << ", n = " << report.n << ")\n"
            << "wrote " << path.string() << "\n";
  return 0;
}

int run_acid(const CommonIo& io, std::optional<double> a_value) {
  const Config config = load_config(io.config_path);
  const AggregateIvScm scm = load_scm(config);
  const GaussianAcid acid = acid_from_config(config, scm);
  const AcidConstraintReport report = validate_gaussian_acid(acid);

  std::ostringstream text;
  for (const auto& entry : report.entries) {
    text << (entry.pass ? "pass" : "FAIL") << "  " << entry.constraint
         << "  (residual " << format_double(entry.residual) << ")\n";
  }
  if (report.pass) {
    text << "ace = " << format_double(ace_gaussian(acid, scm.beta)) << "\n";
  }
  std::cout << text.str();

  const fs::path dir = resolve_out_dir(io.out_flag) / "acid";
  write_text_file(dir / "report.txt", text.str());
  write_text_file(dir / "acid.cfg", to_config_text(acid));

  if (!report.pass) {
    throw ValidationError("invalid interventional family: " + report.summary());
  }
  if (a_value.has_value()) {
    check_sample_size(io.n);
    const Dataset draws = sample_gaussian_intervention(acid, *a_value, io.n, io.seed);
    write_text_file(dir / "components.csv", to_csv_string(draws));
    std::cout << "wrote " << (dir / "components.csv").string() << " (" << draws.rows()
              << " draws at a = " << format_double(*a_value) << ")\n";
  }
  std::cout << "wrote " << (dir / "report.txt").string() << "\n";
  return 0;
}

int run_equivalence(const CommonIo& io) {
  const AggregateIvScm scm = load_scm(load_config(io.config_path));
  const ExclusionViolationScm scalar = exclusion_violation_equivalent(scm);
  const double max_diff = verify_distribution_equivalence(scm, scalar);

  std::ostringstream text;
  text << to_config_text(scalar);
  text << "# max |cov difference| against the aggregate model = " << format_double(max_diff)
       << "\n";
  std::cout << text.str();
  std::cout << "exclusion restriction " << (scalar.delta_y == 0.0 ? "holds" : "is violated")
            << " in the scalar model (delta_y = " << format_double(scalar.delta_y) << ")\n";

  const fs::path path = resolve_out_dir(io.out_flag) / "equivalence" / "equivalent.cfg";
  write_text_file(path, text.str());
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int run_sargan(const CommonIo& io, const std::string& treatment, const std::string& outcome,
               const std::string& instruments_flag, double level) {
  const Dataset data = load_or_simulate(io);
  const auto instruments = select_instruments(data, instruments_flag);
  const SarganReport report = sargan_test(data, treatment, outcome, instruments, level);

  std::ostringstream csv;
  csv << "statistic,dof,p_value,level,reject\n";
  csv << format_double(report.statistic) << "," << report.dof << ","
      << format_double(report.p_value) << "," << format_double(report.level) << ","
      << format_bool(report.reject) << "\n";
  const fs::path path = resolve_out_dir(io.out_flag) / "sargan" / "sargan.csv";
  write_text_file(path, csv.str());

  std::cout << "sargan statistic = " << format_double(report.statistic)
            << ", dof = " << report.dof << ", p = " << format_double(report.p_value) << ", "
            << (report.reject ? "reject" : "no rejection") << " at level "
            << format_double(report.level) << "\n"
            << "wrote " << path.string() << "\n";
  return 0;
}

int run_experiment_cmd(const std::string& name, const CommonIo& io, const std::string& grid_spec,
                       int replicates, int jobs, const std::string& levels_spec,
                       const std::string& sizes_spec) {
  ExperimentConfig config;
  config.id = experiment_id_from_string(name);
  config.master_seed = io.seed;
  config.n = io.n;
  config.replicates = replicates;
  config.jobs = jobs;
  if (!grid_spec.empty()) config.grid = parse_grid_spec(grid_spec);
  if (!levels_spec.empty()) config.levels = parse_number_list(levels_spec, "--levels");
  if (!sizes_spec.empty()) {
    config.sample_sizes.clear();
    for (const double v : parse_number_list(sizes_spec, "--sizes")) {
      config.sample_sizes.push_back(static_cast<std::int64_t>(v));
    }
  }
  if (const auto violations = validate(config); !violations.empty()) {
    std::ostringstream message;
    message << "invalid experiment configuration:";
    for (const auto& violation : violations) message << " " << violation << ";";
    throw ValidationError(message.str());
  }
  const fs::path dir = run_experiment(config, resolve_out_dir(io.out_flag));
  std::cout << "wrote " << (dir / "results.csv").string() << "\n";
  return 0;
}

int run_validate(const CommonIo& io) {
  const Config config = load_config(io.config_path);
  const AggregateIvScm scm = scm_from_config(config);
  const auto violations = validate_scm(scm);
  bool ok = violations.empty();
  if (ok) {
    std::cout << "scm: ok\n";
  } else {
    for (const auto& violation : violations) std::cout << "scm: " << violation << "\n";
  }

  const bool has_acid = config.has("acid.kind") || config.has("acid.d");
  if (has_acid && ok) {
    const GaussianAcid acid = acid_from_config(config, scm);
    const AcidConstraintReport report = validate_gaussian_acid(acid);
    for (const auto& entry : report.entries) {
      std::cout << "acid: " << (entry.pass ? "pass" : "FAIL") << "  " << entry.constraint
                << "  (residual " << format_double(entry.residual) << ")\n";
    }
    ok = report.pass;
  } else if (has_acid) {
    std::cout << "acid: skipped (fix the model first)\n";
  }

  if (!ok) throw ValidationError("validation failed; see report above");
  std::cout << "valid\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aggregate-treatment instrumental-variable toolkit (v" +
               std::string(aggiv::kVersion) + ")"};
  app.require_subcommand(1);

  CommonIo io;
  std::string treatment = "a";
  std::string outcome = "y";
  std::string instruments_flag;
  std::string grid_spec;
  std::string levels_spec;
  std::string sizes_spec;
  std::string experiment_name;
  double level = 0.05;
  double a_value = 0.0;
  int replicates = 100;
  int jobs = 1;

  const auto add_common = [&](CLI::App* cmd, bool with_n) {
    cmd->add_option("--config", io.config_path, "model configuration file");
    cmd->add_option("--out", io.out_flag, "output directory (default $AGGIV_OUT, then ./out)");
    cmd->add_option("--seed", io.seed, "master seed");
    if (with_n) cmd->add_option("--n", io.n, "sample size");
  };
  const auto add_data_flags = [&](CLI::App* cmd) {
    cmd->add_option("--data", io.data_path, "input dataset CSV (otherwise simulate --config)");
    cmd->add_option("--treatment", treatment, "treatment column");
    cmd->add_option("--outcome", outcome, "outcome column");
    cmd->add_option("--instruments", instruments_flag,
                    "comma-separated instrument columns (default: i1, i2, ...)");
  };

  auto* simulate = app.add_subcommand("simulate", "sample an observational dataset");
  add_common(simulate, true);

  auto* estimate = app.add_subcommand("estimate", "two-stage least squares");
  add_common(estimate, true);
  add_data_flags(estimate);

  auto* acid = app.add_subcommand("acid", "check an interventional family and report its ACE");
  add_common(acid, true);
  auto* a_option = acid->add_option("--a", a_value, "intervention value to sample components at");

  auto* equivalence =
      app.add_subcommand("equivalence", "scalar exclusion-violation model with the same "
                                        "observational distribution");
  add_common(equivalence, false);

  auto* sargan = app.add_subcommand("sargan", "overidentification test");
  add_common(sargan, true);
  add_data_flags(sargan);
  sargan->add_option("--level", level, "significance level");

  auto* experiment = app.add_subcommand("experiment", "run a named study");
  experiment
      ->add_option("name", experiment_name,
                   "figure2a | figure2b | figure4 | table1 | table2 | counterexample")
      ->required();
  add_common(experiment, true);
  experiment->add_option("--grid", grid_spec, "grid as start:stop:step or v1,v2,...");
  experiment->add_option("--replicates", replicates, "datasets per grid point");
  experiment->add_option("--jobs", jobs, "worker threads");
  experiment->add_option("--levels", levels_spec, "significance levels, comma separated");
  experiment->add_option("--sizes", sizes_spec, "sample sizes, comma separated");

  auto* validate_cmd = app.add_subcommand("validate", "check a model configuration");
  add_common(validate_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage", e.what());
    return 2;
  }

  try {
    if (simulate->parsed()) return run_simulate(io);
    if (estimate->parsed()) return run_estimate(io, treatment, outcome, instruments_flag);
    if (acid->parsed()) {
      return run_acid(io, a_option->count() > 0 ? std::optional<double>(a_value) : std::nullopt);
    }
    if (equivalence->parsed()) return run_equivalence(io);
    if (sargan->parsed()) return run_sargan(io, treatment, outcome, instruments_flag, level);
    if (experiment->parsed()) {
      return run_experiment_cmd(experiment_name, io, grid_spec, replicates, jobs, levels_spec,
                                sizes_spec);
    }
    if (validate_cmd->parsed()) return run_validate(io);
    emit_error("usage", "a subcommand is required");
    return 2;
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return 2;
  } catch (const ValidationError& e) {
    emit_error("validation", e.what());
    return 3;
  } catch (const EstimationError& e) {
    emit_error("estimation", e.what());
    return 4;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 1;
  }
}
