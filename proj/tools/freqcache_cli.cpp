// Command-line front end: analytic, optimize, simulate, sweep, compare-approx.
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "freqcache/harness.hpp"

namespace fc = freqcache;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string out;
  std::string axis;
  std::string range;
  std::string schemes;
  bool fixed_ppp = false;
  std::optional<int> threads;
  std::vector<std::string> overrides;
  std::string dump;
  bool no_runtime = false;
};

fc::ExperimentConfig build_config(const Options& o) {
  fc::ExperimentConfig cfg = o.config_path.empty() ? fc::ExperimentConfig{} : fc::load_config(o.config_path);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw fc::ConfigError("--set expects key=value, got '" + kv + "'", kv);
    fc::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.trials) fc::apply_setting(cfg, "n_trials", std::to_string(*o.trials));
  if (!o.out.empty()) cfg.out_path = o.out;
  if (!o.axis.empty()) cfg.axis = fc::parse_axis(o.axis);
  if (!o.range.empty()) cfg.range = fc::parse_range(o.range);
  if (!o.schemes.empty()) fc::apply_setting(cfg, "schemes", o.schemes);
  if (o.fixed_ppp) cfg.fixed_ppp = true;
  if (o.threads) cfg.threads = std::max(1, *o.threads);
  cfg.validate();
  return cfg;
}

// Writes to --out when given, stdout otherwise.
template <class Fn>
void emit(const fc::ExperimentConfig& cfg, Fn write) {
  if (cfg.out_path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(cfg.out_path);
  if (!f) throw fc::ConfigError("cannot open output file '" + cfg.out_path + "'", "out");
  write(f);
}

void warn_sparse(const std::vector<fc::ResultRow>& rows) {
  for (const auto& r : rows)
    if (r.empty_rate >= 1e-3)
      std::cerr << "warning: " << r.scheme << ": " << r.empty_rate * 100
                << "% of users found no BS holding their file; enlarge the window "
                   "(bs_per_group or window_side)\n";
}

void dump_realization(const fc::ExperimentConfig& cfg, const std::string& path) {
  const auto rho = cfg.make_popularity();
  int M = cfg.num_groups;
  if (!cfg.allocation()) M = fc::make_baseline(cfg.schemes.front(), cfg.system, rho, cfg.max_groups).num_groups;
  auto settings = cfg.sim_settings();
  settings.window_groups = std::max(cfg.max_groups, M);
  const auto real = fc::generate(cfg.system, rho, M, fc::window_side(cfg.system, M, settings), cfg.seed);
  std::ofstream f(path);
  if (!f) throw fc::ConfigError("cannot open dump file '" + path + "'", "dump");
  fc::write_realization_csv(f, real);
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "key=value configuration file");
  cmd->add_option("--set", o.overrides, "override one config key (key=value), repeatable");
  cmd->add_option("--out", o.out, "output path (default stdout)");
  cmd->add_option("--threads", o.threads, "worker threads");
}

void add_sim(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.seed, "base seed");
  cmd->add_option("--trials", o.trials, "Monte Carlo realizations");
  cmd->add_option("--schemes", o.schemes, "comma list: proposed,mpc,gcp,mpc-reuse,gcp-reuse");
  cmd->add_flag("--fixed-ppp", o.fixed_ppp, "one PPP realization, redraw requests and fading only");
}

void add_sweep(CLI::App* cmd, Options& o) {
  cmd->add_option("--axis", o.axis, "B_C, B_B, gamma or none");
  cmd->add_option("--range", o.range, "start:stop:step");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint frequency reuse and caching: analytics, optimizer and simulator"};
  app.require_subcommand(1);
  Options o;

  auto* analytic = app.add_subcommand("analytic", "approximate success for the configured or optimized allocation");
  add_common(analytic, o);

  auto* optimize = app.add_subcommand("optimize", "choose the reuse factor and cache allocation");
  add_common(optimize, o);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo success probability at one operating point");
  add_common(simulate, o);
  add_sim(simulate, o);
  simulate->add_option("--dump", o.dump, "write trial-0 realization as CSV");
  simulate->add_flag("--no-runtime", o.no_runtime, "leave the runtime column empty");

  auto* sweep = app.add_subcommand("sweep", "compare schemes along a parameter sweep");
  add_common(sweep, o);
  add_sim(sweep, o);
  add_sweep(sweep, o);
  sweep->add_flag("--no-runtime", o.no_runtime, "leave the runtime column empty");

  auto* approx = app.add_subcommand("compare-approx", "approximate vs simulated success of the optimized plan");
  add_common(approx, o);
  add_sim(approx, o);
  add_sweep(approx, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    const auto cfg = build_config(o);
    if (analytic->parsed()) {
      const auto run = fc::run_analytic(cfg);
      emit(cfg, [&](std::ostream& os) { fc::write_analytic(os, run, cfg.make_popularity()); });
    } else if (optimize->parsed()) {
      const auto res = fc::run_optimize(cfg);
      emit(cfg, [&](std::ostream& os) { fc::write_optimize(os, res); });
    } else if (simulate->parsed()) {
      if (!o.dump.empty()) dump_realization(cfg, o.dump);
      const auto rows = fc::run_simulate(cfg);
      warn_sparse(rows);
      emit(cfg, [&](std::ostream& os) { fc::write_rows_csv(os, rows, !o.no_runtime); });
    } else if (sweep->parsed()) {
      const auto rows = fc::run_sweep(cfg);
      warn_sparse(rows);
      emit(cfg, [&](std::ostream& os) { fc::write_rows_csv(os, rows, !o.no_runtime); });
    } else if (approx->parsed()) {
      const auto rows = fc::run_compare_approx(cfg);
      emit(cfg, [&](std::ostream& os) { fc::write_approx_csv(os, rows); });
    }
  } catch (const fc::ConfigError& e) {
    std::cerr << "config error [" << e.key() << "]: " << e.what() << '\n';
    return 1;
  } catch (const fc::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
