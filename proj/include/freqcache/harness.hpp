#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "freqcache/analytic.hpp"
#include "freqcache/core_model.hpp"
#include "freqcache/optimizer.hpp"
#include "freqcache/simulator.hpp"

namespace freqcache {

/// Bad configuration text. `line` is 0 for values that did not come from a file.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string key, int line = 0)
      : std::runtime_error(what), key_(std::move(key)), line_(line) {}
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

enum class SweepAxis { None, CacheFiles, BackhaulFiles, ZipfExp };

SweepAxis parse_axis(const std::string& name);
std::string axis_name(SweepAxis axis);

/// Inclusive arithmetic range start:stop:step.
struct SweepRange {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;
  std::vector<double> values() const;
};

SweepRange parse_range(const std::string& text);

struct ExperimentConfig {
  SystemConfig system;
  int max_groups = 5;
  SweepAxis axis = SweepAxis::None;
  std::optional<SweepRange> range;
  std::vector<SchemeKind> schemes{SchemeKind::Proposed, SchemeKind::Mpc, SchemeKind::Gcp};
  int n_trials = 200;
  std::uint64_t seed = 1;
  bool fixed_ppp = false;
  std::string out_path;
  double bs_per_group = 50.0;
  double window_side = 0.0;  ///< 0 derives it from bs_per_group and M_max
  int threads = 1;
  /// Explicit allocation for `analytic` and `simulate`; otherwise the optimizer plan.
  int num_groups = 1;
  std::optional<std::vector<int>> q;
  /// Explicit popularity weights; otherwise Zipf(L, gamma).
  std::optional<std::vector<double>> popularity;

  std::optional<CacheAllocation> allocation() const;
  Popularity make_popularity() const;
  SimSettings sim_settings() const;
  /// Throws ConfigError on any inconsistent field.
  void validate() const;
};

/// Applies one key=value pair. Throws ConfigError naming the key.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                   int line = 0);

/// Flat key=value lines, '#' starts a comment, blank lines ignored.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Run-length list "value x count" joined by commas, e.g. 3x1,2x3,0x2.
/// Plain comma lists are accepted on input.
std::vector<int> parse_rle(const std::string& text);
std::string format_rle(const std::vector<int>& q);

// ---------------------------------------------------------------------------

struct AnalyticRun {
  CacheAllocation allocation;
  bool from_optimizer = false;
  AnalyticReport report;
};

AnalyticRun run_analytic(const ExperimentConfig& cfg);
void write_analytic(std::ostream& os, const AnalyticRun& run, const Popularity& rho);

OptResult run_optimize(const ExperimentConfig& cfg);
void write_optimize(std::ostream& os, const OptResult& res);

/// One (sweep value, scheme) measurement.
struct ResultRow {
  std::optional<double> sweep_value;
  std::string scheme;
  int num_groups = 0;
  int cached_files = 0;
  std::optional<double> p_tilde;
  std::optional<double> p_hat;
  double ci95 = 0.0;
  double runtime_s = 0.0;
  std::string error;
  double empty_rate = 0.0;
};

/// Builds the scheme for the current system config and simulates it. Reuse
/// schemes without an analytic group choice pick M by simulated success.
ResultRow evaluate_scheme(SchemeKind kind, const ExperimentConfig& cfg, const Popularity& rho);

/// Every configured scheme at the current operating point, or the explicit
/// allocation when one is configured (scheme label "custom").
std::vector<ResultRow> run_simulate(const ExperimentConfig& cfg);

/// Applies the sweep axis value to a copy of the config.
ExperimentConfig at_sweep_value(const ExperimentConfig& cfg, double value);

/// One row per (value, scheme); points run concurrently, rows come back in
/// sweep order then scheme order.
std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg);

/// Header: sweep_value,scheme,M,L_prime,p_tilde,p_hat,ci95,runtime_s,error
void write_rows_csv(std::ostream& os, const std::vector<ResultRow>& rows,
                    bool with_runtime = true);

struct ApproxRow {
  std::optional<double> sweep_value;
  int num_groups = 0;
  int cached_files = 0;
  double p_tilde = 0.0;
  double upper_bound = 0.0;
  std::optional<double> p_hat;
  double ci95 = 0.0;
  std::optional<double> gap;  ///< p_tilde - p_hat
  std::string error;
};

std::vector<ApproxRow> run_compare_approx(const ExperimentConfig& cfg);

/// Header: sweep_value,M,L_prime,p_tilde,upper_bound,p_hat,ci95,gap,error
void write_approx_csv(std::ostream& os, const std::vector<ApproxRow>& rows);

/// Shortest round-trip decimal for CSV cells.
std::string format_number(double v);

}  // namespace freqcache
