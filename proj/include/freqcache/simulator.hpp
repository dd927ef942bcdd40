#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "freqcache/core_model.hpp"
#include "freqcache/rng.hpp"
#include "freqcache/torus_grid.hpp"

namespace freqcache {

/// Window and execution knobs for the Monte Carlo engine.
struct SimSettings {
  /// Torus side in metres; 0 picks sqrt(bs_per_group * window_groups / lambda_b).
  double window_side = 0.0;
  /// Group count used to size the window; 0 uses the scheme's own M. Pin it
  /// when comparing schemes so they share one geometry.
  int window_groups = 0;
  double bs_per_group = 50.0;
  /// One PPP realization for every trial; only requests, fading and
  /// scheduling are redrawn.
  bool fixed_realization = false;
  /// Worker threads for independent trials. Results do not depend on it.
  int threads = 1;
};

double window_side(const SystemConfig& cfg, int num_groups, const SimSettings& settings);

/// One draw of the network on the torus [0, side)^2.
struct Realization {
  double side = 0.0;
  int num_groups = 1;
  std::vector<Point> bs;
  std::vector<int> bs_group;
  std::vector<Point> users;
  std::vector<int> user_request;  ///< 0-based file index
};

/// Poisson numbers of BSs and users, uniform positions, independent uniform
/// group labels and i.i.d. requests. Group labels come from one uniform per BS
/// so that the same seed yields nested groupings across M. With
/// `fixed_geometry`, positions and labels come from trial 0 regardless of
/// `trial`.
Realization generate(const SystemConfig& cfg, const Popularity& rho, int num_groups, double side,
                     std::uint64_t seed, std::uint64_t trial = 0, bool fixed_geometry = false);

/// Comma-separated dump: kind,x,y,tag with tag = group for BSs and the
/// 1-based requested file for users.
void write_realization_csv(std::ostream& os, const Realization& real);

/// What each BS stores. Group-based: BS n stores the files of its group.
/// Random: each BS draws B_C distinct files with inclusion probabilities b_l.
struct CachingScheme {
  int num_groups = 1;
  int cache_files = 0;
  std::optional<PlacementMap> placement;
  std::vector<double> cache_probs;

  static CachingScheme grouped(const CacheAllocation& alloc, int cache_files);
  static CachingScheme random(std::vector<double> probs, int num_groups, int cache_files);

  /// True when some BS in an infinite network would hold the file.
  bool cached_anywhere(int file) const;
};

/// Per-realization cache contents.
class CacheState {
 public:
  CacheState(const CachingScheme& scheme, const Realization& real, Engine& rng);
  bool stores(int bs, int file) const;

 private:
  const CachingScheme* scheme_;
  const Realization* real_;
  std::vector<std::vector<int>> bs_files_;  ///< sorted, random schemes only
};

/// Draws B_C distinct files with P(file l) = b_l by systematic sampling:
/// files laid end to end on [0, sum b), picks at u, u+1, ..., u+B_C-1.
std::vector<int> sample_cache(std::span<const double> probs, int cache_files, double u);

struct Association {
  std::vector<int> serving;             ///< BS index per user, -1 if no BS holds the file
  std::vector<std::uint8_t> cache_hit;  ///< served from the BS cache (else backhaul)
  long empty_candidates = 0;
};

/// Users requesting a cached file attach to the nearest BS storing it;
/// others attach to the nearest BS. Distances are toroidal, ties go to the
/// lower BS index.
Association associate(const Realization& real, const CachingScheme& scheme,
                      const CacheState& caches);

/// Scheduling at one BS: every cache hit is served; if more than B_B users
/// need the backhaul, B_B of them are chosen uniformly at random.
std::vector<std::uint8_t> schedule_bs(std::span<const std::uint8_t> cache_hit, int backhaul_files,
                                      Engine& rng);

struct Schedule {
  std::vector<std::uint8_t> scheduled;  ///< per user
  std::vector<int> load;                ///< G0 per BS
};

Schedule schedule(const Realization& real, const Association& assoc, int backhaul_files,
                  Engine& rng);

struct SimOutcome {
  double p_hat = 0.0;
  double ci95 = 0.0;        ///< reported half-width, max of the two below
  double wilson_half = 0.0; ///< Wilson score interval over pooled users
  double batch_half = 0.0;  ///< normal interval from per-trial ratios (0 for one trial)
  long n_users = 0;
  long successes = 0;
  long backhaul_dropped = 0;
  long phy_failures = 0;
  long empty_candidates = 0;
  int trials = 0;
  std::vector<long> trial_users;      ///< per-trial counts, for pooling
  std::vector<long> trial_successes;

  double empty_rate() const { return n_users > 0 ? double(empty_candidates) / n_users : 0.0; }
  /// Appends another batch of trials; call finalize() afterwards.
  void merge(const SimOutcome& other);
  /// Recomputes p_hat and the intervals from the counts.
  void finalize();
};

/// SIR-based success for every user of one realization. Unscheduled users
/// and users without a candidate BS count as failures. A user with no
/// co-channel interferer always succeeds.
SimOutcome evaluate(const Realization& real, const CachingScheme& scheme, const Association& assoc,
                    const Schedule& sched, const SystemConfig& cfg, Engine& fading);

/// Pools evaluate() over n_trials realizations (or redraws of one realization
/// in fixed mode). Trial t uses streams derived from (base_seed, t).
SimOutcome estimate_p(const SystemConfig& cfg, const Popularity& rho, const CachingScheme& scheme,
                      int n_trials, std::uint64_t base_seed, const SimSettings& settings = {});

struct LoadingStats {
  std::vector<double> mean_k;    ///< user-weighted mean requests per file at the serving BS
  std::vector<double> half_ci;   ///< 95% half-width from per-trial batches
  long n_users = 0;
};

/// Mean loading vector seen by a randomly chosen user's serving BS.
LoadingStats measure_loading(const SystemConfig& cfg, const Popularity& rho,
                             const CachingScheme& scheme, int n_trials, std::uint64_t base_seed,
                             const SimSettings& settings = {});

struct PhyAtLoad {
  /// Every associated user, rate threshold computed with G0 forced to g.
  SimOutcome forced;
  /// Only scheduled users whose BS actually serves g users.
  SimOutcome conditioned;
};

/// PHY success against the threshold 2^(M g tau / W) - 1.
PhyAtLoad phy_success_at_load(const SystemConfig& cfg, const Popularity& rho,
                              const CachingScheme& scheme, int load, int n_trials,
                              std::uint64_t base_seed, const SimSettings& settings = {});

}  // namespace freqcache
