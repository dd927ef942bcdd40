#pragma once

#include <span>
#include <vector>

#include "freqcache/core_model.hpp"
#include "freqcache/quadrature.hpp"

namespace freqcache {

/// Interference geometry factor
///   beta(M, g0) = (2/a) (2^t - 1)^(2/a) B'(2/a, 1 - 2/a, 2^-t),  t = M g0 tau / W.
/// Accepts fractional loads. Throws std::domain_error when alpha <= 2 and
/// std::invalid_argument when M < 1 or g0 < 0.
double beta_factor(int num_groups, double load, const SystemConfig& cfg);

/// Probability that a user requesting `file` is scheduled at a BS with
/// loading `k`: 1 for cached files, otherwise min(B_B / uncached demand, 1).
/// No uncached demand counts as no contention.
double sched_prob(const LoadingVector& k, int file, const CacheAllocation& alloc,
                  int backhaul_files);

/// Users simultaneously served: all cache hits plus at most B_B backhaul users.
int effective_load(const LoadingVector& k, const CacheAllocation& alloc, int backhaul_files);

/// PHY success given scheduling and load g0:
/// (lambda_access / lambda_interf) / (that ratio + beta(M, g0)), which is
/// q / (q + beta) for cached files and M / (M + beta) for uncached ones.
double phy_success(int file, const CacheAllocation& alloc, double load, const SystemConfig& cfg);

/// Mean per-file loading at the serving BS of a typical user:
/// rho_l (the user itself) + (9/7)(lambda_u / lambda_b) rho_l.
std::vector<double> expected_loading(const SystemConfig& cfg, const Popularity& rho);

struct AnalyticReport {
  std::vector<double> per_file_p;
  double aggregate_p = 0.0;
  double g_tilde = 0.0;  ///< effective load at the expected loading vector
  double beta = 0.0;
  std::vector<double> k_tilde;
};

/// Approximate success probability with the loading vector replaced by its
/// mean. Throws if the allocation is infeasible.
AnalyticReport approx_success(const CacheAllocation& alloc, const SystemConfig& cfg,
                              const Popularity& rho);

/// Same objective for a real-valued allocation (entries 0 or in [1, M]), used
/// to score relaxed optimizer solutions. Entries beyond q.size() count as 0.
AnalyticReport approx_success_relaxed(int num_groups, std::span<const double> q,
                                      const SystemConfig& cfg, const Popularity& rho);

/// Effective load when files [0, cached_files) are cached and the rest go
/// through the backhaul.
double expected_effective_load(std::span<const double> k_tilde, int cached_files,
                               int backhaul_files);

// ---------------------------------------------------------------------------
// Loading distribution and the truncated exact success probability.

/// Loading PMF of the BS serving the typical user, for the requested file:
/// Psi(x, y)(k) = Psibar(x, y)(k - 1), k >= 1.
double psi(double x, double y, int k);

/// Loading PMF for files other than the requested one, from the gamma
/// (shape 4.5, rate 3.5) area-biased cell-size law:
/// Psibar(x, y)(k) = 3.5^4.5/Gamma(4.5) (x/y)^k/k! Gamma(k+4.5)/(x/y+3.5)^(k+4.5).
/// Evaluated through lgamma.
double psi_bar(double x, double y, int k);

struct FilePmf {
  std::vector<double> mass;  ///< mass[k] for k = 0..k_max
  double tail = 0.0;         ///< probability beyond k_max
};

struct LoadPmf {
  std::vector<FilePmf> files;
  int k_max = 0;
  double tail_mass = 0.0;  ///< sum of per-file tails, a bound on the joint tail
};

/// Per-file marginal loading PMFs at the serving BS, given the requested file
/// and the serving group. For a cached requested file, `group` must store it.
/// Throws std::invalid_argument on bad inputs and NumericalError when the
/// truncated tail exceeds `tail_eps`.
LoadPmf load_pmf(const SystemConfig& cfg, const Popularity& rho, const CacheAllocation& alloc,
                 int file, int group, int k_max, double tail_eps = 1e-6);

struct ExactResult {
  double p = 0.0;
  double tail_bound = 0.0;  ///< upper bound on the mass dropped by truncation
  std::vector<double> per_file_p;
};

/// Success probability with the loading vector marginalized over its
/// truncated PMF (independent per-file marginals, averaged over the serving
/// group) instead of replaced by its mean. Limited to L <= 10.
ExactResult exact_success_small(const SystemConfig& cfg, const Popularity& rho,
                                const CacheAllocation& alloc, int k_max = 64,
                                double tail_eps = 1e-6);

}  // namespace freqcache
