#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "freqcache/analytic.hpp"
#include "freqcache/core_model.hpp"

namespace freqcache {

/// Relaxed allocation for a fixed number of groups M and cached-file count L'.
struct SubproblemSolution {
  int num_groups = 0;
  int cached_files = 0;        ///< L'
  std::vector<double> q_real;  ///< L' entries in [1, M], nonincreasing, summing to M * B_C
  double lambda_star = 0.0;    ///< multiplier of the capacity constraint
  double g_tilde = 0.0;
  double beta = 0.0;
  double objective = 0.0;      ///< sum_l rho_l beta / (q_l + beta) over cached files
  int iterations = 0;
};

/// Water-filling q_l = clamp(sqrt(rho_l / lambda) - beta, 1, M), with lambda
/// found by bisection so that the entries sum to M * B_C within 1e-9.
/// Throws std::invalid_argument unless B_C <= L' <= min(M * B_C, L), and
/// NumericalError if the multiplier cannot be bracketed.
SubproblemSolution solve_subproblem(int num_groups, int cached_files, const SystemConfig& cfg,
                                    const Popularity& rho);

struct OptResult {
  int num_groups = 1;             ///< selected M
  int cached_files = 0;           ///< selected L'
  CacheAllocation q_int;          ///< rounded allocation
  std::vector<double> q_relaxed;  ///< relaxed solution at the selected (M, L')
  double upper_bound = 0.0;       ///< approximate success at the relaxed solution
  double achieved = 0.0;          ///< approximate success at q_int
};

/// Enumerates M = 1..M_max and L' = B_C..min(M B_C, L), keeps the relaxed
/// solution with the best approximate success (ties go to smaller M, then
/// smaller L'), floors it, and hands the leftover capacity out one unit at a
/// time to the file whose outage term drops the most.
///
/// `parallel` solves each M on its own thread; the selected plan is identical.
OptResult optimize(const SystemConfig& cfg, const Popularity& rho, int max_groups,
                   bool parallel = false);

enum class SchemeKind { Proposed, Mpc, Gcp, MpcReuse, GcpReuse };

std::string_view scheme_name(SchemeKind kind);
/// Accepts the names produced by scheme_name(); throws std::invalid_argument.
SchemeKind parse_scheme(std::string_view name);

/// A caching scheme ready for evaluation. Group-based schemes carry an
/// allocation (every BS in a group stores the same files); random schemes
/// carry per-file caching probabilities that each BS samples independently.
struct BaselineSpec {
  SchemeKind kind = SchemeKind::Proposed;
  int num_groups = 1;
  std::vector<int> group_candidates;  ///< M values the caller may still choose from
  bool random_caching = false;
  CacheAllocation allocation;         ///< group-based schemes
  std::vector<double> cache_probs;    ///< random schemes, sums to B_C
  int cached_files = 0;               ///< L' (files with q > 0 or b > 0)
  double analytic_p = -1.0;           ///< approximate success, < 0 when not defined
  double upper_bound = -1.0;          ///< relaxed bound, proposed scheme only
  std::string description;
};

/// Continuous random-caching probabilities maximizing the surrogate
/// sum_l rho_l b_l / (b_l + beta(1, g)) with b in [0, 1] and sum b = B_C,
/// enumerating the candidate support size.
std::vector<double> optimize_random_caching(const SystemConfig& cfg, const Popularity& rho);

/// Builds one of the comparison schemes:
///  - Proposed: optimize().
///  - Mpc: M = 1, top B_C files everywhere.
///  - MpcReuse: top B_C files everywhere with M groups, M maximizing the
///    approximate success.
///  - Gcp: M = 1, random caching from optimize_random_caching().
///  - GcpReuse: the same probabilities with M left to the caller, who picks
///    from group_candidates (num_groups starts at 1).
BaselineSpec make_baseline(SchemeKind kind, const SystemConfig& cfg, const Popularity& rho,
                           int max_groups);

}  // namespace freqcache
