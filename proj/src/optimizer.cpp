#include "freqcache/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

namespace freqcache {

namespace {

constexpr double kCapacityTol = 1e-9;
constexpr int kMaxBisection = 200;
constexpr double kTieTol = 1e-12;

double clamp_fill(double rho, double lambda, double beta, double lo, double hi) {
  return std::clamp(std::sqrt(rho / lambda) - beta, lo, hi);
}

struct Candidate {
  double p = 0.0;
  SubproblemSolution sol;
};

std::vector<Candidate> solve_for_groups(int M, const SystemConfig& cfg, const Popularity& rho) {
  std::vector<Candidate> out;
  const int hi = std::min(M * cfg.cache_files, cfg.library_size);
  for (int lp = cfg.cache_files; lp <= hi; ++lp) {
    Candidate c;
    c.sol = solve_subproblem(M, lp, cfg, rho);
    c.p = approx_success_relaxed(M, c.sol.q_real, cfg, rho).aggregate_p;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

SubproblemSolution solve_subproblem(int num_groups, int cached_files, const SystemConfig& cfg,
                                    const Popularity& rho) {
  const int M = num_groups;
  const int Lp = cached_files;
  const int B_C = cfg.cache_files;
  if (M < 1) throw std::invalid_argument("solve_subproblem: M must be >= 1");
  if (static_cast<int>(rho.size()) != cfg.library_size)
    throw std::invalid_argument("solve_subproblem: popularity size differs from L");
  if (Lp < B_C || Lp > std::min(M * B_C, cfg.library_size))
    throw std::invalid_argument("solve_subproblem: need B_C <= L' <= min(M*B_C, L)");

  SubproblemSolution s;
  s.num_groups = M;
  s.cached_files = Lp;
  const auto k_tilde = expected_loading(cfg, rho);
  s.g_tilde = expected_effective_load(k_tilde, Lp, cfg.backhaul_files);
  s.beta = beta_factor(M, s.g_tilde, cfg);
  if (Lp == 0) return s;

  const double budget = static_cast<double>(M) * B_C;
  const double beta = s.beta;
  auto fill = [&](double lambda) {
    double sum = 0.0;
    for (int l = 0; l < Lp; ++l) sum += clamp_fill(rho[l], lambda, beta, 1.0, M);
    return sum;
  };

  double rho_min = rho[Lp - 1];
  const double rho_max = rho[0];
  if (!(rho_min > 0.0)) rho_min = rho_max * 1e-300;
  double lo = rho_min / ((M + beta) * (M + beta));
  double hi = rho_max / ((1.0 + beta) * (1.0 + beta));

  if (Lp * M == M * B_C) {
    // L' = B_C: the equality forces every entry to M.
    s.q_real.assign(Lp, M);
    s.lambda_star = lo;
  } else if (Lp == M * B_C) {
    s.q_real.assign(Lp, 1.0);
    s.lambda_star = hi;
  } else {
    if (fill(lo) < budget - kCapacityTol || fill(hi) > budget + kCapacityTol)
      throw NumericalError("solve_subproblem: multiplier bracket does not straddle capacity");
    double lambda = std::sqrt(lo * hi);
    for (s.iterations = 1; s.iterations <= kMaxBisection; ++s.iterations) {
      lambda = std::sqrt(lo * hi);
      const double total = fill(lambda);
      if (std::abs(total - budget) <= kCapacityTol * 1e-2) break;
      (total > budget ? lo : hi) = lambda;
      if (hi <= lo * (1.0 + 1e-16)) break;
    }
    s.lambda_star = lambda;
    s.q_real.resize(Lp);
    for (int l = 0; l < Lp; ++l) s.q_real[l] = clamp_fill(rho[l], lambda, beta, 1.0, M);
    double total = 0.0;
    for (double v : s.q_real) total += v;
    if (std::abs(total - budget) > kCapacityTol)
      throw NumericalError("solve_subproblem: bisection did not reach capacity tolerance");
  }
  for (int l = 0; l < Lp; ++l) s.objective += rho[l] * beta / (s.q_real[l] + beta);
  return s;
}

OptResult optimize(const SystemConfig& cfg, const Popularity& rho, int max_groups, bool parallel) {
  cfg.validate();
  if (max_groups < 1) throw std::invalid_argument("optimize: M_max must be >= 1");
  if (static_cast<int>(rho.size()) != cfg.library_size)
    throw std::invalid_argument("optimize: popularity size differs from L");

  std::vector<std::vector<Candidate>> per_m(max_groups);
  if (parallel) {
    std::vector<std::future<std::vector<Candidate>>> jobs;
    for (int M = 1; M <= max_groups; ++M)
      jobs.push_back(std::async(std::launch::async, solve_for_groups, M, std::cref(cfg),
                                std::cref(rho)));
    for (int i = 0; i < max_groups; ++i) per_m[i] = jobs[i].get();
  } else {
    for (int M = 1; M <= max_groups; ++M) per_m[M - 1] = solve_for_groups(M, cfg, rho);
  }

  const Candidate* best = nullptr;
  for (const auto& list : per_m)
    for (const auto& c : list)
      if (best == nullptr || c.p > best->p + kTieTol) best = &c;
  if (best == nullptr) throw std::logic_error("optimize: no candidate plans");

  const SubproblemSolution& sol = best->sol;
  const int M = sol.num_groups;
  OptResult r;
  r.num_groups = M;
  r.cached_files = sol.cached_files;
  r.q_relaxed = sol.q_real;
  r.upper_bound = best->p;

  std::vector<int> q(cfg.library_size, 0);
  long total = 0;
  for (int l = 0; l < sol.cached_files; ++l) {
    // Guard against 2.9999999999 flooring to 2 when the bisection lands a hair low.
    q[l] = static_cast<int>(std::floor(sol.q_real[l] + 1e-9));
    q[l] = std::clamp(q[l], 1, M);
    total += q[l];
  }
  const long budget = static_cast<long>(M) * cfg.cache_files;
  while (total < budget) {
    int pick = -1;
    double best_delta = 0.0;
    for (int l = 0; l < sol.cached_files; ++l) {
      if (q[l] >= M) continue;
      const double delta = rho[l] / (q[l] + 1 + sol.beta) - rho[l] / (q[l] + sol.beta);
      if (pick < 0 || delta < best_delta) {
        pick = l;
        best_delta = delta;
      }
    }
    if (pick < 0) break;
    ++q[pick];
    ++total;
  }
  // Near-tied popularities can leave a later file one unit ahead.
  std::stable_sort(q.begin(), q.end(), std::greater<>());

  r.q_int.num_groups = M;
  r.q_int.q = std::move(q);
  r.achieved = approx_success(r.q_int, cfg, rho).aggregate_p;
  return r;
}

}  // namespace freqcache
