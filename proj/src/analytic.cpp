#include "freqcache/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace freqcache {

namespace {

// min(B_B / demand, 1) with 0/0 read as 1.
double backhaul_share(double uncached_demand, double backhaul_files) {
  if (uncached_demand <= backhaul_files) return 1.0;
  return backhaul_files / uncached_demand;
}

void check_file(int file, std::size_t n) {
  if (file < 0 || static_cast<std::size_t>(file) >= n)
    throw std::out_of_range("file index out of range");
}

}  // namespace

double beta_factor(int num_groups, double load, const SystemConfig& cfg) {
  if (!(cfg.pathloss_exp > 2.0)) throw std::domain_error("beta_factor: alpha must exceed 2");
  if (num_groups < 1) throw std::invalid_argument("beta_factor: M must be >= 1");
  if (!(load >= 0.0)) throw std::invalid_argument("beta_factor: load must be >= 0");

  const double t = num_groups * load * cfg.rate_ratio();
  if (t == 0.0) return 0.0;
  const double x = 2.0 / cfg.pathloss_exp;
  const double y = 1.0 - x;
  const double ln2t = t * std::numbers::ln2;
  const double threshold = std::expm1(ln2t);   // 2^t - 1
  const double width = -std::expm1(-ln2t);     // 1 - 2^-t
  return x * std::pow(threshold, x) * incomplete_beta_tail(x, y, width);
}

double sched_prob(const LoadingVector& k, int file, const CacheAllocation& alloc,
                  int backhaul_files) {
  check_file(file, alloc.q.size());
  if (k.counts.size() != alloc.q.size()) throw std::invalid_argument("sched_prob: shape mismatch");
  if (alloc.q[file] != 0) return 1.0;
  long demand = 0;
  for (std::size_t l = 0; l < alloc.q.size(); ++l)
    if (alloc.q[l] == 0) demand += k.counts[l];
  return backhaul_share(static_cast<double>(demand), backhaul_files);
}

int effective_load(const LoadingVector& k, const CacheAllocation& alloc, int backhaul_files) {
  if (k.counts.size() != alloc.q.size())
    throw std::invalid_argument("effective_load: shape mismatch");
  int hits = 0;
  int misses = 0;
  for (std::size_t l = 0; l < alloc.q.size(); ++l) (alloc.q[l] != 0 ? hits : misses) += k.counts[l];
  return hits + std::min(misses, backhaul_files);
}

double phy_success(int file, const CacheAllocation& alloc, double load, const SystemConfig& cfg) {
  check_file(file, alloc.q.size());
  const int M = alloc.num_groups;
  // lambda_access / lambda_interf: q_l / M * lambda_b over lambda_b / M, or M when uncached.
  const double ratio = alloc.q[file] == 0 ? M : alloc.q[file];
  return ratio / (ratio + beta_factor(M, load, cfg));
}

std::vector<double> expected_loading(const SystemConfig& cfg, const Popularity& rho) {
  const double scale = 1.0 + 9.0 / 7.0 * cfg.users_per_bs();
  std::vector<double> k(rho.size());
  for (std::size_t l = 0; l < rho.size(); ++l) k[l] = scale * rho[l];
  return k;
}

double expected_effective_load(std::span<const double> k_tilde, int cached_files,
                               int backhaul_files) {
  double hits = 0.0;
  double misses = 0.0;
  for (std::size_t l = 0; l < k_tilde.size(); ++l)
    (static_cast<int>(l) < cached_files ? hits : misses) += k_tilde[l];
  return hits + std::min(misses, static_cast<double>(backhaul_files));
}

AnalyticReport approx_success_relaxed(int num_groups, std::span<const double> q,
                                      const SystemConfig& cfg, const Popularity& rho) {
  if (num_groups < 1) throw std::invalid_argument("approx_success: M must be >= 1");
  if (q.size() > rho.size()) throw std::invalid_argument("approx_success: q longer than library");
  const std::size_t L = rho.size();
  auto q_at = [&](std::size_t l) { return l < q.size() ? q[l] : 0.0; };

  AnalyticReport r;
  r.k_tilde = expected_loading(cfg, rho);
  double hits = 0.0;
  double misses = 0.0;
  for (std::size_t l = 0; l < L; ++l) (q_at(l) != 0.0 ? hits : misses) += r.k_tilde[l];
  r.g_tilde = hits + std::min(misses, static_cast<double>(cfg.backhaul_files));
  r.beta = beta_factor(num_groups, r.g_tilde, cfg);

  const double M = num_groups;
  const double uncached_p = M / (M + r.beta) * backhaul_share(misses, cfg.backhaul_files);
  r.per_file_p.resize(L);
  r.aggregate_p = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    const double ql = q_at(l);
    r.per_file_p[l] = ql != 0.0 ? ql / (ql + r.beta) : uncached_p;
    r.aggregate_p += rho[l] * r.per_file_p[l];
  }
  return r;
}

AnalyticReport approx_success(const CacheAllocation& alloc, const SystemConfig& cfg,
                              const Popularity& rho) {
  SystemConfig shape = cfg;
  shape.library_size = static_cast<int>(rho.size());
  const auto report = validate_allocation(alloc, shape);
  if (!report.feasible()) throw std::invalid_argument("approx_success: " + report.summary());
  std::vector<double> q(alloc.q.begin(), alloc.q.end());
  return approx_success_relaxed(alloc.num_groups, q, cfg, rho);
}

}  // namespace freqcache
