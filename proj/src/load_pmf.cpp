#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "freqcache/analytic.hpp"

namespace freqcache {

namespace {

const double kLogNorm = 4.5 * std::log(3.5) - std::lgamma(4.5);

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

// Lazily filled beta(M, g) for integer loads g.
class BetaTable {
 public:
  BetaTable(int num_groups, const SystemConfig& cfg) : M_(num_groups), cfg_(cfg) {}
  double operator()(int g) {
    if (static_cast<std::size_t>(g) >= cache_.size())
      cache_.resize(g + 1, std::numeric_limits<double>::quiet_NaN());
    if (std::isnan(cache_[g])) cache_[g] = beta_factor(M_, g, cfg_);
    return cache_[g];
  }

 private:
  int M_;
  const SystemConfig& cfg_;
  std::vector<double> cache_;
};

}  // namespace

double psi_bar(double x, double y, int k) {
  if (k < 0) return 0.0;
  if (!(y > 0.0) || !(x >= 0.0)) throw std::invalid_argument("psi_bar: need x >= 0, y > 0");
  const double r = x / y;
  if (r == 0.0) return k == 0 ? 1.0 : 0.0;
  const double log_mass = kLogNorm + k * std::log(r) - std::lgamma(k + 1.0) +
                          std::lgamma(k + 4.5) - (k + 4.5) * std::log(r + 3.5);
  return std::exp(log_mass);
}

double psi(double x, double y, int k) { return k >= 1 ? psi_bar(x, y, k - 1) : 0.0; }

LoadPmf load_pmf(const SystemConfig& cfg, const Popularity& rho, const CacheAllocation& alloc,
                 int file, int group, int k_max, double tail_eps) {
  if (k_max < 1) throw std::invalid_argument("load_pmf: k_max must be >= 1");
  if (alloc.q.size() != rho.size()) throw std::invalid_argument("load_pmf: q/rho size mismatch");
  const PlacementMap placement = build_placement(alloc, cfg.cache_files);
  const int M = alloc.num_groups;
  const int L = static_cast<int>(rho.size());
  if (file < 0 || file >= L) throw std::out_of_range("load_pmf: file index");
  if (group < 0 || group >= M) throw std::out_of_range("load_pmf: group index");
  if (alloc.q[file] != 0 && !placement.stores(group, file))
    throw std::invalid_argument("load_pmf: serving group does not store the requested file");

  LoadPmf out;
  out.k_max = k_max;
  out.files.resize(L);
  for (int l = 0; l < L; ++l) {
    FilePmf& f = out.files[l];
    f.mass.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
    const double x = cfg.user_density * rho[l];
    const double y = alloc.q[l] != 0 ? alloc.q[l] * cfg.bs_density / M : cfg.bs_density;
    if (l == file) {
      for (int k = 1; k <= k_max; ++k) f.mass[k] = psi(x, y, k);
    } else if (alloc.q[l] != 0 && !placement.stores(group, l)) {
      f.mass[0] = 1.0;  // the serving group never receives requests for l
    } else {
      for (int k = 0; k <= k_max; ++k) f.mass[k] = psi_bar(x, y, k);
    }
    double kept = 0.0;
    for (double m : f.mass) kept += m;
    f.tail = std::max(0.0, 1.0 - kept);
    out.tail_mass += f.tail;
  }
  if (out.tail_mass > tail_eps)
    throw NumericalError("load_pmf: truncation tail exceeds tolerance; raise k_max");
  return out;
}

ExactResult exact_success_small(const SystemConfig& cfg, const Popularity& rho,
                                const CacheAllocation& alloc, int k_max, double tail_eps) {
  const int L = static_cast<int>(rho.size());
  if (L > 10) throw std::invalid_argument("exact_success_small: library limited to 10 files");
  if (static_cast<int>(alloc.q.size()) != L)
    throw std::invalid_argument("exact_success_small: q/rho size mismatch");
  const PlacementMap placement = build_placement(alloc, cfg.cache_files);
  const int M = alloc.num_groups;
  const int B_B = cfg.backhaul_files;
  BetaTable beta(M, cfg);

  ExactResult result;
  result.per_file_p.assign(L, 0.0);
  for (int l0 = 0; l0 < L; ++l0) {
    std::vector<int> groups = placement.groups_of(l0);
    if (groups.empty()) {
      groups.resize(M);
      for (int m = 0; m < M; ++m) groups[m] = m;
    }
    const bool cached = alloc.q[l0] != 0;
    const double ratio = cached ? alloc.q[l0] : M;

    double p_sum = 0.0;
    double tail_sum = 0.0;
    for (int m0 : groups) {
      const LoadPmf pmf = load_pmf(cfg, rho, alloc, l0, m0, k_max, tail_eps);
      std::vector<double> hits{1.0};
      std::vector<double> misses{1.0};
      for (int l = 0; l < L; ++l) {
        auto& acc = alloc.q[l] != 0 ? hits : misses;
        acc = convolve(acc, pmf.files[l].mass);
      }
      double p = 0.0;
      for (std::size_t u = 0; u < misses.size(); ++u) {
        if (misses[u] == 0.0) continue;
        double sched = 1.0;
        if (!cached && static_cast<int>(u) > B_B) sched = static_cast<double>(B_B) / u;
        if (sched == 0.0) continue;
        const int served_misses = std::min(static_cast<int>(u), B_B);
        double inner = 0.0;
        for (std::size_t a = 0; a < hits.size(); ++a) {
          if (hits[a] == 0.0) continue;
          inner += hits[a] * ratio / (ratio + beta(static_cast<int>(a) + served_misses));
        }
        p += misses[u] * sched * inner;
      }
      p_sum += p;
      tail_sum += pmf.tail_mass;
    }
    const double n = static_cast<double>(groups.size());
    result.per_file_p[l0] = p_sum / n;
    result.p += rho[l0] * result.per_file_p[l0];
    result.tail_bound += rho[l0] * tail_sum / n;
  }
  return result;
}

}  // namespace freqcache
