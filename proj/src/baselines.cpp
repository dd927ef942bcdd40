#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "freqcache/optimizer.hpp"

namespace freqcache {

namespace {

constexpr double kTieTol = 1e-12;

// Water-filling b_l = clamp(sqrt(rho_l beta / lambda) - beta, 0, 1) over the
// first `support` files with sum b = B_C.
std::vector<double> fill_probabilities(const Popularity& rho, int support, int cache_files,
                                       double beta) {
  std::vector<double> b(rho.size(), 0.0);
  if (support == cache_files || beta <= 0.0) {
    for (int l = 0; l < cache_files; ++l) b[l] = 1.0;
    return b;
  }
  auto share = [&](int l, double lambda) {
    return std::clamp(std::sqrt(rho[l] * beta / lambda) - beta, 0.0, 1.0);
  };
  auto fill = [&](double lambda) {
    double s = 0.0;
    for (int l = 0; l < support; ++l) s += share(l, lambda);
    return s;
  };
  double lo = rho[support - 1] * beta / ((1.0 + beta) * (1.0 + beta));
  double hi = rho[0] / beta;
  if (!(lo > 0.0)) lo = hi * 1e-300;
  double lambda = std::sqrt(lo * hi);
  for (int it = 0; it < 200; ++it) {
    lambda = std::sqrt(lo * hi);
    const double total = fill(lambda);
    if (std::abs(total - cache_files) <= 1e-12) break;
    (total > cache_files ? lo : hi) = lambda;
    if (hi <= lo * (1.0 + 1e-16)) break;
  }
  for (int l = 0; l < support; ++l) b[l] = share(l, lambda);
  return b;
}

double random_caching_surrogate(const std::vector<double>& b, const std::vector<double>& k_tilde,
                                const SystemConfig& cfg, const Popularity& rho) {
  double hits = 0.0;
  double misses = 0.0;
  for (std::size_t l = 0; l < b.size(); ++l) (b[l] > 0.0 ? hits : misses) += k_tilde[l];
  const double g = hits + std::min(misses, static_cast<double>(cfg.backhaul_files));
  const double beta = beta_factor(1, g, cfg);
  const double share = misses <= cfg.backhaul_files ? 1.0 : cfg.backhaul_files / misses;
  double value = 0.0;
  for (std::size_t l = 0; l < b.size(); ++l)
    value += rho[l] * (b[l] > 0.0 ? b[l] / (b[l] + beta) : share / (1.0 + beta));
  return value;
}

CacheAllocation top_files(int num_groups, const SystemConfig& cfg) {
  CacheAllocation a;
  a.num_groups = num_groups;
  a.q.assign(cfg.library_size, 0);
  for (int l = 0; l < cfg.cache_files; ++l) a.q[l] = num_groups;
  return a;
}

}  // namespace

std::string_view scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Proposed: return "proposed";
    case SchemeKind::Mpc: return "mpc";
    case SchemeKind::Gcp: return "gcp";
    case SchemeKind::MpcReuse: return "mpc-reuse";
    case SchemeKind::GcpReuse: return "gcp-reuse";
  }
  return "unknown";
}

SchemeKind parse_scheme(std::string_view name) {
  for (auto k : {SchemeKind::Proposed, SchemeKind::Mpc, SchemeKind::Gcp, SchemeKind::MpcReuse,
                 SchemeKind::GcpReuse})
    if (scheme_name(k) == name) return k;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

std::vector<double> optimize_random_caching(const SystemConfig& cfg, const Popularity& rho) {
  const int L = static_cast<int>(rho.size());
  const int B_C = cfg.cache_files;
  if (B_C < 0 || B_C > L) throw std::invalid_argument("optimize_random_caching: B_C outside [0, L]");
  const auto k_tilde = expected_loading(cfg, rho);

  std::vector<double> best;
  double best_value = 0.0;
  for (int support = B_C; support <= L; ++support) {
    const double g = expected_effective_load(k_tilde, support, cfg.backhaul_files);
    const double beta = beta_factor(1, g, cfg);
    auto b = fill_probabilities(rho, support, B_C, beta);
    const double value = random_caching_surrogate(b, k_tilde, cfg, rho);
    if (best.empty() || value > best_value + kTieTol) {
      best = std::move(b);
      best_value = value;
    }
    if (beta <= 0.0) break;  // every support collapses to the top-B_C fill
  }
  return best;
}

BaselineSpec make_baseline(SchemeKind kind, const SystemConfig& cfg, const Popularity& rho,
                           int max_groups) {
  if (max_groups < 1) throw std::invalid_argument("make_baseline: M_max must be >= 1");
  BaselineSpec spec;
  spec.kind = kind;
  std::ostringstream desc;
  switch (kind) {
    case SchemeKind::Proposed: {
      const OptResult r = optimize(cfg, rho, max_groups);
      spec.num_groups = r.num_groups;
      spec.allocation = r.q_int;
      spec.cached_files = r.cached_files;
      spec.analytic_p = r.achieved;
      spec.upper_bound = r.upper_bound;
      desc << "joint reuse/caching, M=" << r.num_groups << ", L'=" << r.cached_files;
      break;
    }
    case SchemeKind::Mpc: {
      spec.allocation = top_files(1, cfg);
      spec.cached_files = cfg.cache_files;
      spec.analytic_p = approx_success(spec.allocation, cfg, rho).aggregate_p;
      desc << "top " << cfg.cache_files << " files at every BS, reuse 1";
      break;
    }
    case SchemeKind::MpcReuse: {
      for (int M = 1; M <= max_groups; ++M) {
        auto a = top_files(M, cfg);
        const double p = approx_success(a, cfg, rho).aggregate_p;
        if (M == 1 || p > spec.analytic_p + kTieTol) {
          spec.num_groups = M;
          spec.allocation = std::move(a);
          spec.analytic_p = p;
        }
      }
      spec.cached_files = cfg.cache_files;
      desc << "top " << cfg.cache_files << " files at every BS, M=" << spec.num_groups;
      break;
    }
    case SchemeKind::Gcp:
    case SchemeKind::GcpReuse: {
      spec.random_caching = true;
      spec.cache_probs = optimize_random_caching(cfg, rho);
      spec.cached_files = static_cast<int>(std::count_if(
          spec.cache_probs.begin(), spec.cache_probs.end(), [](double b) { return b > 0.0; }));
      desc << "independent random caching over " << spec.cached_files << " files";
      break;
    }
  }
  spec.group_candidates = {spec.num_groups};
  if (kind == SchemeKind::GcpReuse) {
    spec.group_candidates.clear();
    for (int M = 1; M <= max_groups; ++M) spec.group_candidates.push_back(M);
  }
  spec.description = desc.str();
  return spec;
}

}  // namespace freqcache
