#include "freqcache/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace freqcache {

namespace {

constexpr double kZ95 = 1.959963984540054;

std::uint64_t geometry_trial(std::uint64_t trial, const SimSettings& s) {
  return s.fixed_realization ? 0 : trial;
}

long draw_poisson(double mean, Engine& rng) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<long> dist(mean);
  return dist(rng);
}

std::vector<Point> uniform_points(long n, double side, Engine& rng) {
  std::uniform_real_distribution<double> coord(0.0, side);
  std::vector<Point> pts(static_cast<std::size_t>(n));
  for (auto& p : pts) {
    p.x = coord(rng);
    p.y = coord(rng);
    // uniform_real_distribution may round up to the upper bound.
    if (p.x >= side) p.x = 0.0;
    if (p.y >= side) p.y = 0.0;
  }
  return pts;
}

// k distinct indices out of n, uniformly, in draw order.
std::vector<int> pick_subset(int n, int k, Engine& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> d(i, n - 1);
    std::swap(idx[i], idx[d(rng)]);
  }
  idx.resize(k);
  return idx;
}

std::vector<std::vector<int>> members_by_group(const Realization& real) {
  std::vector<std::vector<int>> g(real.num_groups);
  for (std::size_t n = 0; n < real.bs.size(); ++n) g[real.bs_group[n]].push_back(static_cast<int>(n));
  return g;
}

double path_gain(double d2, double alpha) {
  if (alpha == 4.0) return 1.0 / (d2 * d2);
  return std::pow(d2, -0.5 * alpha);
}

// Signal-to-interference ratio of user u served by BS s with fresh Rayleigh
// draws on every link; +inf without co-channel interferers.
double draw_sir(const Realization& real, int u, int s, const std::vector<int>& group,
                double alpha, Engine& fading) {
  std::exponential_distribution<double> fade(1.0);
  const Point up = real.users[u];
  const double signal = fade(fading) * path_gain(torus_dist2(up, real.bs[s], real.side), alpha);
  double interference = 0.0;
  for (int n : group) {
    if (n == s) continue;
    interference += fade(fading) * path_gain(torus_dist2(up, real.bs[n], real.side), alpha);
  }
  if (interference == 0.0) return std::numeric_limits<double>::infinity();
  return signal / interference;
}

double sir_threshold(int num_groups, double load, const SystemConfig& cfg) {
  return std::expm1(num_groups * load * cfg.rate_ratio() * std::log(2.0));
}

bool meets(double sir, double threshold) {
  if (std::isinf(sir)) return true;
  return sir >= threshold;
}

// Runs fn(t) for t < n on up to `threads` workers; results in trial order.
template <class R, class Fn>
std::vector<R> run_trials(int n, int threads, Fn fn) {
  std::vector<R> out(n);
  const int workers = std::clamp(threads, 1, std::max(n, 1));
  if (workers == 1) {
    for (int t = 0; t < n; ++t) out[t] = fn(t);
    return out;
  }
  std::vector<std::future<void>> jobs;
  for (int w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (int t = w; t < n; t += workers) out[t] = fn(t);
    }));
  }
  for (auto& j : jobs) j.get();
  return out;
}

}  // namespace

double window_side(const SystemConfig& cfg, int num_groups, const SimSettings& settings) {
  if (settings.window_side > 0.0) return settings.window_side;
  const int groups = settings.window_groups > 0 ? settings.window_groups : num_groups;
  return std::sqrt(settings.bs_per_group * groups / cfg.bs_density);
}

Realization generate(const SystemConfig& cfg, const Popularity& rho, int num_groups, double side,
                     std::uint64_t seed, std::uint64_t trial, bool fixed_geometry) {
  if (num_groups < 1) throw std::invalid_argument("generate: num_groups must be >= 1");
  if (!(side > 0.0)) throw std::invalid_argument("generate: window side must be positive");
  const std::uint64_t geo = fixed_geometry ? 0 : trial;
  const double area = side * side;

  Realization r;
  r.side = side;
  r.num_groups = num_groups;

  Engine bs_rng = make_stream(seed, geo, Stream::BsPositions);
  r.bs = uniform_points(draw_poisson(cfg.bs_density * area, bs_rng), side, bs_rng);

  Engine group_rng = make_stream(seed, geo, Stream::Grouping);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  r.bs_group.resize(r.bs.size());
  for (auto& g : r.bs_group) g = std::min(static_cast<int>(unit(group_rng) * num_groups), num_groups - 1);

  Engine user_rng = make_stream(seed, geo, Stream::UserPositions);
  r.users = uniform_points(draw_poisson(cfg.user_density * area, user_rng), side, user_rng);

  Engine req_rng = make_stream(seed, trial, Stream::Requests);
  std::vector<double> cdf(rho.size());
  std::partial_sum(rho.probs().begin(), rho.probs().end(), cdf.begin());
  const double total = cdf.empty() ? 0.0 : cdf.back();
  r.user_request.resize(r.users.size());
  for (auto& req : r.user_request) {
    const double u = unit(req_rng) * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    req = static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1));
  }
  return r;
}

void write_realization_csv(std::ostream& os, const Realization& real) {
  os << "kind,x,y,tag\n";
  for (std::size_t n = 0; n < real.bs.size(); ++n)
    os << "bs," << real.bs[n].x << ',' << real.bs[n].y << ',' << real.bs_group[n] << '\n';
  for (std::size_t u = 0; u < real.users.size(); ++u)
    os << "user," << real.users[u].x << ',' << real.users[u].y << ',' << real.user_request[u] + 1
       << '\n';
}

CachingScheme CachingScheme::grouped(const CacheAllocation& alloc, int cache_files) {
  CachingScheme s;
  s.num_groups = alloc.num_groups;
  s.cache_files = cache_files;
  s.placement = build_placement(alloc, cache_files);
  return s;
}

CachingScheme CachingScheme::random(std::vector<double> probs, int num_groups, int cache_files) {
  if (num_groups < 1) throw std::invalid_argument("random caching: num_groups must be >= 1");
  for (double b : probs)
    if (!(b >= 0.0 && b <= 1.0 + 1e-12))
      throw std::invalid_argument("random caching: probabilities must lie in [0, 1]");
  CachingScheme s;
  s.num_groups = num_groups;
  s.cache_files = cache_files;
  s.cache_probs = std::move(probs);
  return s;
}

bool CachingScheme::cached_anywhere(int file) const {
  if (placement) return placement->cached(file);
  return cache_probs[file] > 0.0;
}

std::vector<int> sample_cache(std::span<const double> probs, int cache_files, double u) {
  std::vector<int> out;
  if (cache_files <= 0) return out;
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (!(total > 0.0)) return out;
  // Stretch slightly when the probabilities sum a hair under B_C.
  const double step = std::min(1.0, total / cache_files);
  double acc = 0.0;
  int j = 0;
  for (std::size_t l = 0; l < probs.size() && j < cache_files; ++l) {
    acc += probs[l];
    while (j < cache_files && (u + j) * step < acc) {
      if (out.empty() || out.back() != static_cast<int>(l)) out.push_back(static_cast<int>(l));
      ++j;
    }
  }
  return out;
}

CacheState::CacheState(const CachingScheme& scheme, const Realization& real, Engine& rng)
    : scheme_(&scheme), real_(&real) {
  if (scheme.placement) {
    if (scheme.placement->num_groups() != real.num_groups)
      throw std::invalid_argument("CacheState: placement group count differs from realization");
    return;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  bs_files_.resize(real.bs.size());
  for (auto& files : bs_files_) files = sample_cache(scheme.cache_probs, scheme.cache_files, unit(rng));
}

bool CacheState::stores(int bs, int file) const {
  if (scheme_->placement) return scheme_->placement->stores(real_->bs_group[bs], file);
  const auto& f = bs_files_[bs];
  return std::binary_search(f.begin(), f.end(), file);
}

Association associate(const Realization& real, const CachingScheme& scheme,
                      const CacheState& caches) {
  Association a;
  const std::size_t n_users = real.users.size();
  a.serving.assign(n_users, -1);
  a.cache_hit.assign(n_users, 0);
  if (real.bs.empty()) {
    a.empty_candidates = static_cast<long>(n_users);
    return a;
  }
  const TorusGrid grid(real.side, real.bs);
  for (std::size_t u = 0; u < n_users; ++u) {
    const int file = real.user_request[u];
    if (scheme.cached_anywhere(file)) {
      const auto hit = grid.nearest(real.users[u], [&](int n) { return caches.stores(n, file); });
      if (hit.index < 0) {
        ++a.empty_candidates;
        continue;
      }
      a.serving[u] = hit.index;
      a.cache_hit[u] = 1;
    } else {
      a.serving[u] = grid.nearest(real.users[u]).index;
    }
  }
  return a;
}

std::vector<std::uint8_t> schedule_bs(std::span<const std::uint8_t> cache_hit, int backhaul_files,
                                      Engine& rng) {
  std::vector<std::uint8_t> out(cache_hit.size(), 0);
  std::vector<int> waiting;
  for (std::size_t i = 0; i < cache_hit.size(); ++i) {
    if (cache_hit[i]) out[i] = 1;
    else waiting.push_back(static_cast<int>(i));
  }
  const int n = static_cast<int>(waiting.size());
  const int quota = std::max(backhaul_files, 0);
  if (n <= quota) {
    for (int i : waiting) out[i] = 1;
  } else {
    for (int k : pick_subset(n, quota, rng)) out[waiting[k]] = 1;
  }
  return out;
}

Schedule schedule(const Realization& real, const Association& assoc, int backhaul_files,
                  Engine& rng) {
  Schedule s;
  const std::size_t n_users = real.users.size();
  s.scheduled.assign(n_users, 0);
  s.load.assign(real.bs.size(), 0);
  std::vector<std::vector<int>> waiting(real.bs.size());
  for (std::size_t u = 0; u < n_users; ++u) {
    const int bs = assoc.serving[u];
    if (bs < 0) continue;
    if (assoc.cache_hit[u]) {
      s.scheduled[u] = 1;
      ++s.load[bs];
    } else {
      waiting[bs].push_back(static_cast<int>(u));
    }
  }
  const int quota = std::max(backhaul_files, 0);
  for (std::size_t bs = 0; bs < waiting.size(); ++bs) {
    const auto& w = waiting[bs];
    const int n = static_cast<int>(w.size());
    if (n <= quota) {
      for (int u : w) s.scheduled[u] = 1;
      s.load[bs] += n;
    } else {
      for (int k : pick_subset(n, quota, rng)) s.scheduled[w[k]] = 1;
      s.load[bs] += quota;
    }
  }
  return s;
}

void SimOutcome::merge(const SimOutcome& other) {
  n_users += other.n_users;
  successes += other.successes;
  backhaul_dropped += other.backhaul_dropped;
  phy_failures += other.phy_failures;
  empty_candidates += other.empty_candidates;
  trials += other.trials;
  trial_users.insert(trial_users.end(), other.trial_users.begin(), other.trial_users.end());
  trial_successes.insert(trial_successes.end(), other.trial_successes.begin(),
                         other.trial_successes.end());
}

void SimOutcome::finalize() {
  if (n_users <= 0) {
    p_hat = ci95 = wilson_half = batch_half = 0.0;
    return;
  }
  const double n = static_cast<double>(n_users);
  p_hat = successes / n;
  const double z2 = kZ95 * kZ95;
  wilson_half = kZ95 / (1.0 + z2 / n) * std::sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n));
  batch_half = 0.0;
  const std::size_t t_count = trial_users.size();
  if (t_count >= 2) {
    double ss = 0.0;
    for (std::size_t t = 0; t < t_count; ++t) {
      const double e = trial_successes[t] - p_hat * trial_users[t];
      ss += e * e;
    }
    const double var = ss * t_count / (t_count - 1.0) / (n * n);
    batch_half = kZ95 * std::sqrt(var);
  }
  ci95 = std::max(wilson_half, batch_half);
}

SimOutcome evaluate(const Realization& real, const CachingScheme& scheme, const Association& assoc,
                    const Schedule& sched, const SystemConfig& cfg, Engine& fading) {
  (void)scheme;
  const auto groups = members_by_group(real);
  SimOutcome out;
  out.trials = 1;
  out.n_users = static_cast<long>(real.users.size());
  out.empty_candidates = assoc.empty_candidates;
  for (std::size_t u = 0; u < real.users.size(); ++u) {
    const int bs = assoc.serving[u];
    if (bs < 0) continue;
    if (!sched.scheduled[u]) {
      ++out.backhaul_dropped;
      continue;
    }
    const double sir = draw_sir(real, static_cast<int>(u), bs, groups[real.bs_group[bs]],
                                cfg.pathloss_exp, fading);
    if (meets(sir, sir_threshold(real.num_groups, sched.load[bs], cfg))) ++out.successes;
    else ++out.phy_failures;
  }
  out.trial_users = {out.n_users};
  out.trial_successes = {out.successes};
  out.finalize();
  return out;
}

SimOutcome estimate_p(const SystemConfig& cfg, const Popularity& rho, const CachingScheme& scheme,
                      int n_trials, std::uint64_t base_seed, const SimSettings& settings) {
  if (n_trials < 1) throw std::invalid_argument("estimate_p: n_trials must be >= 1");
  const int M = scheme.num_groups;
  const double side = window_side(cfg, M, settings);
  auto per_trial = run_trials<SimOutcome>(n_trials, settings.threads, [&](int t) {
    const auto trial = static_cast<std::uint64_t>(t);
    const Realization real =
        generate(cfg, rho, M, side, base_seed, trial, settings.fixed_realization);
    Engine cache_rng = make_stream(base_seed, geometry_trial(trial, settings), Stream::RandomCaches);
    const CacheState caches(scheme, real, cache_rng);
    const Association assoc = associate(real, scheme, caches);
    Engine sched_rng = make_stream(base_seed, trial, Stream::Scheduling);
    const Schedule sched = schedule(real, assoc, cfg.backhaul_files, sched_rng);
    Engine fading = make_stream(base_seed, trial, Stream::Fading);
    return evaluate(real, scheme, assoc, sched, cfg, fading);
  });
  SimOutcome total;
  for (const auto& o : per_trial) total.merge(o);
  total.finalize();
  return total;
}

LoadingStats measure_loading(const SystemConfig& cfg, const Popularity& rho,
                             const CachingScheme& scheme, int n_trials, std::uint64_t base_seed,
                             const SimSettings& settings) {
  if (n_trials < 1) throw std::invalid_argument("measure_loading: n_trials must be >= 1");
  const int M = scheme.num_groups;
  const std::size_t L = rho.size();
  const double side = window_side(cfg, M, settings);

  struct Batch {
    std::vector<double> weighted;  // sum over users of K_l at the user's BS
    long users = 0;
  };
  auto batches = run_trials<Batch>(n_trials, settings.threads, [&](int t) {
    const auto trial = static_cast<std::uint64_t>(t);
    const Realization real =
        generate(cfg, rho, M, side, base_seed, trial, settings.fixed_realization);
    Engine cache_rng = make_stream(base_seed, geometry_trial(trial, settings), Stream::RandomCaches);
    const CacheState caches(scheme, real, cache_rng);
    const Association assoc = associate(real, scheme, caches);

    std::vector<std::pair<int, int>> pairs;  // (serving BS, file)
    for (std::size_t u = 0; u < real.users.size(); ++u)
      if (assoc.serving[u] >= 0) pairs.emplace_back(assoc.serving[u], real.user_request[u]);
    std::sort(pairs.begin(), pairs.end());

    Batch b;
    b.weighted.assign(L, 0.0);
    b.users = static_cast<long>(pairs.size());
    for (std::size_t i = 0; i < pairs.size();) {
      std::size_t end = i;
      while (end < pairs.size() && pairs[end].first == pairs[i].first) ++end;
      const double cell_users = static_cast<double>(end - i);
      for (std::size_t j = i; j < end;) {
        std::size_t k = j;
        while (k < end && pairs[k].second == pairs[j].second) ++k;
        b.weighted[pairs[j].second] += cell_users * static_cast<double>(k - j);
        j = k;
      }
      i = end;
    }
    return b;
  });

  LoadingStats stats;
  stats.mean_k.assign(L, 0.0);
  stats.half_ci.assign(L, 0.0);
  for (const auto& b : batches) {
    stats.n_users += b.users;
    for (std::size_t l = 0; l < L; ++l) stats.mean_k[l] += b.weighted[l];
  }
  if (stats.n_users == 0) return stats;
  const double n = static_cast<double>(stats.n_users);
  for (auto& m : stats.mean_k) m /= n;
  if (n_trials >= 2) {
    for (std::size_t l = 0; l < L; ++l) {
      double ss = 0.0;
      for (const auto& b : batches) {
        const double e = b.weighted[l] - stats.mean_k[l] * b.users;
        ss += e * e;
      }
      stats.half_ci[l] = kZ95 * std::sqrt(ss * n_trials / (n_trials - 1.0)) / n;
    }
  }
  return stats;
}

PhyAtLoad phy_success_at_load(const SystemConfig& cfg, const Popularity& rho,
                              const CachingScheme& scheme, int load, int n_trials,
                              std::uint64_t base_seed, const SimSettings& settings) {
  if (n_trials < 1) throw std::invalid_argument("phy_success_at_load: n_trials must be >= 1");
  if (load < 0) throw std::invalid_argument("phy_success_at_load: load must be >= 0");
  const int M = scheme.num_groups;
  const double side = window_side(cfg, M, settings);
  const double threshold = sir_threshold(M, load, cfg);

  auto per_trial = run_trials<PhyAtLoad>(n_trials, settings.threads, [&](int t) {
    const auto trial = static_cast<std::uint64_t>(t);
    const Realization real =
        generate(cfg, rho, M, side, base_seed, trial, settings.fixed_realization);
    Engine cache_rng = make_stream(base_seed, geometry_trial(trial, settings), Stream::RandomCaches);
    const CacheState caches(scheme, real, cache_rng);
    const Association assoc = associate(real, scheme, caches);
    Engine sched_rng = make_stream(base_seed, trial, Stream::Scheduling);
    const Schedule sched = schedule(real, assoc, cfg.backhaul_files, sched_rng);
    Engine fading = make_stream(base_seed, trial, Stream::Fading);
    const auto groups = members_by_group(real);

    PhyAtLoad r;
    for (std::size_t u = 0; u < real.users.size(); ++u) {
      const int bs = assoc.serving[u];
      if (bs < 0) continue;
      const double sir = draw_sir(real, static_cast<int>(u), bs, groups[real.bs_group[bs]],
                                  cfg.pathloss_exp, fading);
      const bool ok = meets(sir, threshold);
      ++r.forced.n_users;
      if (ok) ++r.forced.successes;
      if (sched.scheduled[u] && sched.load[bs] == load) {
        ++r.conditioned.n_users;
        if (ok) ++r.conditioned.successes;
      }
    }
    for (SimOutcome* o : {&r.forced, &r.conditioned}) {
      o->trials = 1;
      o->phy_failures = o->n_users - o->successes;
      o->trial_users = {o->n_users};
      o->trial_successes = {o->successes};
      o->finalize();
    }
    return r;
  });

  PhyAtLoad total;
  for (const auto& r : per_trial) {
    total.forced.merge(r.forced);
    total.conditioned.merge(r.conditioned);
  }
  total.forced.finalize();
  total.conditioned.finalize();
  return total;
}

}  // namespace freqcache
