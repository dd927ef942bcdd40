// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "freqcache/harness.hpp"

using namespace freqcache;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, double limit_s, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs <= limit_s;
  const bool ok = v.pass && in_time;
  if (!ok) ++failures;
  std::printf("%s [%2d] %s: %s (%.1f s of %.0f s)\n", ok ? "PASS" : "FAIL", id, title,
              v.detail.c_str(), secs, limit_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Popularity random_popularity(std::mt19937_64& rng, int L) {
  std::vector<double> w(L);
  std::exponential_distribution<double> e(1.0);
  for (auto& v : w) v = e(rng);
  std::sort(w.rbegin(), w.rend());
  return Popularity::from_weights(w);
}

// Interference factor via the double-exponential rule on int_0^w (1-v)^(x-1) v^(y-1) dv.
double beta_oracle(int M, double g0, const SystemConfig& cfg) {
  const double t = M * g0 * cfg.rate_ratio();
  const double x = 2.0 / cfg.pathloss_exp;
  const double y = 1.0 - x;
  const double w = -std::expm1(-t * std::numbers::ln2);
  boost::math::quadrature::tanh_sinh<double> rule;
  const double integral = rule.integrate(
      [&](double v) { return std::pow(1.0 - v, x - 1.0) * std::pow(v, y - 1.0); }, 0.0, w);
  return x * std::pow(std::expm1(t * std::numbers::ln2), x) * integral;
}

CachingScheme all_cached_single_band(int L) {
  return CachingScheme::grouped(CacheAllocation{1, std::vector<int>(L, 1)}, L);
}

bool beyond_overlap(double p_a, double ci_a, double p_b, double ci_b) {
  return p_a - ci_a > p_b + ci_b;
}

Verdict scheduling() {
  const CacheAllocation a{3, {3, 2, 2, 2, 0, 0}};
  const LoadingVector k{{5, 4, 4, 3, 3, 2}};
  const double exact = sched_prob(k, 4, a, 2);
  // One BS with that loading: 16 cache hits, 5 backhaul requesters.
  std::vector<std::uint8_t> hits(21, 0);
  std::fill(hits.begin(), hits.begin() + 16, 1);
  Engine rng = make_stream(2024, 0, Stream::Scheduling);
  const int draws = 20000;
  long tagged = 0;
  bool quota_ok = true;
  for (int d = 0; d < draws; ++d) {
    const auto s = schedule_bs(hits, 2, rng);
    tagged += s[16];  // the first file-5 requester
    quota_ok = quota_ok && std::count(s.begin() + 16, s.end(), 1) == 2;
  }
  const double rate = tagged / double(draws);
  const double half99 = 2.5758293035489 * std::sqrt(0.4 * 0.6 / draws);
  Verdict v;
  v.pass = exact == 0.4 && quota_ok && std::abs(rate - 0.4) <= half99;
  v.detail = "sched_prob=" + format_number(exact) + ", empirical " + fmt("%.4f", rate) +
             " over " + std::to_string(draws) + " draws, 99% band +-" + fmt("%.4f", half99);
  return v;
}

Verdict placement() {
  const auto map = build_placement(CacheAllocation{3, {3, 2, 2, 2, 0, 0}}, 3);
  const std::vector<std::vector<int>> want{{0, 1, 2}, {0, 1}, {0, 2}, {1, 2}, {}, {}};
  bool ok = true;
  for (int l = 0; l < 6; ++l) ok = ok && map.groups_of(l) == want[l];
  for (int m = 0; m < 3; ++m) ok = ok && map.files_in(m).size() == 3;
  return {ok, "group sets {0,1,2},{0,1},{0,2},{1,2},{},{}; 3 files per group"};
}

Verdict beta_grid() {
  double worst = 0.0;
  int points = 0;
  const double alphas[] = {3.0, 4.0, 5.0};
  for (int i = 0; i < 50; ++i) {
    SystemConfig c;
    c.pathloss_exp = alphas[i % 3];
    const int M = 1 + i % 5;
    const double g = 0.1 * std::pow(1000.0, i / 49.0);
    const double got = beta_factor(M, g, c);
    const double want = beta_oracle(M, g, c);
    worst = std::max(worst, std::abs(got - want) / want);
    ++points;
  }
  // Vanishing load.
  SystemConfig c;
  bool vanishes = true;
  double prev = 1.0;
  for (double g : {1e-2, 1e-4, 1e-6, 1e-8, 1e-10}) {
    const double b = beta_factor(3, g, c);
    vanishes = vanishes && b < prev && b < 10.0 * g;
    prev = b;
  }
  Verdict v;
  v.pass = worst <= 1e-7 && vanishes && beta_factor(3, 0.0, c) == 0.0;
  v.detail = std::to_string(points) + " points, max rel err " + fmt("%.2e", worst) +
             ", beta(3,1e-10)=" + fmt("%.2e", prev);
  return v;
}

Verdict phy_given_load() {
  SystemConfig c;
  c.library_size = 20;
  c.cache_files = 20;
  const auto rho = zipf_popularity(20, c.zipf_exp);
  const auto scheme = all_cached_single_band(20);
  SimSettings st;
  st.bs_per_group = 200.0;
  Verdict v;
  std::ostringstream d;
  for (int g : {1, 5, 20}) {
    const auto r = phy_success_at_load(c, rho, scheme, g, 300, 4000 + g, st);
    const double want = 1.0 / (1.0 + beta_factor(1, g, c));
    const bool ok = std::abs(r.forced.p_hat - want) <= 3.0 * r.forced.ci95;
    v.pass = v.pass && ok;
    d << "g=" << g << ": sim " << fmt("%.5f", r.forced.p_hat) << "+-" << fmt("%.5f", r.forced.ci95)
      << " vs " << fmt("%.5f", want) << " [load-conditioned " << fmt("%.4f", r.conditioned.p_hat)
      << ", n=" << r.conditioned.n_users << "]; ";
  }
  v.detail = d.str();
  return v;
}

Verdict mean_loading() {
  SystemConfig c;
  c.cache_files = c.library_size;
  const auto rho = zipf_popularity(c.library_size, c.zipf_exp);
  const auto scheme = all_cached_single_band(c.library_size);
  SimSettings st;
  st.bs_per_group = 200.0;
  const auto stats = measure_loading(c, rho, scheme, 1500, 77, st);
  const auto want = expected_loading(c, rho);
  double worst = 0.0, worst_ci = 0.0;
  for (int l = 0; l < 10; ++l) {
    const double rel = std::abs(stats.mean_k[l] - want[l]) / want[l];
    if (rel > worst) {
      worst = rel;
      worst_ci = stats.half_ci[l] / want[l];
    }
  }
  Verdict v;
  v.pass = stats.n_users >= 100000 && worst <= 0.02;
  v.detail = std::to_string(stats.n_users) + " tagged users, top-10 max rel dev " +
             fmt("%.4f", worst) + " (95% half-width " + fmt("%.4f", worst_ci) + "), E[K_1] " +
             fmt("%.4f", stats.mean_k[0]) + " vs " + fmt("%.4f", want[0]);
  return v;
}

Verdict small_instance_optimality() {
  std::mt19937_64 rng(99);
  int instances = 0, near = 0, bounded = 0;
  double worst_gap = 0.0, worst_bound = 0.0;
  for (int v = 0; v < 20; ++v) {
    const auto base = random_popularity(rng, 8);
    for (int L = 1; L <= 8; ++L) {
      std::vector<double> w(base.probs().begin(), base.probs().begin() + L);
      const auto rho = Popularity::from_weights(w);
      for (int B_C = 1; B_C <= std::min(3, L); ++B_C)
        for (int M_max = 1; M_max <= 3; ++M_max)
          for (int B_B : {0, 2, 5}) {
            SystemConfig c;
            c.library_size = L;
            c.cache_files = B_C;
            c.backhaul_files = B_B;
            double best = -1.0;
            for (int M = 1; M <= M_max; ++M) {
              std::vector<int> q(L, 0);
              std::function<void(int, int, long)> rec = [&](int l, int cap, long budget) {
                if (l == L) {
                  best = std::max(best, approx_success(CacheAllocation{M, q}, c, rho).aggregate_p);
                  return;
                }
                for (int x = 0; x <= std::min<long>(cap, budget); ++x) {
                  q[l] = x;
                  rec(l + 1, x, budget - x);
                }
                q[l] = 0;
              };
              rec(0, M, static_cast<long>(M) * B_C);
            }
            const auto r = optimize(c, rho, M_max);
            ++instances;
            const double gap = best - r.achieved;
            worst_gap = std::max(worst_gap, gap);
            if (gap <= 1e-3) ++near;
            worst_bound = std::max(worst_bound, best - r.upper_bound);
            if (r.upper_bound >= best - 1e-12) ++bounded;
          }
    }
  }
  Verdict out;
  out.pass = near == instances && bounded == instances;
  out.detail = std::to_string(instances) + " instances: within 1e-3 " + std::to_string(near) +
               ", bound holds " + std::to_string(bounded) + "; worst gap " + fmt("%.2e", worst_gap) +
               ", worst bound shortfall " + fmt("%.2e", worst_bound);
  return out;
}

Verdict pmf_and_exact() {
  SystemConfig c;
  c.library_size = 2;
  c.cache_files = 1;
  c.backhaul_files = 2;
  const auto rho = zipf_popularity(2, c.zipf_exp);
  const CacheAllocation a{1, {1, 0}};
  double worst_tail = 0.0;
  for (int file = 0; file < 2; ++file) {
    const auto pmf = load_pmf(c, rho, a, file, 0, 120, 1e-6);
    for (const auto& f : pmf.files) {
      double s = 0.0;
      for (double m : f.mass) s += m;
      worst_tail = std::max(worst_tail, std::abs(1.0 - s));
    }
  }
  const auto exact = exact_success_small(c, rho, a, 120, 1e-6);
  const auto sim = estimate_p(c, rho, CachingScheme::grouped(a, 1), 400, 31);
  Verdict v;
  v.pass = worst_tail <= 1e-6 && std::abs(exact.p - sim.p_hat) <= 3.0 * sim.ci95;
  v.detail = "max marginal deficit " + fmt("%.1e", worst_tail) + "; exact " + fmt("%.5f", exact.p) +
             " (tail " + fmt("%.1e", exact.tail_bound) + ") vs sim " + fmt("%.5f", sim.p_hat) +
             "+-" + fmt("%.5f", sim.ci95) + " over " + std::to_string(sim.n_users) + " users";
  return v;
}

Verdict approximation_gap() {
  ExperimentConfig cfg;
  cfg.axis = SweepAxis::CacheFiles;
  cfg.range = SweepRange{10, 40, 10};
  cfg.n_trials = 200;
  cfg.seed = 8;
  const auto rows = run_compare_approx(cfg);
  Verdict v;
  std::ostringstream d;
  for (const auto& r : rows) {
    const int bc = static_cast<int>(*r.sweep_value);
    if (bc != 10 && bc != 20 && bc != 40) continue;
    if (!r.error.empty()) {
      v.pass = false;
      d << "B_C=" << bc << " error " << r.error << "; ";
      continue;
    }
    const bool bound = r.p_tilde <= r.upper_bound + 1e-12;
    const bool gap_ok = *r.p_hat <= 0.5 || std::abs(*r.gap) < 0.05;
    v.pass = v.pass && bound && gap_ok;
    d << "B_C=" << bc << " M=" << r.num_groups << " p~=" << fmt("%.4f", r.p_tilde) << " ub="
      << fmt("%.4f", r.upper_bound) << " p^=" << fmt("%.4f", *r.p_hat) << " gap="
      << fmt("%+.4f", *r.gap) << "; ";
  }
  v.detail = d.str();
  return v;
}

Verdict ordering() {
  Verdict v;
  std::ostringstream d;
  struct Point {
    const char* name;
    int B_C, B_B;
    double gamma;
  };
  for (const Point p : {Point{"B_C=5", 5, 5, 0.8}, Point{"B_B=2", 20, 2, 0.8},
                        Point{"gamma=0.4", 20, 5, 0.4}}) {
    ExperimentConfig cfg;
    cfg.system.cache_files = p.B_C;
    cfg.system.backhaul_files = p.B_B;
    cfg.system.zipf_exp = p.gamma;
    cfg.schemes = {SchemeKind::Proposed, SchemeKind::Mpc, SchemeKind::Gcp};
    cfg.n_trials = 200;
    cfg.seed = 17;
    const auto rows = run_simulate(cfg);
    const auto& prop = rows[0];
    bool ok = prop.error.empty();
    for (std::size_t i = 1; i < rows.size() && ok; ++i)
      ok = rows[i].error.empty() &&
           beyond_overlap(*prop.p_hat, prop.ci95, *rows[i].p_hat, rows[i].ci95);
    v.pass = v.pass && ok;
    d << p.name << ": ";
    for (const auto& r : rows)
      d << r.scheme << " " << (r.p_hat ? fmt("%.4f", *r.p_hat) : "err") << "+-" << fmt("%.4f", r.ci95)
        << " ";
    d << (ok ? "ok; " : "NOT SEPARATED; ");
  }

  auto groups_along = [&](SweepAxis axis, std::vector<double> values) {
    std::vector<int> ms;
    for (double x : values) {
      ExperimentConfig cfg;
      cfg.axis = axis;
      const auto pc = at_sweep_value(cfg, x);
      ms.push_back(optimize(pc.system, pc.make_popularity(), pc.max_groups).num_groups);
    }
    return ms;
  };
  auto show = [](const std::vector<int>& ms) {
    std::string s;
    for (int m : ms) s += std::to_string(m);
    return s;
  };
  const auto by_bc = groups_along(SweepAxis::CacheFiles, {5, 10, 20, 40, 80});
  const auto by_bb = groups_along(SweepAxis::BackhaulFiles, {0, 1, 2, 5, 10, 20});
  const auto by_gamma = groups_along(SweepAxis::ZipfExp, {0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6});
  auto nonincreasing = [](const std::vector<int>& ms) {
    return std::is_sorted(ms.rbegin(), ms.rend());
  };
  const bool mono = nonincreasing(by_bc) && nonincreasing(by_bb) && nonincreasing(by_gamma);
  v.pass = v.pass && mono;
  d << "M* along B_C " << show(by_bc) << ", B_B " << show(by_bb) << ", gamma " << show(by_gamma);
  v.detail = d.str();
  return v;
}

Verdict determinism() {
  ExperimentConfig cfg;
  cfg.axis = SweepAxis::CacheFiles;
  cfg.range = SweepRange{5, 15, 5};
  cfg.schemes = {SchemeKind::Proposed, SchemeKind::Mpc, SchemeKind::Gcp, SchemeKind::GcpReuse};
  cfg.n_trials = 20;
  cfg.seed = 4242;
  auto text = [](const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    write_rows_csv(os, rows, false);
    return os.str();
  };
  const std::string first = text(run_sweep(cfg));
  const std::string again = text(run_sweep(cfg));
  cfg.threads = 4;
  const std::string parallel = text(run_sweep(cfg));
  cfg.threads = 1;
  cfg.axis = SweepAxis::None;
  cfg.system.cache_files = 10;
  const std::string single_serial = text(run_sweep(cfg));
  cfg.threads = 4;
  const std::string single_parallel = text(run_sweep(cfg));
  Verdict v;
  v.pass = first == again && first == parallel && single_serial == single_parallel;
  v.detail = std::string("re-run ") + (first == again ? "identical" : "DIFFERS") +
             ", point-parallel " + (first == parallel ? "identical" : "DIFFERS") +
             ", trial-parallel " + (single_serial == single_parallel ? "identical" : "DIFFERS");
  return v;
}

}  // namespace

int main() {
  report(1, "scheduling probability and empirical rate", 5, scheduling);
  report(2, "placement of the six-file example", 1, placement);
  report(3, "interference factor vs independent quadrature", 10, beta_grid);
  report(4, "PHY success given load, all cached, single band", 120, phy_given_load);
  report(5, "mean loading at the serving BS", 120, mean_loading);
  report(6, "optimizer vs exhaustive integer optimum", 60, small_instance_optimality);
  report(7, "loading PMF normalization and two-file exact success", 120, pmf_and_exact);
  report(8, "approximate vs simulated success over B_C", 600, approximation_gap);
  report(9, "scheme ordering and reuse factor trends", 1200, ordering);
  report(10, "determinism across re-runs and threading", 300, determinism);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
