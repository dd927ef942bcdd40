#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <ostream>

#include "freqcache/harness.hpp"

namespace freqcache {

namespace {

// fn(i) for i < n on up to `threads` workers.
template <class Fn>
void parallel_for(int n, int threads, Fn fn) {
  const int workers = std::clamp(threads, 1, std::max(n, 1));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> jobs;
  for (int w = 0; w < workers; ++w)
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (int i = w; i < n; i += workers) fn(i);
    }));
  for (auto& j : jobs) j.get();
}

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Sweep values, or one unnamed point when there is no sweep axis.
std::vector<std::optional<double>> sweep_points(const ExperimentConfig& cfg) {
  if (cfg.axis == SweepAxis::None || !cfg.range) return {std::nullopt};
  std::vector<std::optional<double>> out;
  for (double v : cfg.range->values()) out.emplace_back(v);
  return out;
}

SimSettings settings_for(const ExperimentConfig& cfg, int num_groups) {
  SimSettings s = cfg.sim_settings();
  s.window_groups = std::max(cfg.max_groups, num_groups);
  return s;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

AnalyticRun run_analytic(const ExperimentConfig& cfg) {
  cfg.validate();
  const Popularity rho = cfg.make_popularity();
  AnalyticRun run;
  if (auto a = cfg.allocation()) {
    run.allocation = *a;
  } else {
    run.allocation = optimize(cfg.system, rho, cfg.max_groups).q_int;
    run.from_optimizer = true;
  }
  run.report = approx_success(run.allocation, cfg.system, rho);
  return run;
}

void write_analytic(std::ostream& os, const AnalyticRun& run, const Popularity& rho) {
  const auto& r = run.report;
  os << "source=" << (run.from_optimizer ? "optimizer" : "config") << '\n'
     << "M=" << run.allocation.num_groups << '\n'
     << "q=" << format_rle(run.allocation.q) << '\n'
     << "aggregate_p=" << format_number(r.aggregate_p) << '\n'
     << "g_tilde=" << format_number(r.g_tilde) << '\n'
     << "beta=" << format_number(r.beta) << '\n'
     << "file,rho,q,k_tilde,p_tilde\n";
  for (std::size_t l = 0; l < r.per_file_p.size(); ++l)
    os << l + 1 << ',' << format_number(rho[l]) << ',' << run.allocation.q[l] << ','
       << format_number(r.k_tilde[l]) << ',' << format_number(r.per_file_p[l]) << '\n';
}

OptResult run_optimize(const ExperimentConfig& cfg) {
  cfg.validate();
  return optimize(cfg.system, cfg.make_popularity(), cfg.max_groups, cfg.threads > 1);
}

void write_optimize(std::ostream& os, const OptResult& res) {
  os << "M=" << res.num_groups << '\n'
     << "L_prime=" << res.cached_files << '\n'
     << "q=" << format_rle(res.q_int.q) << '\n'
     << "upper_bound=" << format_number(res.upper_bound) << '\n'
     << "achieved=" << format_number(res.achieved) << '\n';
}

ResultRow evaluate_scheme(SchemeKind kind, const ExperimentConfig& cfg, const Popularity& rho) {
  const auto t0 = std::chrono::steady_clock::now();
  ResultRow row;
  row.scheme = std::string(scheme_name(kind));
  try {
    const BaselineSpec spec = make_baseline(kind, cfg.system, rho, cfg.max_groups);
    row.cached_files = spec.cached_files;
    if (spec.analytic_p >= 0.0) row.p_tilde = spec.analytic_p;
    std::optional<SimOutcome> best;
    for (int M : spec.group_candidates) {
      const CachingScheme scheme =
          spec.random_caching ? CachingScheme::random(spec.cache_probs, M, cfg.system.cache_files)
                              : CachingScheme::grouped(spec.allocation, cfg.system.cache_files);
      SimOutcome out =
          estimate_p(cfg.system, rho, scheme, cfg.n_trials, cfg.seed, settings_for(cfg, M));
      if (!best || out.p_hat > best->p_hat) {
        best = std::move(out);
        row.num_groups = M;
      }
    }
    row.p_hat = best->p_hat;
    row.ci95 = best->ci95;
    row.empty_rate = best->empty_rate();
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  row.runtime_s = seconds_since(t0);
  return row;
}

std::vector<ResultRow> run_simulate(const ExperimentConfig& cfg) {
  cfg.validate();
  const Popularity rho = cfg.make_popularity();
  std::vector<ResultRow> rows;
  if (auto alloc = cfg.allocation()) {
    const auto t0 = std::chrono::steady_clock::now();
    ResultRow row;
    row.scheme = "custom";
    row.num_groups = alloc->num_groups;
    row.cached_files = alloc->cached_count();
    try {
      row.p_tilde = approx_success(*alloc, cfg.system, rho).aggregate_p;
      const auto scheme = CachingScheme::grouped(*alloc, cfg.system.cache_files);
      const SimOutcome out = estimate_p(cfg.system, rho, scheme, cfg.n_trials, cfg.seed,
                                        settings_for(cfg, alloc->num_groups));
      row.p_hat = out.p_hat;
      row.ci95 = out.ci95;
      row.empty_rate = out.empty_rate();
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    row.runtime_s = seconds_since(t0);
    rows.push_back(std::move(row));
    return rows;
  }
  for (SchemeKind kind : cfg.schemes) rows.push_back(evaluate_scheme(kind, cfg, rho));
  return rows;
}

ExperimentConfig at_sweep_value(const ExperimentConfig& cfg, double value) {
  ExperimentConfig out = cfg;
  switch (cfg.axis) {
    case SweepAxis::None: break;
    case SweepAxis::CacheFiles: out.system.cache_files = static_cast<int>(std::lround(value)); break;
    case SweepAxis::BackhaulFiles:
      out.system.backhaul_files = static_cast<int>(std::lround(value));
      break;
    case SweepAxis::ZipfExp: out.system.zipf_exp = value; break;
  }
  return out;
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto points = sweep_points(cfg);
  const int n_points = static_cast<int>(points.size());
  std::vector<std::vector<ResultRow>> per_point(n_points);
  // Points share the worker budget; a lone point spends it on trials instead.
  const int point_threads = n_points > 1 ? cfg.threads : 1;
  parallel_for(n_points, point_threads, [&](int i) {
    ExperimentConfig pc = points[i] ? at_sweep_value(cfg, *points[i]) : cfg;
    if (n_points > 1) pc.threads = 1;
    std::vector<ResultRow> rows;
    try {
      pc.validate();
      const Popularity rho = pc.make_popularity();
      for (SchemeKind kind : pc.schemes) rows.push_back(evaluate_scheme(kind, pc, rho));
    } catch (const std::exception& e) {
      rows.clear();
      for (SchemeKind kind : pc.schemes) {
        ResultRow row;
        row.scheme = std::string(scheme_name(kind));
        row.error = e.what();
        rows.push_back(std::move(row));
      }
    }
    for (auto& r : rows) r.sweep_value = points[i];
    per_point[i] = std::move(rows);
  });
  std::vector<ResultRow> out;
  for (auto& rows : per_point) out.insert(out.end(), rows.begin(), rows.end());
  return out;
}

void write_rows_csv(std::ostream& os, const std::vector<ResultRow>& rows, bool with_runtime) {
  os << "sweep_value,scheme,M,L_prime,p_tilde,p_hat,ci95,runtime_s,error\n";
  for (const auto& r : rows) {
    os << cell(r.sweep_value) << ',' << r.scheme << ',' << r.num_groups << ',' << r.cached_files
       << ',' << cell(r.p_tilde) << ',' << cell(r.p_hat) << ','
       << (r.p_hat ? format_number(r.ci95) : "") << ','
       << (with_runtime ? format_number(r.runtime_s) : "") << ',' << csv_text(r.error) << '\n';
  }
}

std::vector<ApproxRow> run_compare_approx(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto points = sweep_points(cfg);
  const int n_points = static_cast<int>(points.size());
  std::vector<ApproxRow> rows(n_points);
  const int point_threads = n_points > 1 ? cfg.threads : 1;
  parallel_for(n_points, point_threads, [&](int i) {
    ExperimentConfig pc = points[i] ? at_sweep_value(cfg, *points[i]) : cfg;
    if (n_points > 1) pc.threads = 1;
    ApproxRow& row = rows[i];
    row.sweep_value = points[i];
    try {
      pc.validate();
      const Popularity rho = pc.make_popularity();
      const OptResult plan = optimize(pc.system, rho, pc.max_groups);
      row.num_groups = plan.num_groups;
      row.cached_files = plan.cached_files;
      row.p_tilde = plan.achieved;
      row.upper_bound = plan.upper_bound;
      const auto scheme = CachingScheme::grouped(plan.q_int, pc.system.cache_files);
      const SimOutcome out = estimate_p(pc.system, rho, scheme, pc.n_trials, pc.seed,
                                        settings_for(pc, plan.num_groups));
      row.p_hat = out.p_hat;
      row.ci95 = out.ci95;
      row.gap = plan.achieved - out.p_hat;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

void write_approx_csv(std::ostream& os, const std::vector<ApproxRow>& rows) {
  os << "sweep_value,M,L_prime,p_tilde,upper_bound,p_hat,ci95,gap,error\n";
  for (const auto& r : rows) {
    const bool ok = r.error.empty();
    os << cell(r.sweep_value) << ',' << r.num_groups << ',' << r.cached_files << ','
       << (ok ? format_number(r.p_tilde) : "") << ',' << (ok ? format_number(r.upper_bound) : "")
       << ',' << cell(r.p_hat) << ',' << (r.p_hat ? format_number(r.ci95) : "") << ','
       << cell(r.gap) << ',' << csv_text(r.error) << '\n';
  }
}

}  // namespace freqcache
