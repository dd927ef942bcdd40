#include "freqcache/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace freqcache {

namespace {

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw std::invalid_argument(std::string(field) + ": " + what);
}

// Shared by validate_allocation and build_placement. `expected_len` < 0 skips
// the length check.
AllocationReport check_allocation(const CacheAllocation& alloc, int cache_files,
                                  int expected_len) {
  AllocationReport report;
  auto add = [&](ViolationKind kind, int file, std::string msg) {
    report.violations.push_back({kind, file, std::move(msg)});
  };
  const int M = alloc.num_groups;
  if (M < 1) add(ViolationKind::GroupCount, -1, "number of groups M must be >= 1");
  if (expected_len >= 0 && static_cast<int>(alloc.q.size()) != expected_len) {
    std::ostringstream os;
    os << "q has " << alloc.q.size() << " entries, library has " << expected_len;
    add(ViolationKind::Length, -1, os.str());
  }
  for (std::size_t l = 0; l < alloc.q.size(); ++l) {
    const int v = alloc.q[l];
    if (v < 0 || v > std::max(M, 0)) {
      std::ostringstream os;
      os << "bounds: q_" << l + 1 << " = " << v << " outside [0, " << M << "]";
      add(ViolationKind::Bounds, static_cast<int>(l), os.str());
    }
    if (l > 0 && alloc.q[l - 1] < v) {
      std::ostringstream os;
      os << "ordering: q_" << l << " = " << alloc.q[l - 1] << " < q_" << l + 1 << " = " << v;
      add(ViolationKind::Ordering, static_cast<int>(l), os.str());
    }
  }
  const long total = alloc.total();
  const long budget = static_cast<long>(M) * cache_files;
  if (total > budget) {
    std::ostringstream os;
    os << "capacity: sum q = " << total << " > M*B_C = " << budget;
    add(ViolationKind::Capacity, -1, os.str());
  }
  return report;
}

}  // namespace

void SystemConfig::validate() const {
  require(bs_density > 0, "lambda_b", "must be positive");
  require(user_density > 0, "lambda_u", "must be positive");
  require(pathloss_exp > 2, "alpha", "must exceed 2");
  require(bandwidth_hz > 0, "W", "must be positive");
  // tau = 0 is admitted as the degenerate no-rate-demand case.
  require(target_rate_bps >= 0, "tau", "must be nonnegative");
  require(library_size >= 1, "L", "must be >= 1");
  require(cache_files >= 0 && cache_files <= library_size, "B_C", "must lie in [0, L]");
  require(backhaul_files >= 0, "B_B", "must be nonnegative");
  require(zipf_exp >= 0, "gamma", "must be nonnegative");
}

Popularity Popularity::from_weights(std::span<const double> weights) {
  if (weights.empty()) throw std::invalid_argument("popularity: empty library");
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw std::invalid_argument("popularity: negative weight");
    if (i > 0 && weights[i] > weights[i - 1])
      throw std::invalid_argument("popularity: weights must be nonincreasing");
    total += weights[i];
  }
  if (!(total > 0.0)) throw std::invalid_argument("popularity: weights sum to zero");
  std::vector<double> probs(weights.begin(), weights.end());
  for (double& p : probs) p /= total;
  return Popularity(std::move(probs));
}

Popularity zipf_popularity(int library_size, double gamma) {
  if (library_size < 1) throw std::invalid_argument("zipf_popularity: L must be >= 1");
  if (!(gamma >= 0.0)) throw std::invalid_argument("zipf_popularity: gamma must be >= 0");
  std::vector<double> w(static_cast<std::size_t>(library_size));
  for (int l = 0; l < library_size; ++l) w[l] = std::pow(static_cast<double>(l + 1), -gamma);
  return Popularity::from_weights(w);
}

int CacheAllocation::cached_count() const {
  return static_cast<int>(std::count_if(q.begin(), q.end(), [](int v) { return v > 0; }));
}

long CacheAllocation::total() const {
  return std::accumulate(q.begin(), q.end(), 0L);
}

PlacementMap::PlacementMap(int num_groups, std::vector<std::vector<int>> group_sets)
    : num_groups_(num_groups),
      group_sets_(std::move(group_sets)),
      group_contents_(static_cast<std::size_t>(num_groups)),
      member_(static_cast<std::size_t>(num_groups) * group_sets_.size(), 0) {
  for (std::size_t l = 0; l < group_sets_.size(); ++l) {
    auto& groups = group_sets_[l];
    std::sort(groups.begin(), groups.end());
    for (int m : groups) {
      if (m < 0 || m >= num_groups_) throw std::invalid_argument("placement: group out of range");
      group_contents_[m].push_back(static_cast<int>(l));
      member_[static_cast<std::size_t>(m) * group_sets_.size() + l] = 1;
    }
  }
}

std::string AllocationReport::summary() const {
  if (feasible()) return "feasible";
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.message;
  }
  return out;
}

AllocationReport validate_allocation(const CacheAllocation& alloc, const SystemConfig& cfg) {
  return check_allocation(alloc, cfg.cache_files, cfg.library_size);
}

PlacementMap build_placement(const CacheAllocation& alloc, int cache_files) {
  const auto report = check_allocation(alloc, cache_files, -1);
  if (!report.feasible()) throw std::invalid_argument("build_placement: " + report.summary());

  const int M = alloc.num_groups;
  std::vector<std::vector<int>> sets(alloc.q.size());
  long offset = 0;
  for (std::size_t l = 0; l < alloc.q.size(); ++l) {
    for (int j = 0; j < alloc.q[l]; ++j) sets[l].push_back(static_cast<int>((offset + j) % M));
    offset += alloc.q[l];
  }
  return PlacementMap(M, std::move(sets));
}

}  // namespace freqcache
