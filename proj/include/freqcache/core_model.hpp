#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace freqcache {

/// Physical, channel and content parameters of a backhaul-limited small-cell
/// network. Defaults are the reference operating point used throughout the
/// experiments (BS density 3e-5 /m^2, ten users per BS, 20 MHz, 0.1 Mbps).
///
/// File indices are 0-based everywhere in the library; text I/O is 1-based.
struct SystemConfig {
  double bs_density = 3e-5;     ///< BSs per m^2
  double user_density = 3e-4;   ///< users per m^2
  double pathloss_exp = 4.0;    ///< alpha, must exceed 2
  double bandwidth_hz = 20e6;   ///< total bandwidth W
  double target_rate_bps = 1e5; ///< per-user fixed rate tau

  // Carried for completeness. The interference-limited formulas never use them.
  double tx_power_w = 1.0;
  double noise_psd = 0.0;
  double slot_s = 1e-3;
  double file_bits = 8e6;

  int library_size = 1000; ///< L
  int cache_files = 20;    ///< B_C, files per BS cache
  int backhaul_files = 5;  ///< B_B, backhaul-served users per BS per slot
  double zipf_exp = 0.8;   ///< gamma

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;

  double users_per_bs() const { return user_density / bs_density; }
  /// tau / W, the spectral efficiency demand per unit load.
  double rate_ratio() const { return target_rate_bps / bandwidth_hz; }
};

/// Request probabilities, sorted nonincreasing and normalized.
class Popularity {
 public:
  /// Normalizes `weights`; throws if any weight is negative, the total is
  /// zero, or the sequence is not nonincreasing.
  static Popularity from_weights(std::span<const double> weights);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t l) const { return probs_[l]; }
  std::span<const double> probs() const { return probs_; }

 private:
  explicit Popularity(std::vector<double> probs) : probs_(std::move(probs)) {}
  std::vector<double> probs_;
};

/// rho_l = l^-gamma / sum_j j^-gamma for l = 1..L.
Popularity zipf_popularity(int library_size, double gamma);

/// Integer cache storage allocation: q[l] BS groups store file l.
/// Not validated on construction; see validate_allocation().
struct CacheAllocation {
  int num_groups = 1;
  std::vector<int> q;

  int cached_count() const;  ///< number of files with q > 0
  long total() const;        ///< sum of q
};

/// Which BS groups store each file, and which files each group stores.
/// Both views are sorted ascending.
class PlacementMap {
 public:
  PlacementMap(int num_groups, std::vector<std::vector<int>> group_sets);

  int num_groups() const { return num_groups_; }
  int num_files() const { return static_cast<int>(group_sets_.size()); }
  const std::vector<int>& groups_of(int file) const { return group_sets_[file]; }
  const std::vector<int>& files_in(int group) const { return group_contents_[group]; }
  bool stores(int group, int file) const {
    return member_[static_cast<std::size_t>(group) * group_sets_.size() + file] != 0;
  }
  bool cached(int file) const { return !group_sets_[file].empty(); }

 private:
  int num_groups_;
  std::vector<std::vector<int>> group_sets_;
  std::vector<std::vector<int>> group_contents_;
  std::vector<unsigned char> member_;
};

/// Requests per file at one BS.
struct LoadingVector {
  std::vector<int> counts;
};

enum class ViolationKind { GroupCount, Length, Bounds, Ordering, Capacity };

struct Violation {
  ViolationKind kind;
  int file;  ///< 0-based, -1 when the violation is not tied to one file
  std::string message;
};

struct AllocationReport {
  std::vector<Violation> violations;
  bool feasible() const { return violations.empty(); }
  std::string summary() const;
};

/// Lists every violated constraint: M >= 1, q has L entries, 0 <= q_l <= M,
/// q nonincreasing, and sum q <= M * B_C.
AllocationReport validate_allocation(const CacheAllocation& alloc, const SystemConfig& cfg);

/// Lays files into the M x B_C cache matrix in order, so file l occupies
/// groups (Q_l + j) mod M for j < q_l where Q_l = sum_{l' < l} q_l'.
/// Throws std::invalid_argument when the allocation is infeasible.
PlacementMap build_placement(const CacheAllocation& alloc, int cache_files);

}  // namespace freqcache
