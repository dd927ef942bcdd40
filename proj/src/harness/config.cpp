#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "freqcache/harness.hpp"

namespace freqcache {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v, int line) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "': expected a number, got '" + v + "'", key, line);
}

long long to_int(const std::string& key, const std::string& v, int line) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec == std::errc() && ptr == end) return out;
  // Accept integral values written in floating-point form, e.g. 1e3.
  const double d = to_double(key, v, line);
  if (d == std::floor(d) && std::abs(d) < 9e15) return static_cast<long long>(d);
  throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'", key, line);
}

int to_count(const std::string& key, const std::string& v, int line) {
  const long long n = to_int(key, v, line);
  if (n < 0 || n > 1'000'000'000)
    throw ConfigError("key '" + key + "': out of range '" + v + "'", key, line);
  return static_cast<int>(n);
}

bool to_bool(const std::string& key, const std::string& v, int line) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'", key, line);
}

}  // namespace

SweepAxis parse_axis(const std::string& name) {
  if (name == "none") return SweepAxis::None;
  if (name == "B_C") return SweepAxis::CacheFiles;
  if (name == "B_B") return SweepAxis::BackhaulFiles;
  if (name == "gamma") return SweepAxis::ZipfExp;
  throw ConfigError("unknown sweep axis '" + name + "' (expected B_C, B_B, gamma or none)", "axis");
}

std::string axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::None: return "none";
    case SweepAxis::CacheFiles: return "B_C";
    case SweepAxis::BackhaulFiles: return "B_B";
    case SweepAxis::ZipfExp: return "gamma";
  }
  return "none";
}

std::vector<double> SweepRange::values() const {
  std::vector<double> out;
  // Index-based stepping keeps long ranges free of accumulated drift.
  const double span = stop - start;
  const long n = static_cast<long>(std::floor(span / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(start + i * step);
  return out;
}

SweepRange parse_range(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2 && parts.size() != 3)
    throw ConfigError("range '" + text + "': expected start:stop[:step]", "range");
  SweepRange r;
  r.start = to_double("range", parts[0], 0);
  r.stop = to_double("range", parts[1], 0);
  r.step = parts.size() == 3 ? to_double("range", parts[2], 0) : 1.0;
  if (!(r.step > 0.0)) throw ConfigError("range '" + text + "': step must be positive", "range");
  if (r.stop < r.start) throw ConfigError("range '" + text + "': empty range", "range");
  return r;
}

std::vector<int> parse_rle(const std::string& text) {
  std::vector<int> q;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) throw ConfigError("allocation '" + text + "': empty entry", "q");
    const auto x = item.find('x');
    const std::string value = x == std::string::npos ? item : item.substr(0, x);
    const int v = to_count("q", trim(value), 0);
    const int count = x == std::string::npos ? 1 : to_count("q", trim(item.substr(x + 1)), 0);
    q.insert(q.end(), count, v);
  }
  return q;
}

std::string format_rle(const std::vector<int>& q) {
  std::ostringstream out;
  for (std::size_t i = 0; i < q.size();) {
    std::size_t j = i;
    while (j < q.size() && q[j] == q[i]) ++j;
    if (i > 0) out << ',';
    out << q[i] << 'x' << (j - i);
    i = j;
  }
  return out.str();
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                   int line) {
  auto& s = cfg.system;
  auto num = [&] { return to_double(key, value, line); };
  auto count = [&] { return to_count(key, value, line); };
  try {
    if (key == "lambda_b") s.bs_density = num();
    else if (key == "lambda_u") s.user_density = num();
    else if (key == "alpha") s.pathloss_exp = num();
    else if (key == "W") s.bandwidth_hz = num();
    else if (key == "tau") s.target_rate_bps = num();
    else if (key == "P") s.tx_power_w = num();
    else if (key == "N0") s.noise_psd = num();
    else if (key == "nu") s.slot_s = num();
    else if (key == "F") s.file_bits = num();
    else if (key == "L") s.library_size = count();
    else if (key == "B_C") s.cache_files = count();
    else if (key == "B_B") s.backhaul_files = count();
    else if (key == "gamma") s.zipf_exp = num();
    else if (key == "M_max") cfg.max_groups = count();
    else if (key == "M") cfg.num_groups = count();
    else if (key == "q") cfg.q = parse_rle(value);
    else if (key == "rho") {
      std::vector<double> w;
      for (const auto& item : split(value, ',')) w.push_back(to_double(key, item, line));
      cfg.popularity = std::move(w);
    } else if (key == "n_trials") cfg.n_trials = count();
    else if (key == "seed") {
      std::uint64_t seed = 0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), seed);
      if (ec != std::errc() || ptr != value.data() + value.size())
        throw ConfigError("key 'seed': expected an unsigned 64-bit integer, got '" + value + "'",
                          key, line);
      cfg.seed = seed;
    } else if (key == "axis") cfg.axis = parse_axis(value);
    else if (key == "range") cfg.range = parse_range(value);
    else if (key == "schemes") {
      cfg.schemes.clear();
      for (const auto& name : split(value, ',')) cfg.schemes.push_back(parse_scheme(name));
    } else if (key == "fixed_ppp") cfg.fixed_ppp = to_bool(key, value, line);
    else if (key == "out") cfg.out_path = value;
    else if (key == "bs_per_group") cfg.bs_per_group = num();
    else if (key == "window_side") cfg.window_side = num();
    else if (key == "threads") cfg.threads = std::max(1, count());
    else throw ConfigError("unknown key '" + key + "'", key, line);
  } catch (const ConfigError& e) {
    if (e.line() == line && e.key() == key) throw;
    throw ConfigError("key '" + key + "': " + e.what(), key, line);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("key '" + key + "': " + e.what(), key, line);
  }
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line) + ": expected key=value", trim(text), line);
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line) + ": missing key", "", line);
    try {
      apply_setting(cfg, key, value, line);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line) + ": " + e.what(), key, line);
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", "config");
  return parse_config(in);
}

std::optional<CacheAllocation> ExperimentConfig::allocation() const {
  if (!q) return std::nullopt;
  CacheAllocation a;
  a.num_groups = num_groups;
  a.q = *q;
  // Unlisted trailing files are uncached.
  if (a.q.size() < static_cast<std::size_t>(system.library_size)) a.q.resize(system.library_size, 0);
  return a;
}

Popularity ExperimentConfig::make_popularity() const {
  if (popularity) return Popularity::from_weights(*popularity);
  return zipf_popularity(system.library_size, system.zipf_exp);
}

SimSettings ExperimentConfig::sim_settings() const {
  SimSettings s;
  s.window_side = window_side;
  s.window_groups = max_groups;
  s.bs_per_group = bs_per_group;
  s.fixed_realization = fixed_ppp;
  s.threads = threads;
  return s;
}

void ExperimentConfig::validate() const {
  try {
    system.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), "system");
  }
  if (max_groups < 1) throw ConfigError("M_max must be >= 1", "M_max");
  if (n_trials < 1) throw ConfigError("n_trials must be >= 1", "n_trials");
  if (schemes.empty()) throw ConfigError("schemes must not be empty", "schemes");
  if (!(bs_per_group > 0.0)) throw ConfigError("bs_per_group must be positive", "bs_per_group");
  if (window_side < 0.0) throw ConfigError("window_side must be >= 0", "window_side");
  if (axis != SweepAxis::None && !range)
    throw ConfigError("sweep axis " + axis_name(axis) + " needs a range", "range");
  if (popularity && popularity->size() != static_cast<std::size_t>(system.library_size))
    throw ConfigError("rho has " + std::to_string(popularity->size()) + " entries, L is " +
                          std::to_string(system.library_size),
                      "rho");
  if (popularity) {
    try {
      (void)make_popularity();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), "rho");
    }
  }
  if (q) {
    if (q->size() > static_cast<std::size_t>(system.library_size))
      throw ConfigError("q lists more than L files", "q");
    const auto report = validate_allocation(*allocation(), system);
    if (!report.feasible()) throw ConfigError("infeasible allocation: " + report.summary(), "q");
  }
}

}  // namespace freqcache
