#include <doctest.h>

#include <sstream>

#include "freqcache/harness.hpp"

using namespace freqcache;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  write_rows_csv(os, rows, false);
  return os.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse(
      "# reference point\n"
      "lambda_b = 3e-5\n"
      "lambda_u=3e-4   # ten users per BS\n"
      "\n"
      "B_C=10\nB_B=2\ngamma=0.4\nM_max=4\nseed=18446744073709551615\n"
      "schemes=proposed,gcp\naxis=B_C\nrange=5:20:5\nfixed_ppp=true\n");
  CHECK(cfg.system.cache_files == 10);
  CHECK(cfg.system.backhaul_files == 2);
  CHECK(cfg.system.zipf_exp == 0.4);
  CHECK(cfg.max_groups == 4);
  CHECK(cfg.seed == 18446744073709551615ULL);
  CHECK(cfg.schemes == std::vector<SchemeKind>{SchemeKind::Proposed, SchemeKind::Gcp});
  CHECK(cfg.axis == SweepAxis::CacheFiles);
  CHECK(cfg.range->values() == std::vector<double>{5, 10, 15, 20});
  CHECK(cfg.fixed_ppp);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config errors name the key and line") {
  try {
    parse("L=1000\nbogus_key=1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "bogus_key");
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
  }
  try {
    parse("B_C=ten\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "B_C");
    CHECK(e.line() == 1);
  }
  CHECK_THROWS_AS(parse("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse("schemes=proposed,lru\n"), ConfigError);
  CHECK_THROWS_AS(parse("range=5:1:1\n"), ConfigError);
  CHECK_THROWS_AS(parse("alpha=2\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse("axis=gamma\n").validate(), ConfigError);  // sweep without a range
  CHECK_THROWS_AS(parse("L=3\nB_C=1\nM=1\nq=1,1,0\n").validate(), ConfigError);
}

TEST_CASE("run-length allocation text") {
  CHECK(parse_rle("3x1,2x3,0x2") == std::vector<int>{3, 2, 2, 2, 0, 0});
  CHECK(parse_rle("3,2,2") == std::vector<int>{3, 2, 2});
  CHECK(format_rle({3, 2, 2, 2, 0, 0}) == "3x1,2x3,0x2");
  CHECK(parse_rle(format_rle({1, 1, 1, 0})) == std::vector<int>{1, 1, 1, 0});
  CHECK_THROWS_AS(parse_rle("3x"), ConfigError);
}

TEST_CASE("analytic command is a thin wrapper") {
  SUBCASE("no rate demand with everything cached") {
    const auto cfg = parse("tau=0\nL=5\nB_C=5\nM=1\nq=1x5\n");
    CHECK(run_analytic(cfg).report.aggregate_p == doctest::Approx(1.0));
  }
  SUBCASE("reference point with the optimizer plan") {
    const ExperimentConfig cfg;
    const auto run = run_analytic(cfg);
    CHECK(run.from_optimizer);
    const auto rho = cfg.make_popularity();
    const auto plan = optimize(cfg.system, rho, cfg.max_groups);
    CHECK(run.allocation.q == plan.q_int.q);
    CHECK(run.report.aggregate_p == approx_success(plan.q_int, cfg.system, rho).aggregate_p);
    std::ostringstream os;
    write_analytic(os, run, rho);
    CHECK(os.str().find("aggregate_p=" + format_number(run.report.aggregate_p)) != std::string::npos);
  }
}

TEST_CASE("optimize command output") {
  auto cfg = parse("M_max=1\n");
  const auto res = run_optimize(cfg);
  std::ostringstream os;
  write_optimize(os, res);
  CHECK(os.str().find("M=1\nL_prime=20\nq=1x20,0x980\n") == 0);
}

TEST_CASE("sweep rows, header and determinism") {
  auto cfg = parse("n_trials=3\nL=50\nB_C=5\nschemes=proposed\naxis=B_B\nrange=2:2:1\n");
  const auto rows = run_sweep(cfg);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].error.empty());
  CHECK(*rows[0].sweep_value == 2.0);

  cfg = parse("n_trials=3\nL=50\nB_C=5\nschemes=proposed,mpc,gcp\naxis=B_C\nrange=5:10:5\n");
  const auto a = run_sweep(cfg);
  REQUIRE(a.size() == 6);
  CHECK(a[0].scheme == "proposed");
  CHECK(a[2].scheme == "gcp");
  CHECK(!a[2].p_tilde.has_value());
  const std::string text = csv(a);
  CHECK(text.rfind("sweep_value,scheme,M,L_prime,p_tilde,p_hat,ci95,runtime_s,error\n", 0) == 0);
  // Every line has the same number of columns.
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) CHECK(std::count(line.begin(), line.end(), ',') == 8);

  CHECK(csv(run_sweep(cfg)) == text);
  cfg.threads = 3;
  CHECK(csv(run_sweep(cfg)) == text);
}

TEST_CASE("sweep keeps going past a failing point") {
  auto cfg = parse("n_trials=2\nL=30\nB_C=5\nschemes=mpc\naxis=B_C\nrange=20:40:10\n");
  const auto rows = run_sweep(cfg);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].error.empty());
  CHECK(rows[1].error.empty());
  CHECK_FALSE(rows[2].error.empty());  // B_C = 40 > L
}

TEST_CASE("approximation comparison") {
  auto cfg = parse("tau=0\nn_trials=2\nL=40\nB_C=10\nB_B=40\naxis=B_C\nrange=10:20:10\n");
  const auto rows = run_compare_approx(cfg);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.error.empty());
    CHECK(*r.gap == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.p_tilde <= r.upper_bound + 1e-12);
  }
  std::ostringstream os;
  write_approx_csv(os, rows);
  CHECK(os.str().rfind("sweep_value,M,L_prime,p_tilde,upper_bound,p_hat,ci95,gap,error\n", 0) == 0);
}
