#include <cmath>
#include <filesystem>

#include "congestexp/config.hpp"
#include "congestexp/error.hpp"
#include "congestexp/harness.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace congestexp;
using testutil::act;

namespace {

const std::filesystem::path kData = CONGESTEXP_TEST_DATA;

ExperimentConfig semibandit_config(CongestionGame game, std::size_t horizon) {
  ExperimentConfig cfg(std::move(game));
  cfg.learners.push_back(LearnerConfig{});
  cfg.horizon = horizon;
  return cfg;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("congestexp_unit_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("one round, uniform start") {
  CongestionGame g(2, 2, 1, {{{0.5, 0.5}}, {{0.5, 0.5}}});
  const auto rec = run(semibandit_config(g, 1), 1);
  REQUIRE(rec.rows.size() == 1);
  for (const auto& q : rec.rows[0].marginals) CHECK(q == std::vector<double>{0.5, 0.5});
  for (const auto& r : rec.regrets) CHECK(r.regret <= 1.0);
}

TEST_CASE("one round regret is at most k") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = make_random_game(3, 5, 2, seed);
    auto cfg = semibandit_config(g, 1);
    cfg.learners[0].schedule.eta = 0.5;  // 1/sqrt(T) would exceed 1/k
    const auto rec = run(cfg, seed);
    for (const auto& r : rec.regrets) CHECK(r.regret <= 2.0);
  }
}

TEST_CASE("runs replay bit-exactly") {
  auto cfg = semibandit_config(make_random_game(3, 5, 2, 4), 200);
  cfg.learners[0].mode = FeedbackMode::kFullInfoStochastic;
  const auto a = run(cfg, 99), b = run(cfg, 99), c = run(cfg, 100);
  CHECK(trace_csv(a, 3, 5) == trace_csv(b, 3, 5));
  CHECK(trace_csv(a, 3, 5) != trace_csv(c, 3, 5));
  CHECK(a.rows == b.rows);
}

TEST_CASE("G1 semi-bandit regret under kF sqrt(T)") {
  const std::size_t horizon = 10000;
  const auto rec = run(semibandit_config(testutil::g1(), horizon), 2);
  for (const auto& r : rec.regrets) {
    CHECK(r.regret <= 1.0 * 1 * 2 * std::sqrt(double(horizon)));
  }
}

TEST_CASE("thinned traces keep exact regret") {
  auto cfg = semibandit_config(make_random_game(2, 4, 2, 6), 23);
  const auto full = run(cfg, 5);
  cfg.trace_every = 5;
  const auto thin = run(cfg, 5);
  CHECK(thin.rows.size() == 5);
  CHECK(thin.rows[2].t == 10);
  CHECK(thin.rows[2] == full.rows[10]);
  CHECK(thin.regrets[0].regret == full.regrets[0].regret);
}

TEST_CASE("trace CSV: header-only, round trip, golden file") {
  RunRecord empty;
  const std::string header_only = trace_csv(empty, 2, 2);
  CHECK(header_only ==
        "t,player,action_bitmask,regret_so_far,nash_distance,welfare,in_UM,reward_0,reward_1,"
        "score_0,score_1,q_0,q_1\n");
  CHECK(parse_trace_csv(header_only, 2, 2).empty());

  auto cfg = semibandit_config(make_random_game(3, 4, 2, 2), 50);
  const auto rec = run(cfg, 3);
  CHECK(parse_trace_csv(trace_csv(rec, 3, 4), 3, 4) == rec.rows);

  cfg.reference_mode = ReferenceMode::kNone;
  const auto noref = run(cfg, 3);
  const auto parsed = parse_trace_csv(trace_csv(noref, 3, 4), 3, 4);
  CHECK(std::isnan(parsed[0].nash_distance[0]));

  const auto config = load_experiment_file(kData / "g1_semibandit.json");
  const auto golden = run(config, 7);
  CHECK(trace_csv(golden, 2, 2) == read_text_file(kData / "golden_g1_T3_seed7.csv"));
}

TEST_CASE("malformed traces are rejected") {
  CHECK_THROWS_AS(parse_trace_csv("", 2, 2), Error);
  CHECK_THROWS_AS(parse_trace_csv("t,player\n", 2, 2), Error);
  auto rec = run(semibandit_config(testutil::g1(), 2), 1);
  std::string text = trace_csv(rec, 2, 2);
  text.pop_back();
  text += ",extra\n";
  CHECK_THROWS_AS(parse_trace_csv(text, 2, 2), Error);
}

TEST_CASE("stored traces reproduce regret, welfare and marginals") {
  auto cfg = semibandit_config(make_random_game(3, 5, 2, 12), 400);
  const auto rec = run(cfg, 8);
  const auto rows = parse_trace_csv(trace_csv(rec, 3, 5), 3, 5);
  const auto rep = analyze_trace(cfg.game, rows, std::nullopt, std::nullopt);
  CHECK(rep.contiguous);
  CHECK(rep.max_regret_mismatch <= 1e-9);
  CHECK(rep.max_welfare_mismatch <= 1e-9);
  CHECK(rep.max_marginal_mismatch <= 1e-12);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(rep.recomputed_regret[i] - rec.regrets[i].regret) <= 1e-9);
  }
  CHECK(rep.opt.has_value());
}

TEST_CASE("reference equilibrium handling") {
  auto cfg = semibandit_config(testutil::g1(), 5);
  CHECK(run(cfg, 1).reference.has_value());
  cfg.reference_mode = ReferenceMode::kExplicit;
  cfg.reference = {act({0}), act({0})};
  const auto rec = run(cfg, 1);
  CHECK_FALSE(rec.warnings.empty());
  auto flat = semibandit_config(testutil::constant_game(2, 3, 1, 0.5), 5);
  CHECK_FALSE(run(flat, 1).warnings.empty());  // no strict equilibrium
  flat.learners[0].init = {true, 3.0};
  flat.reference_mode = ReferenceMode::kNone;
  CHECK_THROWS_AS(run(flat, 1), Error);
}

TEST_CASE("convergence study basics") {
  const auto g = testutil::g1();
  const auto cert = *best_strict_nash(find_pure_nash(g));
  const double m = convergence_margin(cert.epsilon, 1, 2);
  CHECK(m == std::ceil(std::abs(std::log(0.3 / 4))) + 1);
  const auto table = run_convergence_study(g, ConvergenceMode::kExpected, cert, m,
                                           LearningRateSchedule::constant(0.5), {0}, 100);
  CHECK(table.rows.size() == 101 * 2);
  CHECK(table.fraction_clean == 1.0);
  for (const auto& r : table.rows) {
    CHECK_FALSE(r.violation);
    CHECK(r.in_region);
  }
  // Large M: the closed form at t = 0.
  const auto big = run_convergence_study(g, ConvergenceMode::kExpected, cert, 30.0,
                                         LearningRateSchedule::constant(0.5), {0}, 0);
  for (const auto& r : big.rows) CHECK(r.distance <= 2 * 2 * std::exp(-30.0));

  CongestionGame single(2, 2, 2, {{{1.0, 0.5}}, {{0.9, 0.1}}});
  NashCertificate forced{{act({0, 1}), act({0, 1})}, true, INFINITY, INFINITY};
  const auto flat = run_convergence_study(single, ConvergenceMode::kStochastic, forced, 2.0,
                                          LearningRateSchedule::power_decay(0.1, 0.75), {1, 2}, 50);
  for (const auto& r : flat.rows) CHECK(r.distance == 0.0);

  NashCertificate weak = cert;
  weak.strict = false;
  CHECK_THROWS_AS(run_convergence_study(g, ConvergenceMode::kExpected, weak, m,
                                        LearningRateSchedule::constant(0.5), {0}, 10),
                  Error);
  CHECK_THROWS_AS(run_convergence_study(g, ConvergenceMode::kExpected, cert, 0.5,
                                        LearningRateSchedule::constant(0.5), {0}, 10),
                  Error);
  const std::string csv = convergence_csv(table);
  CHECK(csv.rfind("seed,t,player,distance,bound,", 0) == 0);
}

TEST_CASE("sweep results do not depend on thread count") {
  ExperimentConfig base = semibandit_config(make_random_game(3, 4, 2, 1), 1);
  base.random_game = RandomGameSpec{3, 4, 2, 1, RewardKernel::kBernoulli};
  SweepGrid grid;
  grid.horizons = {50, 200};
  grid.facility_counts = {4, 5};
  grid.seeds = {1, 2, 3};
  grid.write_traces = true;
  const auto d1 = scratch_dir("sweep1"), d4 = scratch_dir("sweep4");
  grid.threads = 1;
  const auto s1 = sweep_regret_scaling(base, grid, d1);
  grid.threads = 4;
  const auto s4 = sweep_regret_scaling(base, grid, d4);
  CHECK(sweep_summary_json(s1) == sweep_summary_json(s4));
  CHECK(sweep_summary_csv(s1) == sweep_summary_csv(s4));
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(d1)) {
    ++files;
    CHECK(read_text_file(entry.path()) == read_text_file(d4 / entry.path().filename()));
  }
  CHECK(files == 12);
  CHECK(s1.points.size() == 4);
  CHECK(s1.exponents.size() == 2);

  ExperimentConfig fixed = semibandit_config(testutil::g1(), 1);
  grid.facility_counts = {3};
  CHECK_THROWS_AS(sweep_regret_scaling(fixed, grid), Error);
}

TEST_CASE("log-log slope") {
  CHECK(fit_log_log_slope({1, 10, 100}, {3, 30, 300}) == doctest::Approx(1.0));
  CHECK(fit_log_log_slope({4, 16, 64}, {2, 4, 8}) == doctest::Approx(0.5));
  CHECK(std::isnan(fit_log_log_slope({1, 2}, {0, 1})));
}

TEST_CASE("emit writes artifacts and surfaces I/O errors with the path") {
  const auto dir = scratch_dir("emit");
  const auto g = testutil::g1();
  const auto rec = run(semibandit_config(g, 4), 1);
  emit_run(rec, g, dir / "run");
  CHECK(std::filesystem::exists(dir / "run" / "trace.csv"));
  CHECK(load_game_file(dir / "run" / "game.json") == g);
  CHECK(read_text_file(dir / "run" / "summary.json").find("\"regret\"") != std::string::npos);
  try {
    write_text_file("/proc/definitely/not/here.csv", "x");
    FAIL("expected an I/O error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
    CHECK(std::string(e.what()).find("/proc/definitely/not/here.csv") != std::string::npos);
  }
}

TEST_CASE("format_real keeps 17 significant digits") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(1.0) == "1");
  CHECK(format_real(NAN) == "nan");
  CHECK(std::strtod(format_real(1.0 / 3).c_str(), nullptr) == 1.0 / 3);
}

TEST_CASE("doubling F at fixed T grows regret at most about linearly") {
  ExperimentConfig base = semibandit_config(make_random_game(4, 6, 2, 606), 1);
  base.random_game = RandomGameSpec{4, 6, 2, 606, RewardKernel::kBernoulli};
  base.reference_mode = ReferenceMode::kNone;
  SweepGrid grid;
  grid.horizons = {2000};
  grid.facility_counts = {6, 12};
  for (std::uint64_t s = 1; s <= 10; ++s) grid.seeds.push_back(s);
  grid.threads = 4;
  const auto summary = sweep_regret_scaling(base, grid);
  REQUIRE(summary.points.size() == 2);
  const double ratio = summary.points[1].mean / summary.points[0].mean;
  MESSAGE("regret ratio F=12 vs F=6: " << ratio);
  CHECK(ratio <= 2.8);
}
