#include <string>

#include "congestexp/config.hpp"
#include "congestexp/error.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace congestexp;

namespace {

std::string error_of(const std::string& text) {
  try {
    experiment_from_json(text);
  } catch (const Error& e) {
    return std::string(e.what());
  }
  return "no error";
}

const char* kInlineGame = R"("game": {"n": 2, "F": 2, "k": 1, "rewards": [[1.0, 0.2], [0.8, 0.3]]})";

std::string with_game(const std::string& rest) {
  return std::string("{") + kInlineGame + ", " + rest + "}";
}

}  // namespace

TEST_CASE("experiment config parsing") {
  const auto cfg = experiment_from_json(with_game(
      R"("learner": {"mode": "full_info_stochastic",
                     "schedule": {"variant": "power_decay", "alpha": 0.75,
                                  "auto_beta": {"delta": 0.1, "M": 5}},
                     "init": {"near_ne": {"M": 5}}},
         "T": 100, "seeds": [3, 4], "trace_every": 10,
         "reference_equilibrium": [[0], [1]])"));
  CHECK(cfg.horizon == 100);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{3, 4});
  CHECK(cfg.trace_every == 10);
  CHECK(cfg.reference_mode == ReferenceMode::kExplicit);
  CHECK(cfg.learner_for(1).init.near_equilibrium);
  const auto sched = cfg.learner_for(0).schedule.resolve(cfg.game, cfg.horizon);
  CHECK(sched.beta() == doctest::Approx(stochastic_beta(0.1, 5, 1, 2, 2, 0.75)));

  const auto dflt = experiment_from_json(with_game(R"("learner": {"mode": "semi_bandit"}, "T": 400)"));
  CHECK(dflt.seeds == std::vector<std::uint64_t>{0});
  CHECK(dflt.learner_for(0).schedule.resolve(dflt.game, 400).rate(0) == 0.05);

  const auto rnd = experiment_from_json(
      R"({"game": {"n": 4, "F": 6, "k": 2, "random": {"seed": 5}},
          "learner": {"mode": "semi_bandit"}, "T": 10})");
  REQUIRE(rnd.random_game.has_value());
  CHECK(rnd.game == make_random_game(4, 6, 2, 5));
}

TEST_CASE("config errors carry field paths") {
  CHECK(error_of(with_game(R"("learner": {"mode": "semi_bandit"})")).find("config.T") !=
        std::string::npos);
  CHECK(error_of(with_game(R"("learner": {"mode": "semi_bandit"}, "T": 0)")).find("config.T") !=
        std::string::npos);
  CHECK(error_of(with_game(R"("learner": {"mode": "semi_bandit"}, "T": 5, "seeds": [])"))
            .find("config.seeds") != std::string::npos);
  CHECK(error_of(with_game(R"("learner": {"mode": "bandit"}, "T": 5)")).find("config.learner.mode") !=
        std::string::npos);
  CHECK(error_of(with_game(
                     R"("learner": {"mode": "semi_bandit", "schedule": {"variant": "constant", "eta": -1}}, "T": 5)"))
            .find("config.learner.schedule.eta") != std::string::npos);
  CHECK(error_of(with_game(
                     R"("learner": {"mode": "semi_bandit", "schedule": {"variant": "power_decay", "alpha": 0.4, "beta": 1}}, "T": 5)"))
            .find("config.learner.schedule.alpha") != std::string::npos);
  CHECK(error_of(with_game(R"("learner": {"mode": "semi_bandit"}, "T": 5, "reference_equilibrium": [[0], [2]])"))
            .find("config.reference_equilibrium") != std::string::npos);
  CHECK(error_of(R"({"game_file": "/nonexistent/game.json", "learner": {"mode": "semi_bandit"}, "T": 5})")
            .find("config.game_file") != std::string::npos);
  CHECK(error_of(with_game(R"("learners": [{"mode": "semi_bandit"}], "T": 5)"))
            .find("config.learners") != std::string::npos);
}

TEST_CASE("joint action JSON") {
  const auto g = testutil::g1();
  const auto a = joint_action_from_json("[[0], [1]]", g);
  CHECK(a == JointAction{testutil::act({0}), testutil::act({1})});
  CHECK(joint_action_to_json(a) == "[[0],[1]]");
  CHECK_THROWS_AS(joint_action_from_json("[[0]]", g), Error);
}

TEST_CASE("sweep grid parsing") {
  const auto grid = sweep_grid_from_json(R"({"T": [10, 20], "F": [4], "seeds": [1], "threads": 3})");
  CHECK(grid.horizons == std::vector<std::size_t>{10, 20});
  CHECK(grid.facility_counts == std::vector<std::size_t>{4});
  CHECK(grid.threads == 3);
  CHECK_THROWS_AS(sweep_grid_from_json(R"({"F": [4]})"), Error);
  CHECK_THROWS_AS(sweep_grid_from_json(R"({"T": []})"), Error);
}

TEST_CASE("missing files are I/O errors") {
  try {
    load_experiment_file("/nonexistent/config.json");
    FAIL("expected an I/O error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
}
