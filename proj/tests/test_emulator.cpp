#include <doctest.h>

#include <string>

#include "oracle.hpp"
#include "vpkit/dsl.hpp"
#include "vpkit/emulator.hpp"
#include "vpkit/grid.hpp"
#include "vpkit/rng.hpp"

using namespace vpkit;

// 8x8 wall-ringed maze: enter the pocket from the east, goal at e5. The
// left-hugging runner below solves it in 23 actions; the right-hugging
// variant walks into the west border instead.
static const char* kMazeText =
    "8 8\n"
    "########\n"
    "#.....<#\n"
    "#.####.#\n"
    "#.#....#\n"
    "#.#.*..#\n"
    "#.####.#\n"
    "#......#\n"
    "########\n";

static Grid maze16() { return parse_grid(kMazeText); }

static Code left_hugger() {
  return parse_code(
      "when run:\n"
      "  repeatUntil goal:\n"
      "    move\n"
      "    if leftIsClear:\n"
      "      turnLeft\n");
}

static Code right_hugger() {
  return parse_code(
      "when run:\n"
      "  repeatUntil goal:\n"
      "    move\n"
      "    if rightIsClear:\n"
      "      turnRight\n");
}

static Grid corridor(int len, const char* extra = "") {
  // 1xN east-bound corridor: avatar at a1, goal at the far end.
  std::string row = ">";
  for (int i = 1; i < len - 1; ++i) row += '.';
  row += '*';
  std::string text = "1 " + std::to_string(len) + std::string(extra) + "\n" + row + "\n";
  return parse_grid(text);
}

TEST_CASE("single actions") {
  Grid g = maze16();
  Pose start{*cell_from_name("g2"), Orientation::west};
  CHECK(apply_action(g, start, ActionKind::move) ==
        Pose{*cell_from_name("f2"), Orientation::west});
  CHECK(apply_action(g, Pose{{0, 0}, Orientation::north}, ActionKind::turnLeft) ==
        Pose{{0, 0}, Orientation::west});
  // moving off the board (or into a wall) is a crash, reported as a value
  CHECK(apply_action(corridor(2), Pose{{0, 0}, Orientation::north}, ActionKind::move) ==
        std::nullopt);
  CHECK(apply_action(g, start, ActionKind::pickMarker) == std::nullopt);
}

TEST_CASE("condition evaluation") {
  Grid g = corridor(3);  // >.*
  Pose at_start{{0, 0}, Orientation::east};
  CHECK(evaluate_condition(g, at_start, {ConditionKind::pathAhead, false}));
  CHECK(evaluate_condition(g, at_start, {ConditionKind::goal, false}) == false);
  CHECK(evaluate_condition(g, Pose{{2, 0}, Orientation::east},
                           {ConditionKind::goal, false}));
  // boundaries are not clear
  CHECK(evaluate_condition(g, Pose{{2, 0}, Orientation::east},
                           {ConditionKind::pathAhead, false}) == false);
  // left of east is north: off-board here
  CHECK(evaluate_condition(g, at_start, {ConditionKind::leftIsClear, false}) == false);
  CHECK(evaluate_condition(g, at_start, {ConditionKind::leftIsClear, true}));

  Grid m = corridor(3);
  m.markers[Cell{1, 0}] = 2;
  CHECK(evaluate_condition(m, at_start, {ConditionKind::markersPresent, false}) == false);
  CHECK(evaluate_condition(m, Pose{{1, 0}, Orientation::east},
                           {ConditionKind::markersPresent, false}));
}

TEST_CASE("condition evaluation agrees with the reference logic everywhere") {
  // Randomized sweep over small grids, every condition, both polarities.
  Rng rng(derive_seed(20260401, "cond-sweep", 0));
  oracle::GridGenConfig cfg;
  cfg.max_rows = 3;
  cfg.max_cols = 3;
  cfg.allow_markers = true;
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    Grid g = oracle::random_grid(rng, cfg);
    for (int r = 0; r < g.rows; ++r)
      for (int c = 0; c < g.cols; ++c) {
        if (!g.is_clear(Cell{c, r})) continue;
        for (Orientation o : {Orientation::north, Orientation::east, Orientation::south,
                              Orientation::west}) {
          Pose p{{c, r}, o};
          for (ConditionKind k :
               {ConditionKind::goal, ConditionKind::pathAhead, ConditionKind::leftIsClear,
                ConditionKind::rightIsClear, ConditionKind::markersPresent})
            for (bool neg : {false, true}) {
              if (k == ConditionKind::goal && neg) continue;
              Condition cond{k, neg};
              bool expect = [&] {
                bool raw = false;
                switch (k) {
                  case ConditionKind::goal: raw = g.goal && Cell{c, r} == *g.goal; break;
                  case ConditionKind::pathAhead:
                    raw = g.is_clear(oracle::step_from({c, r}, o));
                    break;
                  case ConditionKind::leftIsClear:
                    raw = g.is_clear(oracle::step_from({c, r}, oracle::rot_left(o)));
                    break;
                  case ConditionKind::rightIsClear:
                    raw = g.is_clear(oracle::step_from({c, r}, oracle::rot_right(o)));
                    break;
                  case ConditionKind::markersPresent: raw = g.marker_count({c, r}) > 0; break;
                }
                return neg ? !raw : raw;
              }();
              if (evaluate_condition(g, p, cond) != expect) {
                CAPTURE(serialize_grid(g));
                CAPTURE(pose_token(p));
                CAPTURE(condition_text(cond));
                REQUIRE(evaluate_condition(g, p, cond) == expect);
              }
              ++checked;
            }
        }
      }
  }
  CHECK(checked > 100000);
}

TEST_CASE("run: one move to the goal") {
  Code c = parse_code("when run:\n  move");
  ExecutionResult res = run(c, corridor(2));
  CHECK(res.status == RunStatus::solved);
  CHECK(res.actions == std::vector<ActionKind>{ActionKind::move});
  CHECK(res.trace == std::vector<Pose>{{{0, 0}, Orientation::east},
                                       {{1, 0}, Orientation::east}});
  CHECK(res.steps_used == 1);
  CHECK(solves(c, corridor(2)));
}

TEST_CASE("run: crash keeps the partial trace") {
  Code c = parse_code("when run:\n  move\n  move");
  ExecutionResult res = run(c, corridor(2));
  CHECK(res.status == RunStatus::crashed);
  CHECK(res.actions == std::vector<ActionKind>{ActionKind::move});  // 2nd move dropped
  CHECK(res.trace.size() == 2);
  CHECK(res.steps_used == 2);  // the crashing attempt still costs a step
}

TEST_CASE("run: goal reached mid-program does not stop a plain sequence") {
  // Only `repeatUntil goal` watches for arrival; straight-line code runs on.
  Grid g = parse_grid("1 3\n>*.\n");
  Code c = parse_code("when run:\n  move\n  move");
  ExecutionResult res = run(c, g);
  CHECK(res.status == RunStatus::notSolved);  // walked past the goal
  CHECK(res.actions.size() == 2);
}

TEST_CASE("run: goal arrival inside repeatUntil goal stops instantly") {
  Grid g = corridor(3);
  Code c = parse_code(
      "when run:\n"
      "  repeatUntil goal:\n"
      "    move\n"
      "    putMarker\n");
  ExecutionResult res = run(c, g);
  CHECK(res.status == RunStatus::solved);
  // move putMarker move -- the final putMarker never runs
  CHECK(res.actions == std::vector<ActionKind>{ActionKind::move, ActionKind::putMarker,
                                               ActionKind::move});
  CHECK(res.trace.back() == Pose{{2, 0}, Orientation::east});
}

TEST_CASE("run: repeatUntil goal with the avatar born on the goal") {
  Grid g = parse_grid("1 2 east\n+.\n");
  Code c = parse_code("when run:\n  repeatUntil goal:\n    move\n");
  ExecutionResult res = run(c, g);
  CHECK(res.status == RunStatus::solved);
  CHECK(res.actions.empty());
  CHECK(res.trace.size() == 1);
  CHECK(res.steps_used == 1);  // one condition check
}

TEST_CASE("run: while loop") {
  Code c = parse_code("when run:\n  while pathAhead:\n    move\n");
  ExecutionResult res = run(c, corridor(4));
  CHECK(res.status == RunStatus::solved);
  CHECK(res.actions.size() == 3);
  CHECK(res.steps_used == 7);  // 4 condition checks + 3 moves
}

TEST_CASE("run: repeat counts") {
  Grid g = corridor(4);
  CHECK(run(parse_code("when run:\n  repeat 3:\n    move\n"), g).status ==
        RunStatus::solved);
  CHECK(run(parse_code("when run:\n  repeat 2:\n    move\n"), g).status ==
        RunStatus::notSolved);
  // repeat itself costs no steps; only its body does
  CHECK(run(parse_code("when run:\n  repeat 3:\n    move\n"), g).steps_used == 3);
}

TEST_CASE("run: step limit") {
  Grid g = parse_grid("1 2\n>*\n");
  Code spin = parse_code("when run:\n  repeatUntil markersPresent:\n    turnLeft\n");
  ExecutionResult res = run(spin, g, RunOptions{50});
  CHECK(res.status == RunStatus::stepLimit);
  CHECK(res.steps_used == 50);
  CHECK(res.actions.size() == 25);  // alternating check/turn
}

TEST_CASE("run: marker objectives") {
  SUBCASE("collect all markers") {
    Grid g = parse_grid("1 2\n>2\n");
    CHECK(run(parse_code("when run:\n  move\n  pickMarker\n  pickMarker\n"), g).status ==
          RunStatus::solved);
    CHECK(run(parse_code("when run:\n  move\n  pickMarker\n"), g).status ==
          RunStatus::notSolved);
    CHECK(run(parse_code("when run:\n  move\n  repeat 3:\n    pickMarker\n"), g).status ==
          RunStatus::crashed);
  }
  SUBCASE("goal plus markers requires both") {
    Grid g = parse_grid("1 3\n>m*\n");
    CHECK(run(parse_code("when run:\n  move\n  pickMarker\n  move\n"), g).status ==
          RunStatus::solved);
    CHECK(run(parse_code("when run:\n  move\n  move\n"), g).status ==
          RunStatus::notSolved);
    CHECK(run(parse_code("when run:\n  move\n  pickMarker\n"), g).status ==
          RunStatus::notSolved);
  }
  SUBCASE("dropping markers on a goal-only grid is harmless") {
    Grid g = corridor(2);
    CHECK(run(parse_code("when run:\n  putMarker\n  move\n"), g).status ==
          RunStatus::solved);
  }
  SUBCASE("a grid with no goal and no markers cannot be solved") {
    Grid g = parse_grid("1 2\n>.\n");
    CHECK(run(parse_code("when run:\n  move\n"), g).status == RunStatus::notSolved);
  }
}

TEST_CASE("maze run matches the published trace") {
  ExecutionResult res = run(left_hugger(), maze16());
  CHECK(res.status == RunStatus::solved);
  REQUIRE(res.trace.size() == 24);
  CHECK(res.actions.size() == 23);

  std::string tokens;
  for (const Pose& p : res.trace) tokens += (tokens.empty() ? "" : " ") + pose_token(p);
  CHECK(tokens ==
        "g2:west f2:west e2:west d2:west c2:west b2:west b2:south b3:south b4:south "
        "b5:south b6:south b7:south b7:east c7:east d7:east e7:east f7:east g7:east "
        "g7:north g6:north g5:north g5:west f5:west e5:west");

  // 19 loop iterations: 18 full (goal check + move + branch check) with 4
  // turns among them, then the last one stops right after its move.
  CHECK(res.steps_used == 18 * 3 + 4 + 2);

  // Hugging the right wall instead walks into the western border.
  ExecutionResult bad = run(right_hugger(), maze16());
  CHECK(bad.status == RunStatus::crashed);
  CHECK(!solves(right_hugger(), maze16()));
}

TEST_CASE("coverage counters") {
  auto sites = collect_sites(left_hugger());
  REQUIRE(sites.size() == 2);
  CHECK(sites.at("0.0") == SiteKind::goalLoop);
  CHECK(sites.at("0.0/0.1") == SiteKind::sensorCondition);

  Coverage cov;
  run(left_hugger(), maze16(), {}, &cov);
  CHECK(cov.condition_outcomes.at("0.0") == std::pair<int, int>{0, 19});
  CHECK(cov.condition_outcomes.at("0.0/0.1") == std::pair<int, int>{4, 14});

  Code rep = parse_code("when run:\n  repeat 3:\n    turnLeft\n");
  CHECK(collect_sites(rep).at("0.0") == SiteKind::repeatLoop);
  Coverage cov2;
  run(rep, corridor(2), {}, &cov2);
  CHECK(cov2.repeat_entries.at("0.0") == 1);
}

TEST_CASE("explanation rendering") {
  SUBCASE("solved run replaces the arrival pose with `goal`") {
    Code c = parse_code("when run:\n  move");
    ExecutionResult res = run(c, corridor(2));
    CHECK(render_explanation(res, c) ==
          "avatar locations: a1:east goal\n"
          "avatar actions: move\n"
          "code:\n"
          "when run:\n"
          "  move");
  }
  SUBCASE("failed run lists every pose and no `goal`") {
    Code c = parse_code("when run:\n  turnLeft");
    ExecutionResult res = run(c, corridor(2));
    CHECK(render_explanation(res, c) ==
          "avatar locations: a1:east a1:north\n"
          "avatar actions: turnLeft\n"
          "code:\n"
          "when run:\n"
          "  turnLeft");
  }
  SUBCASE("maze run") {
    ExecutionResult res = run(left_hugger(), maze16());
    std::string text = render_explanation(res, left_hugger());
    CHECK(text.rfind("avatar locations: g2:west f2:west e2:west", 0) == 0);
    CHECK(text.find("f5:west goal\navatar actions: move move") != std::string::npos);
    Explanation ex = parse_explanation(text);
    CHECK(ex.trace == res.trace);
    CHECK(ex.actions == res.actions);
    CHECK(ex.solved);
    CHECK(ex.code == left_hugger());
  }
  SUBCASE("degenerate solved run with no actions") {
    Grid g = parse_grid("1 2 east\n+.\n");
    Code c = parse_code("when run:\n  repeatUntil goal:\n    move\n");
    ExecutionResult res = run(c, g);
    std::string text = render_explanation(res, c);
    CHECK(text.rfind("avatar locations: goal\navatar actions:\n", 0) == 0);
    Explanation ex = parse_explanation(text);
    CHECK(ex.solved);
    CHECK(ex.trace.empty());  // nothing to reconstruct from
  }
  SUBCASE("malformed explanations are rejected") {
    CHECK_THROWS_AS(parse_explanation("avatar actions: move\ncode:\nwhen run:\n  move"),
                    Error);
    CHECK_THROWS_AS(parse_explanation("avatar locations: a1:east goal\n"
                                      "avatar actions: move\n"
                                      "when run:\n  move"),
                    Error);
    CHECK_THROWS_AS(parse_explanation("avatar locations: a1:up\n"
                                      "avatar actions: move\ncode:\nwhen run:\n  move"),
                    Error);
  }
}

TEST_CASE("explanation round-trip on random runs") {
  Rng rng(derive_seed(20260401, "explain-roundtrip", 0));
  oracle::CodeGenConfig ccfg;
  ccfg.allow_while = true;
  ccfg.allow_markers = true;
  oracle::GridGenConfig gcfg;
  gcfg.allow_markers = true;
  int done = 0;
  while (done < 1000) {
    Code c = oracle::random_code(rng, ccfg);
    Grid g = oracle::random_grid(rng, gcfg);
    ExecutionResult res = run(c, g, RunOptions{200});
    if (res.actions.empty() && res.status == RunStatus::solved) continue;  // degenerate
    Explanation ex = parse_explanation(render_explanation(res, c));
    CHECK(ex.trace == res.trace);
    CHECK(ex.actions == res.actions);
    CHECK(ex.solved == (res.status == RunStatus::solved));
    CHECK(ex.code == c);
    ++done;
  }
}

TEST_CASE("interpreter agrees with the flat reference implementation") {
  Rng rng(derive_seed(20260401, "emulator-oracle", 0));
  oracle::CodeGenConfig plain;
  oracle::CodeGenConfig rich;
  rich.allow_while = true;
  rich.allow_markers = true;
  oracle::GridGenConfig gplain;
  oracle::GridGenConfig grich;
  grich.allow_markers = true;

  for (int i = 0; i < 3000; ++i) {
    bool use_rich = i % 3 == 0;
    Code c = oracle::random_code(rng, use_rich ? rich : plain);
    Grid g = oracle::random_grid(rng, use_rich ? grich : gplain);
    ExecutionResult lib = run(c, g);
    ExecutionResult ref = oracle::flat_run(c, g);
    if (lib != ref) {
      CAPTURE(print_code(c));
      CAPTURE(serialize_grid(g));
      CAPTURE(run_status_name(lib.status));
      CAPTURE(run_status_name(ref.status));
      CAPTURE(lib.steps_used);
      CAPTURE(ref.steps_used);
      REQUIRE(lib == ref);
    }
  }
}

TEST_CASE("trace-action coherence") {
  Rng rng(derive_seed(20260401, "trace-coherence", 0));
  oracle::CodeGenConfig cfg;
  cfg.allow_while = true;
  cfg.allow_markers = true;
  oracle::GridGenConfig gcfg;
  gcfg.allow_markers = true;
  for (int i = 0; i < 1000; ++i) {
    Code c = oracle::random_code(rng, cfg);
    Grid g = oracle::random_grid(rng, gcfg);
    ExecutionResult res = run(c, g, RunOptions{200});
    REQUIRE(res.actions.size() + 1 == res.trace.size());
    // Replaying the recorded actions step by step reproduces the trace.
    // (pickMarker is replayed as pose arithmetic: the static grid no longer
    // reflects the markers present at that moment.)
    for (std::size_t k = 0; k < res.actions.size(); ++k)
      CHECK(advanced_pose(res.trace[k], res.actions[k]) == res.trace[k + 1]);
  }
}
