// Code/grid pair synthesis: sketch-constrained code sampling, the degeneracy
// screen, grow-as-you-execute grid synthesis with its coverage screen, and
// solution-task assembly (store/maxSize extraction).

#include <doctest.h>

#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "vpkit/pairgen.hpp"

using namespace vpkit;

namespace {

// 8x8 ring maze: border walls, two inner bars, goal at e5, avatar g2 west.
const std::string kMazeText =
    "8 8\n"
    "########\n"
    "#.....<#\n"
    "#.####.#\n"
    "#.#....#\n"
    "#.#.*..#\n"
    "#.####.#\n"
    "#......#\n"
    "########\n";

const std::string kLeftHugger =
    "when run:\n"
    "  repeatUntil goal:\n"
    "    move\n"
    "    if leftIsClear:\n"
    "      turnLeft";

// §size 5 wall-follower: blocks {move, turnRight, RepeatUntil, IfElse}.
const std::string kRightTurner =
    "when run:\n"
    "  repeatUntil goal:\n"
    "    if rightIsClear:\n"
    "      turnRight\n"
    "      move\n"
    "    else:\n"
    "      move";

bool has_goal_condition(const BlockList& body);

bool block_has_goal(const Block& b) {
  return std::visit(
      Overload{[](const ActionBlock&) { return false; },
               [](const RepeatBlock& r) { return has_goal_condition(r.body); },
               [](const RepeatUntilBlock& r) {
                 return r.cond.kind == ConditionKind::goal || has_goal_condition(r.body);
               },
               [](const WhileBlock& w) { return has_goal_condition(w.body); },
               [](const IfBlock& i) { return has_goal_condition(i.body); },
               [](const IfElseBlock& i) {
                 return has_goal_condition(i.then_body) || has_goal_condition(i.else_body);
               }},
      b.node);
}

bool has_goal_condition(const BlockList& body) {
  return std::any_of(body.begin(), body.end(), block_has_goal);
}

bool has_negated_condition(const Code& c) {
  bool found = false;
  std::function<void(const BlockList&)> walk = [&](const BlockList& body) {
    for (const Block& b : body)
      std::visit(Overload{[&](const ActionBlock&) {},
                          [&](const RepeatBlock& r) { walk(r.body); },
                          [&](const RepeatUntilBlock& r) {
                            found |= r.cond.negated;
                            walk(r.body);
                          },
                          [&](const WhileBlock& w) {
                            found |= w.cond.negated;
                            walk(w.body);
                          },
                          [&](const IfBlock& i) {
                            found |= i.cond.negated;
                            walk(i.body);
                          },
                          [&](const IfElseBlock& i) {
                            found |= i.cond.negated;
                            walk(i.then_body);
                            walk(i.else_body);
                          }},
                 b.node);
  };
  walk(c.body);
  return found;
}

}  // namespace

TEST_CASE("curriculum sketches are canonical and ordered simple-to-nested") {
  const auto& sketches = curriculum_sketches();
  REQUIRE(sketches.size() == 15);
  CHECK(sketches.front() == "");
  for (const std::string& s : sketches) CHECK(canonical_sketch(s) == s);
  std::set<std::string> unique(sketches.begin(), sketches.end());
  CHECK(unique.size() == sketches.size());
}

TEST_CASE("sample_code: a one-block program must be an effectful action") {
  Rng rng(101);
  CodeSpec spec;
  spec.min_size = 1;
  spec.max_size = 1;
  for (int i = 0; i < 10; ++i) {
    Code c = sample_code(spec, rng);
    CHECK(print_code(c) == "when run:\n  move");
  }
}

TEST_CASE("sample_code matches sketch, size window, and screen for every sketch") {
  Rng rng(derive_seed(20260401, "pairgen-sample", 0));
  for (const std::string& sketch : curriculum_sketches()) {
    CAPTURE(sketch);
    CodeSpec spec;
    spec.sketch = sketch;
    for (int i = 0; i < 40; ++i) {
      Code c = sample_code(spec, rng);
      CodeMetrics m = metrics(c);
      CHECK(m.sketch == sketch);
      CHECK(m.size >= spec.min_size);
      CHECK(m.size <= spec.max_size);
      CHECK_FALSE(is_degenerate(c));
      CHECK_NOTHROW(validate_code(c));
      CHECK_FALSE(has_negated_condition(c));
    }
  }
}

TEST_CASE("sample_code places goal only on a trailing top-level repeatUntil") {
  Rng rng(7202);

  SUBCASE("trailing repeatUntil chases the goal") {
    CodeSpec spec;
    spec.sketch = "RepeatUntil{If}";
    for (int i = 0; i < 25; ++i) {
      Code c = sample_code(spec, rng);
      auto* loop = std::get_if<RepeatUntilBlock>(&c.body.back().node);
      REQUIRE(loop != nullptr);
      CHECK(loop->cond == Condition{ConditionKind::goal, false});
      // the nested if never sees the goal
      for (const Block& b : loop->body)
        if (auto* i_ = std::get_if<IfBlock>(&b.node))
          CHECK(i_->cond.kind != ConditionKind::goal);
    }
  }

  SUBCASE("non-trailing or absent repeatUntil means no goal condition at all") {
    CodeSpec spec;
    spec.sketch = "While; Repeat";
    for (int i = 0; i < 25; ++i) {
      Code c = sample_code(spec, rng);
      CHECK_FALSE(has_goal_condition(c.body));
    }
  }

  SUBCASE("nested repeatUntil under the goal loop uses a sensor") {
    CodeSpec spec;
    spec.sketch = "RepeatUntil{Repeat}";
    Code c = sample_code(spec, rng);
    auto* loop = std::get_if<RepeatUntilBlock>(&c.body.back().node);
    REQUIRE(loop != nullptr);
    CHECK(loop->cond.kind == ConditionKind::goal);
  }
}

TEST_CASE("sample_code is deterministic under a fixed seed") {
  CodeSpec spec;
  spec.sketch = "RepeatUntil{IfElse}";
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(print_code(sample_code(spec, a)) == print_code(sample_code(spec, b)));
}

TEST_CASE("sample_code rejects infeasible specs") {
  Rng rng(1);
  CodeSpec spec;
  spec.sketch = "RepeatUntil{IfElse{IfElse}}";  // needs 3 controls + 3 leaf actions
  spec.max_size = 5;
  CHECK_THROWS_AS(sample_code(spec, rng), Error);
  spec.max_size = 6;
  CHECK(code_size(sample_code(spec, rng)) == 6);
}

TEST_CASE("degeneracy screen") {
  auto deg = [](const std::string& text) { return is_degenerate(parse_code(text)); };
  CHECK(deg("when run:\n  turnLeft"));  // no effect on the board
  CHECK_FALSE(deg("when run:\n  move"));
  CHECK(deg("when run:\n  move\n  turnLeft\n  turnRight"));  // turns cancel
  CHECK(deg("when run:\n  repeat 4:\n    turnLeft\n  move"));  // full-circle spin
  CHECK_FALSE(deg("when run:\n  repeat 3:\n    turnLeft\n  move"));
  CHECK(deg("when run:\n  repeatUntil goal:\n    turnLeft"));  // goal chase, no move
  CHECK_FALSE(deg("when run:\n  repeatUntil goal:\n    move\n    turnLeft"));
  CHECK(deg("when run:\n  if pathAhead:\n    move\n  else:\n    move"));  // same branches
  CHECK_FALSE(deg("when run:\n  if pathAhead:\n    move\n  else:\n    turnLeft\n    move"));
  CHECK(deg(kLeftHugger + "\n    turnRight\n    turnLeft"));
}

TEST_CASE("coverage_ok demands every site exercised") {
  SUBCASE("wall-follower on the ring maze covers goal loop and sensor") {
    Code c = parse_code(kLeftHugger);
    Grid g = parse_grid(kMazeText);
    Coverage cov;
    ExecutionResult res = run(c, g, {}, &cov);
    REQUIRE(res.status == RunStatus::solved);
    CHECK(coverage_ok(c, cov));
  }

  SUBCASE("an if that never fires fails the screen") {
    Code c = parse_code("when run:\n  move\n  if markersPresent:\n    turnLeft\n  move\n  move");
    Grid g = parse_grid("2 4\n>..*\n....\n");
    Coverage cov;
    ExecutionResult res = run(c, g, {}, &cov);
    REQUIRE(res.status == RunStatus::solved);
    CHECK_FALSE(coverage_ok(c, cov));
  }

  SUBCASE("a repeat that runs counts as covered") {
    Code c = parse_code("when run:\n  repeat 2:\n    move\n  move");
    Grid g = parse_grid("2 4\n>..*\n....\n");
    Coverage cov;
    ExecutionResult res = run(c, g, {}, &cov);
    REQUIRE(res.status == RunStatus::solved);
    CHECK(coverage_ok(c, cov));
  }
}

TEST_CASE("synthesize_grids: every grid is valid, solved, covered, and distinct") {
  Code code = parse_code(kLeftHugger);
  Rng rng(derive_seed(20260401, "pairgen-grids", 0));
  std::vector<Grid> grids = synthesize_grids(code, 6, rng);
  REQUIRE(grids.size() == 6);
  std::set<std::string> seen;
  for (const Grid& g : grids) {
    CHECK_NOTHROW(validate_grid(g));
    CHECK(g.rows >= 4);
    CHECK(g.rows <= 12);
    CHECK(g.cols >= 4);
    CHECK(g.cols <= 12);
    CHECK(g.walls.size() >= 4);
    Coverage cov;
    ExecutionResult res = run(code, g, {}, &cov);
    CHECK(res.status == RunStatus::solved);
    CHECK(coverage_ok(code, cov));
    CHECK(seen.insert(serialize_grid(g)).second);
  }
}

TEST_CASE("synthesize_grids handles marker manipulation codes") {
  Code code = parse_code(
      "when run:\n  repeatUntil markersPresent:\n    move\n  pickMarker\n  move");
  Rng rng(derive_seed(20260401, "pairgen-markers", 0));
  std::vector<Grid> grids = synthesize_grids(code, 3, rng);
  for (const Grid& g : grids) {
    CHECK_FALSE(g.markers.empty());  // the sensor needed a marker to fire
    ExecutionResult res = run(code, g);
    CHECK(res.status == RunStatus::solved);  // goal reached and markers cleared
  }
}

TEST_CASE("synthesize_grids is deterministic under a fixed seed") {
  Code code = parse_code(kLeftHugger);
  Rng a(99), b(99);
  std::vector<Grid> ga = synthesize_grids(code, 3, a);
  std::vector<Grid> gb = synthesize_grids(code, 3, b);
  REQUIRE(ga.size() == gb.size());
  for (std::size_t i = 0; i < ga.size(); ++i)
    CHECK(serialize_grid(ga[i]) == serialize_grid(gb[i]));
}

TEST_CASE("synthesize_grids gives up on unsatisfiable codes") {
  // A goal chase that never moves can only end where it started, which the
  // grower rejects, so the budget runs dry.
  Code code = parse_code("when run:\n  repeatUntil goal:\n    turnLeft");
  Rng rng(5);
  CHECK_THROWS_AS(synthesize_grids(code, 1, rng, {}, 25), Error);
}

TEST_CASE("sample_pair produces a covered pair for every curriculum sketch") {
  for (const std::string& sketch : curriculum_sketches()) {
    CAPTURE(sketch);
    PairOptions opts;
    opts.code_spec.sketch = sketch;
    opts.grids_per_pair = 2;
    Rng rng(derive_seed(20260401, "pairgen-pair", std::hash<std::string>{}(sketch)));
    CodeGridPair pair = sample_pair(opts, rng);
    CHECK(metrics(pair.code).sketch == sketch);
    REQUIRE(pair.grids.size() == 2);
    for (const Grid& g : pair.grids) {
      Coverage cov;
      ExecutionResult res = run(pair.code, g, {}, &cov);
      CHECK(res.status == RunStatus::solved);
      CHECK(coverage_ok(pair.code, cov));
    }
  }
}

TEST_CASE("make_solution_task extracts store and maxSize from the code") {
  SUBCASE("single move") {
    Code c = parse_code("when run:\n  move");
    Grid g = parse_grid("2 2\n>*\n..\n");
    SolutionSynthesisTask task = make_solution_task(c, g);
    CHECK(task.store == std::set<std::string>{"move"});
    CHECK(task.max_size == 1);
    CHECK(task.target == c);
    CHECK(task.explanation ==
          "avatar locations: a1:east goal\n"
          "avatar actions: move\n"
          "code:\n"
          "when run:\n"
          "  move");
  }

  SUBCASE("size-5 wall-follower, plain store") {
    Code c = parse_code(kRightTurner);
    Grid g = parse_grid("2 2\n>.\n#*\n");
    SolutionSynthesisTask task = make_solution_task(c, g);
    CHECK(task.store ==
          std::set<std::string>{"move", "turnRight", "RepeatUntil", "IfElse"});
    CHECK(task.max_size == 5);
  }

  SUBCASE("size-5 wall-follower, widened store offers both turns") {
    Code c = parse_code(kRightTurner);
    Grid g = parse_grid("2 2\n>.\n#*\n");
    SolutionTaskOptions topt;
    topt.widen_turn_store = true;
    SolutionSynthesisTask task = make_solution_task(c, g, topt);
    CHECK(task.store == std::set<std::string>{"move", "turnRight", "turnLeft",
                                              "RepeatUntil", "IfElse"});
    CHECK(task.max_size == 5);
  }

  SUBCASE("widening is a no-op for codes without turns") {
    Code c = parse_code("when run:\n  move");
    Grid g = parse_grid("2 2\n>*\n..\n");
    SolutionTaskOptions topt;
    topt.widen_turn_store = true;
    CHECK(make_solution_task(c, g, topt).store == std::set<std::string>{"move"});
  }

  SUBCASE("store always covers the target's own blocks") {
    Rng rng(314);
    PairOptions opts;
    opts.code_spec.sketch = "RepeatUntil{IfElse}";
    opts.grids_per_pair = 2;
    CodeGridPair pair = sample_pair(opts, rng);
    for (const Grid& g : pair.grids) {
      SolutionSynthesisTask task = make_solution_task(pair.code, g);
      std::set<std::string> blocks = code_blocks(task.target);
      CHECK(std::includes(task.store.begin(), task.store.end(), blocks.begin(),
                          blocks.end()));
      CHECK(code_size(task.target) <= task.max_size);
    }
  }

  SUBCASE("rejects a code that does not solve the grid") {
    Code c = parse_code("when run:\n  move\n  move\n  move");
    Grid g = parse_grid("2 2\n>*\n..\n");  // third move crashes off-board
    CHECK_THROWS_AS(make_solution_task(c, g), Error);
  }
}
