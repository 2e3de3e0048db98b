#include <doctest.h>

#include <set>
#include <string>
#include <vector>

#include "vpkit/dsl.hpp"
#include "vpkit/emulator.hpp"
#include "vpkit/grid.hpp"
#include "vpkit/pairgen.hpp"
#include "vpkit/skillgen.hpp"

using namespace vpkit;

namespace {

const CodeGridPair& fixture_pair() {
  static const CodeGridPair pair = [] {
    Rng rng(derive_seed(20260401, "skill-fixture", 0));
    PairOptions opts;
    opts.code_spec.sketch = "RepeatUntil{If}";
    return sample_pair(opts, rng);
  }();
  return pair;
}

// 8x8 wall-ringed maze solved by the size-4 left-hugging runner.
const char* kMazeText =
    "8 8\n"
    "########\n"
    "#.....<#\n"
    "#.####.#\n"
    "#.#....#\n"
    "#.#.*..#\n"
    "#.####.#\n"
    "#......#\n"
    "########\n";

const char* kLeftHugger =
    "when run:\n"
    "  repeatUntil goal:\n"
    "    move\n"
    "    if leftIsClear:\n"
    "      turnLeft";

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < line.size()) {
    std::size_t space = line.find(' ', start);
    out.push_back(space == std::string::npos ? line.substr(start)
                                             : line.substr(start, space - start));
    if (space == std::string::npos) break;
    start = space + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("skill types split into basics, tracing, and grid synthesis") {
  CHECK(kAllSkillTypes.size() == 11);
  int basics = 0, tracing = 0, gridsynth = 0;
  std::set<std::string> names;
  for (SkillType t : kAllSkillTypes) {
    names.insert(skill_type_name(t));
    CHECK(skill_type_from_name(skill_type_name(t)) == t);
    switch (skill_category_of(t)) {
      case SkillCategory::basics: ++basics; break;
      case SkillCategory::tracing: ++tracing; break;
      case SkillCategory::gridSynthesis: ++gridsynth; break;
      default: FAIL("unexpected category");
    }
  }
  CHECK(names.size() == 11);
  CHECK(basics == 4);
  CHECK(tracing == 2);
  CHECK(gridsynth == 5);
  CHECK(!skill_type_from_name("nonsense").has_value());
}

TEST_CASE("standalone grids for basics are always valid") {
  Rng rng(derive_seed(20260401, "skill-grids", 0));
  for (int i = 0; i < 50; ++i) {
    Grid g = sample_basic_grid(rng);
    validate_grid(g);  // throws on failure
    CHECK(g.avatar.has_value());
    CHECK(g.rows >= 4);
    CHECK(g.cols >= 4);
  }
}

TEST_CASE("basics records validate and pin their target formats") {
  Rng rng(derive_seed(20260401, "skill-basics", 0));
  int validated = 0;
  for (int i = 0; i < 60; ++i) {
    Grid g = sample_basic_grid(rng);
    for (SkillType t : {SkillType::locateAvatar, SkillType::locateGoal,
                        SkillType::applyAction, SkillType::senseCondition}) {
      if (t == SkillType::locateGoal && !g.goal) continue;
      TaskRecord rec = gen_basic(t, g, rng);
      CHECK(rec.category == SkillCategory::basics);
      CHECK(rec.meta.concept_tag == "basicActions");
      CHECK(!rec.id.empty());
      SkillCheck check = validate_skill_record(rec);
      CAPTURE(rec.task_type);
      CAPTURE(check.failure);
      CHECK(check.ok);
      ++validated;
    }
  }
  CHECK(validated > 200);
}

TEST_CASE("locateAvatar on a one-cell grid names the only pose") {
  Grid g = parse_grid("1 1\n>\n");
  Rng rng(1);
  TaskRecord rec = gen_basic(SkillType::locateAvatar, g, rng);
  CHECK(rec.target == "a1 facing east");
  CHECK(validate_skill_record(rec).ok);
}

TEST_CASE("gen_basic demands the queried element") {
  Grid no_goal = parse_grid("2 2\n>.\n..\n");
  Rng rng(2);
  CHECK_THROWS_AS(gen_basic(SkillType::locateGoal, no_goal, rng), Error);

  Grid no_avatar = parse_grid("2 2\n..\n.*\n");
  CHECK_THROWS_AS(gen_basic(SkillType::locateAvatar, no_avatar, rng), Error);
  CHECK_THROWS_AS(gen_basic(SkillType::applyAction, no_avatar, rng), Error);
  CHECK_THROWS_AS(gen_basic(SkillType::senseCondition, no_avatar, rng), Error);
}

TEST_CASE("applyAction targets match a one-action emulator run") {
  Rng rng(derive_seed(20260401, "skill-apply", 0));
  for (int i = 0; i < 300; ++i) {
    Grid g = sample_basic_grid(rng);
    TaskRecord rec = gen_basic(SkillType::applyAction, g, rng);
    auto action_text = prompt::extract_value(rec.prompt, "action");
    REQUIRE(action_text.has_value());
    auto action = action_from_name(*action_text);
    REQUIRE(action.has_value());
    Code one;
    one.body.push_back(make_action(*action));
    ExecutionResult res = run(one, g);
    REQUIRE(res.status != RunStatus::crashed);
    CHECK(rec.target == pose_phrase(res.trace.back()));
  }
}

TEST_CASE("senseCondition evaluates the shown condition on the shown grid") {
  // avatar in the middle facing north: east neighbor free, west neighbor wall
  Grid g = parse_grid("3 3\n...\n#^.\n.*.\n");
  TaskRecord rec;
  rec.category = SkillCategory::basics;
  rec.task_type = "senseCondition";
  rec.prompt = std::string(skill_description(SkillType::senseCondition)) + "\n";
  prompt::append_value(rec.prompt, "condition", "rightIsClear");
  prompt::append_block(rec.prompt, "grid", serialize_grid(g));
  rec.target = "True";
  finalize_record_id(rec);
  CHECK(validate_skill_record(rec).ok);

  rec.target = "False";
  CHECK(!validate_skill_record(rec).ok);

  // leftIsClear is blocked by the wall at a2
  TaskRecord left = rec;
  left.prompt = std::string(skill_description(SkillType::senseCondition)) + "\n";
  prompt::append_value(left.prompt, "condition", "not leftIsClear");
  prompt::append_block(left.prompt, "grid", serialize_grid(g));
  left.target = "True";
  finalize_record_id(left);
  CHECK(validate_skill_record(left).ok);
}

TEST_CASE("an empty action sequence traces only the initial pose") {
  Grid g = parse_grid("2 3\n>..\n..*\n");
  TaskRecord rec = gen_sequence_trace({}, g);
  CHECK(rec.target == "a1:east");
  CHECK(validate_skill_record(rec).ok);
}

TEST_CASE("sequence traces replay coherently through pose arithmetic") {
  Rng rng(derive_seed(20260401, "skill-seq", 0));
  const CodeGridPair& pair = fixture_pair();
  for (int i = 0; i < 40; ++i) {
    TaskRecord rec = gen_tracing(SkillType::sequenceTrace, pair, rng);
    CHECK(validate_skill_record(rec).ok);
    REQUIRE(rec.explanation.has_value());

    Explanation expl = parse_explanation(*rec.explanation);
    std::vector<std::string> tokens = split_tokens(rec.target);
    bool solved_target = tokens.back() == "goal";
    std::size_t listed = solved_target ? tokens.size() - 1 : tokens.size();
    REQUIRE(expl.trace.size() >= listed);
    for (std::size_t p = 0; p < listed; ++p)
      CHECK(pose_token(expl.trace[p]) == tokens[p]);

    // replaying the actions from the first pose reaches the final pose
    REQUIRE(!expl.trace.empty());
    Pose pose = expl.trace.front();
    for (ActionKind a : expl.actions) pose = advanced_pose(pose, a);
    CHECK(pose == expl.trace.back());
  }
}

TEST_CASE("code traces pin the maze-runner trace text") {
  CodeGridPair pair;
  pair.code = parse_code(kLeftHugger);
  pair.grids = {parse_grid(kMazeText)};
  Rng rng(3);
  TaskRecord rec = gen_tracing(SkillType::codeTrace, pair, rng);
  CHECK(validate_skill_record(rec).ok);
  CHECK(rec.target.rfind("g2:west f2:west e2:west", 0) == 0);
  std::vector<std::string> tokens = split_tokens(rec.target);
  CHECK(tokens.size() == 24);  // 23 actions, final pose listed as `goal`
  CHECK(tokens.back() == "goal");
  REQUIRE(rec.explanation.has_value());
  CHECK(rec.explanation->rfind("avatar locations: " + rec.target, 0) == 0);
  CHECK(rec.meta.sketch == "RepeatUntil{If}");
  CHECK(rec.meta.size == 4);
}

TEST_CASE("grid synthesis targets reconstitute solving grids") {
  Rng rng(derive_seed(20260401, "skill-synth", 0));
  const CodeGridPair& pair = fixture_pair();
  for (SkillType t : {SkillType::placeAvatar, SkillType::placeGoal,
                      SkillType::placeAvatarGoal, SkillType::placeWalls,
                      SkillType::designAll}) {
    CAPTURE(skill_type_name(t));
    for (int i = 0; i < 10; ++i) {
      TaskRecord rec = gen_gridsynth(t, pair, rng);
      CHECK(rec.category == SkillCategory::gridSynthesis);
      SkillCheck check = validate_skill_record(rec);
      CAPTURE(check.failure);
      CHECK(check.ok);
      REQUIRE(rec.explanation.has_value());
      CHECK(rec.explanation->rfind("avatar locations:", 0) == 0);
      CHECK(rec.meta.sketch == "RepeatUntil{If}");
    }
  }
}

TEST_CASE("designAll gives only the code and asks for a described grid") {
  Rng rng(derive_seed(20260401, "skill-design", 0));
  TaskRecord rec = gen_gridsynth(SkillType::designAll, fixture_pair(), rng);
  CHECK(!prompt::extract_block(rec.prompt, "grid").has_value());
  CHECK(prompt::extract_block(rec.prompt, "code").has_value());
  CHECK(rec.target.rfind("grid ", 0) == 0);
  Grid described = parse_grid_description(rec.target);
  CHECK(solves(fixture_pair().code, described));
}

TEST_CASE("validator catches a corrupted grid-synthesis target") {
  Rng rng(derive_seed(20260401, "skill-corrupt", 0));
  TaskRecord rec = gen_gridsynth(SkillType::placeGoal, fixture_pair(), rng);
  REQUIRE(validate_skill_record(rec).ok);
  rec.target = "goal at z9";  // out of the grid
  SkillCheck check = validate_skill_record(rec);
  CHECK(!check.ok);
}

TEST_CASE("placeWalls batches emit five distinct removals per pair") {
  Rng rng(derive_seed(20260401, "skill-walls", 0));
  std::vector<TaskRecord> batch = gen_place_walls_batch(fixture_pair(), rng, 5);
  REQUIRE(batch.size() == 5);
  std::set<std::string> keys;
  for (const TaskRecord& rec : batch) {
    keys.insert(rec.prompt + "\x1f" + rec.target);
    CHECK(rec.task_type == "placeWalls");
    CHECK(validate_skill_record(rec).ok);
    auto missing = prompt::extract_value(rec.prompt, "missing");
    REQUIRE(missing.has_value());
    CHECK(missing->find("wall(s)") != std::string::npos);
  }
  CHECK(keys.size() == 5);
}

TEST_CASE("skill generation is deterministic under a fixed seed") {
  const CodeGridPair& pair = fixture_pair();
  for (int round = 0; round < 2; ++round) {
    Rng a(derive_seed(777, "skill-det", 4));
    Rng b(derive_seed(777, "skill-det", 4));
    TaskRecord ra = gen_gridsynth(SkillType::placeAvatarGoal, pair, a);
    TaskRecord rb = gen_gridsynth(SkillType::placeAvatarGoal, pair, b);
    CHECK(ra == rb);

    Grid ga = sample_basic_grid(a);
    Grid gb = sample_basic_grid(b);
    CHECK(serialize_grid(ga) == serialize_grid(gb));
    TaskRecord sa = gen_basic(SkillType::senseCondition, ga, a);
    TaskRecord sb = gen_basic(SkillType::senseCondition, gb, b);
    CHECK(sa == sb);
  }
}
