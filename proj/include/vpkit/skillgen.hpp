#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vpkit/dsl.hpp"
#include "vpkit/emulator.hpp"
#include "vpkit/grid.hpp"
#include "vpkit/pairgen.hpp"
#include "vpkit/records.hpp"
#include "vpkit/rng.hpp"

namespace vpkit {

// ---------------------------------------------------------------------------
// Fine-grained skill tasks: four basics, two tracing, five grid synthesis.
// Each generator returns a TaskRecord whose prompt is a fixed description
// plus labeled sections, and validate_skill_record re-derives the target
// from those sections alone.
// ---------------------------------------------------------------------------

enum class SkillType {
  // basics
  locateAvatar,
  locateGoal,
  applyAction,
  senseCondition,
  // tracing
  sequenceTrace,
  codeTrace,
  // grid synthesis
  placeAvatar,
  placeGoal,
  placeAvatarGoal,
  placeWalls,
  designAll,
};

inline constexpr std::array<SkillType, 11> kAllSkillTypes = {
    SkillType::locateAvatar, SkillType::locateGoal,   SkillType::applyAction,
    SkillType::senseCondition, SkillType::sequenceTrace, SkillType::codeTrace,
    SkillType::placeAvatar,  SkillType::placeGoal,    SkillType::placeAvatarGoal,
    SkillType::placeWalls,   SkillType::designAll};

inline const char* skill_type_name(SkillType t) {
  switch (t) {
    case SkillType::locateAvatar: return "locateAvatar";
    case SkillType::locateGoal: return "locateGoal";
    case SkillType::applyAction: return "applyAction";
    case SkillType::senseCondition: return "senseCondition";
    case SkillType::sequenceTrace: return "sequenceTrace";
    case SkillType::codeTrace: return "codeTrace";
    case SkillType::placeAvatar: return "placeAvatar";
    case SkillType::placeGoal: return "placeGoal";
    case SkillType::placeAvatarGoal: return "placeAvatarGoal";
    case SkillType::placeWalls: return "placeWalls";
    case SkillType::designAll: return "designAll";
  }
  return "?";
}

inline std::optional<SkillType> skill_type_from_name(const std::string& name) {
  for (SkillType t : kAllSkillTypes)
    if (name == skill_type_name(t)) return t;
  return std::nullopt;
}

inline SkillCategory skill_category_of(SkillType t) {
  switch (t) {
    case SkillType::locateAvatar:
    case SkillType::locateGoal:
    case SkillType::applyAction:
    case SkillType::senseCondition: return SkillCategory::basics;
    case SkillType::sequenceTrace:
    case SkillType::codeTrace: return SkillCategory::tracing;
    default: return SkillCategory::gridSynthesis;
  }
}

inline const char* skill_description(SkillType t) {
  switch (t) {
    case SkillType::locateAvatar:
      return "In which cell of the grid below is the avatar, and which direction "
             "does it face?";
    case SkillType::locateGoal:
      return "In which cell of the grid below is the goal?";
    case SkillType::applyAction:
      return "Where is the avatar after executing the given basic action on the "
             "grid below, and which direction does it face?";
    case SkillType::senseCondition:
      return "Does the given condition hold for the avatar in the grid below? "
             "Answer True or False.";
    case SkillType::sequenceTrace:
      return "Give the trace of avatar locations obtained by executing the given "
             "sequence of basic actions on the grid below.";
    case SkillType::codeTrace:
      return "Give the trace of avatar locations obtained by running the given "
             "code on the grid below.";
    case SkillType::placeAvatar:
      return "The grid below is missing its avatar. Place the avatar (cell and "
             "direction) so that the given code solves the grid.";
    case SkillType::placeGoal:
      return "The grid below is missing its goal. Place the goal so that the "
             "given code solves the grid.";
    case SkillType::placeAvatarGoal:
      return "The grid below is missing its avatar and its goal. Place both so "
             "that the given code solves the grid.";
    case SkillType::placeWalls:
      return "Some walls were removed from the grid below. Place walls so that "
             "the given code solves the grid.";
    case SkillType::designAll:
      return "Design a grid that the given code solves. Describe the grid.";
  }
  return "?";
}

// The "avatar locations:" line of an execution, in trace-token format; on
// solved runs the final pose is replaced by the token `goal`.
inline std::string trace_tokens(const ExecutionResult& res) {
  bool solved = res.status == RunStatus::solved;
  std::string out;
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    if (solved && i + 1 == res.trace.size()) break;
    if (!out.empty()) out += ' ';
    out += pose_token(res.trace[i]);
  }
  if (solved) {
    if (!out.empty()) out += ' ';
    out += "goal";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Standalone grid sampling for basics, which are not tied to code/grid pairs.
// ---------------------------------------------------------------------------

struct BasicGridOptions {
  int min_rows = 4, max_rows = 10;
  int min_cols = 4, max_cols = 10;
  double wall_chance = 0.18;
  double goal_chance = 0.85;
  double marker_cell_chance = 0.08;
};

inline Grid sample_basic_grid(Rng& rng, const BasicGridOptions& opts = {}) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    Grid g;
    g.rows = rng.range(opts.min_rows, opts.max_rows);
    g.cols = rng.range(opts.min_cols, opts.max_cols);
    std::vector<Cell> free;
    for (int r = 0; r < g.rows; ++r)
      for (int c = 0; c < g.cols; ++c) {
        Cell cell{c, r};
        if (rng.chance(opts.wall_chance))
          g.walls.insert(cell);
        else
          free.push_back(cell);
      }
    if (free.size() < 3) continue;
    rng.shuffle(free);
    static constexpr std::array<Orientation, 4> kDirs = {
        Orientation::north, Orientation::east, Orientation::south,
        Orientation::west};
    g.avatar = Pose{free[0], kDirs[rng.below(4)]};
    std::size_t next = 1;
    if (rng.chance(opts.goal_chance)) g.goal = free[next++];
    for (std::size_t i = next; i < free.size(); ++i)
      if (rng.chance(opts.marker_cell_chance))
        g.markers[free[i]] = rng.range(1, 3);
    try {
      validate_grid(g);
      return g;
    } catch (const GridError&) {
    }
  }
  throw Error("standalone grid sampling failed");
}

// ---------------------------------------------------------------------------
// Basics
// ---------------------------------------------------------------------------

namespace detail {

inline TaskRecord skeleton_record(SkillType type, const Grid& grid) {
  TaskRecord rec;
  rec.category = skill_category_of(type);
  rec.task_type = skill_type_name(type);
  rec.prompt = skill_description(type);
  rec.prompt += "\n";
  rec.meta.sketch = "";
  rec.meta.size = 0;
  rec.meta.grid_dims = grid_dims_string(grid.rows, grid.cols);
  rec.meta.concept_tag = concept_tag("");
  return rec;
}

inline void stamp_code_meta(TaskRecord& rec, const Code& code) {
  CodeMetrics m = metrics(code);
  rec.meta.sketch = m.sketch;
  rec.meta.size = m.size;
  rec.meta.store.assign(m.blocks.begin(), m.blocks.end());
  std::sort(rec.meta.store.begin(), rec.meta.store.end());
  rec.meta.concept_tag = concept_tag(m.sketch);
}

inline std::string actions_value(const std::vector<ActionKind>& actions) {
  std::string out;
  for (ActionKind a : actions) {
    if (!out.empty()) out += ' ';
    out += action_name(a);
  }
  return out;
}

}  // namespace detail

inline TaskRecord gen_basic(SkillType type, const Grid& grid, Rng& rng) {
  if (skill_category_of(type) != SkillCategory::basics)
    throw Error("not a basics task type");
  TaskRecord rec = detail::skeleton_record(type, grid);
  switch (type) {
    case SkillType::locateAvatar: {
      if (!grid.avatar) throw Error("locateAvatar: grid has no avatar");
      rec.target = pose_phrase(*grid.avatar);
      break;
    }
    case SkillType::locateGoal: {
      if (!grid.goal) throw Error("locateGoal: grid has no goal");
      rec.target = cell_name(*grid.goal);
      break;
    }
    case SkillType::applyAction: {
      if (!grid.avatar) throw Error("applyAction: grid has no avatar");
      std::vector<ActionKind> choices = {ActionKind::turnLeft, ActionKind::turnRight};
      if (grid.is_clear(neighbor(grid.avatar->cell, grid.avatar->dir)))
        choices.push_back(ActionKind::move);
      ActionKind action = rng.pick(choices);
      prompt::append_value(rec.prompt, "action", action_name(action));
      rec.target = pose_phrase(advanced_pose(*grid.avatar, action));
      break;
    }
    case SkillType::senseCondition: {
      if (!grid.avatar) throw Error("senseCondition: grid has no avatar");
      std::vector<ConditionKind> kinds = {ConditionKind::pathAhead,
                                          ConditionKind::leftIsClear,
                                          ConditionKind::rightIsClear,
                                          ConditionKind::markersPresent};
      if (grid.goal) kinds.push_back(ConditionKind::goal);
      Condition cond{rng.pick(kinds), false};
      if (cond.kind != ConditionKind::goal && rng.chance(1.0 / 3.0))
        cond.negated = true;
      prompt::append_value(rec.prompt, "condition", condition_text(cond));
      rec.target = evaluate_condition(grid, *grid.avatar, cond) ? "True" : "False";
      break;
    }
    default: break;
  }
  prompt::append_block(rec.prompt, "grid", serialize_grid(grid));
  finalize_record_id(rec);
  return rec;
}

// ---------------------------------------------------------------------------
// Tracing
// ---------------------------------------------------------------------------

// Deterministic core: the trace of a given action sequence on a given grid.
// Throws when the sequence crashes (callers resample).
inline TaskRecord gen_sequence_trace(const std::vector<ActionKind>& actions,
                                     const Grid& grid) {
  Code straight;
  for (ActionKind a : actions) straight.body.push_back(make_action(a));
  // an empty sequence is fine to trace even though it is not a printable code
  if (!actions.empty()) validate_code(straight);
  ExecutionResult res = run(straight, grid);
  if (res.status == RunStatus::crashed)
    throw Error("sequenceTrace: the action sequence crashes on this grid");
  TaskRecord rec = detail::skeleton_record(SkillType::sequenceTrace, grid);
  rec.category = SkillCategory::tracing;
  prompt::append_value(rec.prompt, "actions", detail::actions_value(actions));
  prompt::append_block(rec.prompt, "grid", serialize_grid(grid));
  rec.target = trace_tokens(res);
  rec.explanation = render_explanation(res, straight);
  detail::stamp_code_meta(rec, straight);
  finalize_record_id(rec);
  return rec;
}

inline TaskRecord gen_tracing(SkillType type, const CodeGridPair& pair, Rng& rng) {
  if (skill_category_of(type) != SkillCategory::tracing)
    throw Error("not a tracing task type");
  const Grid& grid = rng.pick(pair.grids);
  if (type == SkillType::codeTrace) {
    ExecutionResult res = run(pair.code, grid);
    if (res.status == RunStatus::crashed)
      throw Error("codeTrace: execution crashes on this grid");
    TaskRecord rec = detail::skeleton_record(SkillType::codeTrace, grid);
    rec.category = SkillCategory::tracing;
    prompt::append_block(rec.prompt, "code", print_code(pair.code));
    prompt::append_block(rec.prompt, "grid", serialize_grid(grid));
    rec.target = trace_tokens(res);
    rec.explanation = render_explanation(res, pair.code);
    detail::stamp_code_meta(rec, pair.code);
    finalize_record_id(rec);
    return rec;
  }
  // sequenceTrace: walk a crash-free random sequence over the picked grid
  if (!grid.avatar) throw Error("sequenceTrace: grid has no avatar");
  int len = rng.range(2, DslLimits{}.max_body_len);
  std::vector<ActionKind> actions;
  Pose pose = *grid.avatar;
  for (int i = 0; i < len; ++i) {
    std::vector<ActionKind> choices = {ActionKind::turnLeft, ActionKind::turnRight};
    if (grid.is_clear(neighbor(pose.cell, pose.dir)))
      for (int bias = 0; bias < 3; ++bias) choices.push_back(ActionKind::move);
    ActionKind a = rng.pick(choices);
    actions.push_back(a);
    pose = advanced_pose(pose, a);
  }
  return gen_sequence_trace(actions, grid);
}

// ---------------------------------------------------------------------------
// Grid synthesis
// ---------------------------------------------------------------------------

inline TaskRecord gen_gridsynth(SkillType type, const CodeGridPair& pair, Rng& rng) {
  if (skill_category_of(type) != SkillCategory::gridSynthesis)
    throw Error("not a grid-synthesis task type");
  const Grid& full = rng.pick(pair.grids);
  ExecutionResult res = run(pair.code, full);
  if (res.status != RunStatus::solved)
    throw Error("grid synthesis requires a solving pair");

  TaskRecord rec = detail::skeleton_record(type, full);
  rec.category = SkillCategory::gridSynthesis;
  prompt::append_block(rec.prompt, "code", print_code(pair.code));

  Grid base = full;
  switch (type) {
    case SkillType::placeAvatar: {
      if (!full.avatar) throw Error("placeAvatar: grid has no avatar");
      base.avatar.reset();
      prompt::append_value(rec.prompt, "missing", "avatar");
      rec.target = "avatar at " + pose_phrase(*full.avatar);
      break;
    }
    case SkillType::placeGoal: {
      if (!full.goal) throw Error("placeGoal: grid has no goal");
      base.goal.reset();
      prompt::append_value(rec.prompt, "missing", "goal");
      rec.target = "goal at " + cell_name(*full.goal);
      break;
    }
    case SkillType::placeAvatarGoal: {
      if (!full.avatar) throw Error("placeAvatarGoal: grid has no avatar");
      if (!full.goal) throw Error("placeAvatarGoal: grid has no goal");
      base.avatar.reset();
      base.goal.reset();
      prompt::append_value(rec.prompt, "missing", "avatar, goal");
      rec.target = "avatar at " + pose_phrase(*full.avatar) + "; goal at " +
                   cell_name(*full.goal);
      break;
    }
    case SkillType::placeWalls: {
      if (full.walls.empty()) throw Error("placeWalls: grid has no walls");
      int k = rng.range(1, std::min<int>(3, static_cast<int>(full.walls.size())));
      std::vector<Cell> walls(full.walls.begin(), full.walls.end());
      rng.shuffle(walls);
      CellSet removed(walls.begin(), walls.begin() + k);
      for (const Cell& w : removed) base.walls.erase(w);
      prompt::append_value(rec.prompt, "missing",
                           std::to_string(k) + " wall(s)");
      std::string listed;
      for (const Cell& w : removed) {
        if (!listed.empty()) listed += ", ";
        listed += cell_name(w);
      }
      rec.target = "walls: " + listed;
      break;
    }
    case SkillType::designAll: {
      rec.target = describe_grid(full);
      break;
    }
    default: break;
  }
  if (type != SkillType::designAll)
    prompt::append_block(rec.prompt, "grid", serialize_grid(base));
  rec.explanation = render_explanation(res, pair.code);
  detail::stamp_code_meta(rec, pair.code);
  finalize_record_id(rec);
  return rec;
}

// The wall-placement type is emitted several times per base pair, each task
// removing a different wall subset.
inline std::vector<TaskRecord> gen_place_walls_batch(const CodeGridPair& pair,
                                                     Rng& rng, int n = 5) {
  std::vector<TaskRecord> out;
  std::set<std::string> seen;
  for (int attempt = 0; attempt < n * 60 && static_cast<int>(out.size()) < n;
       ++attempt) {
    TaskRecord rec = gen_gridsynth(SkillType::placeWalls, pair, rng);
    if (!seen.insert(rec.prompt + '\x1f' + rec.target).second) continue;
    out.push_back(std::move(rec));
  }
  if (static_cast<int>(out.size()) < n)
    throw Error("placeWalls batch: could not find " + std::to_string(n) +
                " distinct wall removals");
  return out;
}

// ---------------------------------------------------------------------------
// Record validation: re-derives the target from the prompt sections.
// ---------------------------------------------------------------------------

struct SkillCheck {
  bool ok = false;
  std::string failure;
};

namespace detail {

inline Grid grid_from_prompt(const std::string& prompt_text) {
  auto block = prompt::extract_block(prompt_text, "grid");
  if (!block) throw Error("prompt has no grid section");
  return parse_grid(*block + "\n");
}

inline Code code_from_prompt(const std::string& prompt_text) {
  auto block = prompt::extract_block(prompt_text, "code");
  if (!block) throw Error("prompt has no code section");
  return parse_code(*block);
}

inline std::optional<Condition> condition_from_text(const std::string& text) {
  std::string body = text;
  bool negated = false;
  if (body.rfind("not ", 0) == 0) {
    negated = true;
    body = body.substr(4);
  }
  auto kind = condition_from_keyword(body);
  if (!kind) return std::nullopt;
  if (*kind == ConditionKind::goal && negated) return std::nullopt;
  return Condition{*kind, negated};
}

// Parses "avatar at g2 facing west" / "goal at e5" fragments.
inline std::optional<Pose> avatar_from_fragment(const std::string& text) {
  const std::string prefix = "avatar at ";
  if (text.rfind(prefix, 0) != 0) return std::nullopt;
  std::string rest = text.substr(prefix.size());
  std::size_t facing = rest.find(" facing ");
  if (facing == std::string::npos) return std::nullopt;
  auto cell = cell_from_name(rest.substr(0, facing));
  auto dir = orientation_from_name(rest.substr(facing + 8));
  if (!cell || !dir) return std::nullopt;
  return Pose{*cell, *dir};
}

inline std::optional<Cell> goal_from_fragment(const std::string& text) {
  const std::string prefix = "goal at ";
  if (text.rfind(prefix, 0) != 0) return std::nullopt;
  return cell_from_name(text.substr(prefix.size()));
}

inline std::optional<CellSet> walls_from_fragment(const std::string& text) {
  const std::string prefix = "walls: ";
  if (text.rfind(prefix, 0) != 0) return std::nullopt;
  CellSet cells;
  std::string rest = text.substr(prefix.size());
  std::size_t start = 0;
  while (start < rest.size()) {
    std::size_t comma = rest.find(", ", start);
    std::string name = comma == std::string::npos
                           ? rest.substr(start)
                           : rest.substr(start, comma - start);
    auto cell = cell_from_name(name);
    if (!cell) return std::nullopt;
    cells.insert(*cell);
    if (comma == std::string::npos) break;
    start = comma + 2;
  }
  if (cells.empty()) return std::nullopt;
  return cells;
}

}  // namespace detail

inline SkillCheck validate_skill_record(const TaskRecord& rec) {
  auto fail = [&](const std::string& why) {
    return SkillCheck{false, rec.task_type + ": " + why};
  };
  auto type = skill_type_from_name(rec.task_type);
  if (!type) return fail("unknown task type");
  if (rec.category != skill_category_of(*type)) return fail("category mismatch");
  try {
    switch (*type) {
      case SkillType::locateAvatar: {
        Grid g = detail::grid_from_prompt(rec.prompt);
        if (!g.avatar) return fail("grid has no avatar");
        if (rec.target != pose_phrase(*g.avatar)) return fail("target is not the avatar pose");
        break;
      }
      case SkillType::locateGoal: {
        Grid g = detail::grid_from_prompt(rec.prompt);
        if (!g.goal) return fail("grid has no goal");
        if (rec.target != cell_name(*g.goal)) return fail("target is not the goal cell");
        break;
      }
      case SkillType::applyAction: {
        Grid g = detail::grid_from_prompt(rec.prompt);
        auto value = prompt::extract_value(rec.prompt, "action");
        if (!value) return fail("prompt has no action");
        auto action = action_from_name(*value);
        if (!action) return fail("unknown action name");
        if (!g.avatar) return fail("grid has no avatar");
        if (*action == ActionKind::move &&
            !g.is_clear(neighbor(g.avatar->cell, g.avatar->dir)))
          return fail("the move action would crash");
        if (rec.target != pose_phrase(advanced_pose(*g.avatar, *action)))
          return fail("target disagrees with applying the action");
        break;
      }
      case SkillType::senseCondition: {
        Grid g = detail::grid_from_prompt(rec.prompt);
        auto value = prompt::extract_value(rec.prompt, "condition");
        if (!value) return fail("prompt has no condition");
        auto cond = detail::condition_from_text(*value);
        if (!cond) return fail("unknown condition text");
        if (!g.avatar) return fail("grid has no avatar");
        std::string expect = evaluate_condition(g, *g.avatar, *cond) ? "True" : "False";
        if (rec.target != expect) return fail("target disagrees with the condition");
        break;
      }
      case SkillType::sequenceTrace: {
        Grid g = detail::grid_from_prompt(rec.prompt);
        auto value = prompt::extract_value(rec.prompt, "actions");
        if (!value) return fail("prompt has no action sequence");
        Code straight;
        std::size_t start = 0;
        while (start < value->size()) {
          std::size_t space = value->find(' ', start);
          std::string name = space == std::string::npos
                                 ? value->substr(start)
                                 : value->substr(start, space - start);
          auto action = action_from_name(name);
          if (!action) return fail("unknown action in sequence");
          straight.body.push_back(make_action(*action));
          if (space == std::string::npos) break;
          start = space + 1;
        }
        ExecutionResult res = run(straight, g);
        if (res.status == RunStatus::crashed) return fail("sequence crashes");
        if (rec.target != trace_tokens(res)) return fail("target is not the trace");
        break;
      }
      case SkillType::codeTrace: {
        Grid g = detail::grid_from_prompt(rec.prompt);
        Code code = detail::code_from_prompt(rec.prompt);
        ExecutionResult res = run(code, g);
        if (res.status == RunStatus::crashed) return fail("execution crashes");
        if (rec.target != trace_tokens(res)) return fail("target is not the trace");
        break;
      }
      case SkillType::placeAvatar: {
        Grid g = detail::grid_from_prompt(rec.prompt);
        Code code = detail::code_from_prompt(rec.prompt);
        auto pose = detail::avatar_from_fragment(rec.target);
        if (!pose) return fail("target is not an avatar fragment");
        g.avatar = *pose;
        validate_grid(g);
        if (!solves(code, g)) return fail("reconstituted grid is not solved");
        break;
      }
      case SkillType::placeGoal: {
        Grid g = detail::grid_from_prompt(rec.prompt);
        Code code = detail::code_from_prompt(rec.prompt);
        auto goal = detail::goal_from_fragment(rec.target);
        if (!goal) return fail("target is not a goal fragment");
        g.goal = *goal;
        validate_grid(g);
        if (!solves(code, g)) return fail("reconstituted grid is not solved");
        break;
      }
      case SkillType::placeAvatarGoal: {
        Grid g = detail::grid_from_prompt(rec.prompt);
        Code code = detail::code_from_prompt(rec.prompt);
        std::size_t split = rec.target.find("; ");
        if (split == std::string::npos) return fail("target is not a two-part fragment");
        auto pose = detail::avatar_from_fragment(rec.target.substr(0, split));
        auto goal = detail::goal_from_fragment(rec.target.substr(split + 2));
        if (!pose) return fail("target has no avatar fragment");
        if (!goal) return fail("target has no goal fragment");
        g.avatar = *pose;
        g.goal = *goal;
        validate_grid(g);
        if (!solves(code, g)) return fail("reconstituted grid is not solved");
        break;
      }
      case SkillType::placeWalls: {
        Grid g = detail::grid_from_prompt(rec.prompt);
        Code code = detail::code_from_prompt(rec.prompt);
        auto walls = detail::walls_from_fragment(rec.target);
        if (!walls) return fail("target is not a wall list");
        auto missing = prompt::extract_value(rec.prompt, "missing");
        if (missing &&
            missing->rfind(std::to_string(walls->size()) + " wall", 0) != 0)
          return fail("wall count disagrees with the missing note");
        for (const Cell& w : *walls) g.walls.insert(w);
        validate_grid(g);
        if (!solves(code, g)) return fail("reconstituted grid is not solved");
        break;
      }
      case SkillType::designAll: {
        Code code = detail::code_from_prompt(rec.prompt);
        Grid g = parse_grid_description(rec.target);
        if (!solves(code, g)) return fail("described grid is not solved");
        break;
      }
    }
  } catch (const Error& e) {
    return fail(e.what());
  }
  return {true, ""};
}

}  // namespace vpkit
