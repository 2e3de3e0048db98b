// Independent reference interpreter used to cross-check vpkit::run, plus
// random code/grid samplers shared by the property tests.
//
// The reference deliberately uses a different evaluation strategy from the
// library: every code is first compiled to a flat instruction list (with
// Repeat bodies literally unrolled), then executed by a program-counter loop.
// Any semantic disagreement between the two interpreters shows up as a
// mismatched ExecutionResult.
#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "vpkit/dsl.hpp"
#include "vpkit/emulator.hpp"
#include "vpkit/grid.hpp"
#include "vpkit/rng.hpp"

namespace oracle {

// --------------------------------------------------------------------------
// Flat-program compilation
// --------------------------------------------------------------------------

enum class OpKind {
  act,        // tick, perform basic action
  branchTrue, // tick, evaluate condition, jump when true
  branchFalse,// tick, evaluate condition, jump when false
  jump,       // unconditional jump
  goalPush,   // entering a `repeatUntil goal` region
  goalPop,    // leaving it
};

struct Op {
  OpKind kind{};
  vpkit::ActionKind action{};
  vpkit::Condition cond{};
  std::size_t target = 0;
};

inline void compile_body(const vpkit::BlockList& body, std::vector<Op>& out);

inline void compile_block(const vpkit::Block& b, std::vector<Op>& out) {
  using namespace vpkit;
  std::visit(
      Overload{
          [&](const ActionBlock& a) {
            out.push_back({OpKind::act, a.action, {}, 0});
          },
          [&](const RepeatBlock& r) {
            for (int i = 0; i < r.count; ++i) compile_body(r.body, out);
          },
          [&](const RepeatUntilBlock& r) {
            bool goal_loop = r.cond.kind == ConditionKind::goal;
            if (goal_loop) out.push_back({OpKind::goalPush, {}, {}, 0});
            std::size_t top = out.size();
            out.push_back({OpKind::branchTrue, {}, r.cond, 0});  // patched below
            compile_body(r.body, out);
            out.push_back({OpKind::jump, {}, {}, top});
            out[top].target = out.size();
            if (goal_loop) out.push_back({OpKind::goalPop, {}, {}, 0});
          },
          [&](const WhileBlock& w) {
            std::size_t top = out.size();
            out.push_back({OpKind::branchFalse, {}, w.cond, 0});
            compile_body(w.body, out);
            out.push_back({OpKind::jump, {}, {}, top});
            out[top].target = out.size();
          },
          [&](const IfBlock& i) {
            std::size_t guard = out.size();
            out.push_back({OpKind::branchFalse, {}, i.cond, 0});
            compile_body(i.body, out);
            out[guard].target = out.size();
          },
          [&](const IfElseBlock& i) {
            std::size_t guard = out.size();
            out.push_back({OpKind::branchFalse, {}, i.cond, 0});
            compile_body(i.then_body, out);
            std::size_t skip = out.size();
            out.push_back({OpKind::jump, {}, {}, 0});
            out[guard].target = out.size();
            compile_body(i.else_body, out);
            out[skip].target = out.size();
          }},
      b.node);
}

inline void compile_body(const vpkit::BlockList& body, std::vector<Op>& out) {
  for (const vpkit::Block& b : body) compile_block(b, out);
}

inline std::vector<Op> compile(const vpkit::Code& code) {
  std::vector<Op> ops;
  compile_body(code.body, ops);
  return ops;
}

// --------------------------------------------------------------------------
// Flat-program execution. Grid geometry is re-derived here by hand instead
// of calling the library helpers, so a bug in those helpers cannot cancel
// itself out.
// --------------------------------------------------------------------------

inline vpkit::Cell step_from(vpkit::Cell c, vpkit::Orientation o) {
  using vpkit::Orientation;
  switch (o) {
    case Orientation::north: return {c.col, c.row - 1};
    case Orientation::east: return {c.col + 1, c.row};
    case Orientation::south: return {c.col, c.row + 1};
    case Orientation::west: return {c.col - 1, c.row};
  }
  return c;
}

inline vpkit::Orientation rot_left(vpkit::Orientation o) {
  using vpkit::Orientation;
  switch (o) {
    case Orientation::north: return Orientation::west;
    case Orientation::west: return Orientation::south;
    case Orientation::south: return Orientation::east;
    case Orientation::east: return Orientation::north;
  }
  return o;
}

inline vpkit::Orientation rot_right(vpkit::Orientation o) {
  return rot_left(rot_left(rot_left(o)));
}

inline vpkit::ExecutionResult flat_run(const vpkit::Code& code, const vpkit::Grid& grid,
                                       int step_limit = 1000) {
  using namespace vpkit;
  std::vector<Op> ops = compile(code);

  Pose pose = *grid.avatar;
  std::map<Cell, int, CellRowMajor> markers = grid.markers;
  ExecutionResult res;
  res.trace.push_back(pose);

  auto blocked = [&](Cell c) {
    return c.col < 0 || c.row < 0 || c.col >= grid.cols || c.row >= grid.rows ||
           grid.walls.count(c) != 0;
  };
  auto truth = [&](const Condition& c) {
    bool raw = false;
    switch (c.kind) {
      case ConditionKind::goal: raw = grid.goal && pose.cell == *grid.goal; break;
      case ConditionKind::pathAhead: raw = !blocked(step_from(pose.cell, pose.dir)); break;
      case ConditionKind::leftIsClear:
        raw = !blocked(step_from(pose.cell, rot_left(pose.dir)));
        break;
      case ConditionKind::rightIsClear:
        raw = !blocked(step_from(pose.cell, rot_right(pose.dir)));
        break;
      case ConditionKind::markersPresent: {
        auto it = markers.find(pose.cell);
        raw = it != markers.end() && it->second > 0;
        break;
      }
    }
    return c.negated ? !raw : raw;
  };

  int steps = 0;
  int goal_depth = 0;
  bool crashed = false;
  bool out_of_steps = false;
  bool goal_stop = false;
  std::size_t pc = 0;
  while (pc < ops.size() && !crashed && !out_of_steps && !goal_stop) {
    const Op& op = ops[pc];
    switch (op.kind) {
      case OpKind::act: {
        if (steps >= step_limit) {
          out_of_steps = true;
          break;
        }
        ++steps;
        switch (op.action) {
          case ActionKind::move: {
            Cell to = step_from(pose.cell, pose.dir);
            if (blocked(to)) {
              crashed = true;
            } else {
              pose.cell = to;
            }
            break;
          }
          case ActionKind::turnLeft: pose.dir = rot_left(pose.dir); break;
          case ActionKind::turnRight: pose.dir = rot_right(pose.dir); break;
          case ActionKind::pickMarker: {
            auto it = markers.find(pose.cell);
            if (it == markers.end() || it->second < 1) {
              crashed = true;
            } else if (--it->second == 0) {
              markers.erase(it);
            }
            break;
          }
          case ActionKind::putMarker: markers[pose.cell] += 1; break;
        }
        if (!crashed) {
          res.actions.push_back(op.action);
          res.trace.push_back(pose);
          if (op.action == ActionKind::move && goal_depth > 0 && grid.goal &&
              pose.cell == *grid.goal)
            goal_stop = true;
        }
        ++pc;
        break;
      }
      case OpKind::branchTrue:
      case OpKind::branchFalse: {
        if (steps >= step_limit) {
          out_of_steps = true;
          break;
        }
        ++steps;
        bool v = truth(op.cond);
        bool taken = (op.kind == OpKind::branchTrue) ? v : !v;
        pc = taken ? op.target : pc + 1;
        break;
      }
      case OpKind::jump: pc = op.target; break;
      case OpKind::goalPush:
        ++goal_depth;
        ++pc;
        break;
      case OpKind::goalPop:
        --goal_depth;
        ++pc;
        break;
    }
  }

  res.steps_used = steps;
  if (crashed) {
    res.status = RunStatus::crashed;
  } else if (out_of_steps) {
    res.status = RunStatus::stepLimit;
  } else {
    bool has_goal = grid.goal.has_value();
    bool has_markers = !grid.markers.empty();
    bool ok = (has_goal || has_markers) &&
              (!has_goal || pose.cell == *grid.goal) && (!has_markers || markers.empty());
    res.status = ok ? RunStatus::solved : RunStatus::notSolved;
  }
  return res;
}

// --------------------------------------------------------------------------
// Random samplers
// --------------------------------------------------------------------------

struct CodeGenConfig {
  int max_blocks = 6;
  int max_depth = 3;
  int max_repeat = 3;
  bool allow_while = false;
  bool allow_markers = false;  // pickMarker/putMarker + markersPresent
  bool allow_negation = true;
  bool allow_goal_loop = true;
};

inline vpkit::ActionKind random_action(vpkit::Rng& rng, const CodeGenConfig& cfg) {
  using vpkit::ActionKind;
  std::vector<ActionKind> pool{ActionKind::move, ActionKind::turnLeft,
                               ActionKind::turnRight};
  if (cfg.allow_markers) {
    pool.push_back(ActionKind::pickMarker);
    pool.push_back(ActionKind::putMarker);
  }
  return rng.pick(pool);
}

// Sensor condition (never `goal`).
inline vpkit::Condition random_sensor(vpkit::Rng& rng, const CodeGenConfig& cfg) {
  using vpkit::ConditionKind;
  std::vector<ConditionKind> pool{ConditionKind::pathAhead, ConditionKind::leftIsClear,
                                  ConditionKind::rightIsClear};
  if (cfg.allow_markers) pool.push_back(ConditionKind::markersPresent);
  vpkit::Condition c{rng.pick(pool), false};
  if (cfg.allow_negation && rng.chance(0.3)) c.negated = true;
  return c;
}

// Grows a body consuming at most `budget` blocks; returns blocks used.
// Always emits at least one block when budget >= 1.
inline int random_body(vpkit::Rng& rng, const CodeGenConfig& cfg, int budget, int depth,
                       vpkit::BlockList& out) {
  using namespace vpkit;
  int used = 0;
  int len = rng.range(1, std::min(budget, 4));
  while (used < len && used < budget) {
    int left = budget - used;
    bool can_nest = depth < cfg.max_depth && left >= 2;
    if (can_nest && rng.chance(0.35)) {
      int body_budget = rng.range(1, left - 1);
      BlockList body;
      int body_used = random_body(rng, cfg, body_budget, depth + 1, body);
      int which = rng.range(0, 4);
      if (which == 0) {
        out.push_back(Block{RepeatBlock{rng.range(1, cfg.max_repeat), std::move(body)}});
      } else if (which == 1 && cfg.allow_goal_loop) {
        out.push_back(
            Block{RepeatUntilBlock{Condition{ConditionKind::goal, false}, std::move(body)}});
      } else if (which == 1 || which == 2) {
        out.push_back(Block{RepeatUntilBlock{random_sensor(rng, cfg), std::move(body)}});
      } else if (which == 3 && cfg.allow_while) {
        out.push_back(Block{WhileBlock{random_sensor(rng, cfg), std::move(body)}});
      } else if (which == 3) {
        out.push_back(Block{IfBlock{random_sensor(rng, cfg), std::move(body)}});
      } else if (left - body_used >= 2) {
        BlockList else_body;
        int else_used =
            random_body(rng, cfg, left - body_used - 1, depth + 1, else_body);
        out.push_back(Block{IfElseBlock{random_sensor(rng, cfg), std::move(body),
                                        std::move(else_body)}});
        used += else_used;
      } else {
        out.push_back(Block{IfBlock{random_sensor(rng, cfg), std::move(body)}});
      }
      used += 1 + body_used;
    } else {
      out.push_back(make_action(random_action(rng, cfg)));
      used += 1;
    }
  }
  return used;
}

inline vpkit::Code random_code(vpkit::Rng& rng, const CodeGenConfig& cfg = {}) {
  vpkit::Code code;
  random_body(rng, cfg, rng.range(1, cfg.max_blocks), 1, code.body);
  return code;
}

struct GridGenConfig {
  int max_rows = 4;
  int max_cols = 4;
  double wall_chance = 0.2;
  bool allow_markers = false;
  bool require_goal = false;
};

inline vpkit::Grid random_grid(vpkit::Rng& rng, const GridGenConfig& cfg = {}) {
  using namespace vpkit;
  Grid g;
  g.rows = rng.range(1, cfg.max_rows);
  g.cols = rng.range(1, cfg.max_cols);
  Cell start{rng.range(0, g.cols - 1), rng.range(0, g.rows - 1)};
  Orientation dirs[] = {Orientation::north, Orientation::east, Orientation::south,
                        Orientation::west};
  g.avatar = Pose{start, dirs[rng.range(0, 3)]};
  std::vector<Cell> open;
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      Cell cell{c, r};
      if (cell == start) continue;
      if (rng.chance(cfg.wall_chance))
        g.walls.insert(cell);
      else
        open.push_back(cell);
    }
  bool want_goal = cfg.require_goal || rng.chance(0.8);
  if (want_goal) {
    if (!open.empty() && rng.chance(0.95))
      g.goal = rng.pick(open);
    else
      g.goal = start;  // avatar starting on the goal is legal
  }
  if (cfg.allow_markers) {
    for (const Cell& c : open)
      if ((!g.goal || c != *g.goal) && rng.chance(0.15))
        g.markers[c] = rng.range(1, 9);
  }
  validate_grid(g);
  return g;
}

}  // namespace oracle
