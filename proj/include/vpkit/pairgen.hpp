#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vpkit/dsl.hpp"
#include "vpkit/emulator.hpp"
#include "vpkit/grid.hpp"
#include "vpkit/rng.hpp"

namespace vpkit {

// ---------------------------------------------------------------------------
// Code/grid pair synthesis.
//
// sample_code draws a program matching a requested nesting sketch and size
// window. synthesize_grids grows boards under that program's own execution:
// start from an empty board, run the code, and commit each cell the run
// queries to wall-or-free with biased coin flips, placing the goal at the
// terminal pose. Every candidate is re-run through the emulator and must
// both solve the board and exercise all of the code's control sites.
// ---------------------------------------------------------------------------

// Nesting patterns exercised by the generated curriculum, ordered from plain
// action sequences to nested sensor loops.
inline const std::vector<std::string>& curriculum_sketches() {
  static const std::vector<std::string> sketches = {
      "",
      "Repeat",
      "RepeatUntil",
      "RepeatUntil{If}",
      "RepeatUntil{IfElse}",
      "RepeatUntil{IfElse{IfElse}}",
      "Repeat{Repeat}",
      "Repeat{If}",
      "RepeatUntil{If; If}",
      "RepeatUntil{Repeat}",
      "RepeatUntil{If{Repeat}}",
      "While; Repeat",
      "While{Repeat; Repeat}",
      "While{Repeat; If}",
      "While{If{While}}",
  };
  return sketches;
}

struct CodeSpec {
  std::string sketch;  // canonical sketch; "" means a straight action sequence
  int min_size = 1;
  int max_size = 8;
  std::vector<ActionKind> action_alphabet = {ActionKind::move, ActionKind::turnLeft,
                                             ActionKind::turnRight};
  std::vector<ConditionKind> sensor_pool = {ConditionKind::pathAhead,
                                            ConditionKind::leftIsClear,
                                            ConditionKind::rightIsClear};
  int repeat_min = 2;
  int repeat_max = 6;
  DslLimits limits;
};

// ---------------------------------------------------------------------------
// Degeneracy screen: programs that waste their own size budget make the
// derived maxSize constraint meaningless, so they are rejected at the source.
// ---------------------------------------------------------------------------

namespace detail {

inline bool body_is_degenerate(const BlockList& body);

inline int net_quarter_turns(const BlockList& body) {
  int net = 0;
  for (const Block& b : body) {
    auto* a = std::get_if<ActionBlock>(&b.node);
    if (!a) continue;
    if (a->action == ActionKind::turnLeft) ++net;
    if (a->action == ActionKind::turnRight) --net;
  }
  return net;
}

inline bool all_turns(const BlockList& body) {
  for (const Block& b : body)
    if (!is_turn(b)) return false;
  return true;
}

inline bool contains_action(const BlockList& body, ActionKind a) {
  for (const Block& b : body) {
    bool found = std::visit(
        Overload{[&](const ActionBlock& x) { return x.action == a; },
                 [&](const RepeatBlock& r) { return contains_action(r.body, a); },
                 [&](const RepeatUntilBlock& r) { return contains_action(r.body, a); },
                 [&](const WhileBlock& w) { return contains_action(w.body, a); },
                 [&](const IfBlock& i) { return contains_action(i.body, a); },
                 [&](const IfElseBlock& i) {
                   return contains_action(i.then_body, a) ||
                          contains_action(i.else_body, a);
                 }},
        b.node);
    if (found) return true;
  }
  return false;
}

inline bool any_effectful(const BlockList& body) {
  return contains_action(body, ActionKind::move) ||
         contains_action(body, ActionKind::pickMarker) ||
         contains_action(body, ActionKind::putMarker);
}

inline bool block_is_degenerate(const Block& b) {
  return std::visit(
      Overload{[](const ActionBlock&) { return false; },
               [](const RepeatBlock& r) {
                 // an all-turn body with a net rotation of zero is a no-op
                 if (all_turns(r.body) && (r.count * net_quarter_turns(r.body)) % 4 == 0)
                   return true;
                 return body_is_degenerate(r.body);
               },
               [](const RepeatUntilBlock& r) {
                 // a goal chase that never moves cannot terminate
                 if (r.cond.kind == ConditionKind::goal &&
                     !contains_action(r.body, ActionKind::move))
                   return true;
                 return body_is_degenerate(r.body);
               },
               [](const WhileBlock& w) { return body_is_degenerate(w.body); },
               [](const IfBlock& i) { return body_is_degenerate(i.body); },
               [](const IfElseBlock& i) {
                 if (i.then_body == i.else_body) return true;  // branch is irrelevant
                 return body_is_degenerate(i.then_body) || body_is_degenerate(i.else_body);
               }},
      b.node);
}

inline bool body_is_degenerate(const BlockList& body) {
  for (std::size_t i = 0; i + 1 < body.size(); ++i) {
    auto* a = std::get_if<ActionBlock>(&body[i].node);
    auto* b = std::get_if<ActionBlock>(&body[i + 1].node);
    if (a && b &&
        ((a->action == ActionKind::turnLeft && b->action == ActionKind::turnRight) ||
         (a->action == ActionKind::turnRight && b->action == ActionKind::turnLeft)))
      return true;  // adjacent inverse turns cancel out
  }
  for (const Block& b : body)
    if (block_is_degenerate(b)) return true;
  return false;
}

}  // namespace detail

inline bool is_degenerate(const Code& c) {
  if (!detail::any_effectful(c.body)) return true;
  return detail::body_is_degenerate(c.body);
}

// ---------------------------------------------------------------------------
// sample_code
// ---------------------------------------------------------------------------

namespace detail {

// One entry per program body (the top-level body, every construct body, and
// each else branch), in a fixed traversal order shared by the planning and
// building passes. A construct's sketch children live in its primary body;
// an IfElse's else branch is a separate, always-leaf body.
struct BodyQuota {
  int min = 0;       // mandatory action count (leaf bodies need one)
  int children = 0;  // nested constructs fixed by the sketch
  int extra = 0;     // additional actions assigned by the size lottery
  int room() const { return 8 - children - min - extra; }  // max body length 8
};

inline void plan_walk(const std::vector<SketchNode>& nodes, std::vector<BodyQuota>& out) {
  for (const SketchNode& n : nodes) {
    out.push_back({n.children.empty() ? 1 : 0, static_cast<int>(n.children.size()), 0});
    plan_walk(n.children, out);
    if (n.kind == ControlKind::ifElse) out.push_back({1, 0, 0});  // else branch
  }
}

inline int count_controls(const std::vector<SketchNode>& nodes) {
  int n = 0;
  for (const SketchNode& s : nodes) n += 1 + count_controls(s.children);
  return n;
}

struct CodeBuilder {
  const CodeSpec& spec;
  Rng& rng;
  const std::vector<BodyQuota>& quotas;
  std::size_t cursor = 0;  // index into quotas, advanced in plan_walk order
  const SketchNode* goal_loop = nullptr;

  ActionKind action() { return rng.pick(spec.action_alphabet); }
  Condition sensor() { return {rng.pick(spec.sensor_pool), false}; }

  // Merge the node's fixed children with `n` filler actions at random gaps.
  // `block_last_gap` keeps the final child (a goal loop) terminal.
  BlockList body(const std::vector<SketchNode>& children, int n_actions,
                 bool block_last_gap) {
    std::vector<Block> kids;
    for (const SketchNode& c : children) kids.push_back(build(c));
    int gaps = static_cast<int>(kids.size()) + (block_last_gap ? 0 : 1);
    std::vector<int> fill(static_cast<std::size_t>(std::max(gaps, 1)), 0);
    for (int i = 0; i < n_actions; ++i)
      fill[static_cast<std::size_t>(rng.range(0, gaps - 1))] += 1;
    BlockList out;
    for (std::size_t g = 0; g < fill.size(); ++g) {
      for (int i = 0; i < fill[g]; ++i) out.push_back(make_action(action()));
      if (g < kids.size()) out.push_back(kids[g]);
    }
    return out;
  }

  Block build(const SketchNode& n) {
    const BodyQuota q = quotas[cursor++];
    switch (n.kind) {
      case ControlKind::repeat: {
        BlockList b = body(n.children, q.min + q.extra, false);
        return Block{RepeatBlock{rng.range(spec.repeat_min, spec.repeat_max), std::move(b)}};
      }
      case ControlKind::repeatUntil: {
        Condition c = (&n == goal_loop) ? Condition{ConditionKind::goal, false} : sensor();
        BlockList b = body(n.children, q.min + q.extra, false);
        return Block{RepeatUntilBlock{c, std::move(b)}};
      }
      case ControlKind::while_: {
        BlockList b = body(n.children, q.min + q.extra, false);
        return Block{WhileBlock{sensor(), std::move(b)}};
      }
      case ControlKind::if_: {
        BlockList b = body(n.children, q.min + q.extra, false);
        return Block{IfBlock{sensor(), std::move(b)}};
      }
      case ControlKind::ifElse: {
        Condition c = sensor();
        BlockList then_b = body(n.children, q.min + q.extra, false);
        const BodyQuota eq = quotas[cursor++];
        BlockList else_b = body({}, eq.min + eq.extra, false);
        return Block{IfElseBlock{c, std::move(then_b), std::move(else_b)}};
      }
    }
    throw Error("unreachable sketch node kind");
  }
};

}  // namespace detail

// Draws a code whose nesting skeleton equals the requested sketch, whose
// size lands in [min_size, max_size], and which passes the degeneracy
// screen. A trailing top-level `RepeatUntil` is always a `goal` chase, which
// is why nothing may be appended after it.
inline Code sample_code(const CodeSpec& spec, Rng& rng, int attempts = 10000) {
  std::vector<SketchNode> nodes = parse_sketch(canonical_sketch(spec.sketch));
  int controls = detail::count_controls(nodes);
  if (controls > 0 && spec.limits.max_depth < 1)
    throw Error("sketch needs control constructs but depth forbids them");

  std::vector<detail::BodyQuota> base;
  base.push_back({nodes.empty() ? 1 : 0, static_cast<int>(nodes.size()), 0});
  detail::plan_walk(nodes, base);
  int min_total = controls;
  for (const auto& q : base) min_total += q.min;
  if (min_total > spec.max_size)
    throw Error("sketch '" + spec.sketch + "' cannot fit in max size " +
                std::to_string(spec.max_size));

  const SketchNode* goal_loop =
      (!nodes.empty() && nodes.back().kind == ControlKind::repeatUntil) ? &nodes.back()
                                                                        : nullptr;

  for (int attempt = 0; attempt < attempts; ++attempt) {
    std::vector<detail::BodyQuota> quotas = base;
    int target = rng.range(std::max(spec.min_size, min_total), spec.max_size);
    int extra = target - min_total;
    bool fits = true;
    for (int i = 0; i < extra; ++i) {
      std::vector<std::size_t> open;
      for (std::size_t b = 0; b < quotas.size(); ++b)
        if (quotas[b].room() > 0) open.push_back(b);
      if (open.empty()) {
        fits = false;
        break;
      }
      quotas[rng.pick(open)].extra += 1;
    }
    if (!fits) continue;

    detail::CodeBuilder builder{spec, rng, quotas, 1, goal_loop};
    Code code;
    code.body = builder.body(nodes, quotas[0].min + quotas[0].extra, goal_loop != nullptr);

    validate_code(code, spec.limits);
    if (is_degenerate(code)) continue;
    CodeMetrics m = metrics(code);
    if (m.size != target || m.sketch != canonical_sketch(spec.sketch)) continue;
    return code;
  }
  throw Error("no viable code found for sketch '" + spec.sketch + "' after " +
              std::to_string(attempts) + " attempts");
}

// ---------------------------------------------------------------------------
// Coverage screen: a grid is only kept when running the code on it enters
// every loop and sees both outcomes of every sensor condition.
// ---------------------------------------------------------------------------

inline bool coverage_ok(const Code& code, const Coverage& cov) {
  for (const auto& [path, kind] : collect_sites(code)) {
    switch (kind) {
      case SiteKind::repeatLoop: {
        auto it = cov.repeat_entries.find(path);
        if (it == cov.repeat_entries.end() || it->second < 1) return false;
        break;
      }
      case SiteKind::goalLoop: {
        auto it = cov.condition_outcomes.find(path);
        if (it == cov.condition_outcomes.end() || it->second.second < 1) return false;
        break;
      }
      case SiteKind::sensorCondition: {
        auto it = cov.condition_outcomes.find(path);
        if (it == cov.condition_outcomes.end() || it->second.first < 1 ||
            it->second.second < 1)
          return false;
        break;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Grid growth
// ---------------------------------------------------------------------------

struct GridSynthOptions {
  int min_rows = 4, max_rows = 12;
  int min_cols = 4, max_cols = 12;
  double move_free_bias = 0.90;    // a cell a move heads into
  double sensor_free_bias = 0.55;  // a cell a sensor peeks at
  double decoration_wall_chance = 0.22;
  int min_walls = 4;
  int growth_step_cap = 600;
  int goal_loop_min_iters = 2;
  int goal_loop_max_iters = 9;
  RunOptions verify;  // budget for the confirming re-run
};

namespace detail {

// Executes the code over a board whose cells start undetermined, committing
// each queried cell by a biased coin flip. Termination of the single
// top-level `repeatUntil goal` loop is decided up front by an iteration
// lottery; the goal is pinned to the terminal pose afterwards.
class GrowthSim {
 public:
  GrowthSim(const Code& code, Rng& rng, const GridSynthOptions& opts)
      : code_(code), rng_(rng), opts_(opts) {
    rows_ = rng.range(opts.min_rows, opts.max_rows);
    cols_ = rng.range(opts.min_cols, opts.max_cols);
    pose_ = Pose{{rng.range(0, cols_ - 1), rng.range(0, rows_ - 1)},
                 std::array<Orientation, 4>{Orientation::north, Orientation::east,
                                            Orientation::south,
                                            Orientation::west}[rng.below(4)]};
    start_ = pose_;
    cell_state_[start_.cell] = State::free;
  }

  // Returns the grown grid, or nullopt when this attempt dead-ends.
  std::optional<Grid> grow() {
    exec_body(code_.body);
    if (failed_) return std::nullopt;

    Cell goal = pose_.cell;
    if (has_goal_loop_ && goal == start_.cell) return std::nullopt;
    if (initial_markers_.count(goal)) return std::nullopt;  // goal cell must be plain
    if (!initial_markers_.empty() && !runtime_markers_.empty())
      return std::nullopt;  // leftover markers make the board unsolvable

    Grid g;
    g.rows = rows_;
    g.cols = cols_;
    g.avatar = start_;
    g.goal = goal;
    g.markers = initial_markers_;
    std::vector<Cell> loose;  // never queried: free for decoration
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c) {
        Cell cell{c, r};
        auto it = cell_state_.find(cell);
        if (it != cell_state_.end()) {
          if (it->second == State::wall) g.walls.insert(cell);
        } else if (cell != goal) {
          if (rng_.chance(opts_.decoration_wall_chance))
            g.walls.insert(cell);
          else
            loose.push_back(cell);
        }
      }
    rng_.shuffle(loose);
    for (std::size_t i = 0; i < loose.size() &&
                            static_cast<int>(g.walls.size()) < opts_.min_walls;
         ++i)
      g.walls.insert(loose[i]);
    if (static_cast<int>(g.walls.size()) < opts_.min_walls) return std::nullopt;
    return g;
  }

 private:
  enum class State { free, wall };

  bool tick() {
    if (steps_ >= opts_.growth_step_cap) {
      failed_ = true;
      return false;
    }
    ++steps_;
    return true;
  }

  bool query_clear(Cell c, double free_bias) {
    if (c.col < 0 || c.row < 0 || c.col >= cols_ || c.row >= rows_) return false;
    auto it = cell_state_.find(c);
    if (it != cell_state_.end()) return it->second == State::free;
    State s = rng_.chance(free_bias) ? State::free : State::wall;
    cell_state_[c] = s;
    return s == State::free;
  }

  // First marker interaction at a cell fixes its initial stack.
  void ensure_markers(Cell c, bool want_some) {
    if (marker_decided_.count(c)) return;
    marker_decided_.insert(c);
    int initial = 0;
    // the start cell can never hold initial markers (board invariant)
    if (c != start_.cell && want_some) initial = rng_.range(1, 2);
    if (initial > 0) {
      initial_markers_[c] = initial;
      runtime_markers_[c] += initial;
    }
  }

  bool eval(const Condition& cond) {
    if (!tick()) return false;
    bool raw = false;
    switch (cond.kind) {
      case ConditionKind::goal:
        throw Error("growth: goal conditions are handled by the iteration lottery");
      case ConditionKind::pathAhead:
        raw = query_clear(neighbor(pose_.cell, pose_.dir), opts_.sensor_free_bias);
        break;
      case ConditionKind::leftIsClear:
        raw = query_clear(neighbor(pose_.cell, turned_left(pose_.dir)),
                          opts_.sensor_free_bias);
        break;
      case ConditionKind::rightIsClear:
        raw = query_clear(neighbor(pose_.cell, turned_right(pose_.dir)),
                          opts_.sensor_free_bias);
        break;
      case ConditionKind::markersPresent: {
        ensure_markers(pose_.cell, rng_.chance(0.5));
        auto it = runtime_markers_.find(pose_.cell);
        raw = it != runtime_markers_.end() && it->second > 0;
        break;
      }
    }
    return cond.negated ? !raw : raw;
  }

  void act(ActionKind a) {
    if (!tick()) return;
    switch (a) {
      case ActionKind::move: {
        Cell to = neighbor(pose_.cell, pose_.dir);
        if (!query_clear(to, opts_.move_free_bias)) {
          failed_ = true;
          return;
        }
        pose_.cell = to;
        break;
      }
      case ActionKind::turnLeft: pose_.dir = turned_left(pose_.dir); break;
      case ActionKind::turnRight: pose_.dir = turned_right(pose_.dir); break;
      case ActionKind::pickMarker: {
        ensure_markers(pose_.cell, true);
        auto it = runtime_markers_.find(pose_.cell);
        if (it == runtime_markers_.end() || it->second < 1) {
          failed_ = true;
          return;
        }
        if (--it->second == 0) runtime_markers_.erase(it);
        break;
      }
      case ActionKind::putMarker:
        ensure_markers(pose_.cell, false);
        runtime_markers_[pose_.cell] += 1;
        break;
    }
  }

  void exec_body(const BlockList& body) {
    for (const Block& b : body) {
      exec_block(b);
      if (failed_) return;
    }
  }

  void exec_block(const Block& b) {
    std::visit(
        Overload{[&](const ActionBlock& a) { act(a.action); },
                 [&](const RepeatBlock& r) {
                   for (int i = 0; i < r.count && !failed_; ++i) exec_body(r.body);
                 },
                 [&](const RepeatUntilBlock& r) {
                   if (r.cond.kind == ConditionKind::goal) {
                     has_goal_loop_ = true;
                     int iters =
                         rng_.range(opts_.goal_loop_min_iters, opts_.goal_loop_max_iters);
                     for (int i = 0; i < iters && !failed_; ++i) {
                       if (!tick()) return;  // the goal check the real run performs
                       exec_body(r.body);
                     }
                     return;
                   }
                   while (true) {
                     bool exit = eval(r.cond);
                     if (failed_ || exit) return;
                     exec_body(r.body);
                     if (failed_) return;
                   }
                 },
                 [&](const WhileBlock& w) {
                   while (true) {
                     bool enter = eval(w.cond);
                     if (failed_ || !enter) return;
                     exec_body(w.body);
                     if (failed_) return;
                   }
                 },
                 [&](const IfBlock& i) {
                   if (eval(i.cond) && !failed_) exec_body(i.body);
                 },
                 [&](const IfElseBlock& i) {
                   bool t = eval(i.cond);
                   if (failed_) return;
                   if (t)
                     exec_body(i.then_body);
                   else
                     exec_body(i.else_body);
                 }},
        b.node);
  }

  const Code& code_;
  Rng& rng_;
  const GridSynthOptions& opts_;
  int rows_ = 0, cols_ = 0;
  Pose pose_, start_;
  std::map<Cell, State, CellRowMajor> cell_state_;
  std::map<Cell, int, CellRowMajor> initial_markers_;
  std::map<Cell, int, CellRowMajor> runtime_markers_;
  CellSet marker_decided_;
  int steps_ = 0;
  bool failed_ = false;
  bool has_goal_loop_ = false;
};

}  // namespace detail

// One growth attempt: grow, validate, re-run, screen. nullopt on any miss.
inline std::optional<Grid> try_grow_grid(const Code& code, Rng& rng,
                                         const GridSynthOptions& opts = {}) {
  detail::GrowthSim sim(code, rng, opts);
  std::optional<Grid> grid = sim.grow();
  if (!grid) return std::nullopt;
  try {
    validate_grid(*grid);
  } catch (const GridError&) {
    return std::nullopt;
  }
  Coverage cov;
  ExecutionResult res = run(code, *grid, opts.verify, &cov);
  if (res.status != RunStatus::solved || !coverage_ok(code, cov)) return std::nullopt;
  return grid;
}

// n distinct grids, each solved by the code with full control-site coverage.
inline std::vector<Grid> synthesize_grids(const Code& code, int n, Rng& rng,
                                          const GridSynthOptions& opts = {},
                                          int attempts_per_grid = 400) {
  validate_code(code);
  std::vector<Grid> out;
  std::set<std::string> seen;
  long budget = static_cast<long>(attempts_per_grid) * n;
  while (static_cast<int>(out.size()) < n && budget-- > 0) {
    std::optional<Grid> g = try_grow_grid(code, rng, opts);
    if (!g) continue;
    if (!seen.insert(serialize_grid(*g)).second) continue;
    out.push_back(std::move(*g));
  }
  if (static_cast<int>(out.size()) < n)
    throw Error("grid synthesis exhausted its attempt budget (made " +
                std::to_string(out.size()) + " of " + std::to_string(n) + ")");
  return out;
}

// ---------------------------------------------------------------------------
// Pairs and solution-synthesis tasks
// ---------------------------------------------------------------------------

struct CodeGridPair {
  Code code;
  std::vector<Grid> grids;  // non-empty; every grid is solved by code
};

struct PairOptions {
  CodeSpec code_spec;
  GridSynthOptions grid_options;
  int grids_per_pair = 4;
  int code_retries = 40;  // fresh codes to try when grids will not materialize
};

inline CodeGridPair sample_pair(const PairOptions& opts, Rng& rng) {
  for (int i = 0; i < opts.code_retries; ++i) {
    Code code = sample_code(opts.code_spec, rng);
    try {
      return {code, synthesize_grids(code, opts.grids_per_pair, rng, opts.grid_options)};
    } catch (const Error&) {
      continue;  // this code resists grid growth; draw another
    }
  }
  throw Error("pair synthesis failed for sketch '" + opts.code_spec.sketch + "'");
}

struct SolutionSynthesisTask {
  Grid grid;
  std::set<std::string> store;
  int max_size = 0;
  Code target;
  std::string explanation;
};

struct SolutionTaskOptions {
  // Offer both turn directions whenever the code uses either, mirroring the
  // usual block-palette convention.
  bool widen_turn_store = false;
};

inline SolutionSynthesisTask make_solution_task(const Code& code, const Grid& grid,
                                                const SolutionTaskOptions& topt = {}) {
  ExecutionResult res = run(code, grid);
  if (res.status != RunStatus::solved)
    throw Error("make_solution_task: the code does not solve this grid");
  SolutionSynthesisTask task;
  task.grid = grid;
  task.store = code_blocks(code);
  if (topt.widen_turn_store &&
      (task.store.count("turnLeft") || task.store.count("turnRight"))) {
    task.store.insert("turnLeft");
    task.store.insert("turnRight");
  }
  task.max_size = code_size(code);
  task.target = code;
  task.explanation = render_explanation(res, code);
  return task;
}

}  // namespace vpkit
