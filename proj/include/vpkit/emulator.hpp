#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vpkit/dsl.hpp"
#include "vpkit/grid.hpp"

namespace vpkit {

// ---------------------------------------------------------------------------
// Execution results
// ---------------------------------------------------------------------------

enum class RunStatus { solved, notSolved, crashed, stepLimit };

inline const char* run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::solved: return "solved";
    case RunStatus::notSolved: return "notSolved";
    case RunStatus::crashed: return "crashed";
    case RunStatus::stepLimit: return "stepLimit";
  }
  return "?";
}

struct ExecutionResult {
  std::vector<Pose> trace;  // trace[0] is the initial pose
  std::vector<ActionKind> actions;
  RunStatus status = RunStatus::notSolved;
  int steps_used = 0;  // VM ticks: executed actions + condition evaluations
  friend bool operator==(const ExecutionResult&, const ExecutionResult&) = default;
};

struct RunOptions {
  int step_limit = 1000;
};

// Per-site outcome counters gathered during a run (sites are AST paths).
// Used by the grid synthesis coverage screen.
struct Coverage {
  std::map<std::string, std::pair<int, int>> condition_outcomes;  // true, false
  std::map<std::string, int> repeat_entries;
};

enum class SiteKind { repeatLoop, goalLoop, sensorCondition };

// Static control sites of a code, keyed like Coverage.
inline std::map<std::string, SiteKind> collect_sites(const Code& code) {
  std::map<std::string, SiteKind> sites;
  auto walk_body = [&](auto&& self, const BlockList& body, BlockPath prefix,
                       int body_index) -> void {
    for (int idx = 0; idx < static_cast<int>(body.size()); ++idx) {
      BlockPath here = prefix;
      here.push_back({body_index, idx});
      const Block& b = body[static_cast<std::size_t>(idx)];
      std::visit(Overload{[&](const ActionBlock&) {},
                          [&](const RepeatBlock& r) {
                            sites[path_to_string(here)] = SiteKind::repeatLoop;
                            self(self, r.body, here, 0);
                          },
                          [&](const RepeatUntilBlock& r) {
                            sites[path_to_string(here)] =
                                r.cond.kind == ConditionKind::goal
                                    ? SiteKind::goalLoop
                                    : SiteKind::sensorCondition;
                            self(self, r.body, here, 0);
                          },
                          [&](const WhileBlock& w) {
                            sites[path_to_string(here)] = SiteKind::sensorCondition;
                            self(self, w.body, here, 0);
                          },
                          [&](const IfBlock& i) {
                            sites[path_to_string(here)] = SiteKind::sensorCondition;
                            self(self, i.body, here, 0);
                          },
                          [&](const IfElseBlock& i) {
                            sites[path_to_string(here)] = SiteKind::sensorCondition;
                            self(self, i.then_body, here, 0);
                            self(self, i.else_body, here, 1);
                          }},
                 b.node);
    }
  };
  walk_body(walk_body, code.body, {}, 0);
  return sites;
}

// ---------------------------------------------------------------------------
// Condition evaluation and single actions against a static grid. The run()
// loop uses the same logic over its own runtime marker state.
// ---------------------------------------------------------------------------

namespace detail {

struct MarkerView {
  const std::map<Cell, int, CellRowMajor>* markers;
  int count(Cell c) const {
    auto it = markers->find(c);
    return it == markers->end() ? 0 : it->second;
  }
};

inline bool eval_condition_raw(const Grid& g, const Pose& pose, ConditionKind kind,
                               const MarkerView& mv) {
  switch (kind) {
    case ConditionKind::goal: return g.goal && pose.cell == *g.goal;
    case ConditionKind::pathAhead: return g.is_clear(neighbor(pose.cell, pose.dir));
    case ConditionKind::leftIsClear:
      return g.is_clear(neighbor(pose.cell, turned_left(pose.dir)));
    case ConditionKind::rightIsClear:
      return g.is_clear(neighbor(pose.cell, turned_right(pose.dir)));
    case ConditionKind::markersPresent: return mv.count(pose.cell) > 0;
  }
  return false;
}

}  // namespace detail

inline bool evaluate_condition(const Grid& g, const Pose& pose, const Condition& c) {
  bool raw = detail::eval_condition_raw(g, pose, c.kind, {&g.markers});
  return c.negated ? !raw : raw;
}

// New pose, or nullopt for a crash (moving into a wall or off the grid;
// picking where no marker lies). Markers are read from the static grid.
inline std::optional<Pose> apply_action(const Grid& g, const Pose& pose, ActionKind a) {
  switch (a) {
    case ActionKind::move: {
      Cell target = neighbor(pose.cell, pose.dir);
      if (!g.is_clear(target)) return std::nullopt;
      return Pose{target, pose.dir};
    }
    case ActionKind::turnLeft: return Pose{pose.cell, turned_left(pose.dir)};
    case ActionKind::turnRight: return Pose{pose.cell, turned_right(pose.dir)};
    case ActionKind::pickMarker:
      if (g.marker_count(pose.cell) < 1) return std::nullopt;
      return pose;
    case ActionKind::putMarker: return pose;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// run(): big-step tree walk. Semantics pinned by the tests:
//  * every executed action appends one trace entry (|actions| == |trace|-1);
//  * crashes halt immediately and keep the partial trace;
//  * a step is an action or a condition evaluation, bounded by step_limit;
//  * inside a `repeatUntil goal` loop, entering the goal cell stops execution
//    at once (no further action of the body runs);
//  * solved means: goal reached when the grid has a goal, all markers removed
//    when it has markers, both when it has both.
// ---------------------------------------------------------------------------

namespace detail {

class Emulator {
 public:
  Emulator(const Code& code, const Grid& grid, RunOptions options, Coverage* cov)
      : code_(code), grid_(grid), options_(options), cov_(cov) {
    if (!grid.avatar) throw GridError("cannot run: grid has no avatar");
    pose_ = *grid.avatar;
    markers_ = grid.markers;
    if (cov_) index_sites(code_.body, {}, 0);
  }

  ExecutionResult run() {
    ExecutionResult res;
    res.trace.push_back(pose_);
    trace_ = &res.trace;
    actions_ = &res.actions;
    exec_body(code_.body);
    res.steps_used = steps_;
    if (crashed_) {
      res.status = RunStatus::crashed;
    } else if (limit_hit_) {
      res.status = RunStatus::stepLimit;
    } else {
      res.status = objective_met() ? RunStatus::solved : RunStatus::notSolved;
    }
    return res;
  }

 private:
  bool halted() const { return crashed_ || limit_hit_ || stopped_at_goal_; }

  bool objective_met() const {
    bool has_goal = grid_.goal.has_value();
    bool has_markers = !grid_.markers.empty();
    if (!has_goal && !has_markers) return false;
    if (has_goal && pose_.cell != *grid_.goal) return false;
    if (has_markers && !markers_.empty()) return false;
    return true;
  }

  // One VM tick; false when the step budget is exhausted.
  bool tick() {
    if (steps_ >= options_.step_limit) {
      limit_hit_ = true;
      return false;
    }
    ++steps_;
    return true;
  }

  bool eval(const Condition& c, const Block* site) {
    bool raw = eval_condition_raw(grid_, pose_, c.kind, {&markers_});
    bool v = c.negated ? !raw : raw;
    if (cov_) {
      auto& [t, f] = cov_->condition_outcomes[site_of_.at(site)];
      (v ? t : f) += 1;
    }
    return v;
  }

  void do_action(ActionKind a) {
    if (!tick()) return;
    switch (a) {
      case ActionKind::move: {
        Cell target = neighbor(pose_.cell, pose_.dir);
        if (!grid_.is_clear(target)) {
          crashed_ = true;
          return;
        }
        pose_.cell = target;
        break;
      }
      case ActionKind::turnLeft: pose_.dir = turned_left(pose_.dir); break;
      case ActionKind::turnRight: pose_.dir = turned_right(pose_.dir); break;
      case ActionKind::pickMarker: {
        auto it = markers_.find(pose_.cell);
        if (it == markers_.end() || it->second < 1) {
          crashed_ = true;
          return;
        }
        if (--it->second == 0) markers_.erase(it);
        break;
      }
      case ActionKind::putMarker: markers_[pose_.cell] += 1; break;
    }
    actions_->push_back(a);
    trace_->push_back(pose_);
    if (a == ActionKind::move && goal_loop_depth_ > 0 && grid_.goal &&
        pose_.cell == *grid_.goal)
      stopped_at_goal_ = true;
  }

  void exec_body(const BlockList& body) {
    for (const Block& b : body) {
      exec_block(b);
      if (halted()) return;
    }
  }

  void exec_block(const Block& b) {
    std::visit(
        Overload{[&](const ActionBlock& a) { do_action(a.action); },
                 [&](const RepeatBlock& r) {
                   if (cov_) cov_->repeat_entries[site_of_.at(&b)] += 1;
                   for (int i = 0; i < r.count && !halted(); ++i) exec_body(r.body);
                 },
                 [&](const RepeatUntilBlock& r) {
                   bool is_goal_loop = r.cond.kind == ConditionKind::goal;
                   if (is_goal_loop) ++goal_loop_depth_;
                   while (true) {
                     if (!tick()) break;
                     if (eval(r.cond, &b)) break;
                     exec_body(r.body);
                     if (halted()) break;
                   }
                   if (is_goal_loop) --goal_loop_depth_;
                 },
                 [&](const WhileBlock& w) {
                   while (true) {
                     if (!tick()) break;
                     if (!eval(w.cond, &b)) break;
                     exec_body(w.body);
                     if (halted()) break;
                   }
                 },
                 [&](const IfBlock& i) {
                   if (!tick()) return;
                   if (eval(i.cond, &b)) exec_body(i.body);
                 },
                 [&](const IfElseBlock& i) {
                   if (!tick()) return;
                   if (eval(i.cond, &b))
                     exec_body(i.then_body);
                   else
                     exec_body(i.else_body);
                 }},
        b.node);
  }

  void index_sites(const BlockList& body, BlockPath prefix, int body_index) {
    for (int idx = 0; idx < static_cast<int>(body.size()); ++idx) {
      BlockPath here = prefix;
      here.push_back({body_index, idx});
      const Block& b = body[static_cast<std::size_t>(idx)];
      site_of_[&b] = path_to_string(here);
      std::visit(Overload{[&](const ActionBlock&) {},
                          [&](const RepeatBlock& r) { index_sites(r.body, here, 0); },
                          [&](const RepeatUntilBlock& r) { index_sites(r.body, here, 0); },
                          [&](const WhileBlock& w) { index_sites(w.body, here, 0); },
                          [&](const IfBlock& i) { index_sites(i.body, here, 0); },
                          [&](const IfElseBlock& i) {
                            index_sites(i.then_body, here, 0);
                            index_sites(i.else_body, here, 1);
                          }},
                 b.node);
    }
  }

  const Code& code_;
  const Grid& grid_;
  RunOptions options_;
  Coverage* cov_;
  std::map<const Block*, std::string> site_of_;

  Pose pose_;
  std::map<Cell, int, CellRowMajor> markers_;
  std::vector<Pose>* trace_ = nullptr;
  std::vector<ActionKind>* actions_ = nullptr;
  int steps_ = 0;
  int goal_loop_depth_ = 0;
  bool crashed_ = false;
  bool limit_hit_ = false;
  bool stopped_at_goal_ = false;
};

}  // namespace detail

inline ExecutionResult run(const Code& code, const Grid& grid, RunOptions options = {},
                           Coverage* coverage = nullptr) {
  return detail::Emulator(code, grid, options, coverage).run();
}

inline bool solves(const Code& code, const Grid& grid, RunOptions options = {}) {
  return run(code, grid, options).status == RunStatus::solved;
}

inline CellSet visited_cells(const ExecutionResult& res) {
  CellSet cells;
  for (const Pose& p : res.trace) cells.insert(p.cell);
  return cells;
}

// ---------------------------------------------------------------------------
// Explanations: the three-section rendering of a run
//   avatar locations: g2:west f2:west ... goal
//   avatar actions: move move ...
//   code:
//   when run:
//     ...
// On solved runs the final pose token is replaced by the token `goal` (the
// avatar's last listed pose is where it stood before the finishing action).
// The reader recovers the omitted pose by replaying the last action, which is
// pure pose arithmetic and never needs the grid. No trailing newline.
// ---------------------------------------------------------------------------

// Pose arithmetic only: where an action puts the avatar, ignoring walls and
// bounds. Valid for replaying actions known to have succeeded.
inline Pose advanced_pose(Pose p, ActionKind a) {
  switch (a) {
    case ActionKind::move: p.cell = neighbor(p.cell, p.dir); break;
    case ActionKind::turnLeft: p.dir = turned_left(p.dir); break;
    case ActionKind::turnRight: p.dir = turned_right(p.dir); break;
    case ActionKind::pickMarker:
    case ActionKind::putMarker: break;
  }
  return p;
}

inline std::string render_explanation(const ExecutionResult& res, const Code& code) {
  bool solved = res.status == RunStatus::solved;
  std::string out = "avatar locations:";
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    if (solved && i + 1 == res.trace.size()) break;
    out += " " + pose_token(res.trace[i]);
  }
  if (solved) out += " goal";
  out += "\navatar actions:";
  for (ActionKind a : res.actions) out += std::string(" ") + action_name(a);
  out += "\ncode:\n";
  out += print_code(code);
  return out;
}

struct Explanation {
  std::vector<Pose> trace;
  std::vector<ActionKind> actions;
  bool solved = false;
  Code code;
};

inline Explanation parse_explanation(std::string_view text, const DslLimits& limits = {}) {
  auto lines = detail::split(text, "\n");
  if (lines.size() < 4 || lines[0].rfind("avatar locations:", 0) != 0 ||
      lines[1].rfind("avatar actions:", 0) != 0 || lines[2] != "code:")
    throw Error("malformed explanation");
  Explanation ex;
  {
    std::istringstream ss(lines[0].substr(std::string("avatar locations:").size()));
    std::string tok;
    std::vector<std::string> toks;
    while (ss >> tok) toks.push_back(tok);
    if (!toks.empty() && toks.back() == "goal") {
      ex.solved = true;
      toks.pop_back();
    }
    for (const std::string& t : toks) {
      auto pose = pose_from_token(t);
      if (!pose) throw Error("bad location token '" + t + "'");
      ex.trace.push_back(*pose);
    }
  }
  {
    std::istringstream ss(lines[1].substr(std::string("avatar actions:").size()));
    std::string tok;
    while (ss >> tok) {
      auto a = action_from_name(tok);
      if (!a) throw Error("bad action token '" + tok + "'");
      ex.actions.push_back(*a);
    }
  }
  // Solved renderings omit the finishing pose in favour of `goal`; replay the
  // last action to restore it. A solved run with no actions at all (avatar
  // born on the goal) renders as just `goal` and leaves the trace empty.
  if (ex.solved && !ex.actions.empty() && !ex.trace.empty())
    ex.trace.push_back(advanced_pose(ex.trace.back(), ex.actions.back()));
  std::string code_text;
  for (std::size_t i = 3; i < lines.size(); ++i) {
    if (i > 3) code_text += '\n';
    code_text += lines[i];
  }
  ex.code = parse_code(code_text, limits);
  return ex;
}

}  // namespace vpkit
