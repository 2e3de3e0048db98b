#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "vpkit/dsl.hpp"
#include "vpkit/emulator.hpp"
#include "vpkit/grid.hpp"
#include "vpkit/pairgen.hpp"
#include "vpkit/rng.hpp"

namespace vpkit {

// ---------------------------------------------------------------------------
// Multiple-choice task generation. Thirteen task types over three cognitive
// levels; every task carries exactly four options, one correct, and a
// validator that re-derives option truth from the emulator alone.
// ---------------------------------------------------------------------------

enum class McqLevel { analyzing, evaluating, creating };

enum class McqType {
  // analyzing
  selectSolutionCode,
  whichGridsSolved,
  traceCellsVisited,
  // evaluating
  identifyBug,
  repairBug,
  codeEquivNoGrid,
  codeEquivWithGrid,
  // creating
  placeAvatar,
  countAvatarPositions,
  placeGoal,
  countGoalPositions,
  placeWalls,
  countMinWalls,
};

inline constexpr std::array<McqType, 13> kAllMcqTypes = {
    McqType::selectSolutionCode, McqType::whichGridsSolved, McqType::traceCellsVisited,
    McqType::identifyBug,        McqType::repairBug,        McqType::codeEquivNoGrid,
    McqType::codeEquivWithGrid,  McqType::placeAvatar,      McqType::countAvatarPositions,
    McqType::placeGoal,          McqType::countGoalPositions, McqType::placeWalls,
    McqType::countMinWalls};

inline McqLevel mcq_level(McqType t) {
  switch (t) {
    case McqType::selectSolutionCode:
    case McqType::whichGridsSolved:
    case McqType::traceCellsVisited: return McqLevel::analyzing;
    case McqType::identifyBug:
    case McqType::repairBug:
    case McqType::codeEquivNoGrid:
    case McqType::codeEquivWithGrid: return McqLevel::evaluating;
    default: return McqLevel::creating;
  }
}

inline const char* mcq_level_name(McqLevel l) {
  switch (l) {
    case McqLevel::analyzing: return "analyzing";
    case McqLevel::evaluating: return "evaluating";
    case McqLevel::creating: return "creating";
  }
  return "?";
}

inline const char* mcq_type_name(McqType t) {
  switch (t) {
    case McqType::selectSolutionCode: return "selectSolutionCode";
    case McqType::whichGridsSolved: return "whichGridsSolved";
    case McqType::traceCellsVisited: return "traceCellsVisited";
    case McqType::identifyBug: return "identifyBug";
    case McqType::repairBug: return "repairBug";
    case McqType::codeEquivNoGrid: return "codeEquivNoGrid";
    case McqType::codeEquivWithGrid: return "codeEquivWithGrid";
    case McqType::placeAvatar: return "placeAvatar";
    case McqType::countAvatarPositions: return "countAvatarPositions";
    case McqType::placeGoal: return "placeGoal";
    case McqType::countGoalPositions: return "countGoalPositions";
    case McqType::placeWalls: return "placeWalls";
    case McqType::countMinWalls: return "countMinWalls";
  }
  return "?";
}

// One fixed, hand-written prompt template per task type.
inline const char* mcq_description(McqType t) {
  switch (t) {
    case McqType::selectSolutionCode:
      return "Which of the following codes solves the grid shown below?";
    case McqType::whichGridsSolved:
      return "Which of the grids shown below are solved by the given code?";
    case McqType::traceCellsVisited:
      return "Which of the following sets contains only cells visited by the avatar "
             "when the given code runs on the given grid?";
    case McqType::identifyBug:
      return "The given code fails to solve the grid shown below. Which location in "
             "the code contains the bug?";
    case McqType::repairBug:
      return "The given code fails to solve the grid shown below. Which single edit "
             "repairs it?";
    case McqType::codeEquivNoGrid:
      return "Which of the following codes is equivalent to the given code, visiting "
             "the same cells with the same outcome on every grid?";
    case McqType::codeEquivWithGrid:
      return "Which of the following codes is equivalent to the given code on the "
             "grid shown below, visiting the same cells with the same outcome?";
    case McqType::placeAvatar:
      return "The grid below is missing its avatar. Where must the avatar start so "
             "that the given code solves the grid?";
    case McqType::countAvatarPositions:
      return "The grid below is missing its avatar. How many starting placements "
             "(cell and direction) let the given code solve the grid?";
    case McqType::placeGoal:
      return "The grid below is missing its goal. In which cell must the goal be "
             "placed so that the given code solves the grid?";
    case McqType::countGoalPositions:
      return "The grid below is missing its goal. How many goal placements let the "
             "given code solve the grid?";
    case McqType::placeWalls:
      return "Some walls were removed from the grid below. On which cells must walls "
             "be placed so that the given code solves the grid?";
    case McqType::countMinWalls:
      return "What is the minimum number of walls that must be added to the grid "
             "below so that the given code solves it?";
  }
  return "?";
}

// Structured option content; the text is its fixed rendering.
using McqPayload = std::variant<std::monostate,
                                Code,              // code options
                                Mutation,          // repairBug
                                BlockPath,         // identifyBug locus
                                std::vector<int>,  // whichGridsSolved subset
                                std::vector<Cell>, // traceCellsVisited cells
                                int,               // counting answers
                                Pose,              // placeAvatar
                                Cell,              // placeGoal
                                CellSet>;          // placeWalls

struct McqOption {
  std::string text;
  McqPayload payload;
};

inline char mcq_label(int index) { return static_cast<char>('A' + index); }

struct McqTask {
  McqType type{};
  McqLevel level{};
  std::string description;
  std::optional<Code> given_code;  // the code shown (the mutant for bug types)
  std::vector<Grid> given_grids;   // grids shown alongside the prompt
  std::optional<IncompleteGrid> given_incomplete;  // creating-level board
  std::vector<Grid> probe_grids;   // hidden equivalence panel (codeEquivNoGrid)
  std::optional<CellSet> witness_walls;  // countMinWalls: a solving addition
  std::array<McqOption, 4> options;      // index 0..3 = labels A..D
  int correct = 0;
  std::string explanation;
};

struct McqCheck {
  bool ok = false;
  std::string failure;  // names the violating option when !ok
};

struct McqGenOptions {
  int probe_panel = 32;          // codeEquivNoGrid equivalence probes
  GridSynthOptions probe_synth;  // how those probes are grown
  int retries = 200;
};

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

namespace detail {

inline std::string cell_list_text(const std::vector<Cell>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ", ";
    out += cell_name(cells[i]);
  }
  return out;
}

inline std::string cell_set_text(const CellSet& cells) {
  return cell_list_text(std::vector<Cell>(cells.begin(), cells.end()));
}

inline std::string subset_text(const std::vector<int>& idx, int total) {
  if (idx.empty()) return "none of the grids";
  if (static_cast<int>(idx.size()) == total) return "all of the grids";
  if (idx.size() == 1) return "only grid " + std::to_string(idx[0] + 1);
  std::string out = "grids ";
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) out += (i + 1 == idx.size()) ? " and " : ", ";
    out += std::to_string(idx[i] + 1);
  }
  return out;
}

inline std::vector<Cell> sorted_cells(std::vector<Cell> cells) {
  std::sort(cells.begin(), cells.end(), CellRowMajor{});
  return cells;
}

// The avatar's path through cells, consecutive duplicates collapsed.
inline std::vector<Cell> dedup_cell_path(const std::vector<Pose>& trace) {
  std::vector<Cell> cells;
  for (const Pose& p : trace)
    if (cells.empty() || !(cells.back() == p.cell)) cells.push_back(p.cell);
  return cells;
}

}  // namespace detail

// Two runs count as equivalent when they end the same way, walk the same cell
// path, and finish in the same pose. Turning in place is not observable.
inline bool traces_equivalent(const ExecutionResult& a, const ExecutionResult& b) {
  if (a.status != b.status) return false;
  if (detail::dedup_cell_path(a.trace) != detail::dedup_cell_path(b.trace)) return false;
  if (a.trace.empty() || b.trace.empty()) return a.trace.size() == b.trace.size();
  return a.trace.back() == b.trace.back();
}

namespace detail {

inline void collect_paths_in(const BlockList& body, const BlockPath& prefix,
                             int body_index, std::vector<BlockPath>& out) {
  for (int i = 0; i < static_cast<int>(body.size()); ++i) {
    BlockPath here = prefix;
    here.push_back({body_index, i});
    out.push_back(here);
    std::visit(Overload{[&](const ActionBlock&) {},
                        [&](const RepeatBlock& r) { collect_paths_in(r.body, here, 0, out); },
                        [&](const RepeatUntilBlock& r) { collect_paths_in(r.body, here, 0, out); },
                        [&](const WhileBlock& w) { collect_paths_in(w.body, here, 0, out); },
                        [&](const IfBlock& f) { collect_paths_in(f.body, here, 0, out); },
                        [&](const IfElseBlock& f) {
                          collect_paths_in(f.then_body, here, 0, out);
                          collect_paths_in(f.else_body, here, 1, out);
                        }},
               body[static_cast<std::size_t>(i)].node);
  }
}

inline std::vector<BlockPath> collect_block_paths(const Code& c) {
  std::vector<BlockPath> out;
  collect_paths_in(c.body, {}, 0, out);
  return out;
}

}  // namespace detail

// Whether some single edit at exactly this block makes the code solve the
// grid. Shared by the identifyBug generator and the validator so both sides
// always agree on what counts as the buggy locus.
inline bool locus_repairable(const Code& code, const BlockPath& path, const Grid& grid) {
  for (const Mutation& m : enumerate_mutations(code)) {
    if (m.kind == MutationKind::insertAction) continue;
    if (m.path != path) continue;
    try {
      if (solves(apply_mutation(code, m), grid)) return true;
    } catch (const Error&) {
    }
  }
  return false;
}

// Behavior-preserving rewrites of a code, used as the correct option of the
// equivalence task types: a turn replaced by three opposite turns, an
// unrolled repeat, a condition-negating branch swap, a full spin appended.
inline std::vector<Code> equivalence_rewrites(const Code& code) {
  const int max_body = DslLimits{}.max_body_len;
  std::vector<Code> out;
  auto keep = [&](Code c) {
    try {
      validate_code(c);
      if (print_code(c) != print_code(code)) out.push_back(std::move(c));
    } catch (const Error&) {
    }
  };
  for (const BlockPath& p : detail::collect_block_paths(code)) {
    const Block* b = block_at(code, p);
    if (auto* a = std::get_if<ActionBlock>(&b->node);
        a && (a->action == ActionKind::turnLeft || a->action == ActionKind::turnRight)) {
      const BlockList* parent = body_at(code, p);
      if (static_cast<int>(parent->size()) + 2 <= max_body) {
        Code c = code;
        BlockList* pb = body_at(c, p);
        ActionKind opposite = a->action == ActionKind::turnLeft ? ActionKind::turnRight
                                                                : ActionKind::turnLeft;
        auto it = pb->begin() + p.back().index;
        *it = make_action(opposite);
        pb->insert(it + 1, {make_action(opposite), make_action(opposite)});
        keep(std::move(c));
      }
    }
    if (auto* r = std::get_if<RepeatBlock>(&b->node)) {
      const BlockList* parent = body_at(code, p);
      std::size_t grown =
          parent->size() - 1 + r->body.size() * static_cast<std::size_t>(r->count);
      if (static_cast<int>(grown) <= max_body) {
        Code c = code;
        BlockList* pb = body_at(c, p);
        BlockList inlined;
        for (int i = 0; i < r->count; ++i)
          inlined.insert(inlined.end(), r->body.begin(), r->body.end());
        auto at = pb->begin() + p.back().index;
        at = pb->erase(at);
        pb->insert(at, inlined.begin(), inlined.end());
        keep(std::move(c));
      }
    }
    if (auto* f = std::get_if<IfElseBlock>(&b->node);
        f && (f->cond.kind == ConditionKind::pathAhead ||
              f->cond.kind == ConditionKind::markersPresent)) {
      // for these sensors the flip is pure negation, so swapping branches
      // preserves meaning exactly
      Code c = code;
      auto* blk = std::get_if<IfElseBlock>(&block_at(c, p)->node);
      blk->cond = flipped_condition(blk->cond);
      std::swap(blk->then_body, blk->else_body);
      keep(std::move(c));
    }
  }
  if (static_cast<int>(code.body.size()) + 4 <= max_body) {
    Code c = code;
    for (int i = 0; i < 4; ++i) c.body.push_back(make_action(ActionKind::turnLeft));
    keep(std::move(c));
  }
  return out;
}

namespace detail {

// A nearby grid the code does NOT solve: relocated goal, rotated avatar, or a
// wall dropped onto the trace.
inline std::optional<Grid> unsolved_variant(const Code& code, const Grid& base, Rng& rng) {
  ExecutionResult res = run(code, base);
  for (int attempt = 0; attempt < 80; ++attempt) {
    Grid g = base;
    switch (rng.below(3)) {
      case 0: {  // relocate the goal
        if (!g.goal) continue;
        std::vector<Cell> spots;
        for (int r = 0; r < g.rows; ++r)
          for (int c = 0; c < g.cols; ++c) {
            Cell cell{c, r};
            if (g.is_clear(cell) && g.marker_count(cell) == 0 && cell != *g.goal)
              spots.push_back(cell);
          }
        if (spots.empty()) continue;
        g.goal = rng.pick(spots);
        break;
      }
      case 1: {  // rotate the avatar
        if (!g.avatar) continue;
        int quarter = rng.range(1, 3);
        for (int i = 0; i < quarter; ++i) g.avatar->dir = turned_left(g.avatar->dir);
        break;
      }
      default: {  // drop a wall onto the visited path
        std::vector<Cell> spots;
        for (const Cell& cell : visited_cells(res)) {
          if (g.avatar && cell == g.avatar->cell) continue;
          if (g.goal && cell == *g.goal) continue;
          if (g.marker_count(cell) > 0 || g.is_wall(cell)) continue;
          spots.push_back(cell);
        }
        if (spots.empty()) continue;
        g.walls.insert(rng.pick(spots));
        break;
      }
    }
    try {
      validate_grid(g);
    } catch (const GridError&) {
      continue;
    }
    if (!solves(code, g) && serialize_grid(g) != serialize_grid(base)) return g;
  }
  return std::nullopt;
}

inline std::vector<int> arithmetic_distractors(int correct, Rng& rng) {
  std::vector<int> candidates = {correct + 1, correct + 2, correct - 1, correct * 2,
                                 correct + 3};
  std::vector<int> out;
  for (int v : candidates)
    if (v >= 0 && v != correct && std::find(out.begin(), out.end(), v) == out.end())
      out.push_back(v);
  rng.shuffle(out);
  out.resize(3);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Validation: re-derives the truth of every option from the emulator and
// exhaustive search, independent of how the task was generated.
// ---------------------------------------------------------------------------

namespace detail {

inline Grid with_avatar(Grid g, const Pose& p) {
  g.avatar = p;
  return g;
}

inline Grid with_goal(Grid g, const Cell& c) {
  g.goal = c;
  return g;
}

inline Grid with_walls(Grid g, const CellSet& walls) {
  for (const Cell& w : walls) g.walls.insert(w);
  return g;
}

inline bool placement_solves(const Code& code, const Grid& g) {
  try {
    validate_grid(g);
    return solves(code, g);
  } catch (const Error&) {
    return false;
  }
}

// All (cell, orientation) avatar placements that let the code solve, in
// row-major, N-E-S-W order.
inline std::vector<Pose> solving_avatar_poses(const Code& code, const Grid& base) {
  static constexpr std::array<Orientation, 4> kDirs = {
      Orientation::north, Orientation::east, Orientation::south, Orientation::west};
  std::vector<Pose> out;
  for (int r = 0; r < base.rows; ++r)
    for (int c = 0; c < base.cols; ++c) {
      Cell cell{c, r};
      if (!base.is_clear(cell) || base.marker_count(cell) > 0) continue;
      for (Orientation o : kDirs) {
        Pose p{cell, o};
        if (placement_solves(code, with_avatar(base, p))) out.push_back(p);
      }
    }
  return out;
}

inline std::vector<Cell> solving_goal_cells(const Code& code, const Grid& base) {
  std::vector<Cell> out;
  for (int r = 0; r < base.rows; ++r)
    for (int c = 0; c < base.cols; ++c) {
      Cell cell{c, r};
      if (!base.is_clear(cell) || base.marker_count(cell) > 0) continue;
      if (placement_solves(code, with_goal(base, cell))) out.push_back(cell);
    }
  return out;
}

// Wall-addition candidates: free cells on or next to the avatar's path.
// A wall anywhere else is never queried by the first diverging step.
inline std::vector<Cell> wall_addition_candidates(const Code& code, const Grid& base) {
  ExecutionResult res = run(code, base);
  CellSet reach;
  for (const Pose& p : res.trace) {
    reach.insert(p.cell);
    reach.insert(neighbor(p.cell, Orientation::north));
    reach.insert(neighbor(p.cell, Orientation::east));
    reach.insert(neighbor(p.cell, Orientation::south));
    reach.insert(neighbor(p.cell, Orientation::west));
  }
  std::vector<Cell> out;
  for (const Cell& cell : reach) {
    if (!base.is_clear(cell) || base.marker_count(cell) > 0) continue;
    if (base.avatar && cell == base.avatar->cell) continue;
    if (base.goal && cell == *base.goal) continue;
    out.push_back(cell);
  }
  return out;  // CellSet iteration keeps this row-major deterministic
}

// True when some wall addition of size < k (over the candidate cells) makes
// the code solve the grid. Combination count is capped.
inline bool smaller_addition_solves(const Code& code, const Grid& base, int k,
                                    long combo_cap = 1 << 20) {
  if (solves(code, base)) return true;  // size 0
  std::vector<Cell> cand = wall_addition_candidates(code, base);
  long n = static_cast<long>(cand.size());
  if (k >= 2) {
    if (n > combo_cap) return true;  // over budget: treat as unsafe
    for (const Cell& c : cand)
      if (placement_solves(code, with_walls(base, CellSet{c}))) return true;
  }
  if (k >= 3) {
    if (n * n > combo_cap) return true;
    // A second wall only matters once the first has diverted the run, so its
    // candidates come from the diverted run's own neighbourhood, which can
    // reach cells the base run never probes.
    for (const Cell& first : cand) {
      Grid diverted = with_walls(base, CellSet{first});
      for (const Cell& second : wall_addition_candidates(code, diverted))
        if (placement_solves(code, with_walls(diverted, CellSet{second})))
          return true;
    }
  }
  return false;
}

}  // namespace detail

inline McqCheck validate_mcq(const McqTask& task) {
  auto fail = [](const std::string& msg) { return McqCheck{false, msg}; };
  auto fail_option = [&](int i, const std::string& why) {
    return fail(std::string("option ") + mcq_label(i) + ": " + why);
  };
  if (task.correct < 0 || task.correct > 3) return fail("correct label out of range");

  // Per-type truth of a single option payload.
  std::array<bool, 4> good{};
  try {
    switch (task.type) {
      case McqType::selectSolutionCode: {
        if (!task.given_grids.size()) return fail("no grid given");
        for (int i = 0; i < 4; ++i)
          good[i] = solves(std::get<Code>(task.options[i].payload), task.given_grids[0]);
        break;
      }
      case McqType::whichGridsSolved: {
        if (!task.given_code) return fail("no code given");
        std::vector<int> actual;
        for (int i = 0; i < static_cast<int>(task.given_grids.size()); ++i)
          if (solves(*task.given_code, task.given_grids[i])) actual.push_back(i);
        for (int i = 0; i < 4; ++i)
          good[i] = std::get<std::vector<int>>(task.options[i].payload) == actual;
        break;
      }
      case McqType::traceCellsVisited: {
        if (!task.given_code || task.given_grids.empty()) return fail("missing input");
        CellSet visited = visited_cells(run(*task.given_code, task.given_grids[0]));
        for (int i = 0; i < 4; ++i) {
          const auto& cells = std::get<std::vector<Cell>>(task.options[i].payload);
          good[i] = !cells.empty() && std::all_of(cells.begin(), cells.end(), [&](Cell c) {
            return visited.count(c) != 0;
          });
        }
        break;
      }
      case McqType::identifyBug: {
        if (!task.given_code || task.given_grids.empty()) return fail("missing input");
        if (solves(*task.given_code, task.given_grids[0]))
          return fail("the given code already solves the grid");
        for (int i = 0; i < 4; ++i)
          good[i] = locus_repairable(*task.given_code,
                                     std::get<BlockPath>(task.options[i].payload),
                                     task.given_grids[0]);
        break;
      }
      case McqType::repairBug: {
        if (!task.given_code || task.given_grids.empty()) return fail("missing input");
        if (solves(*task.given_code, task.given_grids[0]))
          return fail("the given code already solves the grid");
        for (int i = 0; i < 4; ++i) {
          try {
            good[i] = solves(
                apply_mutation(*task.given_code, std::get<Mutation>(task.options[i].payload)),
                task.given_grids[0]);
          } catch (const Error&) {
            good[i] = false;
          }
        }
        break;
      }
      case McqType::codeEquivWithGrid:
      case McqType::codeEquivNoGrid: {
        if (!task.given_code) return fail("no code given");
        const std::vector<Grid>& panel = task.type == McqType::codeEquivWithGrid
                                             ? task.given_grids
                                             : task.probe_grids;
        if (panel.empty()) return fail("no grids to probe equivalence on");
        std::vector<ExecutionResult> refs;
        for (const Grid& g : panel) refs.push_back(run(*task.given_code, g));
        for (int i = 0; i < 4; ++i) {
          const Code& cand = std::get<Code>(task.options[i].payload);
          good[i] = true;
          for (std::size_t p = 0; p < panel.size() && good[i]; ++p)
            good[i] = traces_equivalent(refs[p], run(cand, panel[p]));
        }
        break;
      }
      case McqType::placeAvatar: {
        if (!task.given_code || !task.given_incomplete) return fail("missing input");
        const Grid& base = task.given_incomplete->grid;
        for (int i = 0; i < 4; ++i)
          good[i] = detail::placement_solves(
              *task.given_code,
              detail::with_avatar(base, std::get<Pose>(task.options[i].payload)));
        break;
      }
      case McqType::placeGoal: {
        if (!task.given_code || !task.given_incomplete) return fail("missing input");
        const Grid& base = task.given_incomplete->grid;
        for (int i = 0; i < 4; ++i)
          good[i] = detail::placement_solves(
              *task.given_code,
              detail::with_goal(base, std::get<Cell>(task.options[i].payload)));
        break;
      }
      case McqType::countAvatarPositions: {
        if (!task.given_code || !task.given_incomplete) return fail("missing input");
        int count = static_cast<int>(
            detail::solving_avatar_poses(*task.given_code, task.given_incomplete->grid)
                .size());
        for (int i = 0; i < 4; ++i)
          good[i] = std::get<int>(task.options[i].payload) == count;
        break;
      }
      case McqType::countGoalPositions: {
        if (!task.given_code || !task.given_incomplete) return fail("missing input");
        int count = static_cast<int>(
            detail::solving_goal_cells(*task.given_code, task.given_incomplete->grid)
                .size());
        for (int i = 0; i < 4; ++i)
          good[i] = std::get<int>(task.options[i].payload) == count;
        break;
      }
      case McqType::placeWalls: {
        if (!task.given_code || !task.given_incomplete) return fail("missing input");
        const Grid& base = task.given_incomplete->grid;
        for (int i = 0; i < 4; ++i)
          good[i] = detail::placement_solves(
              *task.given_code,
              detail::with_walls(base, std::get<CellSet>(task.options[i].payload)));
        break;
      }
      case McqType::countMinWalls: {
        if (!task.given_code || !task.given_incomplete || !task.witness_walls)
          return fail("missing input");
        const Grid& base = task.given_incomplete->grid;
        int k = std::get<int>(task.options[task.correct].payload);
        if (static_cast<int>(task.witness_walls->size()) != k)
          return fail("witness size disagrees with the correct option");
        if (!detail::placement_solves(*task.given_code,
                                      detail::with_walls(base, *task.witness_walls)))
          return fail("witness walls do not make the code solve");
        if (detail::smaller_addition_solves(*task.given_code, base, k))
          return fail("a smaller wall addition already solves");
        for (int i = 0; i < 4; ++i)
          good[i] = std::get<int>(task.options[i].payload) == k;
        break;
      }
    }
  } catch (const std::bad_variant_access&) {
    return fail("option payload has the wrong shape for this task type");
  }

  for (int i = 0; i < 4; ++i) {
    if (i == task.correct && !good[i])
      return fail_option(i, "marked correct but verifies as wrong");
    if (i != task.correct && good[i])
      return fail_option(i, "marked as a distractor but verifies as correct");
  }
  return {true, ""};
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

namespace detail {

inline McqTask finish_task(McqType type, std::optional<Code> given_code,
                           std::vector<Grid> given_grids,
                           std::optional<IncompleteGrid> incomplete,
                           std::vector<Grid> probes, std::optional<CellSet> witness,
                           McqOption correct_option, std::vector<McqOption> distractors,
                           std::string explanation, Rng& rng) {
  if (distractors.size() != 3) throw Error("need exactly 3 distractors");
  std::vector<McqOption> all;
  all.push_back(std::move(correct_option));
  for (auto& d : distractors) all.push_back(std::move(d));
  std::vector<std::size_t> order = {0, 1, 2, 3};
  rng.shuffle(order);
  McqTask task;
  task.type = type;
  task.level = mcq_level(type);
  task.description = mcq_description(type);
  task.given_code = std::move(given_code);
  task.given_grids = std::move(given_grids);
  task.given_incomplete = std::move(incomplete);
  task.probe_grids = std::move(probes);
  task.witness_walls = std::move(witness);
  for (int i = 0; i < 4; ++i) {
    task.options[static_cast<std::size_t>(i)] = all[order[static_cast<std::size_t>(i)]];
    if (order[static_cast<std::size_t>(i)] == 0) task.correct = i;
  }
  task.explanation = std::move(explanation);
  McqCheck check = validate_mcq(task);
  if (!check.ok)
    throw Error(std::string("generated ") + mcq_type_name(type) +
                " task failed validation: " + check.failure);
  return task;
}

// Distractor codes: mutants of `seed` failing `bad` (a predicate meaning the
// option would be correct), with pairwise-distinct printouts.
inline std::vector<McqOption> mutant_code_distractors(
    const Code& seed, Rng& rng, const std::function<bool(const Code&)>& correct_pred,
    std::set<std::string>& seen, int rounds = 200) {
  std::vector<McqOption> out;
  std::vector<Mutation> muts = enumerate_mutations(seed);
  rng.shuffle(muts);
  for (const Mutation& m : muts) {
    if (out.size() == 3) return out;
    try {
      Code cand = apply_mutation(seed, m);
      std::string text = print_code(cand);
      if (seen.count(text) || correct_pred(cand)) continue;
      seen.insert(text);
      out.push_back({text, std::move(cand)});
    } catch (const Error&) {
    }
  }
  // second-order mutants as a fallback when single edits keep solving
  for (int round = 0; round < rounds && out.size() < 3; ++round) {
    try {
      Code one = apply_mutation(seed, rng.pick(muts));
      std::vector<Mutation> second = enumerate_mutations(one);
      Code cand = apply_mutation(one, rng.pick(second));
      std::string text = print_code(cand);
      if (seen.count(text) || correct_pred(cand)) continue;
      seen.insert(text);
      out.push_back({text, std::move(cand)});
    } catch (const Error&) {
    }
  }
  if (out.size() != 3) throw Error("could not assemble three code distractors");
  return out;
}

inline McqTask gen_select_solution_code(const CodeGridPair& pair, Rng& rng) {
  const Grid& grid = rng.pick(pair.grids);
  std::set<std::string> seen{print_code(pair.code)};
  auto is_solving = [&](const Code& c) { return solves(c, grid); };
  std::vector<McqOption> distractors =
      mutant_code_distractors(pair.code, rng, is_solving, seen);
  McqOption correct{print_code(pair.code), pair.code};
  std::string explanation = render_explanation(run(pair.code, grid), pair.code);
  return finish_task(McqType::selectSolutionCode, std::nullopt, {grid}, std::nullopt, {},
                     std::nullopt, std::move(correct), std::move(distractors),
                     std::move(explanation), rng);
}

inline McqTask gen_which_grids_solved(const CodeGridPair& pair, Rng& rng) {
  constexpr int kShown = 4;
  int max_solved = std::min<int>(kShown, static_cast<int>(pair.grids.size()));
  unsigned mask = 0;
  do {
    mask = static_cast<unsigned>(rng.below(1u << kShown));
  } while (std::popcount(mask) > max_solved);

  std::vector<Grid> solved_pool = pair.grids;
  rng.shuffle(solved_pool);
  std::vector<Grid> shown(kShown);
  std::vector<int> correct_idx;
  std::set<std::string> distinct;
  std::size_t next_solved = 0;
  for (int i = 0; i < kShown; ++i)
    if (mask & (1u << i)) {
      shown[static_cast<std::size_t>(i)] = solved_pool[next_solved++];
      distinct.insert(serialize_grid(shown[static_cast<std::size_t>(i)]));
      correct_idx.push_back(i);
    }
  for (int i = 0; i < kShown; ++i) {
    if (mask & (1u << i)) continue;
    bool placed = false;
    for (int attempt = 0; attempt < 40 && !placed; ++attempt) {
      auto variant = unsolved_variant(pair.code, rng.pick(pair.grids), rng);
      if (!variant) continue;
      if (!distinct.insert(serialize_grid(*variant)).second) continue;
      shown[static_cast<std::size_t>(i)] = std::move(*variant);
      placed = true;
    }
    if (!placed) throw Error("could not assemble an unsolved grid variant");
  }

  McqOption correct{subset_text(correct_idx, kShown), correct_idx};
  std::vector<McqOption> distractors;
  std::set<unsigned> used{mask};
  while (distractors.size() < 3) {
    unsigned alt = static_cast<unsigned>(rng.below(1u << kShown));
    if (!used.insert(alt).second) continue;
    std::vector<int> idx;
    for (int i = 0; i < kShown; ++i)
      if (alt & (1u << i)) idx.push_back(i);
    distractors.push_back({subset_text(idx, kShown), idx});
  }
  const Grid& story = correct_idx.empty()
                          ? shown[0]
                          : shown[static_cast<std::size_t>(correct_idx.front())];
  std::string explanation = render_explanation(run(pair.code, story), pair.code);
  return finish_task(McqType::whichGridsSolved, pair.code, std::move(shown), std::nullopt,
                     {}, std::nullopt, std::move(correct), std::move(distractors),
                     std::move(explanation), rng);
}

inline McqTask gen_trace_cells_visited(const CodeGridPair& pair, Rng& rng) {
  const Grid& grid = rng.pick(pair.grids);
  ExecutionResult res = run(pair.code, grid);
  CellSet visited = visited_cells(res);
  std::vector<Cell> vis(visited.begin(), visited.end());
  std::vector<Cell> unvisited;
  for (int r = 0; r < grid.rows; ++r)
    for (int c = 0; c < grid.cols; ++c) {
      Cell cell{c, r};
      if (grid.is_clear(cell) && !visited.count(cell)) unvisited.push_back(cell);
    }

  int k = std::min<int>(static_cast<int>(vis.size()), rng.range(2, 4));
  if (static_cast<int>(unvisited.size()) < k)
    throw Error("insufficient unvisited free cells for distractors");

  auto draw = [&](const std::vector<Cell>& from) {
    std::vector<Cell> cells;
    for (std::size_t i : rng.sample_indices(from.size(), static_cast<std::size_t>(k)))
      cells.push_back(from[i]);
    return sorted_cells(std::move(cells));
  };

  std::vector<Cell> correct_cells = draw(vis);
  McqOption correct{cell_list_text(correct_cells), correct_cells};
  std::set<std::string> seen{correct.text};
  std::vector<McqOption> distractors;
  for (int attempt = 0; attempt < 200 && distractors.size() < 3; ++attempt) {
    std::vector<Cell> cells = draw(unvisited);
    std::string text = cell_list_text(cells);
    if (!seen.insert(text).second) continue;
    distractors.push_back({text, cells});
  }
  if (distractors.size() != 3)
    throw Error("insufficient unvisited free cells for distinct distractors");
  return finish_task(McqType::traceCellsVisited, pair.code, {grid}, std::nullopt, {},
                     std::nullopt, std::move(correct), std::move(distractors),
                     render_explanation(res, pair.code), rng);
}

inline McqTask gen_identify_bug(const CodeGridPair& pair, Rng& rng) {
  const Grid& grid = rng.pick(pair.grids);
  std::vector<Mutation> muts = enumerate_mutations(pair.code);
  rng.shuffle(muts);
  for (const Mutation& m : muts) {
    if (m.kind == MutationKind::deleteAction) continue;  // locus must be a block
    Code mutant;
    try {
      mutant = apply_mutation(pair.code, m);
    } catch (const Error&) {
      continue;
    }
    if (solves(mutant, grid)) continue;
    if (!locus_repairable(mutant, m.path, grid)) continue;

    std::vector<BlockPath> paths = collect_block_paths(mutant);
    rng.shuffle(paths);
    std::vector<McqOption> distractors;
    for (const BlockPath& p : paths) {
      if (distractors.size() == 3) break;
      if (p == m.path) continue;
      if (locus_repairable(mutant, p, grid)) continue;
      distractors.push_back({describe_locus(mutant, p), p});
    }
    if (distractors.size() != 3) continue;

    McqOption correct{describe_locus(mutant, m.path), m.path};
    std::string explanation = render_explanation(run(pair.code, grid), pair.code);
    return finish_task(McqType::identifyBug, std::move(mutant), {grid}, std::nullopt, {},
                       std::nullopt, std::move(correct), std::move(distractors),
                       std::move(explanation), rng);
  }
  throw Error("identifyBug: no suitable bug found for this pair");
}

inline McqTask gen_repair_bug(const CodeGridPair& pair, Rng& rng) {
  const Grid& grid = rng.pick(pair.grids);
  std::vector<Mutation> muts = enumerate_mutations(pair.code);
  rng.shuffle(muts);
  for (const Mutation& m : muts) {
    Code mutant;
    try {
      mutant = apply_mutation(pair.code, m);
    } catch (const Error&) {
      continue;
    }
    if (solves(mutant, grid)) continue;
    Mutation fix = reverse_mutation(m);
    try {
      if (!solves(apply_mutation(mutant, fix), grid)) continue;
    } catch (const Error&) {
      continue;
    }

    McqOption correct{describe_mutation(mutant, fix), fix};
    std::set<std::string> seen{correct.text};
    std::vector<Mutation> repairs = enumerate_mutations(mutant);
    rng.shuffle(repairs);
    std::vector<McqOption> distractors;
    for (const Mutation& r : repairs) {
      if (distractors.size() == 3) break;
      if (r == fix) continue;
      try {
        if (solves(apply_mutation(mutant, r), grid)) continue;
      } catch (const Error&) {
        continue;
      }
      std::string text = describe_mutation(mutant, r);
      if (!seen.insert(text).second) continue;
      distractors.push_back({text, r});
    }
    if (distractors.size() != 3) continue;

    std::string explanation = render_explanation(run(pair.code, grid), pair.code);
    return finish_task(McqType::repairBug, std::move(mutant), {grid}, std::nullopt, {},
                       std::nullopt, std::move(correct), std::move(distractors),
                       std::move(explanation), rng);
  }
  throw Error("repairBug: no suitable bug found for this pair");
}

inline McqTask gen_code_equiv(McqType type, const CodeGridPair& pair, Rng& rng,
                              const McqGenOptions& opts) {
  std::vector<Grid> panel;
  if (type == McqType::codeEquivWithGrid) {
    panel = {rng.pick(pair.grids)};
  } else {
    Rng probe_rng(rng.next_u64());
    panel = synthesize_grids(pair.code, opts.probe_panel, probe_rng, opts.probe_synth);
  }
  std::vector<ExecutionResult> refs;
  for (const Grid& g : panel) refs.push_back(run(pair.code, g));
  auto equivalent = [&](const Code& cand) {
    for (std::size_t i = 0; i < panel.size(); ++i)
      if (!traces_equivalent(refs[i], run(cand, panel[i]))) return false;
    return true;
  };

  std::vector<Code> rewrites = equivalence_rewrites(pair.code);
  rng.shuffle(rewrites);
  const Code* chosen = nullptr;
  for (const Code& rw : rewrites)
    if (equivalent(rw)) {
      chosen = &rw;
      break;
    }
  if (!chosen) throw Error("no behavior-preserving rewrite available for this code");

  std::set<std::string> seen{print_code(*chosen), print_code(pair.code)};
  std::vector<McqOption> distractors =
      mutant_code_distractors(pair.code, rng, equivalent, seen);
  McqOption correct{print_code(*chosen), *chosen};
  std::string explanation = render_explanation(refs[0], pair.code);
  std::vector<Grid> shown = type == McqType::codeEquivWithGrid ? panel : std::vector<Grid>{};
  std::vector<Grid> probes = type == McqType::codeEquivNoGrid ? panel : std::vector<Grid>{};
  return finish_task(type, pair.code, std::move(shown), std::nullopt, std::move(probes),
                     std::nullopt, std::move(correct), std::move(distractors),
                     std::move(explanation), rng);
}

inline McqTask gen_place_avatar(const CodeGridPair& pair, Rng& rng) {
  const Grid& full = rng.pick(pair.grids);
  if (!full.avatar) throw Error("placeAvatar: grid has no avatar");
  Grid base = full;
  base.avatar.reset();
  IncompleteGrid incomplete{base, true, false, 0};

  static constexpr std::array<Orientation, 4> kDirs = {
      Orientation::north, Orientation::east, Orientation::south, Orientation::west};
  std::vector<Pose> candidates;
  for (int r = 0; r < base.rows; ++r)
    for (int c = 0; c < base.cols; ++c) {
      Cell cell{c, r};
      if (!base.is_clear(cell) || base.marker_count(cell) > 0) continue;
      for (Orientation o : kDirs)
        if (!(Pose{cell, o} == *full.avatar)) candidates.push_back({cell, o});
    }
  rng.shuffle(candidates);
  std::vector<McqOption> distractors;
  for (const Pose& p : candidates) {
    if (distractors.size() == 3) break;
    if (placement_solves(pair.code, with_avatar(base, p))) continue;
    distractors.push_back({pose_phrase(p), p});
  }
  if (distractors.size() != 3) throw Error("placeAvatar: not enough failing placements");

  McqOption correct{pose_phrase(*full.avatar), *full.avatar};
  std::string explanation = render_explanation(run(pair.code, full), pair.code);
  return finish_task(McqType::placeAvatar, pair.code, {}, std::move(incomplete), {},
                     std::nullopt, std::move(correct), std::move(distractors),
                     std::move(explanation), rng);
}

inline McqTask gen_place_goal(const CodeGridPair& pair, Rng& rng) {
  const Grid& full = rng.pick(pair.grids);
  if (!full.goal) throw Error("placeGoal: grid has no goal");
  Grid base = full;
  base.goal.reset();
  IncompleteGrid incomplete{base, false, true, 0};

  std::vector<Cell> candidates;
  for (int r = 0; r < base.rows; ++r)
    for (int c = 0; c < base.cols; ++c) {
      Cell cell{c, r};
      if (base.is_clear(cell) && base.marker_count(cell) == 0 && cell != *full.goal)
        candidates.push_back(cell);
    }
  rng.shuffle(candidates);
  std::vector<McqOption> distractors;
  for (const Cell& cell : candidates) {
    if (distractors.size() == 3) break;
    if (placement_solves(pair.code, with_goal(base, cell))) continue;
    distractors.push_back({cell_name(cell), cell});
  }
  if (distractors.size() != 3) throw Error("placeGoal: not enough failing placements");

  McqOption correct{cell_name(*full.goal), *full.goal};
  std::string explanation = render_explanation(run(pair.code, full), pair.code);
  return finish_task(McqType::placeGoal, pair.code, {}, std::move(incomplete), {},
                     std::nullopt, std::move(correct), std::move(distractors),
                     std::move(explanation), rng);
}

inline McqTask gen_count_positions(McqType type, const CodeGridPair& pair, Rng& rng) {
  const Grid& full = rng.pick(pair.grids);
  if (type == McqType::countAvatarPositions && !full.avatar)
    throw Error("countAvatarPositions: grid has no avatar");
  if (type == McqType::countGoalPositions && !full.goal)
    throw Error("countGoalPositions: grid has no goal");
  Grid base = full;
  int count = 0;
  IncompleteGrid incomplete;
  if (type == McqType::countAvatarPositions) {
    base.avatar.reset();
    incomplete = {base, true, false, 0};
    count = static_cast<int>(solving_avatar_poses(pair.code, base).size());
  } else {
    base.goal.reset();
    incomplete = {base, false, true, 0};
    count = static_cast<int>(solving_goal_cells(pair.code, base).size());
  }
  McqOption correct{std::to_string(count), count};
  std::vector<McqOption> distractors;
  for (int v : arithmetic_distractors(count, rng))
    distractors.push_back({std::to_string(v), v});
  std::string explanation = render_explanation(run(pair.code, full), pair.code);
  return finish_task(type, pair.code, {}, std::move(incomplete), {}, std::nullopt,
                     std::move(correct), std::move(distractors), std::move(explanation),
                     rng);
}

inline McqTask gen_place_walls(const CodeGridPair& pair, Rng& rng) {
  const Grid& full = rng.pick(pair.grids);
  if (full.walls.empty()) throw Error("placeWalls: grid has no walls");
  int k = rng.range(1, std::min<int>(3, static_cast<int>(full.walls.size())));
  std::vector<Cell> walls(full.walls.begin(), full.walls.end());
  rng.shuffle(walls);
  CellSet removed(walls.begin(), walls.begin() + k);
  Grid base = full;
  for (const Cell& w : removed) base.walls.erase(w);
  IncompleteGrid incomplete{base, false, false, k};

  std::vector<Cell> spots;
  for (int r = 0; r < base.rows; ++r)
    for (int c = 0; c < base.cols; ++c) {
      Cell cell{c, r};
      if (!base.is_clear(cell) || base.marker_count(cell) > 0) continue;
      if (base.avatar && cell == base.avatar->cell) continue;
      if (base.goal && cell == *base.goal) continue;
      spots.push_back(cell);
    }
  if (static_cast<int>(spots.size()) < k)
    throw Error("placeWalls: not enough free cells");

  McqOption correct{cell_set_text(removed), removed};
  std::set<std::string> seen{correct.text};
  std::vector<McqOption> distractors;
  for (int attempt = 0; attempt < 300 && distractors.size() < 3; ++attempt) {
    CellSet cand;
    for (std::size_t i :
         rng.sample_indices(spots.size(), static_cast<std::size_t>(k)))
      cand.insert(spots[i]);
    std::string text = cell_set_text(cand);
    if (seen.count(text)) continue;
    if (placement_solves(pair.code, with_walls(base, cand))) continue;
    seen.insert(text);
    distractors.push_back({text, cand});
  }
  if (distractors.size() != 3) throw Error("placeWalls: not enough failing wall sets");

  std::string explanation = render_explanation(run(pair.code, full), pair.code);
  return finish_task(McqType::placeWalls, pair.code, {}, std::move(incomplete), {},
                     std::nullopt, std::move(correct), std::move(distractors),
                     std::move(explanation), rng);
}

inline McqTask gen_count_min_walls(const CodeGridPair& pair, Rng& rng,
                                   const McqGenOptions& opts) {
  for (int attempt = 0; attempt < opts.retries; ++attempt) {
    const Grid& full = rng.pick(pair.grids);
    if (full.walls.empty()) continue;
    std::vector<Cell> walls(full.walls.begin(), full.walls.end());
    int k = rng.range(1, std::min<int>(3, static_cast<int>(walls.size())));
    rng.shuffle(walls);
    CellSet removed(walls.begin(), walls.begin() + k);
    Grid base = full;
    for (const Cell& w : removed) base.walls.erase(w);
    if (solves(pair.code, base)) continue;  // the removal has to matter
    if (smaller_addition_solves(pair.code, base, k)) continue;

    McqOption correct{std::to_string(k), k};
    std::vector<McqOption> distractors;
    for (int v : arithmetic_distractors(k, rng))
      distractors.push_back({std::to_string(v), v});
    IncompleteGrid incomplete{base, false, false, k};
    std::string explanation = render_explanation(run(pair.code, full), pair.code);
    return finish_task(McqType::countMinWalls, pair.code, {}, std::move(incomplete), {},
                       removed, std::move(correct), std::move(distractors),
                       std::move(explanation), rng);
  }
  throw Error("countMinWalls: no wall removal with a clean minimum found");
}

}  // namespace detail

inline McqTask gen_mcq(McqType type, const CodeGridPair& pair, Rng& rng,
                       const McqGenOptions& opts = {}) {
  switch (type) {
    case McqType::selectSolutionCode: return detail::gen_select_solution_code(pair, rng);
    case McqType::whichGridsSolved: return detail::gen_which_grids_solved(pair, rng);
    case McqType::traceCellsVisited: return detail::gen_trace_cells_visited(pair, rng);
    case McqType::identifyBug: return detail::gen_identify_bug(pair, rng);
    case McqType::repairBug: return detail::gen_repair_bug(pair, rng);
    case McqType::codeEquivNoGrid:
    case McqType::codeEquivWithGrid: return detail::gen_code_equiv(type, pair, rng, opts);
    case McqType::placeAvatar: return detail::gen_place_avatar(pair, rng);
    case McqType::placeGoal: return detail::gen_place_goal(pair, rng);
    case McqType::countAvatarPositions:
    case McqType::countGoalPositions: return detail::gen_count_positions(type, pair, rng);
    case McqType::placeWalls: return detail::gen_place_walls(pair, rng);
    case McqType::countMinWalls: return detail::gen_count_min_walls(pair, rng, opts);
  }
  throw Error("unknown MCQ type");
}

inline McqTask gen_analyzing(McqType type, const CodeGridPair& pair, Rng& rng,
                             const McqGenOptions& opts = {}) {
  if (mcq_level(type) != McqLevel::analyzing)
    throw Error("not an analyzing-level task type");
  return gen_mcq(type, pair, rng, opts);
}

inline McqTask gen_evaluating(McqType type, const CodeGridPair& pair, Rng& rng,
                              const McqGenOptions& opts = {}) {
  if (mcq_level(type) != McqLevel::evaluating)
    throw Error("not an evaluating-level task type");
  return gen_mcq(type, pair, rng, opts);
}

inline McqTask gen_creating(McqType type, const CodeGridPair& pair, Rng& rng,
                            const McqGenOptions& opts = {}) {
  if (mcq_level(type) != McqLevel::creating)
    throw Error("not a creating-level task type");
  return gen_mcq(type, pair, rng, opts);
}

// ---------------------------------------------------------------------------
// Prompt rendering: description, code, grid text(s), options A)..D).
// ---------------------------------------------------------------------------

inline std::string render_mcq_prompt(const McqTask& task) {
  std::string out = task.description;
  out += "\n";
  if (task.given_code) {
    out += "\ncode:\n" + print_code(*task.given_code) + "\n";
  }
  if (task.given_incomplete) {
    out += "\ngrid:\n" + serialize_grid(task.given_incomplete->grid);
    if (task.given_incomplete->missing_walls > 0)
      out += "(" + std::to_string(task.given_incomplete->missing_walls) +
             " wall(s) missing)\n";
  } else if (task.given_grids.size() == 1) {
    out += "\ngrid:\n" + serialize_grid(task.given_grids[0]);
  } else {
    for (std::size_t i = 0; i < task.given_grids.size(); ++i)
      out += "\ngrid " + std::to_string(i + 1) + ":\n" +
             serialize_grid(task.given_grids[i]);
  }
  out += "\n";
  for (int i = 0; i < 4; ++i) {
    out += std::string(1, mcq_label(i)) + ") " +
           task.options[static_cast<std::size_t>(i)].text + "\n";
  }
  return out;
}

}  // namespace vpkit
