#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vpkit {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Cells, orientations, poses
// ---------------------------------------------------------------------------

enum class Orientation { north, east, south, west };

inline const char* orientation_name(Orientation o) {
  switch (o) {
    case Orientation::north: return "north";
    case Orientation::east: return "east";
    case Orientation::south: return "south";
    case Orientation::west: return "west";
  }
  return "?";
}

inline std::optional<Orientation> orientation_from_name(std::string_view s) {
  if (s == "north") return Orientation::north;
  if (s == "east") return Orientation::east;
  if (s == "south") return Orientation::south;
  if (s == "west") return Orientation::west;
  return std::nullopt;
}

inline Orientation turned_left(Orientation o) {
  switch (o) {
    case Orientation::north: return Orientation::west;
    case Orientation::west: return Orientation::south;
    case Orientation::south: return Orientation::east;
    case Orientation::east: return Orientation::north;
  }
  return o;
}

inline Orientation turned_right(Orientation o) {
  switch (o) {
    case Orientation::north: return Orientation::east;
    case Orientation::east: return Orientation::south;
    case Orientation::south: return Orientation::west;
    case Orientation::west: return Orientation::north;
  }
  return o;
}

// col 0 is column 'a' (west edge), row 0 is row 1 (north edge). Rows grow
// southward, columns grow eastward, so "a1" is the north-west corner.
struct Cell {
  int col = 0;
  int row = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// Ordering for display and for deterministic set iteration: row-major.
struct CellRowMajor {
  bool operator()(const Cell& a, const Cell& b) const {
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
  }
};

using CellSet = std::set<Cell, CellRowMajor>;

inline Cell neighbor(Cell c, Orientation o) {
  switch (o) {
    case Orientation::north: return {c.col, c.row - 1};
    case Orientation::east: return {c.col + 1, c.row};
    case Orientation::south: return {c.col, c.row + 1};
    case Orientation::west: return {c.col - 1, c.row};
  }
  return c;
}

inline std::string cell_name(Cell c) {
  std::string out;
  out += static_cast<char>('a' + c.col);
  out += std::to_string(c.row + 1);
  return out;
}

inline std::optional<Cell> cell_from_name(std::string_view s) {
  if (s.size() < 2 || s[0] < 'a' || s[0] > 'z') return std::nullopt;
  int col = s[0] - 'a';
  int row = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
    row = row * 10 + (s[i] - '0');
    if (row > 26) return std::nullopt;
  }
  if (row < 1) return std::nullopt;
  return Cell{col, row - 1};
}

struct Pose {
  Cell cell;
  Orientation dir = Orientation::north;
  friend bool operator==(const Pose&, const Pose&) = default;
};

// "g2:west" -- trace token format.
inline std::string pose_token(const Pose& p) {
  return cell_name(p.cell) + ":" + orientation_name(p.dir);
}

// "g2 facing west" -- prose format.
inline std::string pose_phrase(const Pose& p) {
  return cell_name(p.cell) + " facing " + orientation_name(p.dir);
}

inline std::optional<Pose> pose_from_token(std::string_view s) {
  auto colon = s.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  auto cell = cell_from_name(s.substr(0, colon));
  auto dir = orientation_from_name(s.substr(colon + 1));
  if (!cell || !dir) return std::nullopt;
  return Pose{*cell, *dir};
}

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

constexpr int kMaxGridDim = 26;  // cell names only go up to z26

struct Grid {
  int rows = 0;
  int cols = 0;
  CellSet walls;
  std::optional<Cell> goal;
  std::map<Cell, int, CellRowMajor> markers;  // cell -> count (1..9)
  std::optional<Pose> avatar;

  bool in_bounds(Cell c) const {
    return c.col >= 0 && c.col < cols && c.row >= 0 && c.row < rows;
  }
  bool is_wall(Cell c) const { return walls.count(c) != 0; }
  // A cell the avatar may occupy or move into.
  bool is_clear(Cell c) const { return in_bounds(c) && !is_wall(c); }
  int marker_count(Cell c) const {
    auto it = markers.find(c);
    return it == markers.end() ? 0 : it->second;
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

// Throws GridError when an invariant is broken.
inline void validate_grid(const Grid& g) {
  if (g.rows < 1 || g.cols < 1 || g.rows > kMaxGridDim || g.cols > kMaxGridDim)
    throw GridError("grid dimensions must be within 1x1..26x26");
  for (const Cell& w : g.walls)
    if (!g.in_bounds(w)) throw GridError("wall out of bounds at " + cell_name(w));
  if (g.goal) {
    if (!g.in_bounds(*g.goal)) throw GridError("goal out of bounds");
    if (g.is_wall(*g.goal)) throw GridError("goal on a wall at " + cell_name(*g.goal));
  }
  for (auto& [cell, count] : g.markers) {
    if (!g.in_bounds(cell)) throw GridError("marker out of bounds at " + cell_name(cell));
    if (g.is_wall(cell)) throw GridError("marker on a wall at " + cell_name(cell));
    if (count < 1 || count > 9)
      throw GridError("marker count out of range at " + cell_name(cell));
    // Static grids keep markers on cells of their own so every grid has an
    // unambiguous one-character-per-cell rendering (runtime marker state
    // inside the emulator may overlap the avatar freely).
    if (g.goal && *g.goal == cell)
      throw GridError("marker on the goal cell at " + cell_name(cell));
    if (g.avatar && g.avatar->cell == cell)
      throw GridError("avatar starts on a marker cell at " + cell_name(cell));
  }
  if (g.avatar) {
    if (!g.in_bounds(g.avatar->cell)) throw GridError("avatar out of bounds");
    if (g.is_wall(g.avatar->cell))
      throw GridError("avatar on a wall at " + cell_name(g.avatar->cell));
  }
}

// ---------------------------------------------------------------------------
// Text codec
//
// Line 1: "<rows> <cols>" plus, when the avatar overlaps the goal, the
// avatar's orientation ('+' marks the shared cell). Then rows x cols
// characters: '#' wall, '.' free, '*' goal, 'm' marker (digits 2-9 for
// stacked markers), '^' '>' 'v' '<' avatar, '+' avatar-on-goal.
// ---------------------------------------------------------------------------

inline char avatar_char(Orientation o) {
  switch (o) {
    case Orientation::north: return '^';
    case Orientation::east: return '>';
    case Orientation::south: return 'v';
    case Orientation::west: return '<';
  }
  return '?';
}

inline std::string serialize_grid(const Grid& g) {
  validate_grid(g);
  std::string header = std::to_string(g.rows) + " " + std::to_string(g.cols);
  bool avatar_on_goal = g.avatar && g.goal && g.avatar->cell == *g.goal;
  if (avatar_on_goal) header += std::string(" ") + orientation_name(g.avatar->dir);
  std::string out = header + "\n";
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      Cell cell{c, r};
      char ch = '.';
      if (g.is_wall(cell)) {
        ch = '#';
      } else if (g.avatar && g.avatar->cell == cell) {
        ch = avatar_on_goal && cell == *g.goal ? '+' : avatar_char(g.avatar->dir);
      } else if (g.goal && *g.goal == cell) {
        ch = '*';
      } else if (int n = g.marker_count(cell); n > 0) {
        ch = n == 1 ? 'm' : static_cast<char>('0' + n);
      }
      out += ch;
    }
    out += '\n';
  }
  return out;
}

inline Grid parse_grid(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::string cur;
    for (char ch : text) {
      if (ch == '\n') {
        lines.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur += ch;
      }
    }
    if (!cur.empty()) lines.push_back(cur);
  }
  // Drop trailing blank lines, keep interior ones illegal.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw GridError("empty grid text");

  std::istringstream header(lines[0]);
  int rows = 0, cols = 0;
  if (!(header >> rows >> cols)) throw GridError("bad grid header: " + lines[0]);
  std::string overlap_token;
  header >> overlap_token;  // optional
  std::string trailing;
  if (header >> trailing) throw GridError("bad grid header: " + lines[0]);
  if (rows < 1 || cols < 1 || rows > kMaxGridDim || cols > kMaxGridDim)
    throw GridError("grid dimensions must be within 1x1..26x26");
  if (static_cast<int>(lines.size()) - 1 != rows)
    throw GridError("expected " + std::to_string(rows) + " grid rows, got " +
                    std::to_string(static_cast<int>(lines.size()) - 1));

  Grid g;
  g.rows = rows;
  g.cols = cols;
  std::optional<Orientation> overlap_dir;  // avatar orientation for a '+' cell
  if (!overlap_token.empty()) {
    overlap_dir = orientation_from_name(overlap_token);
    if (!overlap_dir) throw GridError("bad header token: " + overlap_token);
  }

  bool saw_plus = false;
  for (int r = 0; r < rows; ++r) {
    const std::string& line = lines[static_cast<std::size_t>(r) + 1];
    if (static_cast<int>(line.size()) != cols)
      throw GridError("ragged row " + std::to_string(r + 1) + ": expected " +
                      std::to_string(cols) + " cells, got " +
                      std::to_string(line.size()));
    for (int c = 0; c < cols; ++c) {
      Cell cell{c, r};
      char ch = line[static_cast<std::size_t>(c)];
      switch (ch) {
        case '.': break;
        case '#': g.walls.insert(cell); break;
        case '*':
          if (g.goal) throw GridError("duplicate goal at " + cell_name(cell));
          g.goal = cell;
          break;
        case 'm': g.markers[cell] = 1; break;
        case '2': case '3': case '4': case '5': case '6': case '7': case '8':
        case '9': g.markers[cell] = ch - '0'; break;
        case '^': case '>': case 'v': case '<': {
          if (g.avatar) throw GridError("duplicate avatar at " + cell_name(cell));
          Orientation dir = ch == '^' ? Orientation::north
                          : ch == '>' ? Orientation::east
                          : ch == 'v' ? Orientation::south
                                      : Orientation::west;
          g.avatar = Pose{cell, dir};
          break;
        }
        case '+': {
          if (g.avatar) throw GridError("duplicate avatar at " + cell_name(cell));
          if (g.goal) throw GridError("duplicate goal at " + cell_name(cell));
          if (!overlap_dir)
            throw GridError("'+' cell needs an orientation in the header");
          saw_plus = true;
          g.goal = cell;
          g.avatar = Pose{cell, *overlap_dir};
          break;
        }
        default:
          throw GridError(std::string("unknown cell character '") + ch +
                          "' at " + cell_name(cell));
      }
    }
  }
  if (overlap_dir && !saw_plus)
    throw GridError("header orientation given but no '+' cell present");
  validate_grid(g);
  return g;
}

// ---------------------------------------------------------------------------
// Natural-language rendering (used in prompts) and its inverse.
// "grid 2x2; avatar at a1 facing east; goal at b1; walls: none; markers: none"
// ---------------------------------------------------------------------------

inline std::string describe_grid(const Grid& g) {
  validate_grid(g);
  std::ostringstream out;
  out << "grid " << g.rows << "x" << g.cols;
  if (g.avatar)
    out << "; avatar at " << cell_name(g.avatar->cell) << " facing "
        << orientation_name(g.avatar->dir);
  else
    out << "; avatar: none";
  if (g.goal)
    out << "; goal at " << cell_name(*g.goal);
  else
    out << "; goal: none";
  out << "; walls: ";
  if (g.walls.empty()) {
    out << "none";
  } else {
    bool first = true;
    for (const Cell& w : g.walls) {
      if (!first) out << ", ";
      out << cell_name(w);
      first = false;
    }
  }
  out << "; markers: ";
  if (g.markers.empty()) {
    out << "none";
  } else {
    bool first = true;
    for (auto& [cell, count] : g.markers) {
      if (!first) out << ", ";
      out << cell_name(cell);
      if (count > 1) out << " x" << count;
      first = false;
    }
  }
  return out.str();
}

namespace detail {

inline std::vector<std::string> split(std::string_view s, std::string_view sep) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      parts.emplace_back(s.substr(pos));
      return parts;
    }
    parts.emplace_back(s.substr(pos, next - pos));
    pos = next + sep.size();
  }
}

inline std::string strip(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\n' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\n' ||
                   s[e - 1] == '\r'))
    --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace detail

inline Grid parse_grid_description(std::string_view text) {
  Grid g;
  auto segments = detail::split(detail::strip(text), "; ");
  if (segments.empty() || segments[0].rfind("grid ", 0) != 0)
    throw GridError("grid description must start with 'grid RxC'");
  {
    auto dims = detail::split(segments[0].substr(5), "x");
    if (dims.size() != 2) throw GridError("bad grid dimensions: " + segments[0]);
    try {
      g.rows = std::stoi(dims[0]);
      g.cols = std::stoi(dims[1]);
    } catch (const std::exception&) {
      throw GridError("bad grid dimensions: " + segments[0]);
    }
  }
  bool saw_avatar = false, saw_goal = false, saw_walls = false, saw_markers = false;
  for (std::size_t i = 1; i < segments.size(); ++i) {
    const std::string& seg = segments[i];
    if (seg == "avatar: none") {
      saw_avatar = true;
      continue;
    }
    if (seg == "goal: none") {
      saw_goal = true;
      continue;
    }
    if (seg.rfind("avatar at ", 0) == 0) {
      saw_avatar = true;
      auto words = detail::split(seg.substr(10), " ");
      if (words.size() != 3 || words[1] != "facing")
        throw GridError("bad avatar clause: " + seg);
      auto cell = cell_from_name(words[0]);
      auto dir = orientation_from_name(words[2]);
      if (!cell || !dir) throw GridError("bad avatar clause: " + seg);
      g.avatar = Pose{*cell, *dir};
    } else if (seg.rfind("goal at ", 0) == 0) {
      saw_goal = true;
      auto cell = cell_from_name(seg.substr(8));
      if (!cell) throw GridError("bad goal clause: " + seg);
      g.goal = *cell;
    } else if (seg.rfind("walls: ", 0) == 0) {
      saw_walls = true;
      std::string rest = seg.substr(7);
      if (rest != "none") {
        for (const std::string& name : detail::split(rest, ", ")) {
          auto cell = cell_from_name(detail::strip(name));
          if (!cell) throw GridError("bad wall cell: " + name);
          g.walls.insert(*cell);
        }
      }
    } else if (seg.rfind("markers: ", 0) == 0) {
      saw_markers = true;
      std::string rest = seg.substr(9);
      if (rest != "none") {
        for (const std::string& item : detail::split(rest, ", ")) {
          auto words = detail::split(detail::strip(item), " ");
          if (words.empty() || words.size() > 2)
            throw GridError("bad marker clause: " + item);
          auto cell = cell_from_name(words[0]);
          if (!cell) throw GridError("bad marker cell: " + item);
          int count = 1;
          if (words.size() == 2) {
            if (words[1].size() < 2 || words[1][0] != 'x')
              throw GridError("bad marker count: " + item);
            try {
              count = std::stoi(words[1].substr(1));
            } catch (const std::exception&) {
              throw GridError("bad marker count: " + item);
            }
          }
          g.markers[*cell] = count;
        }
      }
    } else {
      throw GridError("unrecognized grid description clause: " + seg);
    }
  }
  if (!saw_avatar || !saw_goal || !saw_walls || !saw_markers)
    throw GridError("grid description is missing a section");
  validate_grid(g);
  return g;
}

// ---------------------------------------------------------------------------
// Incomplete grids: a grid with named elements deliberately absent, used by
// the grid-synthesis style tasks ("place the avatar so the code solves it").
// ---------------------------------------------------------------------------

struct IncompleteGrid {
  Grid grid;
  bool missing_avatar = false;
  bool missing_goal = false;
  // Number of walls removed (the removed cells themselves are not disclosed).
  int missing_walls = 0;

  friend bool operator==(const IncompleteGrid&, const IncompleteGrid&) = default;
};

inline void validate_incomplete(const IncompleteGrid& ig) {
  validate_grid(ig.grid);
  if (ig.missing_avatar && ig.grid.avatar)
    throw GridError("grid marked avatar-missing but has an avatar");
  if (ig.missing_goal && ig.grid.goal)
    throw GridError("grid marked goal-missing but has a goal");
  if (ig.missing_walls < 0) throw GridError("negative missing wall count");
  if (!ig.missing_avatar && !ig.grid.avatar)
    throw GridError("grid has no avatar and is not marked avatar-missing");
}

}  // namespace vpkit
