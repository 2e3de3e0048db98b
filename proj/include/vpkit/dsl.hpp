#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vpkit/grid.hpp"  // Error
#include "vpkit/rng.hpp"

namespace vpkit {

// ---------------------------------------------------------------------------
// Block vocabulary
// ---------------------------------------------------------------------------

enum class ActionKind { move, turnLeft, turnRight, pickMarker, putMarker };

constexpr ActionKind kAllActions[] = {ActionKind::move, ActionKind::turnLeft,
                                      ActionKind::turnRight, ActionKind::pickMarker,
                                      ActionKind::putMarker};

inline const char* action_name(ActionKind a) {
  switch (a) {
    case ActionKind::move: return "move";
    case ActionKind::turnLeft: return "turnLeft";
    case ActionKind::turnRight: return "turnRight";
    case ActionKind::pickMarker: return "pickMarker";
    case ActionKind::putMarker: return "putMarker";
  }
  return "?";
}

inline std::optional<ActionKind> action_from_name(std::string_view s) {
  for (ActionKind a : kAllActions)
    if (s == action_name(a)) return a;
  return std::nullopt;
}

enum class ConditionKind { goal, pathAhead, leftIsClear, rightIsClear, markersPresent };

inline const char* condition_keyword(ConditionKind c) {
  switch (c) {
    case ConditionKind::goal: return "goal";
    case ConditionKind::pathAhead: return "pathAhead";
    case ConditionKind::leftIsClear: return "leftIsClear";
    case ConditionKind::rightIsClear: return "rightIsClear";
    case ConditionKind::markersPresent: return "markersPresent";
  }
  return "?";
}

inline std::optional<ConditionKind> condition_from_keyword(std::string_view s) {
  for (ConditionKind c : {ConditionKind::goal, ConditionKind::pathAhead,
                          ConditionKind::leftIsClear, ConditionKind::rightIsClear,
                          ConditionKind::markersPresent})
    if (s == condition_keyword(c)) return c;
  return std::nullopt;
}

// `goal` is a loop-termination condition and is never negated.
struct Condition {
  ConditionKind kind = ConditionKind::goal;
  bool negated = false;
  friend bool operator==(const Condition&, const Condition&) = default;
};

inline std::string condition_text(const Condition& c) {
  return (c.negated ? std::string("not ") : std::string()) + condition_keyword(c.kind);
}

// ---------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------

struct Block;
using BlockList = std::vector<Block>;

struct ActionBlock {
  ActionKind action{};
  friend bool operator==(const ActionBlock&, const ActionBlock&) = default;
};
struct RepeatBlock {
  int count = 1;
  BlockList body;
  friend bool operator==(const RepeatBlock&, const RepeatBlock&) = default;
};
struct RepeatUntilBlock {
  Condition cond;
  BlockList body;
  friend bool operator==(const RepeatUntilBlock&, const RepeatUntilBlock&) = default;
};
struct WhileBlock {
  Condition cond;
  BlockList body;
  friend bool operator==(const WhileBlock&, const WhileBlock&) = default;
};
struct IfBlock {
  Condition cond;
  BlockList body;
  friend bool operator==(const IfBlock&, const IfBlock&) = default;
};
struct IfElseBlock {
  Condition cond;
  BlockList then_body;
  BlockList else_body;
  friend bool operator==(const IfElseBlock&, const IfElseBlock&) = default;
};

struct Block {
  std::variant<ActionBlock, RepeatBlock, RepeatUntilBlock, WhileBlock, IfBlock,
               IfElseBlock>
      node;
  friend bool operator==(const Block&, const Block&) = default;
};

struct Code {
  BlockList body;
  friend bool operator==(const Code&, const Code&) = default;
};

template <class... Ts>
struct Overload : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overload(Ts...) -> Overload<Ts...>;

inline Block make_action(ActionKind a) { return Block{ActionBlock{a}}; }

inline bool is_action(const Block& b) {
  return std::holds_alternative<ActionBlock>(b.node);
}
inline bool is_turn(const Block& b) {
  auto* a = std::get_if<ActionBlock>(&b.node);
  return a && (a->action == ActionKind::turnLeft || a->action == ActionKind::turnRight);
}

// Display names used by metrics, stores and prompts. Actions keep their
// lowercase keyword; control constructs are capitalized.
inline std::string block_display_name(const Block& b) {
  return std::visit(
      Overload{[](const ActionBlock& a) { return std::string(action_name(a.action)); },
               [](const RepeatBlock&) { return std::string("Repeat"); },
               [](const RepeatUntilBlock&) { return std::string("RepeatUntil"); },
               [](const WhileBlock&) { return std::string("While"); },
               [](const IfBlock&) { return std::string("If"); },
               [](const IfElseBlock&) { return std::string("IfElse"); }},
      b.node);
}

struct DslLimits {
  int max_depth = 3;     // control-construct nesting
  int max_body_len = 8;  // generation-side bound on blocks per body
};

// ---------------------------------------------------------------------------
// Validation of programmatically built codes (the parser applies the same
// rules as it reads).
// ---------------------------------------------------------------------------

namespace detail {

inline void validate_block(const Block& b, int depth, const DslLimits& limits);

inline void validate_body(const BlockList& body, int depth, const DslLimits& limits) {
  if (body.empty()) throw Error("empty body");
  for (const Block& b : body) validate_block(b, depth, limits);
}

inline void validate_cond(const Condition& c, bool in_repeat_until) {
  if (c.kind == ConditionKind::goal) {
    if (c.negated) throw Error("'goal' cannot be negated");
    if (!in_repeat_until) throw Error("'goal' is only allowed in repeatUntil");
  }
}

inline void validate_block(const Block& b, int depth, const DslLimits& limits) {
  std::visit(Overload{[&](const ActionBlock&) {},
                      [&](const RepeatBlock& r) {
                        if (depth + 1 > limits.max_depth) throw Error("nesting too deep");
                        if (r.count < 1) throw Error("repeat count must be >= 1");
                        validate_body(r.body, depth + 1, limits);
                      },
                      [&](const RepeatUntilBlock& r) {
                        if (depth + 1 > limits.max_depth) throw Error("nesting too deep");
                        validate_cond(r.cond, true);
                        validate_body(r.body, depth + 1, limits);
                      },
                      [&](const WhileBlock& w) {
                        if (depth + 1 > limits.max_depth) throw Error("nesting too deep");
                        validate_cond(w.cond, false);
                        validate_body(w.body, depth + 1, limits);
                      },
                      [&](const IfBlock& i) {
                        if (depth + 1 > limits.max_depth) throw Error("nesting too deep");
                        validate_cond(i.cond, false);
                        validate_body(i.body, depth + 1, limits);
                      },
                      [&](const IfElseBlock& i) {
                        if (depth + 1 > limits.max_depth) throw Error("nesting too deep");
                        validate_cond(i.cond, false);
                        validate_body(i.then_body, depth + 1, limits);
                        validate_body(i.else_body, depth + 1, limits);
                      }},
             b.node);
}

}  // namespace detail

inline void validate_code(const Code& c, const DslLimits& limits = {}) {
  detail::validate_body(c.body, 0, limits);
}

// ---------------------------------------------------------------------------
// Printer. Canonical form: "when run:" header, two-space indentation, one
// block per line, no trailing newline.
// ---------------------------------------------------------------------------

namespace detail {

inline void emit_block(const Block& b, int level, std::vector<std::string>& out);

inline void emit_body(const BlockList& body, int level, std::vector<std::string>& out) {
  for (const Block& b : body) emit_block(b, level, out);
}

inline void emit_block(const Block& b, int level, std::vector<std::string>& out) {
  std::string indent(static_cast<std::size_t>(level) * 2, ' ');
  std::visit(Overload{[&](const ActionBlock& a) { out.push_back(indent + action_name(a.action)); },
                      [&](const RepeatBlock& r) {
                        out.push_back(indent + "repeat " + std::to_string(r.count) + ":");
                        emit_body(r.body, level + 1, out);
                      },
                      [&](const RepeatUntilBlock& r) {
                        out.push_back(indent + "repeatUntil " + condition_text(r.cond) + ":");
                        emit_body(r.body, level + 1, out);
                      },
                      [&](const WhileBlock& w) {
                        out.push_back(indent + "while " + condition_text(w.cond) + ":");
                        emit_body(w.body, level + 1, out);
                      },
                      [&](const IfBlock& i) {
                        out.push_back(indent + "if " + condition_text(i.cond) + ":");
                        emit_body(i.body, level + 1, out);
                      },
                      [&](const IfElseBlock& i) {
                        out.push_back(indent + "if " + condition_text(i.cond) + ":");
                        emit_body(i.then_body, level + 1, out);
                        out.push_back(indent + "else:");
                        emit_body(i.else_body, level + 1, out);
                      }},
             b.node);
}

}  // namespace detail

inline std::vector<std::string> code_lines(const Code& c) {
  std::vector<std::string> out;
  out.push_back("when run:");
  detail::emit_body(c.body, 1, out);
  return out;
}

inline std::string print_code(const Code& c) {
  std::string out;
  for (const std::string& line : code_lines(c)) {
    if (!out.empty()) out += '\n';
    out += line;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parser. Accepts any consistent indentation (children strictly deeper than
// the opener, siblings aligned); tabs are rejected.
// ---------------------------------------------------------------------------

struct ParseError : Error {
  int line;
  int col;
  ParseError(const std::string& msg, int line_, int col_)
      : Error(msg + " (line " + std::to_string(line_) + ", column " +
              std::to_string(col_) + ")"),
        line(line_),
        col(col_) {}
};

namespace detail {

struct SrcLine {
  int number = 0;
  int indent = 0;
  std::string text;
};

inline std::vector<SrcLine> lex_lines(std::string_view text) {
  std::vector<SrcLine> out;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    int indent = 0;
    std::size_t i = 0;
    while (i < raw.size() && raw[i] == ' ') {
      ++indent;
      ++i;
    }
    if (i < raw.size() && raw[i] == '\t')
      throw ParseError("tabs are not allowed in indentation", number,
                       static_cast<int>(i) + 1);
    // strip trailing blanks
    std::size_t e = raw.size();
    while (e > i && (raw[e - 1] == ' ' || raw[e - 1] == '\t')) --e;
    if (e > i) out.push_back({number, indent, std::string(raw.substr(i, e - i))});
    if (end == text.size()) break;
    pos = end + 1;
  }
  return out;
}

class CodeParser {
 public:
  CodeParser(std::vector<SrcLine> lines, DslLimits limits)
      : lines_(std::move(lines)), limits_(limits) {}

  Code parse() {
    if (lines_.empty()) throw ParseError("expected 'when run:' header", 1, 1);
    const SrcLine& header = lines_[0];
    if (header.text != "when run:")
      throw ParseError("expected 'when run:' header", header.number, header.indent + 1);
    if (header.indent != 0)
      throw ParseError("'when run:' must not be indented", header.number, 1);
    pos_ = 1;
    Code code;
    code.body = parse_body(0, 1, header.number, header.indent + 1);
    if (pos_ < lines_.size())
      throw ParseError("unexpected content after the program",
                       lines_[pos_].number, lines_[pos_].indent + 1);
    return code;
  }

 private:
  const SrcLine& cur() const { return lines_[pos_]; }
  bool done() const { return pos_ >= lines_.size(); }

  BlockList parse_body(int parent_indent, int depth, int opener_line, int opener_col) {
    if (done() || cur().indent <= parent_indent)
      throw ParseError("empty body", opener_line, opener_col);
    int child_indent = cur().indent;
    BlockList body;
    while (!done() && cur().indent == child_indent)
      body.push_back(parse_statement(child_indent, depth));
    if (!done() && cur().indent > child_indent)
      throw ParseError("unexpected indentation", cur().number, cur().indent + 1);
    return body;
  }

  Condition parse_condition(const std::vector<std::string>& words, std::size_t from,
                            bool in_repeat_until, int line, int col) {
    std::vector<std::string> toks(words.begin() + static_cast<long>(from), words.end());
    bool negated = false;
    if (!toks.empty() && toks[0] == "not") {
      negated = true;
      toks.erase(toks.begin());
    }
    if (toks.size() != 1)
      throw ParseError("expected a condition", line, col);
    auto kind = condition_from_keyword(toks[0]);
    if (!kind) throw ParseError("unknown condition '" + toks[0] + "'", line, col);
    if (*kind == ConditionKind::goal) {
      if (negated) throw ParseError("'goal' cannot be negated", line, col);
      if (!in_repeat_until)
        throw ParseError("'goal' is only allowed in repeatUntil", line, col);
    }
    return Condition{*kind, negated};
  }

  Block parse_statement(int indent, int depth) {
    const SrcLine ln = cur();
    int col = indent + 1;
    if (auto action = action_from_name(ln.text)) {
      ++pos_;
      return make_action(*action);
    }
    if (ln.text == "else:")
      throw ParseError("'else:' without a matching 'if'", ln.number, col);
    if (ln.text.empty() || ln.text.back() != ':')
      throw ParseError("unknown block '" + ln.text + "'", ln.number, col);

    std::vector<std::string> words;
    {
      std::istringstream ss(ln.text.substr(0, ln.text.size() - 1));
      std::string w;
      while (ss >> w) words.push_back(w);
    }
    if (words.empty()) throw ParseError("expected a construct name", ln.number, col);
    const std::string& kw = words[0];

    if (kw != "repeat" && kw != "repeatUntil" && kw != "while" && kw != "if")
      throw ParseError("unknown construct '" + kw + "'", ln.number, col);
    if (depth > limits_.max_depth)
      throw ParseError("nesting deeper than " + std::to_string(limits_.max_depth) +
                           " levels",
                       ln.number, col);

    if (kw == "repeat") {
      if (words.size() != 2)
        throw ParseError("expected 'repeat <count>:'", ln.number, col);
      int count = 0;
      try {
        std::size_t used = 0;
        count = std::stoi(words[1], &used);
        if (used != words[1].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError("bad repeat count '" + words[1] + "'", ln.number, col);
      }
      if (count < 1) throw ParseError("repeat count must be >= 1", ln.number, col);
      if (count > 999) throw ParseError("repeat count too large", ln.number, col);
      ++pos_;
      BlockList body = parse_body(indent, depth + 1, ln.number, col);
      return Block{RepeatBlock{count, std::move(body)}};
    }

    Condition cond = parse_condition(words, 1, kw == "repeatUntil", ln.number, col);
    ++pos_;
    BlockList body = parse_body(indent, depth + 1, ln.number, col);
    if (kw == "repeatUntil") return Block{RepeatUntilBlock{cond, std::move(body)}};
    if (kw == "while") return Block{WhileBlock{cond, std::move(body)}};

    // "if": check for an aligned else
    if (!done() && cur().indent == indent && cur().text == "else:") {
      int else_line = cur().number;
      ++pos_;
      BlockList else_body = parse_body(indent, depth + 1, else_line, col);
      return Block{IfElseBlock{cond, std::move(body), std::move(else_body)}};
    }
    return Block{IfBlock{cond, std::move(body)}};
  }

  std::vector<SrcLine> lines_;
  DslLimits limits_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Code parse_code(std::string_view text, const DslLimits& limits = {}) {
  return detail::CodeParser(detail::lex_lines(text), limits).parse();
}

// ---------------------------------------------------------------------------
// Metrics. size counts every block except the header; blocks is the set of
// display names; sketch keeps only the control skeleton ("RepeatUntil{If}",
// siblings joined by "; ", braces only around nested control constructs).
// ---------------------------------------------------------------------------

struct CodeMetrics {
  int size = 0;
  std::set<std::string> blocks;
  std::string sketch;
  friend bool operator==(const CodeMetrics&, const CodeMetrics&) = default;
};

namespace detail {

inline void collect_metrics(const BlockList& body, CodeMetrics& m,
                            std::vector<std::string>& sketch_parts);

inline std::string join_sketch(const std::string& name,
                               const std::vector<std::string>& inner) {
  if (inner.empty()) return name;
  std::string out = name + "{";
  for (std::size_t i = 0; i < inner.size(); ++i) {
    if (i) out += "; ";
    out += inner[i];
  }
  return out + "}";
}

inline void collect_block(const Block& b, CodeMetrics& m,
                          std::vector<std::string>& sketch_parts) {
  m.size += 1;
  m.blocks.insert(block_display_name(b));
  std::visit(Overload{[&](const ActionBlock&) {},
                      [&](const RepeatBlock& r) {
                        std::vector<std::string> inner;
                        collect_metrics(r.body, m, inner);
                        sketch_parts.push_back(join_sketch("Repeat", inner));
                      },
                      [&](const RepeatUntilBlock& r) {
                        std::vector<std::string> inner;
                        collect_metrics(r.body, m, inner);
                        sketch_parts.push_back(join_sketch("RepeatUntil", inner));
                      },
                      [&](const WhileBlock& w) {
                        std::vector<std::string> inner;
                        collect_metrics(w.body, m, inner);
                        sketch_parts.push_back(join_sketch("While", inner));
                      },
                      [&](const IfBlock& i) {
                        std::vector<std::string> inner;
                        collect_metrics(i.body, m, inner);
                        sketch_parts.push_back(join_sketch("If", inner));
                      },
                      [&](const IfElseBlock& i) {
                        std::vector<std::string> inner;
                        collect_metrics(i.then_body, m, inner);
                        collect_metrics(i.else_body, m, inner);
                        sketch_parts.push_back(join_sketch("IfElse", inner));
                      }},
             b.node);
}

inline void collect_metrics(const BlockList& body, CodeMetrics& m,
                            std::vector<std::string>& sketch_parts) {
  for (const Block& b : body) collect_block(b, m, sketch_parts);
}

}  // namespace detail

inline CodeMetrics metrics(const Code& c) {
  CodeMetrics m;
  std::vector<std::string> parts;
  detail::collect_metrics(c.body, m, parts);
  std::string sketch;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) sketch += "; ";
    sketch += parts[i];
  }
  m.sketch = sketch;
  return m;
}

inline int code_size(const Code& c) { return metrics(c).size; }
inline std::set<std::string> code_blocks(const Code& c) { return metrics(c).blocks; }

// ---------------------------------------------------------------------------
// Sketch specs. "RepeatUntil{IfElse}" etc.; empty braces are accepted and
// canonicalized away, so Fig-2-style row labels like "Repeat{}" parse too.
// ---------------------------------------------------------------------------

enum class ControlKind { repeat, repeatUntil, while_, if_, ifElse };

inline const char* control_name(ControlKind k) {
  switch (k) {
    case ControlKind::repeat: return "Repeat";
    case ControlKind::repeatUntil: return "RepeatUntil";
    case ControlKind::while_: return "While";
    case ControlKind::if_: return "If";
    case ControlKind::ifElse: return "IfElse";
  }
  return "?";
}

struct SketchNode {
  ControlKind kind{};
  std::vector<SketchNode> children;
};

namespace detail {

struct SketchParser {
  std::string_view s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && s[pos] == ' ') ++pos;
  }

  std::vector<SketchNode> parse_list(bool top) {
    std::vector<SketchNode> items;
    skip_ws();
    while (pos < s.size() && s[pos] != '}') {
      items.push_back(parse_item());
      skip_ws();
      if (pos < s.size() && s[pos] == ';') {
        ++pos;
        skip_ws();
      } else {
        break;
      }
    }
    skip_ws();
    if (top && pos != s.size()) throw Error("bad sketch: trailing characters");
    return items;
  }

  SketchNode parse_item() {
    skip_ws();
    std::size_t start = pos;
    while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) != 0))
      ++pos;
    std::string name(s.substr(start, pos - start));
    SketchNode node;
    if (name == "Repeat") node.kind = ControlKind::repeat;
    else if (name == "RepeatUntil") node.kind = ControlKind::repeatUntil;
    else if (name == "While") node.kind = ControlKind::while_;
    else if (name == "If") node.kind = ControlKind::if_;
    else if (name == "IfElse") node.kind = ControlKind::ifElse;
    else throw Error("unknown construct in sketch: '" + name + "'");
    skip_ws();
    if (pos < s.size() && s[pos] == '{') {
      ++pos;
      node.children = parse_list(false);
      skip_ws();
      if (pos >= s.size() || s[pos] != '}') throw Error("bad sketch: missing '}'");
      ++pos;
    }
    return node;
  }
};

}  // namespace detail

inline std::vector<SketchNode> parse_sketch(std::string_view text) {
  detail::SketchParser p{text};
  return p.parse_list(true);
}

inline std::string sketch_to_string(const std::vector<SketchNode>& nodes) {
  std::string out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i) out += "; ";
    out += control_name(nodes[i].kind);
    if (!nodes[i].children.empty()) out += "{" + sketch_to_string(nodes[i].children) + "}";
  }
  return out;
}

inline std::string canonical_sketch(std::string_view text) {
  return sketch_to_string(parse_sketch(text));
}

// ---------------------------------------------------------------------------
// Paths into the AST. A step picks (body, index) of the current container;
// body is 0 everywhere except the else-branch of an if/else, which is 1. The
// final index may equal the body size when the path denotes an insert slot.
// ---------------------------------------------------------------------------

struct PathStep {
  int body = 0;
  int index = 0;
  friend bool operator==(const PathStep&, const PathStep&) = default;
  friend auto operator<=>(const PathStep&, const PathStep&) = default;
};

using BlockPath = std::vector<PathStep>;

inline std::string path_to_string(const BlockPath& p) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += "/";
    out += std::to_string(p[i].body) + "." + std::to_string(p[i].index);
  }
  return out;
}

inline BlockPath path_from_string(std::string_view s) {
  BlockPath path;
  if (s.empty()) return path;
  for (const std::string& part : detail::split(s, "/")) {
    auto dot = part.find('.');
    if (dot == std::string::npos) throw Error("bad path: " + std::string(s));
    try {
      path.push_back({std::stoi(part.substr(0, dot)), std::stoi(part.substr(dot + 1))});
    } catch (const std::exception&) {
      throw Error("bad path: " + std::string(s));
    }
  }
  return path;
}

namespace detail {

// Body list #n of a block (nullptr when out of range).
inline BlockList* body_of(Block& b, int which) {
  return std::visit(Overload{[&](ActionBlock&) -> BlockList* { return nullptr; },
                             [&](RepeatBlock& r) { return which == 0 ? &r.body : nullptr; },
                             [&](RepeatUntilBlock& r) { return which == 0 ? &r.body : nullptr; },
                             [&](WhileBlock& w) { return which == 0 ? &w.body : nullptr; },
                             [&](IfBlock& i) { return which == 0 ? &i.body : nullptr; },
                             [&](IfElseBlock& i) -> BlockList* {
                               if (which == 0) return &i.then_body;
                               if (which == 1) return &i.else_body;
                               return nullptr;
                             }},
                    b.node);
}

inline const BlockList* body_of(const Block& b, int which) {
  return body_of(const_cast<Block&>(b), which);
}

}  // namespace detail

// The body list containing the path's final step (the spine of the path must
// address existing blocks). Throws on an unreachable path.
inline BlockList* body_at(Code& c, const BlockPath& path) {
  if (path.empty()) throw Error("empty path has no containing body");
  BlockList* body = &c.body;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const PathStep& st = path[i];
    if (i == 0 && st.body != 0) throw Error("bad path: root has a single body");
    if (st.index < 0 || st.index >= static_cast<int>(body->size()))
      throw Error("bad path: index out of range");
    Block& b = (*body)[static_cast<std::size_t>(st.index)];
    body = detail::body_of(b, path[i + 1].body);
    if (!body) throw Error("bad path: block has no such body");
  }
  if (path.size() == 1 && path[0].body != 0)
    throw Error("bad path: root has a single body");
  return body;
}

inline const BlockList* body_at(const Code& c, const BlockPath& path) {
  return body_at(const_cast<Code&>(c), path);
}

inline Block* block_at(Code& c, const BlockPath& path) {
  BlockList* body = body_at(c, path);
  int idx = path.back().index;
  if (idx < 0 || idx >= static_cast<int>(body->size()))
    throw Error("bad path: index out of range");
  return &(*body)[static_cast<std::size_t>(idx)];
}

inline const Block* block_at(const Code& c, const BlockPath& path) {
  return block_at(const_cast<Code&>(c), path);
}

// ---------------------------------------------------------------------------
// Mutations. Six kinds, each with a well-defined reverse:
//   replaceAction   action_a -> action_b at path
//   insertAction    insert action_a at slot path
//   deleteAction    delete action_a at path
//   flipCondition   involution on the condition at path (self-inverse)
//   swapBranchBodies swap if/else bodies at path (self-inverse)
//   changeRepeatCount count_a -> count_b at path
// ---------------------------------------------------------------------------

enum class MutationKind {
  replaceAction,
  insertAction,
  deleteAction,
  flipCondition,
  swapBranchBodies,
  changeRepeatCount
};

inline const char* mutation_kind_name(MutationKind k) {
  switch (k) {
    case MutationKind::replaceAction: return "replaceAction";
    case MutationKind::insertAction: return "insertAction";
    case MutationKind::deleteAction: return "deleteAction";
    case MutationKind::flipCondition: return "flipCondition";
    case MutationKind::swapBranchBodies: return "swapBranchBodies";
    case MutationKind::changeRepeatCount: return "changeRepeatCount";
  }
  return "?";
}

inline std::optional<MutationKind> mutation_kind_from_name(std::string_view s) {
  for (MutationKind k :
       {MutationKind::replaceAction, MutationKind::insertAction, MutationKind::deleteAction,
        MutationKind::flipCondition, MutationKind::swapBranchBodies,
        MutationKind::changeRepeatCount})
    if (s == mutation_kind_name(k)) return k;
  return std::nullopt;
}

struct Mutation {
  MutationKind kind{};
  BlockPath path;
  ActionKind action_a{};  // replace: from; insert/delete: the action
  ActionKind action_b{};  // replace: to
  int count_a = 0;        // changeRepeatCount: from
  int count_b = 0;        // changeRepeatCount: to
  friend bool operator==(const Mutation&, const Mutation&) = default;
};

// The flip involution: left/right sensing swap, other sensors toggle
// negation. Never applicable to `goal`.
inline Condition flipped_condition(const Condition& c) {
  switch (c.kind) {
    case ConditionKind::leftIsClear: return {ConditionKind::rightIsClear, c.negated};
    case ConditionKind::rightIsClear: return {ConditionKind::leftIsClear, c.negated};
    case ConditionKind::pathAhead: return {ConditionKind::pathAhead, !c.negated};
    case ConditionKind::markersPresent: return {ConditionKind::markersPresent, !c.negated};
    case ConditionKind::goal: break;
  }
  throw Error("flipCondition does not apply to 'goal'");
}

inline Mutation reverse_mutation(const Mutation& m) {
  Mutation r = m;
  switch (m.kind) {
    case MutationKind::replaceAction:
      r.action_a = m.action_b;
      r.action_b = m.action_a;
      break;
    case MutationKind::insertAction:
      r.kind = MutationKind::deleteAction;
      break;
    case MutationKind::deleteAction:
      r.kind = MutationKind::insertAction;
      break;
    case MutationKind::flipCondition:
    case MutationKind::swapBranchBodies:
      break;  // self-inverse
    case MutationKind::changeRepeatCount:
      r.count_a = m.count_b;
      r.count_b = m.count_a;
      break;
  }
  return r;
}

inline Condition* condition_of(Block& b) {
  return std::visit(Overload{[](ActionBlock&) -> Condition* { return nullptr; },
                             [](RepeatBlock&) -> Condition* { return nullptr; },
                             [](RepeatUntilBlock& r) { return &r.cond; },
                             [](WhileBlock& w) { return &w.cond; },
                             [](IfBlock& i) { return &i.cond; },
                             [](IfElseBlock& i) { return &i.cond; }},
                    b.node);
}

inline Code apply_mutation(const Code& code, const Mutation& m) {
  Code out = code;
  switch (m.kind) {
    case MutationKind::replaceAction: {
      Block* b = block_at(out, m.path);
      auto* a = std::get_if<ActionBlock>(&b->node);
      if (!a || a->action != m.action_a)
        throw Error("replaceAction: no matching action at path");
      if (m.action_a == m.action_b) throw Error("replaceAction: identity");
      a->action = m.action_b;
      break;
    }
    case MutationKind::insertAction: {
      BlockList* body = body_at(out, m.path);
      int idx = m.path.back().index;
      if (idx < 0 || idx > static_cast<int>(body->size()))
        throw Error("insertAction: slot out of range");
      body->insert(body->begin() + idx, make_action(m.action_a));
      break;
    }
    case MutationKind::deleteAction: {
      BlockList* body = body_at(out, m.path);
      int idx = m.path.back().index;
      if (idx < 0 || idx >= static_cast<int>(body->size()))
        throw Error("deleteAction: index out of range");
      auto* a = std::get_if<ActionBlock>(&(*body)[static_cast<std::size_t>(idx)].node);
      if (!a || a->action != m.action_a)
        throw Error("deleteAction: no matching action at path");
      if (body->size() < 2) throw Error("deleteAction: body would become empty");
      body->erase(body->begin() + idx);
      break;
    }
    case MutationKind::flipCondition: {
      Block* b = block_at(out, m.path);
      Condition* c = condition_of(*b);
      if (!c) throw Error("flipCondition: block has no condition");
      *c = flipped_condition(*c);
      break;
    }
    case MutationKind::swapBranchBodies: {
      Block* b = block_at(out, m.path);
      auto* ie = std::get_if<IfElseBlock>(&b->node);
      if (!ie) throw Error("swapBranchBodies: not an if/else");
      if (ie->then_body == ie->else_body) throw Error("swapBranchBodies: identity");
      std::swap(ie->then_body, ie->else_body);
      break;
    }
    case MutationKind::changeRepeatCount: {
      Block* b = block_at(out, m.path);
      auto* r = std::get_if<RepeatBlock>(&b->node);
      if (!r || r->count != m.count_a)
        throw Error("changeRepeatCount: no matching repeat at path");
      if (m.count_b < 1) throw Error("changeRepeatCount: count must be >= 1");
      if (m.count_a == m.count_b) throw Error("changeRepeatCount: identity");
      r->count = m.count_b;
      break;
    }
  }
  return out;
}

struct MutationOptions {
  // Replacement/insert alphabet. Empty = the navigation actions plus any
  // marker actions already used by the code.
  std::vector<ActionKind> action_alphabet;
  int repeat_count_radius = 2;  // changeRepeatCount window around the current count
};

namespace detail {

inline void collect_actions_used(const BlockList& body, std::set<ActionKind>& used) {
  for (const Block& b : body)
    std::visit(Overload{[&](const ActionBlock& a) { used.insert(a.action); },
                        [&](const RepeatBlock& r) { collect_actions_used(r.body, used); },
                        [&](const RepeatUntilBlock& r) { collect_actions_used(r.body, used); },
                        [&](const WhileBlock& w) { collect_actions_used(w.body, used); },
                        [&](const IfBlock& i) { collect_actions_used(i.body, used); },
                        [&](const IfElseBlock& i) {
                          collect_actions_used(i.then_body, used);
                          collect_actions_used(i.else_body, used);
                        }},
               b.node);
}

inline std::vector<ActionKind> effective_alphabet(const Code& c,
                                                  const MutationOptions& opt) {
  if (!opt.action_alphabet.empty()) return opt.action_alphabet;
  std::set<ActionKind> used{ActionKind::move, ActionKind::turnLeft, ActionKind::turnRight};
  collect_actions_used(c.body, used);
  return {used.begin(), used.end()};
}

inline void enumerate_in_body(const Code& code, const BlockList& body, BlockPath prefix,
                              int body_index, const std::vector<ActionKind>& alphabet,
                              const MutationOptions& opt, std::vector<Mutation>& out) {
  for (int idx = 0; idx <= static_cast<int>(body.size()); ++idx) {
    BlockPath slot = prefix;
    slot.push_back({body_index, idx});
    for (ActionKind a : alphabet)
      out.push_back({MutationKind::insertAction, slot, a, a, 0, 0});
    if (idx == static_cast<int>(body.size())) break;

    const Block& b = body[static_cast<std::size_t>(idx)];
    const BlockPath& here = slot;  // path of this block
    std::visit(
        Overload{[&](const ActionBlock& a) {
                   for (ActionKind to : alphabet)
                     if (to != a.action)
                       out.push_back({MutationKind::replaceAction, here, a.action, to, 0, 0});
                   if (body.size() >= 2)
                     out.push_back({MutationKind::deleteAction, here, a.action, a.action, 0, 0});
                 },
                 [&](const RepeatBlock& r) {
                   for (int to = r.count - opt.repeat_count_radius;
                        to <= r.count + opt.repeat_count_radius; ++to)
                     if (to >= 1 && to != r.count)
                       out.push_back({MutationKind::changeRepeatCount, here, ActionKind::move,
                                      ActionKind::move, r.count, to});
                   enumerate_in_body(code, r.body, here, 0, alphabet, opt, out);
                 },
                 [&](const RepeatUntilBlock& r) {
                   if (r.cond.kind != ConditionKind::goal)
                     out.push_back({MutationKind::flipCondition, here, ActionKind::move,
                                    ActionKind::move, 0, 0});
                   enumerate_in_body(code, r.body, here, 0, alphabet, opt, out);
                 },
                 [&](const WhileBlock& w) {
                   out.push_back({MutationKind::flipCondition, here, ActionKind::move,
                                  ActionKind::move, 0, 0});
                   enumerate_in_body(code, w.body, here, 0, alphabet, opt, out);
                 },
                 [&](const IfBlock& i) {
                   out.push_back({MutationKind::flipCondition, here, ActionKind::move,
                                  ActionKind::move, 0, 0});
                   enumerate_in_body(code, i.body, here, 0, alphabet, opt, out);
                 },
                 [&](const IfElseBlock& i) {
                   out.push_back({MutationKind::flipCondition, here, ActionKind::move,
                                  ActionKind::move, 0, 0});
                   if (i.then_body != i.else_body)  // otherwise a swap changes nothing
                     out.push_back({MutationKind::swapBranchBodies, here, ActionKind::move,
                                    ActionKind::move, 0, 0});
                   enumerate_in_body(code, i.then_body, here, 0, alphabet, opt, out);
                   enumerate_in_body(code, i.else_body, here, 1, alphabet, opt, out);
                 }},
        b.node);
  }
}

}  // namespace detail

// Every applicable single mutation, in deterministic pre-order. None of them
// is an identity.
inline std::vector<Mutation> enumerate_mutations(const Code& code,
                                                 const MutationOptions& opt = {}) {
  std::vector<Mutation> out;
  auto alphabet = detail::effective_alphabet(code, opt);
  detail::enumerate_in_body(code, code.body, {}, 0, alphabet, opt, out);
  return out;
}

// n distinct mutations drawn without replacement. Throws when the space is
// too small.
inline std::vector<Mutation> sample_mutations(const Code& code, int n, Rng& rng,
                                              const MutationOptions& opt = {}) {
  std::vector<Mutation> all = enumerate_mutations(code, opt);
  if (static_cast<int>(all.size()) < n)
    throw Error("mutation space has only " + std::to_string(all.size()) +
                " elements, need " + std::to_string(n));
  std::vector<Mutation> out;
  for (std::size_t i : rng.sample_indices(all.size(), static_cast<std::size_t>(n)))
    out.push_back(all[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Line map + human-readable locus/mutation descriptions (used by the
// bug-hunting MCQ types). Lines are 1-based over the canonical printout,
// "when run:" being line 1.
// ---------------------------------------------------------------------------

struct LineSpan {
  int first = 0;
  int last = 0;
  friend bool operator==(const LineSpan&, const LineSpan&) = default;
};

namespace detail {

inline void map_body(const BlockList& body, BlockPath prefix, int body_index, int indent,
                     int& line, std::map<std::string, LineSpan>& map);

inline void map_block(const Block& b, const BlockPath& here, int indent, int& line,
                      std::map<std::string, LineSpan>& map) {
  int first = line;
  std::visit(Overload{[&](const ActionBlock&) { ++line; },
                      [&](const RepeatBlock& r) {
                        ++line;
                        map_body(r.body, here, 0, indent + 1, line, map);
                      },
                      [&](const RepeatUntilBlock& r) {
                        ++line;
                        map_body(r.body, here, 0, indent + 1, line, map);
                      },
                      [&](const WhileBlock& w) {
                        ++line;
                        map_body(w.body, here, 0, indent + 1, line, map);
                      },
                      [&](const IfBlock& i) {
                        ++line;
                        map_body(i.body, here, 0, indent + 1, line, map);
                      },
                      [&](const IfElseBlock& i) {
                        ++line;
                        map_body(i.then_body, here, 0, indent + 1, line, map);
                        ++line;  // "else:"
                        map_body(i.else_body, here, 1, indent + 1, line, map);
                      }},
             b.node);
  map[path_to_string(here)] = {first, line - 1};
}

inline void map_body(const BlockList& body, BlockPath prefix, int body_index, int indent,
                     int& line, std::map<std::string, LineSpan>& map) {
  for (int idx = 0; idx < static_cast<int>(body.size()); ++idx) {
    BlockPath here = prefix;
    here.push_back({body_index, idx});
    map_block(body[static_cast<std::size_t>(idx)], here, indent, line, map);
  }
}

}  // namespace detail

// path string -> line span of each block in the canonical printout.
inline std::map<std::string, LineSpan> code_line_map(const Code& c) {
  std::map<std::string, LineSpan> map;
  int line = 2;  // line 1 is "when run:"
  detail::map_body(c.body, {}, 0, 1, line, map);
  return map;
}

inline LineSpan line_span_at(const Code& c, const BlockPath& path) {
  auto map = code_line_map(c);
  auto it = map.find(path_to_string(path));
  if (it == map.end()) throw Error("path not found in code: " + path_to_string(path));
  return it->second;
}

// "line 4 (`turnLeft`)" for blocks; insert slots are described between lines.
inline std::string describe_locus(const Code& c, const BlockPath& path) {
  const BlockList* body = body_at(c, path);
  int idx = path.back().index;
  auto lines = code_lines(c);
  if (idx < static_cast<int>(body->size())) {
    LineSpan span = line_span_at(c, path);
    std::string text = detail::strip(lines[static_cast<std::size_t>(span.first - 1)]);
    return "line " + std::to_string(span.first) + " (`" + text + "`)";
  }
  // slot one past the end of a body
  if (path.size() == 1) return "the end of the program";
  BlockPath parent(path.begin(), path.end() - 1);
  LineSpan span = line_span_at(c, parent);
  if (path.back().body == 1) {
    // end of an else branch: the opener line shown is the construct's
    return "the end of the else branch opened on line " + std::to_string(span.first);
  }
  return "the end of the body opened on line " + std::to_string(span.first);
}

// Edit description relative to the code the mutation applies to.
inline std::string describe_mutation(const Code& c, const Mutation& m) {
  auto block_line = [&](const BlockPath& p) { return line_span_at(c, p).first; };
  switch (m.kind) {
    case MutationKind::replaceAction:
      return "replace the `" + std::string(action_name(m.action_a)) + "` on line " +
             std::to_string(block_line(m.path)) + " with `" + action_name(m.action_b) + "`";
    case MutationKind::insertAction: {
      const BlockList* body = body_at(c, m.path);
      int idx = m.path.back().index;
      if (idx < static_cast<int>(body->size()))
        return "insert `" + std::string(action_name(m.action_a)) + "` just before line " +
               std::to_string(block_line(m.path));
      return "insert `" + std::string(action_name(m.action_a)) + "` at " +
             describe_locus(c, m.path);
    }
    case MutationKind::deleteAction:
      return "delete the `" + std::string(action_name(m.action_a)) + "` on line " +
             std::to_string(block_line(m.path));
    case MutationKind::flipCondition: {
      const Block* b = block_at(c, m.path);
      const Condition* cond = condition_of(const_cast<Block&>(*b));
      if (!cond) throw Error("flipCondition: block has no condition");
      return "change the condition on line " + std::to_string(block_line(m.path)) +
             " from `" + condition_text(*cond) + "` to `" +
             condition_text(flipped_condition(*cond)) + "`";
    }
    case MutationKind::swapBranchBodies:
      return "swap the if/else branches of the conditional on line " +
             std::to_string(block_line(m.path));
    case MutationKind::changeRepeatCount:
      return "change the repeat count on line " + std::to_string(block_line(m.path)) +
             " from " + std::to_string(m.count_a) + " to " + std::to_string(m.count_b);
  }
  return "?";
}

}  // namespace vpkit
