#pragma once

#include <array>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vpkit/dsl.hpp"
#include "vpkit/rng.hpp"

namespace vpkit {

// ---------------------------------------------------------------------------
// Task records and the line-delimited corpus format. One JSON object per
// line, keys sorted, preceded by a schema header line, so corpora diff
// cleanly and stream without loading the file.
// ---------------------------------------------------------------------------

inline constexpr const char* kCorpusSchema = "vpkit-corpus";
inline constexpr int kCorpusVersion = 1;

enum class SkillCategory {
  solutionSynthesis,
  mcqAnalyzing,
  mcqEvaluating,
  mcqCreating,
  basics,
  tracing,
  gridSynthesis,
};

inline constexpr std::array<SkillCategory, 7> kAllSkillCategories = {
    SkillCategory::solutionSynthesis, SkillCategory::mcqAnalyzing,
    SkillCategory::mcqEvaluating,     SkillCategory::mcqCreating,
    SkillCategory::basics,            SkillCategory::tracing,
    SkillCategory::gridSynthesis};

inline const char* skill_category_name(SkillCategory c) {
  switch (c) {
    case SkillCategory::solutionSynthesis: return "solutionSynthesis";
    case SkillCategory::mcqAnalyzing: return "mcqAnalyzing";
    case SkillCategory::mcqEvaluating: return "mcqEvaluating";
    case SkillCategory::mcqCreating: return "mcqCreating";
    case SkillCategory::basics: return "basics";
    case SkillCategory::tracing: return "tracing";
    case SkillCategory::gridSynthesis: return "gridSynthesis";
  }
  return "?";
}

inline SkillCategory skill_category_from_name(const std::string& name) {
  for (SkillCategory c : kAllSkillCategories)
    if (name == skill_category_name(c)) return c;
  throw Error("unknown skill category: " + name);
}

// The concept a task exercises is named by its code's control skeleton;
// straight-line codes fall under "basicActions".
inline std::string concept_tag(const std::string& sketch) {
  return sketch.empty() ? "basicActions" : sketch;
}

struct RecordMeta {
  std::string sketch;               // control skeleton of the underlying code
  int size = 0;                     // block count of the underlying code
  std::vector<std::string> store;   // allowed constructs, sorted
  std::string grid_dims;            // "RxC" of the primary grid, "" when n/a
  std::string seed;                 // hex64 of the per-record seed
  std::string concept_tag;          // Fig-2-style concept row
  bool operator==(const RecordMeta&) const = default;
};

struct TaskRecord {
  std::string id;  // stable content hash, filled by finalize_record_id
  SkillCategory category = SkillCategory::basics;
  std::string task_type;
  std::string prompt;
  std::string target;
  std::optional<std::string> explanation;
  RecordMeta meta;
  bool operator==(const TaskRecord&) const = default;
};

// The id hashes everything a consumer can observe, so identical content
// always collides and distinct content essentially never does.
inline std::string record_content_hash(const TaskRecord& r) {
  std::string blob;
  blob += skill_category_name(r.category);
  blob += '\x1f';
  blob += r.task_type;
  blob += '\x1f';
  blob += r.prompt;
  blob += '\x1f';
  blob += r.target;
  blob += '\x1f';
  if (r.explanation) blob += *r.explanation;
  return to_hex16(fnv1a64(blob));
}

inline TaskRecord& finalize_record_id(TaskRecord& r) {
  r.id = record_content_hash(r);
  return r;
}

inline std::string grid_dims_string(int rows, int cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

// ---------------------------------------------------------------------------
// Prompt plumbing. Prompts are a one-line description followed by labeled
// sections ("code:", "grid:", "action: move", ...), each preceded by a blank
// line, so validators can parse a record's inputs back out of its prompt.
// ---------------------------------------------------------------------------

namespace prompt {

// "label: value" one-liner section
inline void append_value(std::string& out, const std::string& label,
                         const std::string& value) {
  out += "\n" + label + ": " + value + "\n";
}

// "label:" followed by a multi-line block; the block is stored verbatim with
// a terminating newline
inline void append_block(std::string& out, const std::string& label,
                         const std::string& text) {
  out += "\n" + label + ":\n" + text;
  if (text.empty() || text.back() != '\n') out += '\n';
}

inline std::optional<std::string> extract_value(const std::string& prompt_text,
                                                const std::string& label) {
  std::string marker = "\n" + label + ": ";
  std::size_t at = prompt_text.find(marker);
  if (at == std::string::npos) return std::nullopt;
  std::size_t start = at + marker.size();
  std::size_t end = prompt_text.find('\n', start);
  if (end == std::string::npos) end = prompt_text.size();
  return prompt_text.substr(start, end - start);
}

// A block runs until the next blank line (sections never contain one).
inline std::optional<std::string> extract_block(const std::string& prompt_text,
                                                const std::string& label) {
  std::string marker = "\n" + label + ":\n";
  std::size_t at = prompt_text.find(marker);
  if (at == std::string::npos) return std::nullopt;
  std::size_t start = at + marker.size();
  std::size_t end = prompt_text.find("\n\n", start);
  std::string body = end == std::string::npos ? prompt_text.substr(start)
                                              : prompt_text.substr(start, end - start);
  while (!body.empty() && body.back() == '\n') body.pop_back();
  return body;
}

}  // namespace prompt

// ---------------------------------------------------------------------------
// JSON mapping
// ---------------------------------------------------------------------------

inline nlohmann::json record_to_json(const TaskRecord& r) {
  nlohmann::json meta = {
      {"conceptTag", r.meta.concept_tag}, {"gridDims", r.meta.grid_dims},
      {"seed", r.meta.seed},              {"size", r.meta.size},
      {"sketch", r.meta.sketch},          {"store", r.meta.store},
  };
  nlohmann::json j = {
      {"id", r.id},
      {"metadata", std::move(meta)},
      {"prompt", r.prompt},
      {"skillCategory", skill_category_name(r.category)},
      {"target", r.target},
      {"taskType", r.task_type},
  };
  if (r.explanation) j["explanation"] = *r.explanation;
  return j;
}

inline TaskRecord record_from_json(const nlohmann::json& j) {
  TaskRecord r;
  r.id = j.at("id").get<std::string>();
  r.category = skill_category_from_name(j.at("skillCategory").get<std::string>());
  r.task_type = j.at("taskType").get<std::string>();
  r.prompt = j.at("prompt").get<std::string>();
  r.target = j.at("target").get<std::string>();
  if (j.contains("explanation")) r.explanation = j.at("explanation").get<std::string>();
  const nlohmann::json& meta = j.at("metadata");
  r.meta.sketch = meta.at("sketch").get<std::string>();
  r.meta.size = meta.at("size").get<int>();
  r.meta.store = meta.at("store").get<std::vector<std::string>>();
  r.meta.grid_dims = meta.at("gridDims").get<std::string>();
  r.meta.seed = meta.at("seed").get<std::string>();
  r.meta.concept_tag = meta.at("conceptTag").get<std::string>();
  return r;
}

// ---------------------------------------------------------------------------
// Corpus I/O: schema header line, then one record per line.
// ---------------------------------------------------------------------------

inline void write_corpus(std::ostream& out, const std::vector<TaskRecord>& records) {
  nlohmann::json header = {{"schema", kCorpusSchema}, {"version", kCorpusVersion}};
  out << header.dump() << '\n';
  for (const TaskRecord& r : records) out << record_to_json(r).dump() << '\n';
}

inline void write_corpus(const std::string& path, const std::vector<TaskRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open corpus file for writing: " + path);
  write_corpus(out, records);
}

inline std::vector<TaskRecord> read_corpus(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("corpus is empty: missing schema header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("corpus line 1: malformed header: ") + e.what());
  }
  if (!header.contains("schema") || header["schema"] != kCorpusSchema)
    throw Error("corpus line 1: unrecognized schema");
  if (!header.contains("version") || header["version"] != kCorpusVersion)
    throw Error("corpus line 1: unsupported schema version");

  std::vector<TaskRecord> records;
  for (int line_no = 2; std::getline(in, line); ++line_no) {
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error("corpus line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

inline std::vector<TaskRecord> read_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file: " + path);
  return read_corpus(in);
}

}  // namespace vpkit
