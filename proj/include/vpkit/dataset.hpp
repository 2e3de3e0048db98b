#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "vpkit/dsl.hpp"
#include "vpkit/emulator.hpp"
#include "vpkit/grid.hpp"
#include "vpkit/mcqgen.hpp"
#include "vpkit/pairgen.hpp"
#include "vpkit/records.hpp"
#include "vpkit/rng.hpp"
#include "vpkit/skillgen.hpp"

namespace vpkit {

// ---------------------------------------------------------------------------
// Distribution plan. Every base (code, grid-set) pair deterministically
// yields 1 solution-synthesis task, 2 tracing tasks, and 9 grid-synthesis
// tasks (one per single-element type, one designAll, five placeWalls). MCQ
// and basics volumes are target counts sampled independently; the defaults
// scale the full-size reference corpus of 7,576 base pairs.
// ---------------------------------------------------------------------------

inline constexpr int kReferenceBasePairs = 7576;

struct DistributionPlan {
  int base_pairs = 0;
  int place_walls_per_pair = 5;
  int mcq_analyzing = 0;
  int mcq_evaluating = 0;
  int mcq_creating = 0;
  int basics_locate_avatar = 0;
  int basics_locate_goal = 0;
  int basics_apply_action = 0;
  int basics_sense_condition = 0;
  bool operator==(const DistributionPlan&) const = default;
};

inline DistributionPlan default_plan(int base_pairs) {
  // Floor scaling keeps the reference counts exact at full scale and sends
  // every sampled category to zero for the single-pair unit plan.
  auto scaled = [&](long reference) {
    return static_cast<int>(reference * base_pairs / kReferenceBasePairs);
  };
  DistributionPlan p;
  p.base_pairs = base_pairs;
  p.mcq_analyzing = scaled(2779);
  p.mcq_evaluating = scaled(2072);
  p.mcq_creating = scaled(4372);
  p.basics_locate_avatar = scaled(1336);
  p.basics_locate_goal = scaled(1273);
  p.basics_apply_action = scaled(3930);
  p.basics_sense_condition = scaled(5187);
  return p;
}

inline nlohmann::json plan_to_json(const DistributionPlan& p) {
  return nlohmann::json{{"basePairs", p.base_pairs},
                        {"placeWallsPerPair", p.place_walls_per_pair},
                        {"mcqAnalyzing", p.mcq_analyzing},
                        {"mcqEvaluating", p.mcq_evaluating},
                        {"mcqCreating", p.mcq_creating},
                        {"basicsLocateAvatar", p.basics_locate_avatar},
                        {"basicsLocateGoal", p.basics_locate_goal},
                        {"basicsApplyAction", p.basics_apply_action},
                        {"basicsSenseCondition", p.basics_sense_condition}};
}

// Missing fields fall back to the default plan scaled to the file's (or the
// caller's) base pair count.
inline DistributionPlan plan_from_json(const nlohmann::json& j,
                                       int fallback_base_pairs = 0) {
  try {
    DistributionPlan p = default_plan(j.value("basePairs", fallback_base_pairs));
    p.place_walls_per_pair = j.value("placeWallsPerPair", p.place_walls_per_pair);
    p.mcq_analyzing = j.value("mcqAnalyzing", p.mcq_analyzing);
    p.mcq_evaluating = j.value("mcqEvaluating", p.mcq_evaluating);
    p.mcq_creating = j.value("mcqCreating", p.mcq_creating);
    p.basics_locate_avatar = j.value("basicsLocateAvatar", p.basics_locate_avatar);
    p.basics_locate_goal = j.value("basicsLocateGoal", p.basics_locate_goal);
    p.basics_apply_action = j.value("basicsApplyAction", p.basics_apply_action);
    p.basics_sense_condition =
        j.value("basicsSenseCondition", p.basics_sense_condition);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed plan: ") + e.what());
  }
}

struct PlanTotals {
  long solution_synthesis = 0;
  long tracing = 0;
  long grid_synthesis = 0;
  long mcq = 0;
  long basics = 0;
  long total = 0;
};

inline PlanTotals plan_totals(const DistributionPlan& p) {
  PlanTotals t;
  long n = p.base_pairs;
  t.solution_synthesis = n;
  t.tracing = 2 * n;
  t.grid_synthesis = (3 + 1 + p.place_walls_per_pair) * n;
  t.mcq = static_cast<long>(p.mcq_analyzing) + p.mcq_evaluating + p.mcq_creating;
  t.basics = static_cast<long>(p.basics_locate_avatar) + p.basics_locate_goal +
             p.basics_apply_action + p.basics_sense_condition;
  t.total = t.solution_synthesis + t.tracing + t.grid_synthesis + t.mcq + t.basics;
  return t;
}

inline double percentage_of(long part, long whole) {
  if (whole == 0) return 0.0;
  return std::round(10000.0 * part / whole) / 100.0;
}

// ---------------------------------------------------------------------------
// Record builders for the two categories not covered by skillgen generators.
// ---------------------------------------------------------------------------

inline const char* solution_synthesis_description() {
  return "Write a code that solves the grid below. Use only the allowed blocks, "
         "and use at most the given number of blocks in total.";
}

inline TaskRecord solution_record(const CodeGridPair& pair, const Grid& grid,
                                  const SolutionTaskOptions& topt = {}) {
  SolutionSynthesisTask task = make_solution_task(pair.code, grid, topt);
  TaskRecord rec;
  rec.category = SkillCategory::solutionSynthesis;
  rec.task_type = "solutionSynthesis";
  rec.prompt = solution_synthesis_description();
  rec.prompt += "\n";
  std::string store_text;
  for (const std::string& block : task.store) {
    if (!store_text.empty()) store_text += ", ";
    store_text += block;
  }
  prompt::append_value(rec.prompt, "store", store_text);
  prompt::append_value(rec.prompt, "maxSize", std::to_string(task.max_size));
  prompt::append_block(rec.prompt, "grid", serialize_grid(task.grid));
  rec.target = print_code(task.target);
  rec.explanation = task.explanation;
  CodeMetrics m = metrics(task.target);
  rec.meta.sketch = m.sketch;
  rec.meta.size = m.size;
  rec.meta.store.assign(task.store.begin(), task.store.end());
  rec.meta.grid_dims = grid_dims_string(task.grid.rows, task.grid.cols);
  rec.meta.concept_tag = concept_tag(m.sketch);
  finalize_record_id(rec);
  return rec;
}

inline SkillCategory mcq_category(McqLevel level) {
  switch (level) {
    case McqLevel::analyzing: return SkillCategory::mcqAnalyzing;
    case McqLevel::evaluating: return SkillCategory::mcqEvaluating;
    case McqLevel::creating: return SkillCategory::mcqCreating;
  }
  return SkillCategory::mcqAnalyzing;
}

inline TaskRecord mcq_record(const McqTask& task, const CodeGridPair& source) {
  TaskRecord rec;
  rec.category = mcq_category(task.level);
  rec.task_type = mcq_type_name(task.type);
  rec.prompt = render_mcq_prompt(task);
  rec.target = std::string(1, mcq_label(task.correct));
  rec.explanation = task.explanation;
  CodeMetrics m = metrics(source.code);
  rec.meta.sketch = m.sketch;
  rec.meta.size = m.size;
  rec.meta.store.assign(m.blocks.begin(), m.blocks.end());
  rec.meta.concept_tag = concept_tag(m.sketch);
  const Grid* shown = nullptr;
  if (!task.given_grids.empty())
    shown = &task.given_grids.front();
  else if (task.given_incomplete)
    shown = &task.given_incomplete->grid;
  if (shown) rec.meta.grid_dims = grid_dims_string(shown->rows, shown->cols);
  finalize_record_id(rec);
  return rec;
}

// ---------------------------------------------------------------------------
// Record validation, dispatched on category. Skill categories re-derive
// their targets from the prompt; solution synthesis re-checks the code
// against the store/maxSize/grid sections; MCQ records get structural checks
// (their semantic validity is certified by validate_mcq at generation time,
// and the option payloads needed to re-certify are not part of the record).
// ---------------------------------------------------------------------------

struct RecordCheck {
  bool ok = false;
  std::string failure;
};

inline RecordCheck validate_solution_record(const TaskRecord& rec) {
  auto fail = [](const std::string& why) { return RecordCheck{false, why}; };
  auto store_text = prompt::extract_value(rec.prompt, "store");
  auto max_text = prompt::extract_value(rec.prompt, "maxSize");
  auto grid_text = prompt::extract_block(rec.prompt, "grid");
  if (!store_text || !max_text || !grid_text)
    return fail("prompt is missing store, maxSize, or grid");
  try {
    Grid grid = parse_grid(*grid_text + "\n");
    Code code = parse_code(rec.target);
    CodeMetrics m = metrics(code);
    std::set<std::string> store;
    std::size_t start = 0;
    while (start < store_text->size()) {
      std::size_t comma = store_text->find(", ", start);
      store.insert(comma == std::string::npos
                       ? store_text->substr(start)
                       : store_text->substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 2;
    }
    for (const std::string& block : m.blocks)
      if (!store.count(block)) return fail("target uses a block outside the store");
    if (m.size > std::stoi(*max_text)) return fail("target exceeds maxSize");
    if (!solves(code, grid)) return fail("target does not solve the grid");
  } catch (const Error& e) {
    return fail(e.what());
  }
  return {true, ""};
}

inline RecordCheck validate_mcq_record(const TaskRecord& rec) {
  auto fail = [](const std::string& why) { return RecordCheck{false, why}; };
  if (rec.target.size() != 1 || rec.target[0] < 'A' || rec.target[0] > 'D')
    return fail("target is not a single A-D label");
  for (int i = 0; i < 4; ++i) {
    std::string marker = std::string(1, mcq_label(i)) + ") ";
    if (rec.prompt.find("\n" + marker) == std::string::npos)
      return fail(std::string("prompt lacks option ") + mcq_label(i));
  }
  return {true, ""};
}

inline RecordCheck validate_record(const TaskRecord& rec) {
  if (rec.id != record_content_hash(rec))
    return {false, "id does not match the record content"};
  if (rec.prompt.empty() || rec.target.empty())
    return {false, "empty prompt or target"};
  switch (rec.category) {
    case SkillCategory::solutionSynthesis: return validate_solution_record(rec);
    case SkillCategory::mcqAnalyzing:
    case SkillCategory::mcqEvaluating:
    case SkillCategory::mcqCreating: return validate_mcq_record(rec);
    default: {
      SkillCheck check = validate_skill_record(rec);
      return {check.ok, check.failure};
    }
  }
}

// ---------------------------------------------------------------------------
// Corpus generation. Work is split into independent slots, each seeded from
// (master seed, slot tag, slot index); workers may run in any order and the
// output is assembled in slot order, so the corpus is byte-identical for any
// job count.
// ---------------------------------------------------------------------------

struct GenerateOptions {
  int jobs = 1;
  bool with_explanations = true;
};

struct CategoryTally {
  long attempted = 0;
  long accepted = 0;
};

struct CorpusManifest {
  int base_pairs = 0;
  std::string master_seed;
  long total = 0;
  long duplicates_removed = 0;
  std::map<std::string, long> category_counts;
  std::map<std::string, long> type_counts;
  std::map<std::string, CategoryTally> sampled;  // rejection-lossy categories
};

// Creating-level choice tasks reuse some grid-synthesis type names
// (placeAvatar, placeGoal, placeWalls), so per-type tallies qualify them to
// keep the skill-task counts exact.
inline std::string record_type_key(const TaskRecord& rec) {
  bool is_mcq = rec.category == SkillCategory::mcqAnalyzing ||
                rec.category == SkillCategory::mcqEvaluating ||
                rec.category == SkillCategory::mcqCreating;
  return is_mcq ? "mcq-" + rec.task_type : rec.task_type;
}

struct CorpusResult {
  std::vector<TaskRecord> records;
  CorpusManifest manifest;
};

namespace detail {

inline CodeGridPair make_base_pair(std::uint64_t master, int index) {
  const std::vector<std::string>& sketches = curriculum_sketches();
  const std::string& sketch = sketches[static_cast<std::size_t>(index) % sketches.size()];
  for (int attempt = 0; attempt < 32; ++attempt) {
    Rng rng(derive_seed(master, "base-pair",
                        static_cast<std::uint64_t>(index) * 64 +
                            static_cast<std::uint64_t>(attempt)));
    PairOptions popts;
    popts.code_spec.sketch = sketch;
    try {
      return sample_pair(popts, rng);
    } catch (const Error&) {
    }
  }
  throw Error("base pair synthesis failed for sketch '" + sketch + "'");
}

struct GenSlot {
  enum Kind { bundle, mcq, basic } kind = bundle;
  std::uint64_t index = 0;      // per-tag slot number
  McqLevel level = McqLevel::analyzing;
  SkillType basic_type = SkillType::locateAvatar;
};

inline std::string slot_tag(const GenSlot& slot) {
  switch (slot.kind) {
    case GenSlot::bundle: return "bundle";
    case GenSlot::mcq:
      switch (slot.level) {
        case McqLevel::analyzing: return "mcq-analyzing";
        case McqLevel::evaluating: return "mcq-evaluating";
        case McqLevel::creating: return "mcq-creating";
      }
      return "mcq";
    case GenSlot::basic:
      return std::string("basics-") + skill_type_name(slot.basic_type);
  }
  return "slot";
}

inline std::vector<McqType> level_types(McqLevel level) {
  std::vector<McqType> out;
  for (McqType t : kAllMcqTypes)
    if (mcq_level(t) == level) out.push_back(t);
  return out;
}

// One slot's records. Bundle slots propagate failures (a missing deterministic
// category must not be silent); sampled slots absorb rejections and may come
// back empty.
inline std::vector<TaskRecord> run_slot(const GenSlot& slot,
                                        const DistributionPlan& plan,
                                        std::uint64_t master,
                                        const std::vector<CodeGridPair>& pairs) {
  std::uint64_t seed = derive_seed(master, slot_tag(slot), slot.index);
  Rng rng(seed);
  std::vector<TaskRecord> out;
  auto stamp_seed = [&](TaskRecord rec) {
    rec.meta.seed = to_hex16(seed);
    out.push_back(std::move(rec));
  };
  switch (slot.kind) {
    case GenSlot::bundle: {
      const CodeGridPair& pair = pairs[slot.index];
      try {
        stamp_seed(solution_record(pair, rng.pick(pair.grids)));
        stamp_seed(gen_tracing(SkillType::sequenceTrace, pair, rng));
        stamp_seed(gen_tracing(SkillType::codeTrace, pair, rng));
        stamp_seed(gen_gridsynth(SkillType::placeAvatar, pair, rng));
        stamp_seed(gen_gridsynth(SkillType::placeGoal, pair, rng));
        stamp_seed(gen_gridsynth(SkillType::placeAvatarGoal, pair, rng));
        stamp_seed(gen_gridsynth(SkillType::designAll, pair, rng));
        for (TaskRecord& rec :
             gen_place_walls_batch(pair, rng, plan.place_walls_per_pair))
          stamp_seed(std::move(rec));
      } catch (const Error& e) {
        throw Error("base pair " + std::to_string(slot.index) +
                    ": deterministic task generation failed: " + e.what());
      }
      break;
    }
    case GenSlot::mcq: {
      std::vector<McqType> types = level_types(slot.level);
      McqType type = types[slot.index % types.size()];
      for (int attempt = 0; attempt < 8; ++attempt) {
        const CodeGridPair& pair =
            pairs[rng.below(static_cast<std::uint64_t>(pairs.size()))];
        try {
          stamp_seed(mcq_record(gen_mcq(type, pair, rng), pair));
          break;
        } catch (const Error&) {
        }
      }
      break;
    }
    case GenSlot::basic: {
      for (int attempt = 0; attempt < 25; ++attempt) {
        Grid grid = sample_basic_grid(rng);
        if (slot.basic_type == SkillType::locateGoal && !grid.goal) continue;
        try {
          stamp_seed(gen_basic(slot.basic_type, grid, rng));
          break;
        } catch (const Error&) {
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace detail

inline CorpusResult generate_corpus(const DistributionPlan& plan,
                                    std::uint64_t master_seed,
                                    const GenerateOptions& opts = {}) {
  if (plan.base_pairs < 0) throw Error("plan has a negative base pair count");
  int jobs = std::max(1, opts.jobs);

  // run a batch of indexed jobs on `jobs` threads, any order, first error wins
  auto parallel_for = [&](std::size_t count, auto&& body) {
    if (count == 0) return;
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    if (jobs == 1) {
      work();
    } else {
      std::vector<std::thread> threads;
      for (int t = 0; t < jobs; ++t) threads.emplace_back(work);
      for (std::thread& t : threads) t.join();
    }
    if (error) std::rethrow_exception(error);
  };

  // phase 1: base pairs
  std::vector<CodeGridPair> pairs(static_cast<std::size_t>(plan.base_pairs));
  parallel_for(pairs.size(), [&](std::size_t i) {
    pairs[i] = detail::make_base_pair(master_seed, static_cast<int>(i));
  });

  // phase 2: record slots in final output order
  std::vector<detail::GenSlot> slots;
  for (int i = 0; i < plan.base_pairs; ++i)
    slots.push_back({detail::GenSlot::bundle, static_cast<std::uint64_t>(i),
                     McqLevel::analyzing, SkillType::locateAvatar});
  auto push_mcq = [&](McqLevel level, int count) {
    for (int i = 0; i < count; ++i)
      slots.push_back({detail::GenSlot::mcq, static_cast<std::uint64_t>(i), level,
                       SkillType::locateAvatar});
  };
  push_mcq(McqLevel::analyzing, plan.mcq_analyzing);
  push_mcq(McqLevel::evaluating, plan.mcq_evaluating);
  push_mcq(McqLevel::creating, plan.mcq_creating);
  auto push_basic = [&](SkillType type, int count) {
    for (int i = 0; i < count; ++i)
      slots.push_back({detail::GenSlot::basic, static_cast<std::uint64_t>(i),
                       McqLevel::analyzing, type});
  };
  push_basic(SkillType::locateAvatar, plan.basics_locate_avatar);
  push_basic(SkillType::locateGoal, plan.basics_locate_goal);
  push_basic(SkillType::applyAction, plan.basics_apply_action);
  push_basic(SkillType::senseCondition, plan.basics_sense_condition);

  std::vector<std::vector<TaskRecord>> produced(slots.size());
  parallel_for(slots.size(), [&](std::size_t i) {
    produced[i] = detail::run_slot(slots[i], plan, master_seed, pairs);
  });

  // assemble in slot order, optionally stripping explanations, deduplicating
  CorpusResult result;
  result.manifest.base_pairs = plan.base_pairs;
  result.manifest.master_seed = to_hex16(master_seed);
  auto tally_key = [&](const detail::GenSlot& slot) -> std::string {
    if (slot.kind == detail::GenSlot::mcq)
      return skill_category_name(mcq_category(slot.level));
    return std::string("basics-") + skill_type_name(slot.basic_type);
  };
  std::set<std::string> seen_ids;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const detail::GenSlot& slot = slots[i];
    if (slot.kind != detail::GenSlot::bundle) {
      CategoryTally& tally = result.manifest.sampled[tally_key(slot)];
      ++tally.attempted;
      tally.accepted += static_cast<long>(produced[i].size());
    }
    for (TaskRecord& rec : produced[i]) {
      if (!opts.with_explanations && rec.explanation) {
        rec.explanation.reset();
        finalize_record_id(rec);
      }
      if (!seen_ids.insert(rec.id).second) {
        ++result.manifest.duplicates_removed;
        continue;
      }
      ++result.manifest.category_counts[skill_category_name(rec.category)];
      ++result.manifest.type_counts[record_type_key(rec)];
      result.records.push_back(std::move(rec));
    }
  }
  result.manifest.total = static_cast<long>(result.records.size());
  return result;
}

// ---------------------------------------------------------------------------
// Stats and manifest rendering
// ---------------------------------------------------------------------------

struct CorpusStats {
  long total = 0;
  std::map<std::string, long> category_counts;
  std::map<std::string, long> type_counts;
  std::map<std::string, long> concept_counts;
};

inline CorpusStats corpus_stats(const std::vector<TaskRecord>& records) {
  CorpusStats stats;
  stats.total = static_cast<long>(records.size());
  for (const TaskRecord& rec : records) {
    ++stats.category_counts[skill_category_name(rec.category)];
    ++stats.type_counts[record_type_key(rec)];
    ++stats.concept_counts[rec.meta.concept_tag];
  }
  return stats;
}

namespace detail {

inline std::string two_decimals(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", value);
  return buffer;
}

inline void stats_row(std::string& out, const std::string& label, long count,
                      long total) {
  out += label;
  if (label.size() < 34) out += std::string(34 - label.size(), ' ');
  std::string size_text = std::to_string(count);
  if (size_text.size() < 8) out += std::string(8 - size_text.size(), ' ');
  out += size_text;
  out += "  " + two_decimals(percentage_of(count, total)) + "%\n";
}

}  // namespace detail

// A Size / Percentage table over categories with per-type sub-rows.
inline std::string format_stats_table(const CorpusStats& stats) {
  auto type_count = [&](const char* name) {
    auto it = stats.type_counts.find(name);
    return it == stats.type_counts.end() ? 0L : it->second;
  };
  auto category_count = [&](SkillCategory c) {
    auto it = stats.category_counts.find(skill_category_name(c));
    return it == stats.category_counts.end() ? 0L : it->second;
  };
  std::string out;
  out += "Synthetic data                        Size  Percentage\n";
  detail::stats_row(out, "Solution synthesis",
                    category_count(SkillCategory::solutionSynthesis), stats.total);
  long mcq_total = category_count(SkillCategory::mcqAnalyzing) +
                   category_count(SkillCategory::mcqEvaluating) +
                   category_count(SkillCategory::mcqCreating);
  detail::stats_row(out, "Multi-choice questions (MCQ)", mcq_total, stats.total);
  detail::stats_row(out, "  Analyzing MCQ",
                    category_count(SkillCategory::mcqAnalyzing), stats.total);
  detail::stats_row(out, "  Evaluating MCQ",
                    category_count(SkillCategory::mcqEvaluating), stats.total);
  detail::stats_row(out, "  Creating MCQ",
                    category_count(SkillCategory::mcqCreating), stats.total);
  detail::stats_row(out, "Fine-grained: Basics",
                    category_count(SkillCategory::basics), stats.total);
  detail::stats_row(out, "  Locate avatar", type_count("locateAvatar"), stats.total);
  detail::stats_row(out, "  Locate goal", type_count("locateGoal"), stats.total);
  detail::stats_row(out, "  Apply action", type_count("applyAction"), stats.total);
  detail::stats_row(out, "  Sense condition", type_count("senseCondition"),
                    stats.total);
  detail::stats_row(out, "Fine-grained: Tracing",
                    category_count(SkillCategory::tracing), stats.total);
  detail::stats_row(out, "  Sequence trace", type_count("sequenceTrace"), stats.total);
  detail::stats_row(out, "  Code trace", type_count("codeTrace"), stats.total);
  detail::stats_row(out, "Fine-grained: Grid synthesis",
                    category_count(SkillCategory::gridSynthesis), stats.total);
  detail::stats_row(out, "  Place avatar", type_count("placeAvatar"), stats.total);
  detail::stats_row(out, "  Place goal", type_count("placeGoal"), stats.total);
  detail::stats_row(out, "  Place avatar+goal", type_count("placeAvatarGoal"),
                    stats.total);
  detail::stats_row(out, "  Place walls", type_count("placeWalls"), stats.total);
  detail::stats_row(out, "  Design all", type_count("designAll"), stats.total);
  detail::stats_row(out, "Total", stats.total, stats.total);
  return out;
}

inline nlohmann::json manifest_to_json(const CorpusManifest& m) {
  nlohmann::json sampled = nlohmann::json::object();
  for (const auto& [key, tally] : m.sampled)
    sampled[key] = {{"attempted", tally.attempted}, {"accepted", tally.accepted}};
  nlohmann::json categories = nlohmann::json::object();
  for (const auto& [key, count] : m.category_counts) {
    categories[key] = {{"count", count},
                       {"percentage", percentage_of(count, m.total)}};
  }
  return nlohmann::json{{"basePairs", m.base_pairs},
                        {"categories", categories},
                        {"duplicatesRemoved", m.duplicates_removed},
                        {"masterSeed", m.master_seed},
                        {"sampled", sampled},
                        {"schema", kCorpusSchema},
                        {"total", m.total},
                        {"typeCounts", m.type_counts},
                        {"version", kCorpusVersion}};
}

}  // namespace vpkit
