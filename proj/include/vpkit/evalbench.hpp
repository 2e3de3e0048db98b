#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <semaphore>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "vpkit/dsl.hpp"
#include "vpkit/emulator.hpp"
#include "vpkit/grid.hpp"
#include "vpkit/records.hpp"
#include "vpkit/rng.hpp"

namespace vpkit {

// ---------------------------------------------------------------------------
// Test suites. A suite holds solution-synthesis items (write a code for this
// grid under store/size limits) and multiple-choice items (pick a label).
// Items carry the exact prompt text shown to a model; hand-built solution
// items may leave it empty and have one rendered on demand.
// ---------------------------------------------------------------------------

struct SolutionItem {
  Grid grid;
  std::set<std::string> store;
  int max_size = 0;
};

struct McqItem {
  std::array<std::string, 4> options;
  char correct_label = 'A';
};

struct SuiteItem {
  std::string id;
  std::string concept_tag;
  std::string level_tag;  // "Analyzing" / "Evaluating" / "Creating" or empty
  std::string prompt;
  std::variant<SolutionItem, McqItem> payload;
};

struct TestSuite {
  std::string name;
  std::vector<SuiteItem> items;
};

// Assessment items are conventionally grouped by position: 1-7 analyzing,
// 8-14 evaluating, 15-21 creating.
inline std::string ace_level_tag(int index_one_based) {
  if (index_one_based >= 1 && index_one_based <= 7) return "Analyzing";
  if (index_one_based >= 8 && index_one_based <= 14) return "Evaluating";
  if (index_one_based >= 15 && index_one_based <= 21) return "Creating";
  return "";
}

inline const char* solution_item_description() {
  return "Write a code that solves the grid below. Use only the allowed blocks, "
         "and use at most the given number of blocks in total.";
}

inline std::string solution_prompt(const SolutionItem& item) {
  std::string out = solution_item_description();
  out += "\n";
  std::string store_text;
  for (const std::string& block : item.store) {
    if (!store_text.empty()) store_text += ", ";
    store_text += block;
  }
  prompt::append_value(out, "store", store_text);
  prompt::append_value(out, "maxSize", std::to_string(item.max_size));
  prompt::append_block(out, "grid", serialize_grid(item.grid));
  return out;
}

inline std::string item_prompt(const SuiteItem& item) {
  if (!item.prompt.empty()) return item.prompt;
  if (const auto* sol = std::get_if<SolutionItem>(&item.payload))
    return solution_prompt(*sol);
  throw Error("suite item '" + item.id + "' has no prompt text");
}

struct EvalCheck {
  bool ok = false;
  std::string failure;
};

inline EvalCheck validate_suite(const TestSuite& suite) {
  auto fail = [&](const std::string& why) { return EvalCheck{false, why}; };
  if (suite.name.empty()) return fail("suite has no name");
  std::set<std::string> ids;
  for (const SuiteItem& item : suite.items) {
    if (item.id.empty()) return fail("an item has an empty id");
    if (!ids.insert(item.id).second) return fail("duplicate item id " + item.id);
    if (const auto* sol = std::get_if<SolutionItem>(&item.payload)) {
      try {
        validate_grid(sol->grid);
      } catch (const Error& e) {
        return fail(item.id + ": " + e.what());
      }
      if (sol->store.empty()) return fail(item.id + ": empty store");
      if (sol->max_size < 1) return fail(item.id + ": non-positive maxSize");
    } else {
      const McqItem& mcq = std::get<McqItem>(item.payload);
      if (mcq.correct_label < 'A' || mcq.correct_label > 'D')
        return fail(item.id + ": correct label outside A-D");
      for (const std::string& option : mcq.options)
        if (option.empty()) return fail(item.id + ": empty option text");
      if (item.prompt.empty()) return fail(item.id + ": choice item lacks a prompt");
    }
  }
  return {true, ""};
}

// ---------------------------------------------------------------------------
// Suite (de)serialization: a single JSON document with grids embedded in the
// grid text codec.
// ---------------------------------------------------------------------------

inline nlohmann::json suite_to_json(const TestSuite& suite) {
  nlohmann::json items = nlohmann::json::array();
  for (const SuiteItem& item : suite.items) {
    nlohmann::json j{{"id", item.id},
                     {"concept", item.concept_tag},
                     {"level", item.level_tag},
                     {"prompt", item.prompt}};
    if (const auto* sol = std::get_if<SolutionItem>(&item.payload)) {
      j["kind"] = "solution";
      j["grid"] = serialize_grid(sol->grid);
      j["store"] = std::vector<std::string>(sol->store.begin(), sol->store.end());
      j["maxSize"] = sol->max_size;
    } else {
      const McqItem& mcq = std::get<McqItem>(item.payload);
      j["kind"] = "mcq";
      j["options"] = mcq.options;
      j["answer"] = std::string(1, mcq.correct_label);
    }
    items.push_back(std::move(j));
  }
  return nlohmann::json{{"suite", suite.name}, {"items", items}};
}

inline TestSuite suite_from_json(const nlohmann::json& j) {
  TestSuite suite;
  try {
    suite.name = j.at("suite").get<std::string>();
    for (const nlohmann::json& ij : j.at("items")) {
      SuiteItem item;
      item.id = ij.at("id").get<std::string>();
      item.concept_tag = ij.value("concept", "");
      item.level_tag = ij.value("level", "");
      item.prompt = ij.value("prompt", "");
      std::string kind = ij.at("kind").get<std::string>();
      if (kind == "solution") {
        SolutionItem sol;
        sol.grid = parse_grid(ij.at("grid").get<std::string>());
        for (const nlohmann::json& block : ij.at("store"))
          sol.store.insert(block.get<std::string>());
        sol.max_size = ij.at("maxSize").get<int>();
        item.payload = std::move(sol);
      } else if (kind == "mcq") {
        McqItem mcq;
        const nlohmann::json& options = ij.at("options");
        if (options.size() != 4) throw Error("choice items need exactly 4 options");
        for (std::size_t i = 0; i < 4; ++i)
          mcq.options[i] = options[i].get<std::string>();
        std::string answer = ij.at("answer").get<std::string>();
        if (answer.size() != 1) throw Error("answer must be a single label");
        mcq.correct_label = answer[0];
        item.payload = std::move(mcq);
      } else {
        throw Error("unknown item kind '" + kind + "'");
      }
      suite.items.push_back(std::move(item));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed suite: ") + e.what());
  }
  EvalCheck check = validate_suite(suite);
  if (!check.ok) throw Error("invalid suite: " + check.failure);
  return suite;
}

inline TestSuite read_suite(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed suite: ") + e.what());
  }
  return suite_from_json(j);
}

inline void write_suite(std::ostream& out, const TestSuite& suite) {
  out << suite_to_json(suite).dump(2) << "\n";
}

// Builds an evaluation suite straight from corpus records: solution records
// re-read their store/maxSize/grid sections, choice records re-read their
// rendered options; targets become the answer key.
inline TestSuite suite_from_records(const std::string& name,
                                    const std::vector<TaskRecord>& records) {
  TestSuite suite;
  suite.name = name;
  for (const TaskRecord& rec : records) {
    SuiteItem item;
    item.id = rec.id;
    item.concept_tag = rec.meta.concept_tag;
    item.prompt = rec.prompt;
    switch (rec.category) {
      case SkillCategory::solutionSynthesis: {
        SolutionItem sol;
        auto store_text = prompt::extract_value(rec.prompt, "store");
        auto max_text = prompt::extract_value(rec.prompt, "maxSize");
        auto grid_text = prompt::extract_block(rec.prompt, "grid");
        if (!store_text || !max_text || !grid_text)
          throw Error("record " + rec.id + " lacks solution prompt sections");
        std::size_t start = 0;
        while (start < store_text->size()) {
          std::size_t comma = store_text->find(", ", start);
          sol.store.insert(comma == std::string::npos
                               ? store_text->substr(start)
                               : store_text->substr(start, comma - start));
          if (comma == std::string::npos) break;
          start = comma + 2;
        }
        sol.max_size = std::stoi(*max_text);
        sol.grid = parse_grid(*grid_text + "\n");
        item.payload = std::move(sol);
        break;
      }
      case SkillCategory::mcqAnalyzing:
      case SkillCategory::mcqEvaluating:
      case SkillCategory::mcqCreating: {
        McqItem mcq;
        for (int i = 0; i < 4; ++i) {
          char label = static_cast<char>('A' + i);
          std::string marker = "\n" + std::string(1, label) + ") ";
          std::size_t at = rec.prompt.find(marker);
          if (at == std::string::npos)
            throw Error("record " + rec.id + " lacks option " +
                        std::string(1, label));
          std::size_t end = rec.prompt.find('\n', at + marker.size());
          mcq.options[static_cast<std::size_t>(i)] = rec.prompt.substr(
              at + marker.size(),
              end == std::string::npos ? std::string::npos
                                       : end - at - marker.size());
        }
        if (rec.target.size() != 1)
          throw Error("record " + rec.id + " has a non-label target");
        mcq.correct_label = rec.target[0];
        if (rec.category == SkillCategory::mcqAnalyzing) item.level_tag = "Analyzing";
        if (rec.category == SkillCategory::mcqEvaluating) item.level_tag = "Evaluating";
        if (rec.category == SkillCategory::mcqCreating) item.level_tag = "Creating";
        item.payload = std::move(mcq);
        break;
      }
      default:
        // skill-drill records score by exact target text, which is outside the
        // benchmark protocol; skip them
        continue;
    }
    suite.items.push_back(std::move(item));
  }
  return suite;
}

// ---------------------------------------------------------------------------
// Answer extraction and scoring
// ---------------------------------------------------------------------------

enum class ScoreReason { none, parse, store, size, solve, noAnswer, wrong, transport };

inline const char* reason_name(ScoreReason r) {
  switch (r) {
    case ScoreReason::none: return "none";
    case ScoreReason::parse: return "parse";
    case ScoreReason::store: return "store";
    case ScoreReason::size: return "size";
    case ScoreReason::solve: return "solve";
    case ScoreReason::noAnswer: return "noAnswer";
    case ScoreReason::wrong: return "wrong";
    case ScoreReason::transport: return "transport";
  }
  return "none";
}

struct ItemScore {
  bool correct = false;
  ScoreReason reason = ScoreReason::none;
};

namespace detail {

inline bool codeish_line(const std::string& line) {
  static const std::set<std::string> keywords = {
      "move",        "turnLeft", "turnRight", "pickMarker", "putMarker",
      "repeat",      "repeatUntil", "while",  "if",         "else"};
  std::size_t i = line.find_first_not_of(" \t");
  if (i == std::string::npos) return false;
  std::size_t j = i;
  while (j < line.size() &&
         (std::isalnum(static_cast<unsigned char>(line[j])) != 0))
    ++j;
  return keywords.count(line.substr(i, j - i)) > 0;
}

inline bool blank_line(const std::string& line) {
  return line.find_first_not_of(" \t") == std::string::npos;
}

inline std::string trimmed(const std::string& line) {
  std::size_t a = line.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = line.find_last_not_of(" \t");
  return line.substr(a, b - a + 1);
}

inline std::string dedent_join(const std::vector<std::string>& lines,
                               std::size_t from, std::size_t to) {
  std::size_t indent = std::string::npos;
  for (std::size_t k = from; k < to; ++k)
    indent = std::min(indent, lines[k].find_first_not_of(' '));
  std::string out;
  for (std::size_t k = from; k < to; ++k) {
    if (k > from) out += "\n";
    out += lines[k].size() >= indent ? lines[k].substr(indent) : lines[k];
  }
  return out;
}

}  // namespace detail

// Finds the last well-formed code block in free-form text. Candidates are
// anchored at "when run:" header lines and run through the block-keyword
// lines that follow (blank lines and uniform extra indentation, e.g. inside
// a fenced restatement, are tolerated). Later headers win; a trailing prose
// line that happens to start with a keyword is shaved off and retried.
inline std::optional<Code> extract_last_code(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);

  std::vector<std::size_t> headers;
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (detail::trimmed(lines[i]) == "when run:") headers.push_back(i);

  int attempts_left = 400;
  for (auto it = headers.rbegin(); it != headers.rend(); ++it) {
    std::size_t header = *it;
    std::size_t last_code = header;
    for (std::size_t i = header + 1; i < lines.size(); ++i) {
      if (detail::blank_line(lines[i])) continue;
      if (!detail::codeish_line(lines[i])) break;
      last_code = i;
    }
    for (std::size_t end = last_code + 1; end > header; --end) {
      if (--attempts_left < 0) return std::nullopt;
      try {
        return parse_code(detail::dedent_join(lines, header, end));
      } catch (const Error&) {
      }
    }
  }
  return std::nullopt;
}

// Finds the last standalone option label. Uppercase A-D counts whenever it is
// not embedded in a word; lowercase only in the "b)" form, so prose articles
// never match.
inline std::optional<char> extract_last_label(const std::string& text) {
  std::optional<char> found;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    bool upper = c >= 'A' && c <= 'D';
    bool lower = c >= 'a' && c <= 'd';
    if (!upper && !lower) continue;
    if (i > 0 && std::isalnum(static_cast<unsigned char>(text[i - 1])) != 0)
      continue;
    char next = i + 1 < text.size() ? text[i + 1] : '\0';
    if (std::isalnum(static_cast<unsigned char>(next)) != 0) continue;
    if (upper)
      found = c;
    else if (next == ')')
      found = static_cast<char>(c - 'a' + 'A');
  }
  return found;
}

inline ItemScore score_solution(const SolutionItem& item, const std::string& response) {
  std::optional<Code> code = extract_last_code(response);
  if (!code) return {false, ScoreReason::parse};
  for (const std::string& block : code_blocks(*code))
    if (!item.store.count(block)) return {false, ScoreReason::store};
  if (code_size(*code) > item.max_size) return {false, ScoreReason::size};
  bool solved = false;
  try {
    solved = solves(*code, item.grid);
  } catch (const Error&) {
    solved = false;
  }
  return solved ? ItemScore{true, ScoreReason::none}
                : ItemScore{false, ScoreReason::solve};
}

inline ItemScore score_mcq(const McqItem& item, const std::string& response) {
  std::optional<char> label = extract_last_label(response);
  if (!label) return {false, ScoreReason::noAnswer};
  if (*label == item.correct_label) return {true, ScoreReason::none};
  return {false, ScoreReason::wrong};
}

inline ItemScore score_item(const SuiteItem& item, const std::string& response) {
  return std::visit(
      Overload{[&](const SolutionItem& sol) { return score_solution(sol, response); },
               [&](const McqItem& mcq) { return score_mcq(mcq, response); }},
      item.payload);
}

// ---------------------------------------------------------------------------
// Response sources
// ---------------------------------------------------------------------------

struct FetchResult {
  bool ok = true;
  std::string text;
};

using ResponseSource =
    std::function<FetchResult(const TestSuite&, const SuiteItem&, std::uint64_t)>;

inline char modal_correct_label(const TestSuite& suite) {
  std::array<int, 4> counts{};
  for (const SuiteItem& item : suite.items)
    if (const auto* mcq = std::get_if<McqItem>(&item.payload))
      if (mcq->correct_label >= 'A' && mcq->correct_label <= 'D')
        ++counts[static_cast<std::size_t>(mcq->correct_label - 'A')];
  int best = 0;
  for (int i = 1; i < 4; ++i)
    if (counts[static_cast<std::size_t>(i)] > counts[static_cast<std::size_t>(best)])
      best = i;
  return static_cast<char>('A' + best);
}

// The no-skill reference strategy: random tokens for code-writing items
// (never parseable, so accuracy is 0 by construction) and the suite's most
// frequent correct label for choice items.
inline ResponseSource naive_source() {
  return [](const TestSuite& suite, const SuiteItem& item,
            std::uint64_t seed) -> FetchResult {
    if (std::holds_alternative<McqItem>(item.payload))
      return {true, std::string("My answer is ") + modal_correct_label(suite) + "."};
    Rng rng(derive_seed(seed, "naive-tokens", fnv1a64(item.id)));
    std::string text;
    for (int t = 0; t < 6; ++t) text += to_hex16(rng.next_u64()) + " ";
    return {true, text};
  };
}

// One response per item id, JSON lines: {"id": ..., "response": ...}.
inline std::map<std::string, std::string> read_responses(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      out[j.at("id").get<std::string>()] = j.at("response").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error("responses line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline ResponseSource responses_source(std::map<std::string, std::string> responses) {
  return [responses = std::move(responses)](const TestSuite&, const SuiteItem& item,
                                            std::uint64_t) -> FetchResult {
    auto it = responses.find(item.id);
    return {true, it == responses.end() ? std::string() : it->second};
  };
}

// ---------------------------------------------------------------------------
// Endpoint mode: a minimal chat-style completion request. Requests carry the
// model name, temperature (0 by default), the trial seed, and a single user
// message; bounded retries with exponential backoff, and a bounded number of
// in-flight requests.
// ---------------------------------------------------------------------------

struct EndpointOptions {
  std::string url;  // scheme://host:port
  std::string model;
  std::string path = "/v1/chat/completions";
  double temperature = 0.0;
  int concurrency = 4;
  int max_retries = 3;
  int backoff_ms = 250;
  int timeout_seconds = 120;
};

inline ResponseSource endpoint_source(const EndpointOptions& opts) {
  auto gate = std::make_shared<std::counting_semaphore<>>(
      std::max(1, opts.concurrency));
  return [opts, gate](const TestSuite&, const SuiteItem& item,
                      std::uint64_t seed) -> FetchResult {
    gate->acquire();
    struct Release {
      std::counting_semaphore<>* sem;
      ~Release() { sem->release(); }
    } release{gate.get()};

    nlohmann::json request{
        {"model", opts.model},
        {"temperature", opts.temperature},
        {"seed", seed},
        {"messages",
         nlohmann::json::array(
             {nlohmann::json{{"role", "user"}, {"content", item_prompt(item)}}})}};
    std::string body = request.dump();
    for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
      if (attempt > 0)
        std::this_thread::sleep_for(
            std::chrono::milliseconds(opts.backoff_ms << (attempt - 1)));
      httplib::Client client(opts.url);
      client.set_connection_timeout(opts.timeout_seconds);
      client.set_read_timeout(opts.timeout_seconds);
      httplib::Result res = client.Post(opts.path, body, "application/json");
      if (!res || res->status != 200) continue;
      try {
        nlohmann::json j = nlohmann::json::parse(res->body);
        return {true,
                j.at("choices").at(0).at("message").at("content").get<std::string>()};
      } catch (const nlohmann::json::exception&) {
        continue;  // malformed payload; retry like any other failure
      }
    }
    return {false, ""};
  };
}

// ---------------------------------------------------------------------------
// Evaluation runs and reports
// ---------------------------------------------------------------------------

struct TestResult {
  std::string name;
  int items = 0;
  std::vector<double> trials;  // one accuracy per seed, in [0, 100]
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::map<std::string, double> per_concept;  // pooled across seeds
  std::map<std::string, double> per_level;
  std::map<std::string, long> reason_counts;  // incorrect items by reason
};

struct EvalReport {
  std::vector<TestResult> tests;
  std::vector<double> overall_trials;
  double overall_mean = 0.0;
  double overall_stderr = 0.0;
};

// Sample standard error across trials: sd(n-1 denominator) / sqrt(n).
inline void mean_and_stderr(const std::vector<double>& xs, double& mean,
                            double& stderr_out) {
  mean = 0.0;
  stderr_out = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  stderr_out = sd / std::sqrt(static_cast<double>(xs.size()));
}

struct EvalOptions {
  int jobs = 1;
};

inline EvalReport run_eval(const std::vector<TestSuite>& suites,
                           const ResponseSource& source,
                           const std::vector<std::uint64_t>& seeds,
                           const EvalOptions& opts = {}) {
  if (seeds.empty()) throw Error("run_eval needs at least one seed");
  int jobs = std::max(1, opts.jobs);

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

  EvalReport report;
  for (const TestSuite& suite : suites) {
    TestResult result;
    result.name = suite.name;
    result.items = static_cast<int>(suite.items.size());
    std::map<std::string, std::pair<long, long>> concept_hits, level_hits;
    for (std::uint64_t seed : seeds) {
      std::vector<ItemScore> scores(suite.items.size());
      parallel_for(suite.items.size(), [&](std::size_t i) {
        FetchResult fetched = source(suite, suite.items[i], seed);
        scores[i] = fetched.ok ? score_item(suite.items[i], fetched.text)
                               : ItemScore{false, ScoreReason::transport};
      });
      long correct = 0;
      for (std::size_t i = 0; i < scores.size(); ++i) {
        const SuiteItem& item = suite.items[i];
        if (scores[i].correct)
          ++correct;
        else
          ++result.reason_counts[reason_name(scores[i].reason)];
        auto& concept_entry = concept_hits[item.concept_tag];
        ++concept_entry.second;
        if (scores[i].correct) ++concept_entry.first;
        if (!item.level_tag.empty()) {
          auto& level_entry = level_hits[item.level_tag];
          ++level_entry.second;
          if (scores[i].correct) ++level_entry.first;
        }
      }
      result.trials.push_back(
          suite.items.empty() ? 0.0
                              : 100.0 * static_cast<double>(correct) /
                                    static_cast<double>(suite.items.size()));
    }
    mean_and_stderr(result.trials, result.mean, result.stderr_mean);
    for (const auto& [tag, hits] : concept_hits)
      result.per_concept[tag] =
          100.0 * static_cast<double>(hits.first) / static_cast<double>(hits.second);
    for (const auto& [tag, hits] : level_hits)
      result.per_level[tag] =
          100.0 * static_cast<double>(hits.first) / static_cast<double>(hits.second);
    report.tests.push_back(std::move(result));
  }

  for (std::size_t s = 0; s < seeds.size(); ++s) {
    double sum = 0.0;
    for (const TestResult& test : report.tests) sum += test.trials[s];
    report.overall_trials.push_back(
        report.tests.empty() ? 0.0 : sum / static_cast<double>(report.tests.size()));
  }
  mean_and_stderr(report.overall_trials, report.overall_mean, report.overall_stderr);
  return report;
}

inline EvalReport naive_baseline(const std::vector<TestSuite>& suites,
                                 const std::vector<std::uint64_t>& seeds = {1, 2, 3}) {
  return run_eval(suites, naive_source(), seeds);
}

inline EvalReport naive_baseline(const TestSuite& suite,
                                 const std::vector<std::uint64_t>& seeds = {1, 2, 3}) {
  return naive_baseline(std::vector<TestSuite>{suite}, seeds);
}

namespace detail {

inline std::string one_decimal(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.1f", value);
  return buffer;
}

}  // namespace detail

inline std::string format_report(const EvalReport& report) {
  std::string out = "Test                            Items  Accuracy\n";
  auto row = [&](const std::string& name, int items, double mean, double se) {
    std::string label = name;
    if (label.size() < 32) label += std::string(32 - label.size(), ' ');
    std::string count = items >= 0 ? std::to_string(items) : "";
    if (count.size() < 5) count = std::string(5 - count.size(), ' ') + count;
    out += label + count + "  " + detail::one_decimal(mean) + " (" +
           detail::one_decimal(se) + ")\n";
  };
  for (const TestResult& test : report.tests) {
    row(test.name, test.items, test.mean, test.stderr_mean);
    for (const auto& [tag, acc] : test.per_level)
      out += "  level " + tag + ": " + detail::one_decimal(acc) + "\n";
    for (const auto& [tag, acc] : test.per_concept)
      out += "  concept " + tag + ": " + detail::one_decimal(acc) + "\n";
    long transport = 0;
    auto it = test.reason_counts.find("transport");
    if (it != test.reason_counts.end()) transport = it->second;
    if (transport > 0)
      out += "  transport failures: " + std::to_string(transport) + "\n";
  }
  row("Overall", -1, report.overall_mean, report.overall_stderr);
  return out;
}

inline nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json tests = nlohmann::json::array();
  for (const TestResult& test : report.tests) {
    tests.push_back(nlohmann::json{{"name", test.name},
                                   {"items", test.items},
                                   {"trials", test.trials},
                                   {"mean", test.mean},
                                   {"stderr", test.stderr_mean},
                                   {"perConcept", test.per_concept},
                                   {"perLevel", test.per_level},
                                   {"reasons", test.reason_counts}});
  }
  return nlohmann::json{{"tests", tests},
                        {"overallTrials", report.overall_trials},
                        {"overallMean", report.overall_mean},
                        {"overallStderr", report.overall_stderr}};
}

}  // namespace vpkit
