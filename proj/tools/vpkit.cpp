// vpkit command-line front end. Subcommands: generate, emulate, validate,
// eval, stats. Exit codes: 0 success, 1 usage error, 2 validation failure,
// 3 transport failure. A config file (INI/TOML via --config) supplies
// defaults; explicit flags override it.
#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "vpkit/dataset.hpp"
#include "vpkit/evalbench.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitTransport = 3;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw vpkit::Error("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct GenerateArgs {
  int base_pairs = 1;
  std::uint64_t seed = 0;
  std::string plan_file;
  std::string out_dir = ".";
  bool with_explanations = true;
  int jobs = 1;
  bool base_pairs_given = false;
};

int run_generate(const GenerateArgs& args) {
  vpkit::DistributionPlan plan;
  if (!args.plan_file.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text_file(args.plan_file));
    } catch (const nlohmann::json::exception& e) {
      throw vpkit::Error("malformed plan file: " + std::string(e.what()));
    }
    plan = vpkit::plan_from_json(j, args.base_pairs);
    if (args.base_pairs_given) plan.base_pairs = args.base_pairs;
  } else {
    plan = vpkit::default_plan(args.base_pairs);
  }

  vpkit::GenerateOptions opts;
  opts.jobs = args.jobs;
  opts.with_explanations = args.with_explanations;
  vpkit::CorpusResult result = vpkit::generate_corpus(plan, args.seed, opts);

  std::filesystem::create_directories(args.out_dir);
  std::string corpus_path = args.out_dir + "/corpus.jsonl";
  std::string manifest_path = args.out_dir + "/manifest.json";
  vpkit::write_corpus(corpus_path, result.records);
  std::ofstream manifest(manifest_path, std::ios::binary);
  if (!manifest)
    throw vpkit::Error("cannot open manifest file for writing: " + manifest_path);
  manifest << vpkit::manifest_to_json(result.manifest).dump(2) << "\n";

  std::cout << vpkit::format_stats_table(vpkit::corpus_stats(result.records));
  std::cout << "wrote " << result.records.size() << " records to " << corpus_path
            << "\n";
  std::cout << "wrote manifest to " << manifest_path << "\n";
  return kExitOk;
}

struct EmulateArgs {
  std::string code_file;
  std::string grid_file;
  bool explain = false;
};

int run_emulate(const EmulateArgs& args) {
  vpkit::Code code = vpkit::parse_code(read_text_file(args.code_file));
  vpkit::Grid grid = vpkit::parse_grid(read_text_file(args.grid_file));
  vpkit::validate_grid(grid);
  vpkit::ExecutionResult result = vpkit::run(code, grid);
  if (args.explain) {
    std::cout << vpkit::render_explanation(result, code) << "\n";
    return kExitOk;
  }
  std::cout << "status: " << vpkit::run_status_name(result.status) << "\n";
  std::cout << "steps: " << result.steps_used << "\n";
  std::cout << "avatar locations: " << vpkit::trace_tokens(result) << "\n";
  std::string actions;
  for (vpkit::ActionKind a : result.actions) {
    if (!actions.empty()) actions += " ";
    actions += vpkit::action_name(a);
  }
  std::cout << "avatar actions: " << actions << "\n";
  return kExitOk;
}

struct ValidateArgs {
  std::string corpus_file;
};

int run_validate(const ValidateArgs& args) {
  std::vector<vpkit::TaskRecord> records = vpkit::read_corpus(args.corpus_file);
  long failures = 0;
  for (const vpkit::TaskRecord& rec : records) {
    vpkit::RecordCheck check = vpkit::validate_record(rec);
    if (!check.ok) {
      ++failures;
      std::cout << "record " << rec.id << ": " << check.failure << "\n";
    }
  }
  std::cout << "validated " << records.size() << " records; " << failures
            << " failure(s)\n";
  return failures > 0 ? kExitValidation : kExitOk;
}

struct EvalArgs {
  std::vector<std::string> suite_files;
  std::string responses_file;
  std::string endpoint_url;
  std::string model;
  double temperature = 0.0;
  int seeds = 3;
  int jobs = 1;
  int concurrency = 4;
  std::string report_file;
};

int run_eval_command(const EvalArgs& args) {
  bool have_responses = !args.responses_file.empty();
  bool have_endpoint = !args.endpoint_url.empty();
  if (have_responses == have_endpoint) {
    std::cerr << "eval needs exactly one of --responses or --endpoint\n";
    return kExitUsage;
  }
  if (have_endpoint && args.model.empty()) {
    std::cerr << "--endpoint requires --model\n";
    return kExitUsage;
  }
  if (args.seeds < 1) {
    std::cerr << "--seeds must be at least 1\n";
    return kExitUsage;
  }

  std::vector<vpkit::TestSuite> suites;
  for (const std::string& path : args.suite_files) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw vpkit::Error("cannot open suite file: " + path);
    suites.push_back(vpkit::read_suite(in));
  }

  vpkit::ResponseSource source;
  if (have_responses) {
    std::ifstream in(args.responses_file, std::ios::binary);
    if (!in) throw vpkit::Error("cannot open responses file: " + args.responses_file);
    source = vpkit::responses_source(vpkit::read_responses(in));
  } else {
    vpkit::EndpointOptions opts;
    opts.url = args.endpoint_url;
    opts.model = args.model;
    opts.temperature = args.temperature;
    opts.concurrency = args.concurrency;
    source = vpkit::endpoint_source(opts);
  }

  std::vector<std::uint64_t> seed_list;
  for (int s = 1; s <= args.seeds; ++s)
    seed_list.push_back(static_cast<std::uint64_t>(s));

  vpkit::EvalOptions eval_opts;
  eval_opts.jobs = args.jobs;
  vpkit::EvalReport report =
      vpkit::run_eval(suites, source, seed_list, eval_opts);
  std::cout << vpkit::format_report(report);

  if (!args.report_file.empty()) {
    std::ofstream out(args.report_file, std::ios::binary);
    if (!out) throw vpkit::Error("cannot open report file for writing: " + args.report_file);
    out << vpkit::report_to_json(report).dump(2) << "\n";
  }

  long transport_failures = 0;
  for (const vpkit::TestResult& test : report.tests) {
    auto it = test.reason_counts.find("transport");
    if (it != test.reason_counts.end()) transport_failures += it->second;
  }
  return transport_failures > 0 ? kExitTransport : kExitOk;
}

struct StatsArgs {
  std::string corpus_file;
};

int run_stats(const StatsArgs& args) {
  std::vector<vpkit::TaskRecord> records = vpkit::read_corpus(args.corpus_file);
  std::cout << vpkit::format_stats_table(vpkit::corpus_stats(records));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"visual-programming task toolkit"};
  app.set_config("--config", "",
                 "config file (INI/TOML sections per subcommand); flags override it");
  app.require_subcommand(1);

  GenerateArgs gen_args;
  CLI::App* gen = app.add_subcommand("generate", "generate a task corpus and manifest");
  CLI::Option* base_pairs_opt =
      gen->add_option("--base-pairs", gen_args.base_pairs,
                      "number of base (code, grid) pairs; every pair yields 12 records")
          ->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", gen_args.seed, "master seed");
  gen->add_option("--plan", gen_args.plan_file, "JSON distribution plan file")
      ->check(CLI::ExistingFile);
  gen->add_option("--out", gen_args.out_dir, "output directory");
  gen->add_flag("--with-explanations,!--no-explanations", gen_args.with_explanations,
                "attach worked traces to targets (default on)");
  gen->add_option("--jobs", gen_args.jobs, "worker threads; output is identical for any value")
      ->check(CLI::PositiveNumber);

  EmulateArgs emu_args;
  CLI::App* emu = app.add_subcommand("emulate", "run a code on a grid");
  emu->add_option("--code", emu_args.code_file, "code file")
      ->required()
      ->check(CLI::ExistingFile);
  emu->add_option("--grid", emu_args.grid_file, "grid file")
      ->required()
      ->check(CLI::ExistingFile);
  emu->add_flag("--explain", emu_args.explain, "print the worked-trace explanation");

  ValidateArgs val_args;
  CLI::App* val = app.add_subcommand("validate", "validate every record in a corpus");
  val->add_option("--corpus", val_args.corpus_file, "corpus file (JSON lines)")
      ->required()
      ->check(CLI::ExistingFile);

  EvalArgs eval_args;
  CLI::App* ev = app.add_subcommand("eval", "score model responses against test suites");
  ev->add_option("--suite", eval_args.suite_files, "suite file(s); repeatable")
      ->required()
      ->check(CLI::ExistingFile);
  ev->add_option("--responses", eval_args.responses_file,
                 "JSON-lines responses file (one {id, response} per line)");
  ev->add_option("--endpoint", eval_args.endpoint_url,
                 "chat-style completion endpoint, e.g. http://host:port");
  ev->add_option("--model", eval_args.model, "model name for endpoint requests");
  ev->add_option("--temperature", eval_args.temperature,
                 "sampling temperature for endpoint requests");
  ev->add_option("--seeds", eval_args.seeds, "number of trials (seeds 1..N)");
  ev->add_option("--jobs", eval_args.jobs, "scoring threads; report is identical for any value")
      ->check(CLI::PositiveNumber);
  ev->add_option("--concurrency", eval_args.concurrency,
                 "max in-flight endpoint requests")
      ->check(CLI::PositiveNumber);
  ev->add_option("--report", eval_args.report_file, "write the report as JSON here");

  StatsArgs stats_args;
  CLI::App* st = app.add_subcommand("stats", "summarize a corpus as a size/percentage table");
  st->add_option("--corpus", stats_args.corpus_file, "corpus file (JSON lines)")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  gen_args.base_pairs_given = base_pairs_opt->count() > 0;

  try {
    if (gen->parsed()) return run_generate(gen_args);
    if (emu->parsed()) return run_emulate(emu_args);
    if (val->parsed()) return run_validate(val_args);
    if (ev->parsed()) return run_eval_command(eval_args);
    if (st->parsed()) return run_stats(stats_args);
  } catch (const vpkit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}
