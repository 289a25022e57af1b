// Command-line front end: parse-domain, validate, oracle, run.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tomtrace/engine.hpp"
#include "tomtrace/epistemic.hpp"
#include "tomtrace/pipeline.hpp"

namespace {

using namespace tomtrace;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct ParsedScenario {
  DomainDef domain;
  ProblemDef problem;
  std::vector<GroundAction> plan;
};

// exit 1 on any parse failure, with position diagnostics on stderr
ParsedScenario load_scenario(const std::string& domain_path,
                             const std::string& problem_path,
                             const std::string& plan_path) {
  ParsedScenario sc;
  try {
    sc.domain = parse_domain_text(read_file(domain_path));
  } catch (const std::exception& e) {
    std::cerr << domain_path << ": " << e.what() << "\n";
    std::exit(1);
  }
  try {
    sc.problem = parse_problem_text(read_file(problem_path), sc.domain);
  } catch (const std::exception& e) {
    std::cerr << problem_path << ": " << e.what() << "\n";
    std::exit(1);
  }
  try {
    sc.plan = parse_plan_text(read_file(plan_path), *sc.domain.symbols);
  } catch (const std::exception& e) {
    std::cerr << plan_path << ": " << e.what() << "\n";
    std::exit(1);
  }
  return sc;
}

int cmd_parse_domain(const std::string& domain_path) {
  try {
    DomainDef domain = parse_domain_text(read_file(domain_path));
    std::cout << print_canonical(domain);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << domain_path << ": " << e.what() << "\n";
    return 1;
  }
}

int cmd_validate(const std::string& domain_path, const std::string& problem_path,
                 const std::string& plan_path, const std::string& out_path) {
  ParsedScenario sc = load_scenario(domain_path, problem_path, plan_path);
  GroundingContext ctx(sc.domain, sc.problem);
  Trace trace = validate_and_filter(initial_state(ctx), sc.plan, ctx);
  std::string rendered = render_trace(trace, *sc.domain.symbols);
  if (out_path.empty()) {
    std::cout << rendered;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write " << out_path << "\n";
      return 1;
    }
    out << rendered;
  }
  bool any_rejected = false;
  for (const TraceStep& s : trace.steps) {
    if (s.verdict == Verdict::Rejected) {
      any_rejected = true;
      std::cerr << "rejected step " << s.index << ": "
                << print_action(s.action, *sc.domain.symbols) << " : "
                << s.reject_reason << "\n";
    }
  }
  return any_rejected ? 2 : 0;
}

int cmd_oracle(const std::string& domain_path, const std::string& problem_path,
               const std::string& plan_path, const std::string& query_text) {
  ParsedScenario sc = load_scenario(domain_path, problem_path, plan_path);
  GroundingContext ctx(sc.domain, sc.problem);
  Trace trace = validate_and_filter(initial_state(ctx), sc.plan, ctx);
  try {
    BeliefQuery query = parse_query(query_text, ctx);
    QueryAnswer answer = answer_query(query, trace, ctx);
    std::cout << format_answer(answer, *sc.domain.symbols) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symbolic state tracking and belief QA for ToM narratives"};
  app.require_subcommand(1);

  auto* parse_cmd = app.add_subcommand("parse-domain", "parse and canonically print a domain");
  std::string pd_domain;
  parse_cmd->add_option("domain", pd_domain, "domain file")->required();

  auto* validate_cmd =
      app.add_subcommand("validate", "verify a plan and write the state trace");
  std::string v_domain, v_problem, v_plan, v_out;
  validate_cmd->add_option("domain", v_domain)->required();
  validate_cmd->add_option("problem", v_problem)->required();
  validate_cmd->add_option("plan", v_plan)->required();
  validate_cmd->add_option("--out", v_out, "trace output file (default stdout)");

  auto* oracle_cmd = app.add_subcommand("oracle", "answer a belief query from a plan");
  std::string o_domain, o_problem, o_plan, o_query;
  oracle_cmd->add_option("domain", o_domain)->required();
  oracle_cmd->add_option("problem", o_problem)->required();
  oracle_cmd->add_option("plan", o_plan)->required();
  oracle_cmd->add_option("query", o_query, "e.g. \"believes sally ball\"")->required();

  auto* run_cmd = app.add_subcommand("run", "run the LLM pipeline over a benchmark file");
  tomtrace::pipeline::PipelineConfig config;
  std::string mode = "replay";
  int sample = -1;
  run_cmd->add_option("--domain", config.domain_path, "predefined domain file");
  run_cmd->add_option("--instances", config.instances_path)->required();
  run_cmd->add_option("--mode", mode, "live|record|replay")
      ->check(CLI::IsMember({"live", "record", "replay"}));
  run_cmd->add_option("--cache", config.cache_dir, "response cache directory");
  run_cmd->add_option("--llm-endpoint", config.endpoint, "chat completion base URL");
  run_cmd->add_option("--model", config.model);
  run_cmd->add_option("--concurrency", config.concurrency);
  run_cmd->add_flag("--no-verification", config.no_verification,
                    "skip symbolic verification (ablation)");
  run_cmd->add_flag("--no-domain", config.no_domain,
                    "bootstrap the domain from one exemplar (ablation)");
  run_cmd->add_option("--sample-per-category", sample);
  run_cmd->add_option("--seed", config.seed);
  run_cmd->add_option("--out", config.out_path, "report output file");
  run_cmd->add_option("--traces", config.traces_dir, "per-instance trace directory");
  run_cmd->add_option("--prompts", config.prompts_dir, "prompt template directory");
  run_cmd->add_option("--field-map", config.field_map_path, "benchmark field adapter");

  CLI11_PARSE(app, argc, argv);

  if (parse_cmd->parsed()) return cmd_parse_domain(pd_domain);
  if (validate_cmd->parsed()) return cmd_validate(v_domain, v_problem, v_plan, v_out);
  if (oracle_cmd->parsed()) return cmd_oracle(o_domain, o_problem, o_plan, o_query);
  if (run_cmd->parsed()) {
    if (mode == "live") config.mode = tomtrace::llm::Mode::Live;
    if (mode == "record") config.mode = tomtrace::llm::Mode::Record;
    if (mode == "replay") config.mode = tomtrace::llm::Mode::Replay;
    if (sample >= 0) config.sample_per_category = sample;
    if (const char* key = std::getenv("TOM_API_KEY")) config.api_key = key;
    if (!config.no_domain && config.domain_path.empty()) {
      std::cerr << "run: --domain is required unless --no-domain is set\n";
      return 1;
    }
    try {
      auto outcome = tomtrace::pipeline::run_batch(config);
      std::cout << tomtrace::bench::serialize_report(outcome.report);
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "run failed: " << e.what() << "\n";
      return 1;
    }
  }
  return 0;
}
