// Acceptance suite: eight end-to-end gates, one PASS/FAIL line each.
// Exit status is nonzero when any gate fails.

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "tomtrace/epistemic.hpp"
#include "tomtrace/pipeline.hpp"
#include "tomtrace/scenario.hpp"

using namespace tomtrace;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = TOMTRACE_SOURCE_DIR;
const std::string kCli = TOMTRACE_CLI_PATH;

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail = "") {
  std::cout << (ok ? "PASS" : "FAIL") << "  " << name;
  if (!ok && !detail.empty()) std::cout << "  [" << detail << "]";
  std::cout << "\n";
  if (!ok) ++g_failures;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct CommandResult {
  int status;
  std::string output;  // stdout only
};

CommandResult run_command(const std::string& command) {
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed: " + command);
  std::string output;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, output};
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// 1. golden corpus: CLI reproduces all traces byte-exactly and answers all
//    belief queries correctly, in under a second

void gate_golden_corpus() {
  auto start = std::chrono::steady_clock::now();
  fs::path domain = kSource / "assets" / "domain.pddl";
  fs::path golden = kSource / "assets" / "golden";
  std::string detail;
  int scenarios = 0, first_order = 0, second_order = 0;
  bool ok = true;

  for (const auto& entry : fs::directory_iterator(golden)) {
    if (!entry.is_directory()) continue;
    ++scenarios;
    fs::path dir = entry.path();
    std::string base = domain.string() + " " + (dir / "problem.pddl").string() + " " +
                       (dir / "plan.txt").string();

    CommandResult trace = run_command(kCli + " validate " + base + " 2>/dev/null");
    if (trace.status != 0 || trace.output != slurp(dir / "trace.golden")) {
      ok = false;
      detail = dir.filename().string() + ": trace mismatch";
      continue;
    }

    std::istringstream queries(slurp(dir / "queries.txt"));
    std::string line;
    while (std::getline(queries, line)) {
      if (line.empty()) continue;
      size_t sep = line.find(" => ");
      std::string query = line.substr(0, sep);
      std::string expected = line.substr(sep + 4);
      CommandResult answer = run_command(kCli + " oracle " + base + " \"" + query + "\"");
      std::string got = answer.output;
      while (!got.empty() && got.back() == '\n') got.pop_back();
      if (answer.status != 0 || got != expected) {
        ok = false;
        detail = dir.filename().string() + ": '" + query + "' -> " + got;
        continue;
      }
      int words = 1;
      for (char c : query) words += (c == ' ');
      (words == 4 ? second_order : first_order)++;
    }
  }
  if (scenarios != 12 && ok) { ok = false; detail = "expected 12 scenarios"; }
  if (ok && (first_order != 12 || second_order != 8)) {
    ok = false;
    detail = "query tally " + std::to_string(first_order) + "/" + std::to_string(second_order);
  }
  double elapsed = seconds_since(start);
  if (ok && elapsed >= 1.0) { ok = false; detail = "too slow: " + std::to_string(elapsed) + "s"; }
  report("golden corpus: 12 traces byte-exact, 12+8 belief queries, <1s", ok, detail);
}

// ---------------------------------------------------------------------------
// 2. oracle equivalence on 200 random scenarios

void gate_oracle_equivalence() {
  auto start = std::chrono::steady_clock::now();
  DomainDef domain = canonical_domain();
  std::string detail;
  bool ok = true;
  for (uint64_t seed = 0; seed < 200 && ok; ++seed) {
    Scenario sc = random_scenario(seed, domain);
    GroundingContext ctx(domain, sc.problem);
    WorldState s0 = initial_state(ctx);
    Trace a = validate_and_filter(s0, sc.candidates, ctx);
    Trace b = replay_oracle(s0, sc.candidates, ctx);
    if (a.initial != b.initial || a.steps.size() != b.steps.size()) {
      ok = false;
      detail = "seed " + std::to_string(seed);
      break;
    }
    for (size_t i = 0; i < a.steps.size(); ++i) {
      if (a.steps[i].verdict != b.steps[i].verdict ||
          a.steps[i].post_state != b.steps[i].post_state ||
          a.steps[i].reject_reason != b.steps[i].reject_reason) {
        ok = false;
        detail = "seed " + std::to_string(seed) + " step " + std::to_string(i + 1);
        break;
      }
    }
  }
  double elapsed = seconds_since(start);
  if (ok && elapsed >= 10.0) { ok = false; detail = "too slow"; }
  report("oracle equivalence: filter == replay oracle on 200 seeds, <10s", ok, detail);
}

// ---------------------------------------------------------------------------
// 3. property suite over 1,000 random scenarios

void gate_properties() {
  auto start = std::chrono::steady_clock::now();
  DomainDef domain = canonical_domain();
  SymbolId p_seen = domain.symbols->intern("seen");
  SymbolId p_heard = domain.symbols->intern("heard");
  SymbolId a_tell = domain.symbols->intern("tell");
  SymbolId a_ask = domain.symbols->intern("ask");
  SymbolId p_at = domain.symbols->intern("at");
  std::string detail;
  bool ok = true;

  for (uint64_t seed = 0; seed < 1000 && ok; ++seed) {
    Scenario sc = random_scenario(seed, domain);
    GroundingContext ctx(domain, sc.problem);
    WorldState s0 = initial_state(ctx);
    Trace trace = validate_and_filter(s0, sc.candidates, ctx);
    auto fail = [&](const std::string& what, size_t step) {
      ok = false;
      detail = what + " (seed " + std::to_string(seed) + ", step " +
               std::to_string(step + 1) + ")";
    };

    for (size_t i = 0; i < trace.steps.size() && ok; ++i) {
      const TraceStep& step = trace.steps[i];
      const WorldState& pre = trace.pre_state(i);

      if (step.verdict == Verdict::Rejected) {
        // rejection inertness
        if (step.post_state != pre) fail("rejected step changed state", i);
        continue;
      }

      // frame property: post == (pre \ dels) ∪ adds from the bound effect
      auto binding = action_binding(step.action, ctx);
      if (!binding) { fail("accepted step has no binding", i); continue; }
      const ActionSchema* schema = domain.find_action(step.action.name);
      std::vector<GroundAtom> adds, dels;
      expand_effect(pre, schema->effect, *binding, ctx, adds, dels);
      WorldState expected = pre;
      for (const GroundAtom& d : dels) expected.erase(d);
      for (const GroundAtom& a : adds) expected.insert(a);
      if (expected != step.post_state) fail("frame property", i);

      // monotone seen/heard
      for (const GroundAtom& atom : pre) {
        if ((atom.pred == p_seen || atom.pred == p_heard) &&
            step.post_state.count(atom) == 0) {
          fail("seen/heard atom lost", i);
          break;
        }
      }

      // functional location
      std::string violation;
      if (ok && !check_structural_invariants(step.post_state, ctx, &violation))
        fail("structural invariant: " + violation, i);

      // broadcast exactness: tell/ask adds heard(x,u) for exactly the
      // agents in the speaker's room, and changes nothing else
      if (ok && (step.action.name == a_tell || step.action.name == a_ask)) {
        SymbolId speaker = step.action.args[0];
        SymbolId utterance = step.action.args[1];
        SymbolId room = step.action.args[2];
        for (SymbolId agent : ctx.enumerate_objects(domain.t_agent)) {
          bool in_room = pre.count({p_at, {agent, room}}) > 0 || agent == speaker;
          bool heard_pre = pre.count({p_heard, {agent, utterance}}) > 0;
          bool heard_post = step.post_state.count({p_heard, {agent, utterance}}) > 0;
          if (heard_post != (heard_pre || in_room)) {
            fail("broadcast exactness", i);
            break;
          }
        }
      }
    }

    // filter idempotence
    if (ok) {
      Trace again = validate_and_filter(s0, trace.verified_actions(), ctx);
      if (again.verified_actions() != trace.verified_actions() ||
          again.final_state() != trace.final_state())
        fail("filter idempotence", trace.steps.size());
    }
  }
  double elapsed = seconds_since(start);
  if (ok && elapsed >= 30.0) { ok = false; detail = "too slow"; }
  report("properties: frame/inertness/idempotence/monotonicity/"
         "functional-location/broadcast on 1000 seeds, <30s",
         ok, detail);
}

// ---------------------------------------------------------------------------
// 4. parser round-trip fixpoint

void gate_parser_roundtrip() {
  DomainDef domain = canonical_domain();
  std::string detail;
  bool ok = true;

  std::string printed = print_canonical(domain);
  if (print_canonical(parse_domain_text(printed)) != printed) {
    ok = false;
    detail = "domain fixpoint";
  }

  int golden = 0;
  for (const auto& entry : fs::directory_iterator(kSource / "assets" / "golden")) {
    if (!entry.is_directory() || !ok) continue;
    ProblemDef p = parse_problem_text(slurp(entry.path() / "problem.pddl"), domain);
    std::string text = print_canonical(p, domain);
    ProblemDef reparsed = parse_problem_text(text, domain);
    if (!(reparsed == p) || print_canonical(reparsed, domain) != text) {
      ok = false;
      detail = entry.path().filename().string();
    }
    ++golden;
  }
  if (ok && golden != 12) { ok = false; detail = "expected 12 golden problems"; }

  for (uint64_t seed = 1000; seed < 1100 && ok; ++seed) {
    Scenario sc = random_scenario(seed, domain);
    std::string text = print_canonical(sc.problem, domain);
    ProblemDef reparsed = parse_problem_text(text, domain);
    if (!(reparsed == sc.problem) || print_canonical(reparsed, domain) != text) {
      ok = false;
      detail = "random seed " + std::to_string(seed);
    }
  }
  report("parser round-trip: domain, 12 golden and 100 random problems", ok, detail);
}

// ---------------------------------------------------------------------------
// replay fixtures shared by gates 5-8

struct ReplayFixture {
  fs::path root;
  pipeline::PipelineConfig config;
  std::string domain_text;
  std::string problem_block;
  std::string action_lines;
  std::string narrative = "Sally puts her ball in the basket and leaves. "
                          "Anne moves the ball to the box.";
  std::string question = "Where will Sally look for the ball?";
  std::vector<std::string> choices{"basket", "box"};

  explicit ReplayFixture(const char* tag) {
    root = fs::temp_directory_path() /
           (std::string("tomtrace_accept_") + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root / "cache");
    config.domain_path = kSource / "assets" / "domain.pddl";
    config.instances_path = root / "instances.jsonl";
    config.mode = llm::Mode::Replay;
    config.cache_dir = root / "cache";
    config.out_path = root / "report.json";
    domain_text = slurp(config.domain_path);
    problem_block =
        "(define (problem sa)\n"
        "  (:objects sally anne - agent\n"
        "            room1 room2 - room\n"
        "            basket box - container\n"
        "            ball - obj)\n"
        "  (:init (at sally room1) (at anne room1)\n"
        "         (in ball basket)\n"
        "         (part-of basket room1) (part-of box room1)\n"
        "         (opened basket) (opened box)))";
    action_lines =
        "(move sally room1 room2)\n"
        "(grab anne ball basket room1)\n"
        "(drop anne ball box room1)\n";
  }
  ~ReplayFixture() { fs::remove_all(root); }

  void write_instances(int n) const {
    std::ofstream out(config.instances_path);
    for (int i = 0; i < n; ++i)
      out << "{\"id\": \"i" << i << "\", \"narrative\": \"" << narrative
          << "\", \"question\": \"" << question
          << "\", \"choices\": [\"basket\", \"box\"], \"answer_index\": 0}\n";
  }

  void seed(const std::string& template_id,
            const std::map<std::string, std::string>& bindings,
            const std::string& response) const {
    llm::CompletionRequest req;
    req.model = config.model;
    req.temperature = 0.0;
    req.max_tokens = 4096;
    req.messages.push_back(
        {"user", llm::render_prompt(llm::default_template(template_id), bindings)});
    llm::ResponseCache(config.cache_dir)
        .insert(llm::cache_key(config.endpoint, config.model, template_id, req), response);
  }

  std::string trace_text(const std::string& plan_lines, const std::string& dom) const {
    DomainDef domain = parse_domain_text(dom);
    ProblemDef problem = parse_problem_text(problem_block, domain);
    GroundingContext ctx(domain, problem);
    Trace trace = validate_and_filter(
        initial_state(ctx), parse_plan_text(plan_lines, *domain.symbols), ctx);
    return render_trace(trace, *domain.symbols);
  }

  void seed_instance(const std::string& qa_response, const std::string& dom_override = "",
                     const std::string& extra_actions = "") const {
    const std::string& dom = dom_override.empty() ? domain_text : dom_override;
    std::string actions = action_lines + extra_actions;
    seed("gen_problem", {{"domain_file", dom}, {"narrative", narrative}},
         "Encoding:\n" + problem_block);
    seed("gen_actions",
         {{"domain_file", dom}, {"problem_file", problem_block}, {"narrative", narrative}},
         actions);
    seed("qa",
         {{"trace", config.no_verification ? actions : trace_text(actions, dom)},
          {"question", question},
          {"choices", pipeline::render_choices(choices)}},
         qa_response);
  }
};

// 5. call budget: exactly 3 calls per instance; --no-domain adds one

void gate_call_budget() {
  std::string detail;
  bool ok = true;
  {
    ReplayFixture f("budget");
    f.write_instances(5);
    f.seed_instance("ANSWER: A");
    pipeline::BatchOutcome out = pipeline::run_batch(f.config);
    if (out.total_llm_calls != 15 || out.report.mean_llm_calls != 3.0) {
      ok = false;
      detail = "default run: " + std::to_string(out.total_llm_calls) + " calls";
    }
    for (const auto& pred : out.report.predictions)
      if (pred.calls.size() != 3) { ok = false; detail = "per-instance call count"; }
    std::string json = slurp(f.config.out_path);
    if (ok && json.find("\"mean_llm_calls\": 3.0000") == std::string::npos) {
      ok = false;
      detail = "mean_llm_calls not 3.0000 in report";
    }
  }
  if (ok) {
    ReplayFixture f("budget_nd");
    f.config.no_domain = true;
    f.config.domain_path.clear();
    f.write_instances(5);
    auto block = llm::extract_define_block(std::string(canonical_domain_text()));
    f.seed("gen_domain", {{"narrative", f.narrative}}, *block);
    f.seed_instance("ANSWER: A", *block);
    pipeline::BatchOutcome out = pipeline::run_batch(f.config);
    if (out.bootstrap_calls != 1 || out.total_llm_calls != 16) {
      ok = false;
      detail = "--no-domain run: " + std::to_string(out.total_llm_calls) + " calls";
    }
  }
  report("call budget: 3 completions per instance (mean 3.0), +1 under --no-domain",
         ok, detail);
}

// 6. replay determinism across concurrency levels

void gate_replay_determinism() {
  ReplayFixture f("determinism");
  f.write_instances(8);
  f.seed_instance("ANSWER: A");
  f.config.traces_dir = f.root / "traces";
  std::string detail;
  bool ok = true;

  auto run_at = [&](int concurrency) {
    f.config.concurrency = concurrency;
    fs::remove_all(f.config.traces_dir);
    pipeline::run_batch(f.config);
    std::map<std::string, std::string> files;
    files["report.json"] = slurp(f.config.out_path);
    for (const auto& entry : fs::directory_iterator(f.config.traces_dir))
      files[entry.path().filename().string()] = slurp(entry.path());
    return files;
  };
  auto c1 = run_at(1);
  auto c8 = run_at(8);
  if (c1 != c8) { ok = false; detail = "outputs differ between concurrency 1 and 8"; }
  if (ok && c1.size() != 9) { ok = false; detail = "expected report + 8 traces"; }
  report("replay determinism: byte-identical report and traces at concurrency 1 vs 8",
         ok, detail);
}

// 7. ablation plumbing around an impossible action

void gate_ablation_plumbing() {
  std::string impossible = "(grab sally ball basket room1)\n";  // sally has left
  std::string detail;
  bool ok = true;
  {
    ReplayFixture f("ablation_off");
    f.config.no_verification = true;
    f.config.traces_dir = f.root / "traces";
    f.write_instances(1);
    f.seed_instance("ANSWER: B", "", impossible);
    pipeline::BatchOutcome out = pipeline::run_batch(f.config);
    std::string qa_trace = slurp(f.config.traces_dir / "i0.trace");
    if (qa_trace.find("STATE") != std::string::npos) {
      ok = false;
      detail = "--no-verification trace still has STATE lines";
    }
    if (ok && qa_trace.find("(grab sally ball basket room1)") == std::string::npos) {
      ok = false;
      detail = "--no-verification trace lost the raw action";
    }
    if (ok && out.report.predictions[0].rejected_actions != 0) {
      ok = false;
      detail = "--no-verification still rejected actions";
    }
  }
  if (ok) {
    ReplayFixture f("ablation_on");
    f.config.traces_dir = f.root / "traces";
    f.write_instances(1);
    f.seed_instance("ANSWER: A", "", impossible);
    pipeline::BatchOutcome out = pipeline::run_batch(f.config);
    std::string qa_trace = slurp(f.config.traces_dir / "i0.trace");
    const bench::Prediction& pred = out.report.predictions[0];
    if (pred.rejected_actions != 1) {
      ok = false;
      detail = "expected exactly one rejection";
    } else if (qa_trace.find("ACTION (grab sally ball basket room1) REJECTED") ==
               std::string::npos) {
      ok = false;
      detail = "trace lacks the REJECTED record";
    }
    // the rejected action must not reach the verified prefix
    DomainDef domain = parse_domain_text(f.domain_text);
    ProblemDef problem = parse_problem_text(f.problem_block, domain);
    GroundingContext ctx(domain, problem);
    Trace trace = validate_and_filter(
        initial_state(ctx),
        parse_plan_text(f.action_lines + impossible, *domain.symbols), ctx);
    for (const GroundAction& a : trace.verified_actions())
      if (print_action(a, *domain.symbols) == "(grab sally ball basket room1)") {
        ok = false;
        detail = "impossible action survived filtering";
      }
  }
  report("ablation plumbing: raw prompt without verification, REJECTED+excluded by default",
         ok, detail);
}

// 8. failure-stage taxonomy

void gate_failure_stages() {
  std::string detail;
  bool ok = true;
  {
    ReplayFixture f("fail1");
    f.write_instances(1);
    f.seed("gen_problem", {{"domain_file", f.domain_text}, {"narrative", f.narrative}},
           "I cannot encode that narrative.");
    pipeline::BatchOutcome out = pipeline::run_batch(f.config);
    if (out.report.failures_by_stage["problem-parse"] != 1 || out.total_llm_calls != 1) {
      ok = false;
      detail = "problem-parse fixture";
    }
  }
  if (ok) {
    ReplayFixture f("fail2");
    f.write_instances(1);
    f.seed("gen_problem", {{"domain_file", f.domain_text}, {"narrative", f.narrative}},
           f.problem_block);
    f.seed("gen_actions",
           {{"domain_file", f.domain_text},
            {"problem_file", f.problem_block},
            {"narrative", f.narrative}},
           "No events occurred in the story.");
    pipeline::BatchOutcome out = pipeline::run_batch(f.config);
    if (out.report.failures_by_stage["action-extract"] != 1 || out.total_llm_calls != 2) {
      ok = false;
      detail = "action-extract fixture";
    }
  }
  if (ok) {
    ReplayFixture f("fail3");
    f.write_instances(1);
    f.seed_instance("It is in the basket, obviously.");
    pipeline::BatchOutcome out = pipeline::run_batch(f.config);
    if (out.report.failures_by_stage["answer-extract"] != 1 || out.total_llm_calls != 3) {
      ok = false;
      detail = "answer-extract fixture";
    }
  }
  report("failure stages: problem-parse / action-extract / answer-extract buckets",
         ok, detail);
}

}  // namespace

int main() {
  gate_golden_corpus();
  gate_oracle_equivalence();
  gate_properties();
  gate_parser_roundtrip();
  gate_call_budget();
  gate_replay_determinism();
  gate_ablation_plumbing();
  gate_failure_stages();
  if (g_failures == 0) {
    std::cout << "all 8 acceptance gates passed\n";
    return 0;
  }
  std::cout << g_failures << " acceptance gate(s) failed\n";
  return 1;
}
