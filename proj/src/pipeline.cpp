#include "tomtrace/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace tomtrace::pipeline {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string timed_complete(llm::Client& client, const llm::CompletionRequest& request,
                           const std::string& template_id, bench::Prediction& pred) {
  auto start = std::chrono::steady_clock::now();
  std::string response = client.complete(request, template_id);
  auto end = std::chrono::steady_clock::now();
  double ms = std::chrono::duration<double, std::milli>(end - start).count();
  pred.calls.push_back({template_id, ms, response.size()});
  return response;
}

llm::CompletionRequest make_request(const PipelineConfig& config, std::string prompt) {
  llm::CompletionRequest req;
  req.model = config.model;
  req.temperature = 0.0;
  req.max_tokens = 4096;
  req.messages.push_back({"user", std::move(prompt)});
  return req;
}

}  // namespace

std::string load_template(const PipelineConfig& config, const std::string& template_id) {
  if (!config.prompts_dir.empty()) {
    fs::path candidate = config.prompts_dir / (template_id + ".txt");
    if (fs::exists(candidate)) return read_file(candidate);
  }
  return llm::default_template(template_id);
}

std::string render_choices(const std::vector<std::string>& choices) {
  std::string out;
  for (size_t i = 0; i < choices.size(); ++i) {
    out += static_cast<char>('A' + i);
    out += ". " + choices[i];
    if (i + 1 < choices.size()) out += "\n";
  }
  return out;
}

InstanceRun run_instance(const bench::Instance& instance, const PipelineConfig& config,
                         const DomainDef& domain, const std::string& domain_text,
                         llm::Client& client) {
  InstanceRun run;
  run.instance_id = instance.id;
  bench::Prediction& pred = run.prediction;
  pred.instance_id = instance.id;

  // stage 1: narrative -> problem file
  std::string problem_response;
  try {
    std::string prompt = llm::render_prompt(
        load_template(config, "gen_problem"),
        {{"domain_file", domain_text}, {"narrative", instance.narrative}});
    problem_response = timed_complete(client, make_request(config, prompt),
                                      "gen_problem", pred);
  } catch (const llm::ReplayMiss&) {
    throw;  // a cache miss in replay mode means the run is unreproducible
  } catch (const std::exception& e) {
    pred.failure_stage = bench::FailureStage::ProblemParse;
    pred.diagnostic = e.what();
    return run;
  }
  ProblemDef problem;
  try {
    auto block = llm::extract_define_block(problem_response);
    if (!block) throw std::runtime_error("no (define ...) form in response");
    problem = parse_problem_text(*block, domain);
    run.problem_text = *block;
  } catch (const std::exception& e) {
    pred.failure_stage = bench::FailureStage::ProblemParse;
    pred.diagnostic = e.what();
    return run;
  }

  // stage 2: narrative -> candidate actions
  std::string action_response;
  try {
    std::string prompt = llm::render_prompt(load_template(config, "gen_actions"),
                                            {{"domain_file", domain_text},
                                             {"problem_file", run.problem_text},
                                             {"narrative", instance.narrative}});
    action_response = timed_complete(client, make_request(config, prompt),
                                     "gen_actions", pred);
  } catch (const llm::ReplayMiss&) {
    throw;
  } catch (const std::exception& e) {
    pred.failure_stage = bench::FailureStage::ActionExtract;
    pred.diagnostic = e.what();
    return run;
  }
  llm::ActionExtraction extraction = llm::extract_actions(action_response);
  if (extraction.actions.empty()) {
    pred.failure_stage = bench::FailureStage::ActionExtract;
    pred.diagnostic = extraction.diagnostic;
    return run;
  }
  for (const llm::ActionSyntax& a : extraction.actions) {
    GroundAction action{domain.symbols->intern(a.name), {}};
    for (const std::string& arg : a.args) action.args.push_back(domain.symbols->intern(arg));
    run.candidates.push_back(std::move(action));
  }

  // stage 3: verification (skipped under --no-verification)
  GroundingContext ctx(domain, problem);
  if (config.no_verification) {
    Trace trace;
    trace.initial = initial_state(ctx);
    int index = 1;
    std::string lines;
    for (const GroundAction& a : run.candidates) {
      trace.steps.push_back({index++, a, Verdict::Accepted, "", trace.initial});
      lines += print_action(a, *domain.symbols) + "\n";
    }
    run.trace = std::move(trace);
    run.trace_text = lines;  // raw actions, no state lines
  } else {
    Trace trace = validate_and_filter(initial_state(ctx), run.candidates, ctx);
    for (const TraceStep& s : trace.steps) {
      if (s.verdict == Verdict::Rejected) {
        ++pred.rejected_actions;
        pred.reject_reasons.push_back(print_action(s.action, *domain.symbols) + " : " +
                                      s.reject_reason);
      }
    }
    run.trace_text = render_trace(trace, *domain.symbols);
    run.trace = std::move(trace);
  }

  // stage 4: question answering over the verified trace
  try {
    std::string prompt = llm::render_prompt(
        load_template(config, "qa"),
        {{"trace", run.trace_text},
         {"question", instance.question},
         {"choices", render_choices(instance.choices)}});
    run.qa_response = timed_complete(client, make_request(config, prompt), "qa", pred);
  } catch (const llm::ReplayMiss&) {
    throw;
  } catch (const std::exception& e) {
    pred.failure_stage = bench::FailureStage::AnswerExtract;
    pred.diagnostic = e.what();
    return run;
  }
  llm::ChoiceExtraction choice =
      llm::extract_choice(run.qa_response, static_cast<int>(instance.choices.size()));
  if (!choice.index) {
    pred.failure_stage = bench::FailureStage::AnswerExtract;
    pred.diagnostic = choice.diagnostic;
    return run;
  }
  pred.predicted_index = choice.index;
  return run;
}

std::string bootstrap_domain_text(const bench::Instance& exemplar,
                                  const PipelineConfig& config, llm::Client& client) {
  std::string prompt = llm::render_prompt(load_template(config, "gen_domain"),
                                          {{"narrative", exemplar.narrative}});
  std::string response = client.complete(make_request(config, prompt), "gen_domain");
  auto block = llm::extract_define_block(response);
  if (!block) throw std::runtime_error("bootstrap domain response has no (define ...) form");
  return *block;
}

BatchOutcome run_batch(const PipelineConfig& config) {
  bench::FieldMap field_map;
  if (!config.field_map_path.empty()) field_map = bench::load_field_map(config.field_map_path);
  std::vector<bench::Instance> instances =
      bench::load_instances(config.instances_path, field_map);
  if (config.sample_per_category)
    instances = bench::sample_per_category(instances, *config.sample_per_category,
                                           config.seed);

  llm::ClientConfig client_config;
  client_config.mode = config.mode;
  client_config.endpoint = config.endpoint;
  client_config.api_key = config.api_key;
  client_config.cache_dir = config.cache_dir;
  llm::Client client(client_config);

  BatchOutcome outcome;
  std::string domain_text;
  if (config.no_domain) {
    if (instances.empty()) throw std::runtime_error("--no-domain needs at least one instance");
    domain_text = bootstrap_domain_text(instances.front(), config, client);
    outcome.bootstrap_calls = 1;
  } else {
    domain_text = read_file(config.domain_path);
  }
  DomainDef domain = parse_domain_text(domain_text);

  std::vector<bench::Prediction> predictions(instances.size());
  std::vector<InstanceRun> runs(instances.size());
  std::atomic<size_t> next{0};
  std::mutex failure_mu;
  std::exception_ptr first_failure;

  auto worker = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= instances.size()) return;
      try {
        runs[i] = run_instance(instances[i], config, domain, domain_text, client);
        predictions[i] = runs[i].prediction;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!first_failure) first_failure = std::current_exception();
        return;
      }
    }
  };
  int n_threads = std::max(1, std::min<int>(config.concurrency,
                                            static_cast<int>(instances.size())));
  if (instances.empty()) n_threads = 0;
  std::vector<std::thread> threads;
  for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  if (first_failure) std::rethrow_exception(first_failure);

  if (!config.traces_dir.empty()) {
    fs::create_directories(config.traces_dir);
    for (const InstanceRun& run : runs) {
      if (run.instance_id.empty()) continue;
      std::ofstream out(config.traces_dir / (run.instance_id + ".trace"),
                        std::ios::binary);
      out << run.trace_text;
    }
  }

  outcome.report = bench::score(instances, predictions);
  if (config.sample_per_category) outcome.report.seed = config.seed;
  outcome.total_llm_calls = client.call_count();
  if (!config.out_path.empty()) bench::write_report(outcome.report, config.out_path);
  return outcome;
}

}  // namespace tomtrace::pipeline
