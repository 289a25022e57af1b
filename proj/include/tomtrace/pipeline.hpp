#pragma once

// End-to-end orchestration: per instance, three LLM calls with symbolic
// verification between the second and third, plus the two ablation modes.

#include <filesystem>
#include <optional>
#include <string>

#include "tomtrace/bench.hpp"
#include "tomtrace/engine.hpp"
#include "tomtrace/llm.hpp"

namespace tomtrace::pipeline {

struct PipelineConfig {
  std::filesystem::path domain_path;     // ignored under no_domain
  std::filesystem::path instances_path;
  llm::Mode mode = llm::Mode::Replay;
  std::filesystem::path cache_dir;
  std::string endpoint;
  std::string model = "gpt-4o";
  std::string api_key;
  int concurrency = 1;
  bool no_verification = false;
  bool no_domain = false;
  std::filesystem::path out_path;
  std::filesystem::path traces_dir;      // per-instance trace files, optional
  std::optional<int> sample_per_category;
  uint64_t seed = 0;
  std::filesystem::path prompts_dir;     // template overrides, optional
  std::filesystem::path field_map_path;  // benchmark adapter, optional
};

struct InstanceRun {
  std::string instance_id;
  std::string problem_text;
  std::vector<GroundAction> candidates;
  std::optional<Trace> trace;
  std::string trace_text;  // what the QA prompt receives
  std::string qa_response;
  bench::Prediction prediction;
};

// Loads the template from prompts_dir when present, else the built-in text.
std::string load_template(const PipelineConfig& config, const std::string& template_id);

std::string render_choices(const std::vector<std::string>& choices);

InstanceRun run_instance(const bench::Instance& instance, const PipelineConfig& config,
                         const DomainDef& domain, const std::string& domain_text,
                         llm::Client& client);

// One gen_domain call on an exemplar instance; the result is reused for the
// whole batch.
std::string bootstrap_domain_text(const bench::Instance& exemplar,
                                  const PipelineConfig& config, llm::Client& client);

struct BatchOutcome {
  bench::Report report;
  int total_llm_calls = 0;
  int bootstrap_calls = 0;
};

BatchOutcome run_batch(const PipelineConfig& config);

}  // namespace tomtrace::pipeline
