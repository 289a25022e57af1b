#pragma once

// Benchmark instance loading (line-delimited JSON), scoring and
// deterministic report serialization.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tomtrace::bench {

struct Instance {
  std::string id;
  std::string narrative;
  std::string question;
  std::vector<std::string> choices;
  std::optional<int> answer_index;
  std::optional<std::string> category;
};

enum class FailureStage { None, ProblemParse, ActionExtract, AnswerExtract };

std::string to_string(FailureStage stage);

struct CallMeta {
  std::string template_id;
  double latency_ms = 0.0;
  size_t response_chars = 0;
};

struct Prediction {
  std::string instance_id;
  std::optional<int> predicted_index;
  std::vector<CallMeta> calls;
  int rejected_actions = 0;
  std::vector<std::string> reject_reasons;
  FailureStage failure_stage = FailureStage::None;
  std::string diagnostic;
};

struct Report {
  std::vector<Prediction> predictions;          // sorted by instance id
  std::optional<double> accuracy;               // absent when no gold labels
  std::map<std::string, double> accuracy_by_category;
  double mean_llm_calls = 0.0;
  std::map<std::string, int> failures_by_stage;
  std::optional<uint64_t> seed;                 // recorded when sampling
  int scored = 0;
  int correct = 0;
};

// Optional field-name remapping for per-benchmark adapters: a JSON object
// mapping canonical field names (id, narrative, question, choices,
// answer_index, category) to the source file's names.
using FieldMap = std::map<std::string, std::string>;

FieldMap load_field_map(const std::filesystem::path& path);

std::vector<Instance> load_instances(const std::filesystem::path& path,
                                     const FieldMap& field_map = {});

// Deterministic per-category subsample; keeps file order within the sample.
std::vector<Instance> sample_per_category(const std::vector<Instance>& instances,
                                          int per_category, uint64_t seed);

Report score(const std::vector<Instance>& instances,
             const std::vector<Prediction>& predictions);

// Keys sorted, rates printed with exactly four decimal places; the same
// report always serializes to the same bytes.
std::string serialize_report(const Report& report);
void write_report(const Report& report, const std::filesystem::path& path);

}  // namespace tomtrace::bench
