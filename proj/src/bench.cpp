#include "tomtrace/bench.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace tomtrace::bench {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(FailureStage stage) {
  switch (stage) {
    case FailureStage::None: return "none";
    case FailureStage::ProblemParse: return "problem-parse";
    case FailureStage::ActionExtract: return "action-extract";
    case FailureStage::AnswerExtract: return "answer-extract";
  }
  return "none";
}

FieldMap load_field_map(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open field map: " + path.string());
  json parsed = json::parse(in);
  FieldMap out;
  for (auto& [key, value] : parsed.items()) out[key] = value.get<std::string>();
  return out;
}

std::vector<Instance> load_instances(const fs::path& path, const FieldMap& field_map) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path.string());
  auto field = [&](const std::string& canonical) {
    auto it = field_map.find(canonical);
    return it == field_map.end() ? canonical : it->second;
  };
  std::vector<Instance> out;
  std::set<std::string> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": malformed record: " + e.what());
    }
    Instance inst;
    try {
      inst.id = record.at(field("id")).get<std::string>();
      inst.narrative = record.at(field("narrative")).get<std::string>();
      inst.question = record.at(field("question")).get<std::string>();
      inst.choices = record.at(field("choices")).get<std::vector<std::string>>();
      if (record.contains(field("answer_index")) && !record[field("answer_index")].is_null())
        inst.answer_index = record[field("answer_index")].get<int>();
      if (record.contains(field("category")) && !record[field("category")].is_null())
        inst.category = record[field("category")].get<std::string>();
    } catch (const json::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": bad record fields: " + e.what());
    }
    if (inst.choices.size() < 2)
      throw std::runtime_error("instance '" + inst.id + "' has fewer than 2 choices");
    if (inst.answer_index &&
        (*inst.answer_index < 0 || *inst.answer_index >= static_cast<int>(inst.choices.size())))
      throw std::runtime_error("instance '" + inst.id + "' has out-of-range answer_index");
    if (!ids.insert(inst.id).second)
      throw std::runtime_error("duplicate instance id '" + inst.id + "'");
    out.push_back(std::move(inst));
  }
  return out;
}

namespace {

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::vector<Instance> sample_per_category(const std::vector<Instance>& instances,
                                          int per_category, uint64_t seed) {
  std::map<std::string, std::vector<size_t>> groups;
  for (size_t i = 0; i < instances.size(); ++i)
    groups[instances[i].category.value_or("uncategorized")].push_back(i);
  std::set<size_t> chosen;
  for (auto& [category, indices] : groups) {
    std::mt19937_64 rng(seed ^ fnv1a(category));
    // Fisher-Yates with modulo draws for cross-platform stability
    for (size_t i = indices.size(); i > 1; --i)
      std::swap(indices[i - 1], indices[rng() % i]);
    for (size_t i = 0; i < indices.size() && i < static_cast<size_t>(per_category); ++i)
      chosen.insert(indices[i]);
  }
  std::vector<Instance> out;
  for (size_t i : chosen) out.push_back(instances[i]);
  return out;
}

Report score(const std::vector<Instance>& instances,
             const std::vector<Prediction>& predictions) {
  std::map<std::string, const Instance*> by_id;
  for (const Instance& inst : instances) by_id[inst.id] = &inst;
  std::map<std::string, const Prediction*> pred_by_id;
  for (const Prediction& p : predictions) {
    if (!by_id.count(p.instance_id))
      throw std::runtime_error("prediction for unknown instance '" + p.instance_id + "'");
    pred_by_id[p.instance_id] = &p;
  }

  Report report;
  report.failures_by_stage = {{"none", 0},
                              {"problem-parse", 0},
                              {"action-extract", 0},
                              {"answer-extract", 0}};
  std::map<std::string, std::pair<int, int>> category_counts;  // correct, scored
  size_t total_calls = 0;

  for (const Instance& inst : instances) {
    Prediction entry;
    auto it = pred_by_id.find(inst.id);
    if (it != pred_by_id.end()) {
      entry = *it->second;
    } else {
      entry.instance_id = inst.id;
      entry.diagnostic = "no prediction produced";
    }
    report.failures_by_stage[to_string(entry.failure_stage)] += 1;
    total_calls += entry.calls.size();
    if (inst.answer_index) {
      ++report.scored;
      bool correct = entry.predicted_index && *entry.predicted_index == *inst.answer_index;
      if (correct) ++report.correct;
      auto& [cat_correct, cat_scored] =
          category_counts[inst.category.value_or("uncategorized")];
      ++cat_scored;
      if (correct) ++cat_correct;
    }
    report.predictions.push_back(std::move(entry));
  }
  std::sort(report.predictions.begin(), report.predictions.end(),
            [](const Prediction& a, const Prediction& b) {
              return a.instance_id < b.instance_id;
            });
  if (report.scored > 0)
    report.accuracy = static_cast<double>(report.correct) / report.scored;
  for (auto& [category, counts] : category_counts)
    report.accuracy_by_category[category] =
        static_cast<double>(counts.first) / counts.second;
  report.mean_llm_calls =
      instances.empty() ? 0.0 : static_cast<double>(total_calls) / instances.size();
  return report;
}

// ---------------------------------------------------------------------------
// Serialization
//
// Hand-rolled so rate formatting (four decimals) and key order are pinned;
// per-call latency stays in memory only, keeping replay runs byte-identical.

namespace {

std::string js(const std::string& s) { return json(s).dump(); }

std::string rate(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

}  // namespace

std::string serialize_report(const Report& report) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"accuracy\": " << (report.accuracy ? rate(*report.accuracy) : "null") << ",\n";
  os << "  \"accuracy_by_category\": {";
  bool first = true;
  for (const auto& [category, acc] : report.accuracy_by_category) {
    os << (first ? "" : ", ") << js(category) << ": " << rate(acc);
    first = false;
  }
  os << "},\n";
  os << "  \"correct\": " << report.correct << ",\n";
  os << "  \"failures_by_stage\": {";
  first = true;
  for (const auto& [stage, count] : report.failures_by_stage) {
    os << (first ? "" : ", ") << js(stage) << ": " << count;
    first = false;
  }
  os << "},\n";
  os << "  \"instances\": [\n";
  for (size_t i = 0; i < report.predictions.size(); ++i) {
    const Prediction& p = report.predictions[i];
    os << "    {\"calls\": [";
    for (size_t c = 0; c < p.calls.size(); ++c)
      os << (c ? ", " : "") << "{\"response_chars\": " << p.calls[c].response_chars
         << ", \"template_id\": " << js(p.calls[c].template_id) << "}";
    os << "], \"diagnostic\": " << js(p.diagnostic)
       << ", \"failure_stage\": " << js(to_string(p.failure_stage))
       << ", \"id\": " << js(p.instance_id) << ", \"predicted_index\": ";
    if (p.predicted_index)
      os << *p.predicted_index;
    else
      os << "null";
    os << ", \"reject_reasons\": [";
    for (size_t r = 0; r < p.reject_reasons.size(); ++r)
      os << (r ? ", " : "") << js(p.reject_reasons[r]);
    os << "], \"rejected_actions\": " << p.rejected_actions << "}";
    os << (i + 1 < report.predictions.size() ? ",\n" : "\n");
  }
  os << "  ],\n";
  os << "  \"mean_llm_calls\": " << rate(report.mean_llm_calls) << ",\n";
  os << "  \"scored\": " << report.scored;
  if (report.seed) os << ",\n  \"seed\": " << *report.seed;
  os << "\n}\n";
  return os.str();
}

void write_report(const Report& report, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report: " + path.string());
  out << serialize_report(report);
}

}  // namespace tomtrace::bench
