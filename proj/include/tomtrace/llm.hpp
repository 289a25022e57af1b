#pragma once

// Prompt rendering, chat-completion transport and the write-once
// record/replay cache that makes pipeline runs reproducible offline.

#include <atomic>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tomtrace::llm {

enum class Mode { Live, Record, Replay };

struct Message {
  std::string role;
  std::string content;
};

struct CompletionRequest {
  std::string model;
  double temperature = 0.0;
  int max_tokens = 4096;
  std::vector<Message> messages;
};

// Template ids: gen_problem, gen_actions, qa, plus gen_domain for the
// domain-bootstrap ablation.
std::string default_template(const std::string& template_id);

// Deterministic {placeholder} substitution; throws on a missing binding or
// a placeholder left unfilled.
std::string render_prompt(const std::string& template_text,
                          const std::map<std::string, std::string>& bindings);
std::string render_prompt_id(const std::string& template_id,
                             const std::map<std::string, std::string>& bindings);

std::string sha256_hex(const std::string& bytes);

std::string cache_key(const std::string& endpoint, const std::string& model,
                      const std::string& template_id, const CompletionRequest& request);

class ReplayMiss : public std::runtime_error {
 public:
  explicit ReplayMiss(const std::string& key)
      : std::runtime_error("replay cache miss for key " + key), key(key) {}
  std::string key;
};

// One file per key under the cache directory; filename = hex hash,
// content = raw response bytes. Writes are write-once (first writer wins).
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);
  std::optional<std::string> read(const std::string& key) const;
  void insert(const std::string& key, const std::string& response) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

struct ClientConfig {
  Mode mode = Mode::Replay;
  std::string endpoint;  // base URL, e.g. http://localhost:8080
  std::string api_key;   // bearer token, from TOM_API_KEY
  std::filesystem::path cache_dir;
  int max_attempts = 4;
};

struct CallRecord {
  std::string template_id;
  double latency_ms;
  size_t response_chars;
};

class Client {
 public:
  explicit Client(ClientConfig config);

  // live: HTTP; record: HTTP then cache insert; replay: cache lookup only
  std::string complete(const CompletionRequest& request, const std::string& template_id);

  int call_count() const { return calls_.load(); }

 private:
  std::string http_complete(const CompletionRequest& request);

  ClientConfig config_;
  std::optional<ResponseCache> cache_;
  std::atomic<int> calls_{0};
};

struct ActionSyntax {
  std::string name;
  std::vector<std::string> args;
};

struct ActionExtraction {
  std::vector<ActionSyntax> actions;
  std::string diagnostic;  // non-empty when zero actions were found
};

// Scans fenced or line-delimited "(name arg ...)" forms, in order; lines
// that do not parse as a flat ground action are skipped.
ActionExtraction extract_actions(const std::string& response);

// Extracts the first balanced s-expression starting at "(define".
std::optional<std::string> extract_define_block(const std::string& response);

struct ChoiceExtraction {
  std::optional<int> index;  // 0-based
  std::string diagnostic;
};

// Last occurrence of "ANSWER: <letter>" wins; out-of-range letters fail.
ChoiceExtraction extract_choice(const std::string& response, int n_choices);

}  // namespace tomtrace::llm
