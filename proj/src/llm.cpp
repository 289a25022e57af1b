#include "tomtrace/llm.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace tomtrace::llm {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Prompt templates

namespace {

const char* kGenProblem = R"(You are given a PDDL domain file and a narrative.
Write a PDDL problem file for this narrative. Declare every agent, room,
container, physical object and utterance mentioned in the narrative under
:objects with the correct type, and describe the initial situation under
:init using only ground positive atoms over the domain's predicates.
If the narrative contains spoken messages, add a (:utterances ...) section
mapping each utterance object to its quoted text.

Domain file:
{domain_file}

Narrative:
{narrative}

Output exactly one (define (problem ...) ...) form inside a fenced code block.
)";

const char* kGenActions = R"(You are given a PDDL domain file, a PDDL problem file,
and a narrative. Translate the narrative's events, in order, into ground PDDL
actions over the declared objects. Use one action per line in the form
(name arg1 arg2 ...). Model a character joining the conversation as a move
from the room offstage to the room scene, and leaving as the reverse move.
Skip events that do not correspond to any domain action.

Domain file:
{domain_file}

Problem file:
{problem_file}

Narrative:
{narrative}

Output only the action lines.
)";

const char* kQa = R"(Below is a verified sequence of actions and the world states
they induce, followed by a question about what an agent believes, knows, or
has heard. Reason step by step from the states and the agents' observations,
then answer.

{trace}

Question:
{question}

Choices:
{choices}

Finish with a single line of the form "ANSWER: <letter>".
)";

const char* kGenDomain = R"(Below is one example instance from a benchmark of
theory-of-mind narratives. Write a PDDL domain file that could model this
kind of narrative: declare object types, predicates for locations, containment,
perception and communication, and actions with typed :parameters,
:precondition and :effect. Conditional (forall ... (when ...)) effects are
allowed.

Example narrative:
{narrative}

Output exactly one (define (domain ...) ...) form inside a fenced code block.
)";

}  // namespace

std::string default_template(const std::string& template_id) {
  if (template_id == "gen_problem") return kGenProblem;
  if (template_id == "gen_actions") return kGenActions;
  if (template_id == "qa") return kQa;
  if (template_id == "gen_domain") return kGenDomain;
  throw std::invalid_argument("unknown template id '" + template_id + "'");
}

std::string render_prompt(const std::string& template_text,
                          const std::map<std::string, std::string>& bindings) {
  std::string out;
  out.reserve(template_text.size());
  size_t i = 0;
  while (i < template_text.size()) {
    char c = template_text[i];
    if (c == '{') {
      size_t close = template_text.find('}', i);
      if (close == std::string::npos)
        throw std::invalid_argument("unbalanced '{' in template");
      std::string name = template_text.substr(i + 1, close - i - 1);
      auto it = bindings.find(name);
      if (it == bindings.end())
        throw std::invalid_argument("missing binding for placeholder {" + name + "}");
      out += it->second;
      i = close + 1;
      continue;
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

std::string render_prompt_id(const std::string& template_id,
                             const std::map<std::string, std::string>& bindings) {
  return render_prompt(default_template(template_id), bindings);
}

// ---------------------------------------------------------------------------
// Cache

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string cache_key(const std::string& endpoint, const std::string& model,
                      const std::string& template_id, const CompletionRequest& request) {
  std::ostringstream os;
  os << endpoint << '\n' << model << '\n' << template_id << '\n';
  for (const Message& m : request.messages)
    os << m.role << '\n' << m.content << '\n';
  return sha256_hex(os.str());
}

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
}

std::optional<std::string> ResponseCache::read(const std::string& key) const {
  std::ifstream in(dir_ / key, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void ResponseCache::insert(const std::string& key, const std::string& response) const {
  fs::path target = dir_ / key;
  if (fs::exists(target)) return;  // write-once
  fs::path tmp = dir_ / (key + ".tmp." + std::to_string(
                                              std::hash<std::thread::id>{}(
                                                  std::this_thread::get_id())));
  {
    std::ofstream out(tmp, std::ios::binary);
    out << response;
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) fs::remove(tmp, ec);
}

// ---------------------------------------------------------------------------
// Client

Client::Client(ClientConfig config) : config_(std::move(config)) {
  if (!config_.cache_dir.empty()) cache_.emplace(config_.cache_dir);
  if (config_.mode != Mode::Replay && config_.endpoint.empty())
    throw std::invalid_argument("live/record mode requires --llm-endpoint");
  if (config_.mode == Mode::Replay && !cache_)
    throw std::invalid_argument("replay mode requires a cache directory");
}

std::string Client::complete(const CompletionRequest& request,
                             const std::string& template_id) {
  calls_.fetch_add(1);
  std::string key = cache_key(config_.endpoint, request.model, template_id, request);
  if (config_.mode == Mode::Replay) {
    auto hit = cache_->read(key);
    if (!hit) throw ReplayMiss(key);
    return *hit;
  }
  std::string response = http_complete(request);
  if (config_.mode == Mode::Record && cache_) cache_->insert(key, response);
  return response;
}

std::string Client::http_complete(const CompletionRequest& request) {
  json body;
  body["model"] = request.model;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  body["messages"] = json::array();
  for (const Message& m : request.messages)
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  std::string payload = body.dump();

  int backoff_ms = 500;
  std::string last_error;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    httplib::Client http(config_.endpoint);
    http.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty())
      headers.emplace("Authorization", "Bearer " + config_.api_key);
    auto res = http.Post("/v1/chat/completions", headers, payload, "application/json");
    if (res && res->status == 200) {
      json parsed = json::parse(res->body);
      return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    }
    if (res && res->status >= 400 && res->status < 500)
      throw std::runtime_error("completion request failed with status " +
                               std::to_string(res->status));
    last_error = res ? "status " + std::to_string(res->status)
                     : "transport error " + httplib::to_string(res.error());
    if (attempt < config_.max_attempts) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
      backoff_ms *= 2;
    }
  }
  throw std::runtime_error("completion request failed after " +
                           std::to_string(config_.max_attempts) + " attempts (" +
                           last_error + ")");
}

// ---------------------------------------------------------------------------
// Response extraction

namespace {

bool is_action_symbol_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
}

std::optional<ActionSyntax> parse_action_line(const std::string& line) {
  size_t open = line.find('(');
  if (open == std::string::npos) return std::nullopt;
  size_t close = line.find(')', open);
  if (close == std::string::npos) return std::nullopt;
  std::string inner = line.substr(open + 1, close - open - 1);
  std::istringstream is(inner);
  std::vector<std::string> words;
  std::string w;
  while (is >> w) {
    for (char c : w)
      if (!is_action_symbol_char(c)) return std::nullopt;
    std::transform(w.begin(), w.end(), w.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    words.push_back(w);
  }
  if (words.empty()) return std::nullopt;
  ActionSyntax action;
  action.name = words[0];
  action.args.assign(words.begin() + 1, words.end());
  return action;
}

}  // namespace

ActionExtraction extract_actions(const std::string& response) {
  ActionExtraction out;
  std::istringstream is(response);
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind("```", 0) == 0) continue;
    auto action = parse_action_line(line);
    if (action) out.actions.push_back(std::move(*action));
  }
  if (out.actions.empty()) out.diagnostic = "no actions found in response";
  return out;
}

std::optional<std::string> extract_define_block(const std::string& response) {
  size_t start = response.find("(define");
  if (start == std::string::npos) return std::nullopt;
  int depth = 0;
  for (size_t i = start; i < response.size(); ++i) {
    if (response[i] == '(') ++depth;
    if (response[i] == ')') {
      --depth;
      if (depth == 0) return response.substr(start, i - start + 1);
    }
  }
  return std::nullopt;
}

ChoiceExtraction extract_choice(const std::string& response, int n_choices) {
  if (n_choices < 2) throw std::invalid_argument("n_choices must be at least 2");
  const std::string marker = "ANSWER:";
  size_t pos = response.rfind(marker);
  if (pos == std::string::npos) return {std::nullopt, "no ANSWER marker found"};
  size_t i = pos + marker.size();
  while (i < response.size() && (response[i] == ' ' || response[i] == '\t')) ++i;
  if (i >= response.size() || !std::isalpha(static_cast<unsigned char>(response[i])))
    return {std::nullopt, "no letter after ANSWER marker"};
  int index = std::toupper(static_cast<unsigned char>(response[i])) - 'A';
  if (index < 0 || index >= n_choices)
    return {std::nullopt, std::string("answer letter '") + response[i] +
                              "' is out of range for " + std::to_string(n_choices) +
                              " choices"};
  return {index, ""};
}

}  // namespace tomtrace::llm
