#include "infoseek/llm.hpp"

#include <httplib.h>

#include <cctype>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "infoseek/error.hpp"
#include "infoseek/prompts.hpp"

namespace infoseek {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view reasoning_control_name(ReasoningControl c) {
  switch (c) {
    case ReasoningControl::None: return "none";
    case ReasoningControl::ChatTemplateFlag: return "chat_template_flag";
    case ReasoningControl::PromptSwitch: return "prompt_switch";
  }
  return "none";
}

ReasoningControl parse_reasoning_control(const std::string& s) {
  if (s == "none") return ReasoningControl::None;
  if (s == "chat_template_flag") return ReasoningControl::ChatTemplateFlag;
  if (s == "prompt_switch") return ReasoningControl::PromptSwitch;
  throw Error(Errc::ConfigError, "unknown reasoning_control '" + s + "'");
}

}  // namespace

void EndpointConfig::validate() const {
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0) {
    throw Error(Errc::ConfigError, "base_url must start with http:// or https://, got '" + base_url + "'");
  }
  if (model_name.empty()) throw Error(Errc::ConfigError, "model_name is required");
  if (temperature && *temperature < 0.0) throw Error(Errc::ConfigError, "temperature must be >= 0");
  if (timeout.count() <= 0) throw Error(Errc::ConfigError, "timeout must be positive");
}

void to_json(json& j, const EndpointConfig& e) {
  j = json{{"base_url", e.base_url},
           {"model_name", e.model_name},
           {"api_key_env", e.api_key_env},
           {"reasoning_enabled", e.reasoning_enabled},
           {"reasoning_control", reasoning_control_name(e.reasoning_control)},
           {"reasoning_on_suffix", e.reasoning_on_suffix},
           {"reasoning_off_suffix", e.reasoning_off_suffix},
           {"think_open", e.think_open},
           {"think_close", e.think_close},
           {"max_retries", e.max_retries},
           {"timeout_ms", e.timeout.count()},
           {"backoff_initial_ms", e.backoff_initial.count()}};
  if (e.temperature) j["temperature"] = *e.temperature;
}

void from_json(const json& j, EndpointConfig& e) {
  try {
    e = EndpointConfig{};
    e.base_url = j.value("base_url", e.base_url);
    e.model_name = j.at("model_name").get<std::string>();
    e.api_key_env = j.value("api_key_env", e.api_key_env);
    if (j.contains("temperature") && !j.at("temperature").is_null()) e.temperature = j.at("temperature").get<double>();
    e.reasoning_enabled = j.value("reasoning_enabled", e.reasoning_enabled);
    e.reasoning_control = parse_reasoning_control(j.value("reasoning_control", std::string("none")));
    e.reasoning_on_suffix = j.value("reasoning_on_suffix", e.reasoning_on_suffix);
    e.reasoning_off_suffix = j.value("reasoning_off_suffix", e.reasoning_off_suffix);
    e.think_open = j.value("think_open", e.think_open);
    e.think_close = j.value("think_close", e.think_close);
    e.max_retries = j.value("max_retries", e.max_retries);
    e.timeout = std::chrono::milliseconds(j.value("timeout_ms", static_cast<long long>(e.timeout.count())));
    e.backoff_initial =
        std::chrono::milliseconds(j.value("backoff_initial_ms", static_cast<long long>(e.backoff_initial.count())));
  } catch (const json::exception& ex) {
    throw Error(Errc::ConfigError, std::string("endpoint: ") + ex.what());
  }
  e.validate();
}

std::string_view chat_role_name(ChatRole role) noexcept {
  switch (role) {
    case ChatRole::System: return "system";
    case ChatRole::User: return "user";
    case ChatRole::Assistant: return "assistant";
  }
  return "user";
}

void RequestLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return in_flight_ < cap_; });
  ++in_flight_;
}

void RequestLimiter::release() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_one();
}

ChatClient::ChatClient(EndpointConfig endpoint, std::shared_ptr<RequestLimiter> limiter)
    : endpoint_(std::move(endpoint)), limiter_(std::move(limiter)) {
  endpoint_.validate();
}

json ChatClient::request_body(std::span<const ChatMessage> messages) const {
  json msgs = json::array();
  bool suffixed = false;
  for (const auto& m : messages) {
    std::string content = m.content;
    if (endpoint_.reasoning_control == ReasoningControl::PromptSwitch && m.role == ChatRole::System && !suffixed) {
      content += "\n" + (endpoint_.reasoning_enabled ? endpoint_.reasoning_on_suffix : endpoint_.reasoning_off_suffix);
      suffixed = true;
    }
    msgs.push_back({{"role", chat_role_name(m.role)}, {"content", std::move(content)}});
  }
  json body{{"model", endpoint_.model_name}, {"messages", std::move(msgs)}};
  if (endpoint_.temperature) body["temperature"] = *endpoint_.temperature;
  if (endpoint_.reasoning_control == ReasoningControl::ChatTemplateFlag) {
    body["chat_template_kwargs"] = {{"enable_thinking", endpoint_.reasoning_enabled}};
  }
  return body;
}

std::pair<std::optional<std::string>, std::string> split_thinking(std::string_view text, std::string_view open,
                                                                  std::string_view close) {
  const auto close_at = close.empty() ? std::string_view::npos : text.find(close);
  if (close_at == std::string_view::npos) return {std::nullopt, std::string(trim(text))};

  const auto open_at = open.empty() ? std::string_view::npos : text.rfind(open, close_at);
  std::string_view trace;
  std::string rest;
  if (open_at == std::string_view::npos) {
    trace = text.substr(0, close_at);
    rest = std::string(text.substr(close_at + close.size()));
  } else {
    trace = text.substr(open_at + open.size(), close_at - open_at - open.size());
    rest = std::string(text.substr(0, open_at)) + std::string(text.substr(close_at + close.size()));
  }
  trace = trim(trace);
  std::optional<std::string> out_trace;
  if (!trace.empty()) out_trace = std::string(trace);
  return {out_trace, std::string(trim(rest))};
}

CompletionResult ChatClient::complete(std::span<const ChatMessage> messages) const {
  const auto scheme_end = endpoint_.base_url.find("://");
  const auto path_start = endpoint_.base_url.find('/', scheme_end + 3);
  const std::string origin = endpoint_.base_url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? std::string() : endpoint_.base_url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  path += "/chat/completions";

  httplib::Headers headers;
  if (!endpoint_.api_key_env.empty()) {
    const char* key = std::getenv(endpoint_.api_key_env.c_str());
    if (!key || !*key) {
      throw Error(Errc::ConfigError, "environment variable " + endpoint_.api_key_env + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const std::string body = request_body(messages).dump();

  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(endpoint_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(endpoint_.timeout - seconds);

  std::string last_error;
  bool last_was_http = false;
  int last_status = 0;
  std::string last_body;
  auto backoff = endpoint_.backoff_initial;

  for (std::size_t attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }

    httplib::Result res;
    {
      if (limiter_) limiter_->acquire();
      httplib::Client cli(origin);
      cli.set_connection_timeout(seconds.count(), micros.count());
      cli.set_read_timeout(seconds.count(), micros.count());
      cli.set_write_timeout(seconds.count(), micros.count());
      res = cli.Post(path, headers, body, "application/json");
      if (limiter_) limiter_->release();
    }

    if (!res) {
      last_was_http = false;
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_was_http = true;
      last_status = res->status;
      last_body = res->body;
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw Error(Errc::ProviderError, "HTTP " + std::to_string(res->status) + ": " + res->body);
    }

    const auto payload = json::parse(res->body, nullptr, false);
    if (payload.is_discarded() || !payload.is_object()) {
      throw Error(Errc::MalformedResponse, "completion body is not a JSON object: " + res->body);
    }
    const auto choices = payload.find("choices");
    if (choices == payload.end() || !choices->is_array() || choices->empty() || !(*choices)[0].is_object()) {
      throw Error(Errc::MalformedResponse, "completion has no choices: " + res->body);
    }
    const auto& message = (*choices)[0].value("message", json::object());
    CompletionResult out;
    out.raw = res->body;
    std::string content = message.contains("content") && message["content"].is_string()
                              ? message["content"].get<std::string>()
                              : std::string();
    for (const char* key : {"reasoning_content", "reasoning"}) {
      if (message.contains(key) && message[key].is_string() && !message[key].get<std::string>().empty()) {
        out.reasoning_trace = message[key].get<std::string>();
        break;
      }
    }
    auto [inline_trace, text] = split_thinking(content, endpoint_.think_open, endpoint_.think_close);
    if (inline_trace) out.reasoning_trace = out.reasoning_trace ? *out.reasoning_trace + "\n" + *inline_trace : *inline_trace;
    out.text = std::move(text);
    if (out.text.empty()) throw Error(Errc::EmptyCompletion, "completion text is empty");
    return out;
  }

  if (last_was_http) {
    throw Error(Errc::ProviderError, "HTTP " + std::to_string(last_status) + " after " +
                                         std::to_string(endpoint_.max_retries + 1) + " attempts: " + last_body);
  }
  throw Error(Errc::Transport, last_error + " after " + std::to_string(endpoint_.max_retries + 1) + " attempts");
}

CompletionResult complete(const EndpointConfig& endpoint, std::span<const ChatMessage> messages) {
  return ChatClient(endpoint).complete(messages);
}

std::optional<json> find_json_object(std::string_view text) {
  for (std::size_t start = text.find('{'); start != std::string_view::npos; start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        auto parsed = json::parse(text.substr(start, i - start + 1), nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object()) return parsed;
        break;
      }
    }
  }
  return std::nullopt;
}

namespace {

const json& require(const json& obj, const char* key, bool (json::*is_type)() const noexcept, const char* type) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(Errc::MalformedResponse, std::string("missing key '") + key + "'");
  if (!((*it).*is_type)()) throw Error(Errc::MalformedResponse, std::string("key '") + key + "' is not a " + type);
  return *it;
}

}  // namespace

OracleOutput parse_oracle_json(std::string_view text) {
  const auto obj = find_json_object(text);
  if (!obj) throw Error(Errc::MalformedResponse, "no JSON object in oracle response");
  OracleOutput out;
  out.rationale = require(*obj, "rationale", &json::is_string, "string").get<std::string>();
  out.answer = require(*obj, "answer", &json::is_string, "string").get<std::string>();
  out.game_over = require(*obj, "game_over", &json::is_boolean, "boolean").get<bool>();
  return out;
}

PrunerOutput parse_pruner_json(std::string_view text) {
  const auto obj = find_json_object(text);
  if (!obj) throw Error(Errc::MalformedResponse, "no JSON object in pruner response");
  PrunerOutput out;
  out.rationale = require(*obj, "rationale", &json::is_string, "string").get<std::string>();
  for (const auto& item : require(*obj, "pruned_ids", &json::is_array, "array")) {
    if (!item.is_string()) throw Error(Errc::MalformedResponse, "pruned_ids entries must be strings");
    const auto s = item.get<std::string>();
    if (s.rfind("city:", 0) != 0) throw Error(Errc::NonCityIdInResponse, "'" + s + "' is not a city id");
    const auto id = NodeId::try_parse(s);
    if (!id) throw Error(Errc::MalformedResponse, "'" + s + "' is not a valid city id");
    out.pruned_ids.push_back(*id);
  }
  return out;
}

namespace {

std::string render_history(std::span<const Exchange> history) {
  std::ostringstream out;
  out << "Previous questions and answers:\n";
  if (history.empty()) {
    out << kNoHistory << "\n";
    return out.str();
  }
  for (std::size_t i = 0; i < history.size(); ++i) {
    out << i + 1 << ". Q: " << history[i].question << "\n";
    out << "   A: " << history[i].answer << "\n";
  }
  return out.str();
}

}  // namespace

std::vector<ChatMessage> build_seeker_messages(const SeekerContext& ctx) {
  std::ostringstream user;
  user << "Turn " << ctx.turn_index << ".\n\n" << render_history(ctx.history);
  if (ctx.graph_text) user << "\nCurrent graph state:\n" << *ctx.graph_text;
  user << "\nAsk your next yes/no question.";
  return {{ChatRole::System, std::string(seeker_system_prompt())}, {ChatRole::User, user.str()}};
}

std::vector<ChatMessage> build_oracle_messages(const HypothesisGraph& graph, const NodeId& target,
                                               std::span<const Exchange> history, std::string_view question) {
  const auto path = graph.ancestors(target);
  std::ostringstream user;
  user << "Secret target (never reveal its name or ID to the Seeker):\n";
  user << "city: " << graph.node(target).name << " (" << target.str() << ")\n";
  user << "state: " << graph.node(path[0]).name << "\n";
  user << "country: " << graph.node(path[1]).name << "\n";
  user << "subregion: " << graph.node(path[2]).name << "\n";
  user << "region: " << graph.node(path[3]).name << "\n\n";
  user << render_history(history);
  user << "\nSeeker's question: " << question;
  return {{ChatRole::System, std::string(oracle_system_prompt())}, {ChatRole::User, user.str()}};
}

std::vector<ChatMessage> build_pruner_messages(std::string_view graph_text, std::size_t turn_index,
                                               std::string_view question, std::string_view answer) {
  std::ostringstream user;
  user << "Turn index: " << turn_index << "\n\n";
  user << "Current graph state:\n" << graph_text << "\n";
  user << "Last Q&A:\nQ: " << question << "\nA: " << answer;
  return {{ChatRole::System, std::string(pruner_system_prompt())}, {ChatRole::User, user.str()}};
}

std::string dump_messages(std::span<const ChatMessage> messages) {
  json arr = json::array();
  for (const auto& m : messages) arr.push_back({{"role", chat_role_name(m.role)}, {"content", m.content}});
  return arr.dump();
}

namespace {

// The question line of a seeker completion: the first line ending in '?', else the whole text.
std::string clean_question(std::string_view text) {
  std::istringstream lines{std::string(text)};
  std::string line;
  while (std::getline(lines, line)) {
    auto t = trim(line);
    while (!t.empty() && (t.front() == '"' || t.front() == '*' || t.front() == '`')) t.remove_prefix(1);
    while (!t.empty() && (t.back() == '"' || t.back() == '*' || t.back() == '`')) t.remove_suffix(1);
    if (!t.empty() && t.back() == '?') return std::string(t);
  }
  return std::string(trim(text));
}

// Re-asks up to `retries` times when the output does not parse; transport and
// provider errors were already retried by the client. Every failure surfaces as
// AgentFailure.
template <typename F>
auto with_retries(std::string_view agent, std::size_t retries, F&& attempt) {
  std::string last;
  for (std::size_t i = 0; i <= retries; ++i) {
    try {
      return attempt();
    } catch (const Error& e) {
      last = e.what();
      if (e.code() == Errc::ConfigError || e.code() == Errc::Transport || e.code() == Errc::ProviderError) break;
    }
  }
  throw Error(Errc::AgentFailure, std::string(agent) + ": " + last);
}

}  // namespace

SeekerOutput LlmSeeker::ask(const SeekerContext& ctx, Rng&, AuditLog* audit) const {
  const auto messages = build_seeker_messages(ctx);
  return with_retries("seeker", parse_retries_, [&] {
    auto result = client_->complete(messages);
    if (audit) audit->push_back({"seeker", client_->request_body(messages).dump(), result.raw});
    SeekerOutput out;
    out.question_text = clean_question(result.text);
    if (out.question_text.empty()) throw Error(Errc::EmptyCompletion, "seeker returned no question");
    out.reasoning_trace = std::move(result.reasoning_trace);
    return out;
  });
}

OracleOutput LlmOracle::answer(const SeekerOutput& question, const NodeId& target, std::span<const Exchange> history,
                               AuditLog* audit) const {
  const auto messages = build_oracle_messages(*fresh_, target, history, question.question_text);
  return with_retries("oracle", parse_retries_, [&] {
    auto result = client_->complete(messages);
    if (audit) audit->push_back({"oracle", client_->request_body(messages).dump(), result.raw});
    return parse_oracle_json(result.text);
  });
}

PrunerOutput LlmPruner::prune_decision(const SeekerOutput& question, std::string_view answer,
                                       const HypothesisGraph& graph, std::size_t turn_index, AuditLog* audit) const {
  const auto messages = build_pruner_messages(graph.serialize_state(), turn_index, question.question_text, answer);
  return with_retries("pruner", parse_retries_, [&] {
    auto result = client_->complete(messages);
    if (audit) audit->push_back({"pruner", client_->request_body(messages).dump(), result.raw});
    return parse_pruner_json(result.text);
  });
}

}  // namespace infoseek
