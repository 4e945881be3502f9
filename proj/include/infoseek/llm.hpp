#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "infoseek/agents.hpp"
#include "infoseek/taxonomy.hpp"

namespace infoseek {

// How the chain-of-thought on/off condition reaches the model.
enum class ReasoningControl {
  None,              // send nothing
  ChatTemplateFlag,  // "chat_template_kwargs": {"enable_thinking": <bool>}
  PromptSwitch,      // append reasoning_on_suffix / reasoning_off_suffix to the system prompt
};

struct EndpointConfig {
  std::string base_url = "http://127.0.0.1:8000/v1";
  std::string model_name;
  std::string api_key_env;  // empty: no Authorization header
  std::optional<double> temperature;  // unset: provider default
  bool reasoning_enabled = false;
  ReasoningControl reasoning_control = ReasoningControl::None;
  std::string reasoning_on_suffix = "/think";
  std::string reasoning_off_suffix = "/no_think";
  std::string think_open = "<think>";
  std::string think_close = "</think>";
  std::size_t max_retries = 2;
  std::chrono::milliseconds timeout{120000};
  std::chrono::milliseconds backoff_initial{500};

  // Throws ConfigError.
  void validate() const;
};

void to_json(nlohmann::json& j, const EndpointConfig& e);
void from_json(const nlohmann::json& j, EndpointConfig& e);

enum class ChatRole { System, User, Assistant };

struct ChatMessage {
  ChatRole role = ChatRole::User;
  std::string content;
};

std::string_view chat_role_name(ChatRole role) noexcept;

struct CompletionResult {
  std::string text;
  std::optional<std::string> reasoning_trace;
  std::string raw;  // provider response body
};

// Caps concurrent in-flight requests across every client sharing it.
class RequestLimiter {
 public:
  explicit RequestLimiter(std::size_t cap) : cap_(cap == 0 ? 1 : cap) {}

  void acquire();
  void release();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t cap_;
  std::size_t in_flight_ = 0;
};

// Chat-completion client (POST <base_url>/chat/completions). Thread-safe; every
// call opens its own connection.
class ChatClient {
 public:
  explicit ChatClient(EndpointConfig endpoint, std::shared_ptr<RequestLimiter> limiter = nullptr);

  // At most max_retries + 1 attempts. Retries transport failures, 429 and 5xx
  // with exponential backoff. Throws Transport, ProviderError, EmptyCompletion,
  // MalformedResponse.
  CompletionResult complete(std::span<const ChatMessage> messages) const;

  // Request body complete() would send.
  nlohmann::json request_body(std::span<const ChatMessage> messages) const;

  const EndpointConfig& endpoint() const noexcept { return endpoint_; }

 private:
  EndpointConfig endpoint_;
  std::shared_ptr<RequestLimiter> limiter_;
};

CompletionResult complete(const EndpointConfig& endpoint, std::span<const ChatMessage> messages);

// Splits an inline thinking block off a completion: {trace, remaining text}.
// A close marker with no open marker treats everything before it as the trace.
std::pair<std::optional<std::string>, std::string> split_thinking(std::string_view text, std::string_view open,
                                                                  std::string_view close);

// First JSON object in free text (fenced blocks and surrounding prose tolerated).
std::optional<nlohmann::json> find_json_object(std::string_view text);

// Throw MalformedResponse; parse_pruner_json also throws NonCityIdInResponse.
OracleOutput parse_oracle_json(std::string_view text);
PrunerOutput parse_pruner_json(std::string_view text);

// Sentinel user-message text when nothing has been asked yet.
inline constexpr std::string_view kNoHistory = "No questions asked yet.";

std::vector<ChatMessage> build_seeker_messages(const SeekerContext& ctx);
std::vector<ChatMessage> build_oracle_messages(const HypothesisGraph& graph, const NodeId& target,
                                               std::span<const Exchange> history, std::string_view question);
std::vector<ChatMessage> build_pruner_messages(std::string_view graph_text, std::size_t turn_index,
                                               std::string_view question, std::string_view answer);

// Serializes a request for audit logs.
std::string dump_messages(std::span<const ChatMessage> messages);

class LlmSeeker final : public Seeker {
 public:
  LlmSeeker(std::shared_ptr<const ChatClient> client, std::size_t parse_retries = 2)
      : client_(std::move(client)), parse_retries_(parse_retries) {}
  SeekerOutput ask(const SeekerContext& ctx, Rng& rng, AuditLog* audit) const override;

 private:
  std::shared_ptr<const ChatClient> client_;
  std::size_t parse_retries_;
};

class LlmOracle final : public Oracle {
 public:
  LlmOracle(std::shared_ptr<const ChatClient> client, std::shared_ptr<const HypothesisGraph> fresh,
            std::size_t parse_retries = 2)
      : client_(std::move(client)), fresh_(std::move(fresh)), parse_retries_(parse_retries) {}
  OracleOutput answer(const SeekerOutput& question, const NodeId& target, std::span<const Exchange> history,
                      AuditLog* audit) const override;

 private:
  std::shared_ptr<const ChatClient> client_;
  std::shared_ptr<const HypothesisGraph> fresh_;
  std::size_t parse_retries_;
};

class LlmPruner final : public Pruner {
 public:
  explicit LlmPruner(std::shared_ptr<const ChatClient> client, std::size_t parse_retries = 2)
      : client_(std::move(client)), parse_retries_(parse_retries) {}
  PrunerOutput prune_decision(const SeekerOutput& question, std::string_view answer, const HypothesisGraph& graph,
                              std::size_t turn_index, AuditLog* audit) const override;

 private:
  std::shared_ptr<const ChatClient> client_;
  std::size_t parse_retries_;
};

}  // namespace infoseek
