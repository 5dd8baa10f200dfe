#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ej/judge.h"

namespace ej {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// One POST of a chat-completions request body. Implementations throw
// RemoteUnavailable or Timeout when no HTTP response arrives.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual HttpResponse post(const std::string& body) = 0;
};

// cpp-httplib client for `{endpoint_url}/chat/completions` with a bearer token
// read from the environment variable named by api_key_env.
std::unique_ptr<ChatTransport> make_http_transport(const JudgeBackendConfig& config);

nlohmann::json chat_request(const std::vector<ChatMessage>& messages,
                            const JudgeBackendConfig& config);

// choices[0].message.content of a chat-completions response body.
std::string extract_reply(std::string_view body);

// Single round trip with retries on transport errors and 5xx/429 replies.
std::string remote_chat(const std::vector<ChatMessage>& messages, const JudgeBackendConfig& config,
                        ChatTransport& transport);

// The JSON object carried by a reply: the <decision> block if present,
// otherwise the text with code fences stripped, otherwise the outermost braces.
nlohmann::json extract_verdict_json(std::string_view reply);

struct ParsedVerdict {
  JudgeVerdict verdict;
  bool low_fidelity = false;  // claims were missing and filled as neutral
};

// Throws MalformedVerdict when the reply carries no usable verdict.
ParsedVerdict parse_verdict(std::string_view reply, const EvaluationContext& ctx);

std::string verdict_system_prompt();

// Judge backed by an OpenAI-compatible chat endpoint. Each judgment runs a
// three-turn exchange (hypothesis, challenge, refinement) appended to one
// running transcript.
class RemoteJudge final : public Judge {
 public:
  RemoteJudge(JudgeBackendConfig config, std::unique_ptr<ChatTransport> transport);

  JudgeVerdict judge(const EvaluationContext& ctx) override;
  std::string_view name() const noexcept override { return "remote"; }
  bool deterministic() const noexcept override { return false; }

  const std::vector<ChatMessage>& transcript() const noexcept { return transcript_; }

 private:
  std::string exchange(std::string user_turn);
  JudgeVerdict fallback(const EvaluationContext& ctx, std::string flag);

  JudgeBackendConfig config_;
  std::unique_ptr<ChatTransport> transport_;
  std::vector<ChatMessage> transcript_;
  RuleJudge rule_;
};

}  // namespace ej
