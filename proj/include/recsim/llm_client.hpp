#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace recsim {

struct ChatMessage {
  std::string role;  // "system", "user" or "assistant"
  std::string content;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.7;
  std::optional<std::uint64_t> seed;
  int max_tokens = 512;
};

/// Anything that can answer a chat-completions request with the assistant text.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

struct ChatClientOptions {
  std::string base_url = "http://127.0.0.1:8000/v1";
  std::string model = "gpt-4.1";
  std::string api_key;
  std::chrono::milliseconds timeout{60000};
  int max_in_flight = 4;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{200};
};

// Reads the key from `env_var`; empty string if unset.
std::string api_key_from_env(const std::string& env_var);

/// Blocking counting semaphore with a runtime limit.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(int limit) : available_(limit < 1 ? 1 : limit) {}
  void acquire();
  void release();

  class Guard {
   public:
    explicit Guard(InFlightLimiter& l) : l_(l) { l_.acquire(); }
    ~Guard() { l_.release(); }
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;

   private:
    InFlightLimiter& l_;
  };

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int available_;
};

/// Client for an OpenAI-compatible `POST {base_url}/chat/completions` endpoint.
/// Retries transport failures, 429 and 5xx with exponential backoff; other
/// statuses fail immediately with BackendError.
class OpenAiChatClient final : public ChatClient {
 public:
  explicit OpenAiChatClient(ChatClientOptions options);
  std::string complete(const ChatRequest& request) override;

  const ChatClientOptions& options() const noexcept { return options_; }

  // Exposed for tests: the JSON body sent for `request`.
  std::string request_body(const ChatRequest& request) const;
  // Extracts choices[0].message.content; throws BackendError on a malformed body.
  static std::string extract_content(const std::string& response_body);

 private:
  ChatClientOptions options_;
  InFlightLimiter limiter_;
};

/// Test double that answers from a callback.
class FunctionChatClient final : public ChatClient {
 public:
  explicit FunctionChatClient(std::function<std::string(const ChatRequest&)> fn) : fn_(std::move(fn)) {}
  std::string complete(const ChatRequest& request) override { return fn_(request); }

 private:
  std::function<std::string(const ChatRequest&)> fn_;
};

}  // namespace recsim
