#include <gtest/gtest.h>

#include <atomic>
#include <httplib.h>
#include <thread>

#include "recsim/error.hpp"
#include "recsim/catalog.hpp"
#include "recsim/llm_client.hpp"

using namespace recsim;

namespace {

class FakeEndpoint {
 public:
  explicit FakeEndpoint(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/v1/chat/completions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::string reply(const std::string& content) {
  return Json{{"choices", Json::array({Json{{"message", Json{{"role", "assistant"}, {"content", content}}}}})}}.dump();
}

ChatRequest hello() {
  ChatRequest r;
  r.messages = {{"user", "hi"}};
  return r;
}

ChatClientOptions fast(const std::string& url) {
  ChatClientOptions o;
  o.base_url = url;
  o.model = "test-model";
  o.api_key = "k";
  o.max_retries = 2;
  o.initial_backoff = std::chrono::milliseconds(1);
  o.timeout = std::chrono::milliseconds(5000);
  return o;
}

}  // namespace

TEST(LlmClient, RequestBodyShape) {
  OpenAiChatClient c(fast("http://127.0.0.1:1/v1"));
  ChatRequest r;
  r.messages = {{"system", "s"}, {"user", "u"}};
  r.temperature = 0.0;
  r.seed = 7;
  const auto body = Json::parse(c.request_body(r));
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["messages"].size(), 2u);
  EXPECT_EQ(body["messages"][1]["content"], "u");
  EXPECT_EQ(body["temperature"], 0.0);
  EXPECT_EQ(body["seed"], 7);
}

TEST(LlmClient, ExtractContent) {
  EXPECT_EQ(OpenAiChatClient::extract_content(reply("hello")), "hello");
  EXPECT_THROW(OpenAiChatClient::extract_content("{}"), BackendError);
  EXPECT_THROW(OpenAiChatClient::extract_content("not json"), BackendError);
}

TEST(LlmClient, RetriesServerErrorsThenSucceeds) {
  std::atomic<int> calls{0};
  FakeEndpoint ep([&](const httplib::Request& req, httplib::Response& res) {
    EXPECT_EQ(req.get_header_value("Authorization"), "Bearer k");
    if (++calls < 3) {
      res.status = calls == 1 ? 503 : 429;
      return;
    }
    res.set_content(reply("ok"), "application/json");
  });
  OpenAiChatClient c(fast(ep.base_url()));
  EXPECT_EQ(c.complete(hello()), "ok");
  EXPECT_EQ(calls.load(), 3);
}

TEST(LlmClient, ClientErrorsFailFast) {
  std::atomic<int> calls{0};
  FakeEndpoint ep([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 400;
  });
  OpenAiChatClient c(fast(ep.base_url()));
  EXPECT_THROW(c.complete(hello()), BackendError);
  EXPECT_EQ(calls.load(), 1);
}

TEST(LlmClient, GivesUpAfterRetries) {
  std::atomic<int> calls{0};
  FakeEndpoint ep([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 500;
  });
  OpenAiChatClient c(fast(ep.base_url()));
  EXPECT_THROW(c.complete(hello()), BackendError);
  EXPECT_EQ(calls.load(), 3);
}

TEST(LlmClient, InFlightLimiterBoundsConcurrency) {
  InFlightLimiter lim(2);
  std::atomic<int> active{0}, peak{0};
  std::vector<std::thread> ts;
  for (int i = 0; i < 8; ++i) {
    ts.emplace_back([&] {
      InFlightLimiter::Guard g(lim);
      const int now = ++active;
      int p = peak.load();
      while (now > p && !peak.compare_exchange_weak(p, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      --active;
    });
  }
  for (auto& t : ts) t.join();
  EXPECT_LE(peak.load(), 2);
}
