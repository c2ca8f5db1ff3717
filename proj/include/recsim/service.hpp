#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "recsim/rewards.hpp"
#include "recsim/session.hpp"
#include "recsim/store.hpp"

namespace httplib {
class Server;
}

namespace recsim {

/// Maps to an HTTP status; `field` names the offending request field for 422s.
class ApiError : public Error {
 public:
  ApiError(int status, std::string field, const std::string& what)
      : Error(what), status_(status), field_(std::move(field)) {}
  int status() const noexcept { return status_; }
  const std::string& field() const noexcept { return field_; }

 private:
  int status_;
  std::string field_;
};

struct SessionComparison {
  RewardSignal simulated_stats;
  RewardSignal annotator_stats;
  std::map<std::string, double> per_metric_delta;  // annotator minus simulated
};

Json to_json(const SessionComparison& c);

/// Annotator-mode session manager behind the /v1 API. Requests touching one session
/// are serialized on that session's mutex; finished trajectories are appended to
/// the store exactly once.
class AnnotatorService {
 public:
  // `session` is the simulated-run configuration; annotator sessions use the same
  // settings with mode HumanAnnotator. The paired simulated run uses `session.mode`
  // (HumanAnnotator there falls back to Agentic).
  AnnotatorService(CatalogPtr catalog, std::vector<UserProfile> profiles, SessionConfig session,
                   RewardWeights weights, TrajectoryStore& store);

  // Request bodies and responses are the documented /v1 JSON shapes.
  Json create_session(const Json& body);
  Json submit_action(const std::string& session_id, const Json& body);
  Json submit_leave(const std::string& session_id, const Json& body);
  Json current_list(const std::string& session_id);
  Json trajectory(const std::string& session_id);
  SessionComparison comparison(const std::string& session_id);
  Json list_trajectories(const ExportFilter& filter) const;

 private:
  struct Entry {
    std::mutex mu;
    SessionHandle session;
    std::uint64_t paired_seed = 0;
    bool stored = false;
    std::map<std::string, Json> replies;  // idempotency key -> first response
  };

  std::shared_ptr<Entry> entry(const std::string& session_id);
  Json list_payload(const std::string& session_id, const Session& s) const;
  Json item_payload(const std::string& item_id) const;
  void store_if_done(Entry& e);

  CatalogPtr catalog_;
  std::map<std::string, UserProfile> profiles_;
  SessionConfig simulated_config_;
  SessionConfig annotator_config_;
  RewardWeights weights_;
  TrajectoryStore& store_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_id_ = 1;
};

/// httplib front end for AnnotatorService.
class HttpService {
 public:
  explicit HttpService(AnnotatorService& service);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // Port 0 binds an ephemeral port. Returns the bound port; serves on a background thread.
  int start(const std::string& host, int port);
  // Blocks until stop() is called from elsewhere (or a signal handler).
  void listen_blocking(const std::string& host, int port);
  void stop();

 private:
  void routes();

  AnnotatorService& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace recsim
