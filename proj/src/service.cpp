#include "recsim/service.hpp"

#include "httplib.h"

namespace recsim {

namespace {

std::string optional_string(const Json& body, const std::string& key) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return {};
  if (!it->is_string()) throw ApiError(422, key, key + " must be a string");
  return it->get<std::string>();
}

void require_object(const Json& body) {
  if (!body.is_object()) throw ApiError(422, "body", "request body must be a JSON object");
}

}  // namespace

Json to_json(const SessionComparison& c) {
  Json delta = Json::object();
  for (const auto& [k, v] : c.per_metric_delta) delta[k] = v;
  return {{"simulated_stats", to_json(c.simulated_stats)},
          {"annotator_stats", to_json(c.annotator_stats)},
          {"per_metric_delta", std::move(delta)}};
}

AnnotatorService::AnnotatorService(CatalogPtr catalog, std::vector<UserProfile> profiles, SessionConfig session,
                                   RewardWeights weights, TrajectoryStore& store)
    : catalog_(std::move(catalog)),
      simulated_config_(session),
      annotator_config_(std::move(session)),
      weights_(weights),
      store_(store) {
  for (auto& p : profiles) {
    validate(p);
    if (!profiles_.emplace(p.user_id, p).second) throw DuplicateIdError(p.user_id);
  }
  if (simulated_config_.mode == SessionMode::HumanAnnotator) simulated_config_.mode = SessionMode::Agentic;
  annotator_config_.mode = SessionMode::HumanAnnotator;
  validate(simulated_config_);
  validate(annotator_config_);
}

std::shared_ptr<AnnotatorService::Entry> AnnotatorService::entry(const std::string& session_id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw ApiError(404, "session_id", "unknown session '" + session_id + "'");
  return it->second;
}

Json AnnotatorService::item_payload(const std::string& item_id) const {
  const auto& e = catalog_->at(item_id);
  return {{"item_id", e.item.item_id},
          {"title", e.item.title},
          {"description", e.item.description},
          {"category", e.item.category},
          {"content_type", std::string(to_string(e.item.content_type))},
          {"duration_s", e.item.duration_s},
          {"tags", e.metadata.tags}};
}

Json AnnotatorService::list_payload(const std::string& session_id, const Session& s) const {
  Json items = Json::array();
  for (const auto& id : s.current_list().items) items.push_back(item_payload(id));
  Json j;
  j["session_id"] = session_id;
  j["turn_index"] = s.trajectory().turns.size();
  j["items"] = std::move(items);
  j["cursor"] = s.cursor();
  const auto current = s.current_item();
  j["current_item"] = current ? Json(*current) : Json(nullptr);
  j["awaiting_leave"] = s.awaiting_leave_response();
  j["done"] = s.done();
  const auto& t = s.trajectory();
  j["termination"] = t.termination ? Json(std::string(to_string(*t.termination))) : Json(nullptr);
  return j;
}

void AnnotatorService::store_if_done(Entry& e) {
  if (e.stored || !e.session->done()) return;
  Trajectory t = e.session->trajectory();
  t.annotations["paired_seed"] = e.paired_seed;
  t.annotations["reward"] = to_json(compute_trajectory_reward(t, weights_));
  store_.append(t);
  e.stored = true;
}

Json AnnotatorService::create_session(const Json& body) {
  require_object(body);
  const std::string user_id = optional_string(body, "user_id");
  if (user_id.empty()) throw ApiError(422, "user_id", "user_id is required");
  auto pit = profiles_.find(user_id);
  if (pit == profiles_.end()) throw ApiError(422, "user_id", "unknown user '" + user_id + "'");

  std::lock_guard lock(mu_);
  const auto n = next_id_++;
  std::uint64_t seed = n;
  if (auto it = body.find("seed"); it != body.end() && !it->is_null()) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
      throw ApiError(422, "seed", "seed must be a non-negative integer");
    }
    seed = it->get<std::uint64_t>();
  }
  const std::string id = "ann-" + std::to_string(n) + "-" + user_id;
  auto e = std::make_shared<Entry>();
  e->paired_seed = seed;
  SessionStart start;
  start.session_id = id;
  e->session = reset(pit->second, catalog_, annotator_config_, seed, start);
  sessions_[id] = e;
  store_if_done(*e);

  Json j = list_payload(id, *e->session);
  j["user_id"] = user_id;
  j["paired_seed"] = seed;
  return j;
}

Json AnnotatorService::submit_action(const std::string& session_id, const Json& body) {
  require_object(body);
  auto e = entry(session_id);
  std::lock_guard lock(e->mu);
  const std::string key = optional_string(body, "idempotency_key");
  if (!key.empty()) {
    if (auto it = e->replies.find(key); it != e->replies.end()) return it->second;
  }
  Session& s = *e->session;
  if (s.done()) throw ApiError(409, "session_id", "session is finished");
  if (s.awaiting_leave_response()) throw ApiError(409, "action", "a Leave is pending; resolve it via /leave");

  const auto current = s.current_item();
  const std::string item_id = optional_string(body, "item_id");
  if (!item_id.empty() && item_id != *current) {
    throw ApiError(422, "item_id", "expected a decision for '" + *current + "', got '" + item_id + "'");
  }
  const std::string action_text = optional_string(body, "action");
  if (action_text.empty()) throw ApiError(422, "action", "action is required");
  const auto action = parse_action(action_text);
  if (!action) throw ApiError(422, "action", "unknown action '" + action_text + "'");

  ActionDecision d;
  d.action = *action;
  d.reasoning = optional_string(body, "reasoning");
  if (d.reasoning.empty()) d.reasoning = "annotator";
  if (auto it = body.find("watch_s"); it != body.end() && !it->is_null()) {
    if (!it->is_number_integer() && !it->is_number_unsigned()) {
      throw ApiError(422, "watch_s", "watch_s must be an integer");
    }
    d.watch_s = it->get<std::int64_t>();
  }
  const auto& item = catalog_->at(*current).item;
  if (d.action == ActionKind::Watch) {
    if (!is_timed(item.content_type)) throw ApiError(422, "action", "Watch is only valid for timed content");
    if (!d.watch_s) throw ApiError(422, "watch_s", "watch_s is required for Watch");
    if (*d.watch_s < 1 || *d.watch_s > item.duration_s) {
      throw ApiError(422, "watch_s", "watch_s must lie in [1, " + std::to_string(item.duration_s) + "]");
    }
  } else if (d.watch_s) {
    throw ApiError(422, "watch_s", "watch_s is only allowed on Watch");
  }

  auto finished = s.submit_decision(d);
  store_if_done(*e);
  Json j = list_payload(session_id, s);
  j["accepted_item"] = *current;
  j["turn_finished"] = finished.has_value();
  if (!key.empty()) e->replies[key] = j;
  return j;
}

Json AnnotatorService::submit_leave(const std::string& session_id, const Json& body) {
  require_object(body);
  auto e = entry(session_id);
  std::lock_guard lock(e->mu);
  const std::string key = optional_string(body, "idempotency_key");
  if (!key.empty()) {
    if (auto it = e->replies.find(key); it != e->replies.end()) return it->second;
  }
  Session& s = *e->session;
  if (s.done()) throw ApiError(409, "session_id", "session is finished");
  if (!s.awaiting_leave_response()) throw ApiError(409, "session_id", "no Leave is pending");
  const std::string text = optional_string(body, "instruction");
  std::optional<Instruction> instruction;
  if (!text.empty()) instruction = Instruction{text, InstructionSource::Explicit, ""};
  const auto outcome = s.resolve_leave(instruction);
  store_if_done(*e);
  Json j = list_payload(session_id, s);
  j["refreshed"] = outcome.next_list.has_value();
  if (!key.empty()) e->replies[key] = j;
  return j;
}

Json AnnotatorService::current_list(const std::string& session_id) {
  auto e = entry(session_id);
  std::lock_guard lock(e->mu);
  return list_payload(session_id, *e->session);
}

Json AnnotatorService::trajectory(const std::string& session_id) {
  auto e = entry(session_id);
  std::lock_guard lock(e->mu);
  return to_json(e->session->trajectory());
}

SessionComparison AnnotatorService::comparison(const std::string& session_id) {
  auto e = entry(session_id);
  Trajectory human;
  std::uint64_t seed = 0;
  {
    std::lock_guard lock(e->mu);
    if (!e->session->done()) throw ApiError(409, "session_id", "session is still running");
    human = e->session->trajectory();
    seed = e->paired_seed;
  }
  const auto simulated = run_session(profiles_.at(human.user_id), catalog_, simulated_config_, seed);
  SessionComparison c;
  c.simulated_stats = compute_trajectory_reward(simulated, weights_);
  c.annotator_stats = compute_trajectory_reward(human, weights_);
  for (const auto& m : reward_metric_names()) {
    c.per_metric_delta[m] = metric_value(c.annotator_stats, m) - metric_value(c.simulated_stats, m);
  }
  return c;
}

Json AnnotatorService::list_trajectories(const ExportFilter& filter) const {
  Json arr = Json::array();
  for (const auto& t : store_.list(filter)) arr.push_back(to_json(t));
  return {{"trajectories", std::move(arr)}};
}

// ---------------------------------------------------------------------------

HttpService::HttpService(AnnotatorService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  routes();
}

HttpService::~HttpService() { stop(); }

void HttpService::routes() {
  auto& srv = *server_;
  auto reply = [](httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  };
  auto handle = [this, reply](auto&& fn) {
    return [fn, reply](const httplib::Request& req, httplib::Response& res) {
      try {
        reply(res, 200, fn(req));
      } catch (const ApiError& e) {
        reply(res, e.status(), {{"error", e.what()}, {"field", e.field()}});
      } catch (const Json::exception& e) {
        reply(res, 400, {{"error", std::string("malformed JSON: ") + e.what()}, {"field", "body"}});
      } catch (const PreconditionError& e) {
        reply(res, 409, {{"error", e.what()}, {"field", nullptr}});
      } catch (const ConfigError& e) {
        reply(res, 422, {{"error", e.what()}, {"field", e.field()}});
      } catch (const std::exception& e) {
        reply(res, 500, {{"error", e.what()}, {"field", nullptr}});
      }
    };
  };
  auto body_of = [](const httplib::Request& req) { return req.body.empty() ? Json::object() : Json::parse(req.body); };

  srv.Get("/v1/health", handle([](const httplib::Request&) { return Json{{"status", "ok"}}; }));
  srv.Post("/v1/sessions",
           handle([this, body_of](const httplib::Request& req) { return service_.create_session(body_of(req)); }));
  srv.Post(R"(/v1/sessions/([^/]+)/actions)", handle([this, body_of](const httplib::Request& req) {
             return service_.submit_action(req.matches[1], body_of(req));
           }));
  srv.Post(R"(/v1/sessions/([^/]+)/leave)", handle([this, body_of](const httplib::Request& req) {
             return service_.submit_leave(req.matches[1], body_of(req));
           }));
  srv.Get(R"(/v1/sessions/([^/]+)/list)",
          handle([this](const httplib::Request& req) { return service_.current_list(req.matches[1]); }));
  srv.Get(R"(/v1/sessions/([^/]+)/trajectory)",
          handle([this](const httplib::Request& req) { return service_.trajectory(req.matches[1]); }));
  srv.Get(R"(/v1/sessions/([^/]+)/comparison)",
          handle([this](const httplib::Request& req) { return to_json(service_.comparison(req.matches[1])); }));
  srv.Get("/v1/trajectories", handle([this](const httplib::Request& req) {
            ExportFilter f;
            if (req.has_param("mode")) {
              const auto m = parse_session_mode(req.get_param_value("mode"));
              if (!m) throw ApiError(422, "mode", "unknown mode '" + req.get_param_value("mode") + "'");
              f.mode = m;
            }
            if (req.has_param("user_id")) f.user_id = req.get_param_value("user_id");
            return service_.list_trajectories(f);
          }));
}

int HttpService::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void HttpService::listen_blocking(const std::string& host, int port) {
  if (!server_->listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
}

void HttpService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace recsim
