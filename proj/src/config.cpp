#include "recsim/config.hpp"

#include <fstream>
#include <set>

#include "recsim/error.hpp"
#include "recsim/population.hpp"

namespace recsim {

namespace {

// Reads keys of one JSON object, remembering which were consumed so that typos
// surface as errors instead of silently falling back to defaults.
class Section {
 public:
  Section(const Json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError(prefix_.empty() ? "<root>" : prefix_, "expected an object");
  }

  std::string field(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  const Json* find(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    const Json* v = find(key);
    if (!v) return;
    try {
      if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw std::invalid_argument("number");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer() && !v->is_number_unsigned()) throw std::invalid_argument("integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v->is_number_integer() && v->get<std::int64_t>() < 0) throw std::invalid_argument("non-negative");
        }
      }
      out = v->get<T>();
    } catch (const std::exception&) {
      throw ConfigError(field(key), "wrong type");
    }
  }

  void path(const std::string& key, std::filesystem::path& out, const std::filesystem::path& base) {
    std::string s;
    get(key, s);
    if (!s.empty()) out = resolve(key, s, base);
  }

  void path(const std::string& key, std::optional<std::filesystem::path>& out, const std::filesystem::path& base) {
    std::string s;
    get(key, s);
    if (!s.empty()) out = resolve(key, s, base);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
    }
  }

 private:
  std::filesystem::path resolve(const std::string& key, const std::string& s, const std::filesystem::path& base) {
    std::filesystem::path p(s);
    if (p.is_relative()) p = base / p;
    if (!std::filesystem::exists(p)) throw ConfigError(field(key), "file not found: " + p.string());
    return p.lexically_normal();
  }

  const Json& j_;
  std::string prefix_;
  std::set<std::string> used_;
};

void read_simulator_params(const Json& j, SimulatorParams& p) {
  Section s(j, "simulator.params");
  s.get("watch_affinity", p.watch_affinity);
  s.get("click_affinity", p.click_affinity);
  s.get("leave_satisfaction", p.leave_satisfaction);
  s.get("fatigue_threshold", p.fatigue_threshold);
  s.get("initial_satisfaction", p.initial_satisfaction);
  s.get("satisfaction_gain", p.satisfaction_gain);
  s.get("skip_penalty", p.skip_penalty);
  s.get("leave_penalty", p.leave_penalty);
  s.get("instruction_floor", p.instruction_floor);
  s.get("repetition_decay", p.repetition_decay);
  s.get("share_probability", p.share_probability);
  s.get("mindset_max_chars", p.mindset_max_chars);
  s.get("long_form_s", p.long_form_s);
  s.get("long_watch_k", p.long_watch_k);
  s.get("skip_streak_k", p.skip_streak_k);
  s.get("prompt_budget_chars", p.prompt_budget_chars);
  s.finish();
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(p.initial_satisfaction)) throw ConfigError("simulator.params.initial_satisfaction", "must be in [0,1]");
  if (!unit(p.share_probability)) throw ConfigError("simulator.params.share_probability", "must be in [0,1]");
  if (!(p.repetition_decay > 0.0 && p.repetition_decay <= 1.0)) {
    throw ConfigError("simulator.params.repetition_decay", "must be in (0,1]");
  }
  if (p.click_affinity > p.watch_affinity) {
    throw ConfigError("simulator.params.click_affinity", "must not exceed watch_affinity");
  }
}

void read_recommender_params(const Json& j, RecommenderParams& p) {
  Section s(j, "recommender.params");
  s.get("less_multiplier", p.less_multiplier);
  s.get("more_multiplier", p.more_multiplier);
  s.get("novel_bonus", p.novel_bonus);
  s.get("related_jaccard", p.related_jaccard);
  s.get("smoothing", p.smoothing);
  s.finish();
  if (p.less_multiplier < 0.0) throw ConfigError("recommender.params.less_multiplier", "must be non-negative");
  if (p.more_multiplier < 0.0) throw ConfigError("recommender.params.more_multiplier", "must be non-negative");
}

}  // namespace

RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  Section root(j, "");

  std::string mode = std::string(to_string(c.session.mode));
  root.get("mode", mode);
  auto parsed = parse_session_mode(mode);
  if (!parsed) throw ConfigError("mode", "unknown mode '" + mode + "'");
  c.session.mode = *parsed;
  root.get("k", c.session.k);
  root.get("max_turns", c.session.max_turns);
  root.get("workers", c.session.workers);
  root.get("start_ts", c.session.start_ts);
  root.get("dwell_s", c.session.dwell_s);
  root.get("seeds", c.seeds);
  if (c.seeds.empty()) throw ConfigError("seeds", "must not be empty");

  root.path("catalog", c.catalog, base_dir);
  if (c.catalog.empty()) throw ConfigError("catalog", "required");
  root.path("profiles", c.profiles, base_dir);
  root.path("rubric", c.rubric, base_dir);

  if (const Json* sim = root.find("simulator")) {
    Section s(*sim, "simulator");
    s.get("name", c.session.simulator);
    s.get("temperature", c.session.llm_simulator.temperature);
    s.get("max_retries", c.session.llm_simulator.max_retries);
    if (const Json* params = s.find("params")) read_simulator_params(*params, c.session.simulator_params);
    s.finish();
  }
  if (const Json* rec = root.find("recommender")) {
    Section s(*rec, "recommender");
    s.get("name", c.session.recommender);
    if (const Json* params = s.find("params")) read_recommender_params(*params, c.session.recommender_params);
    s.finish();
  }
  if (const Json* w = root.find("reward_weights")) {
    Section s(*w, "reward_weights");
    s.get("watch_s", c.reward_weights.watch_s);
    s.get("click", c.reward_weights.click);
    s.get("like", c.reward_weights.like);
    s.get("share", c.reward_weights.share);
    s.get("comment", c.reward_weights.comment);
    s.get("extra_turn", c.reward_weights.extra_turn);
    s.finish();
  }
  if (const Json* llm = root.find("llm")) {
    LlmEndpointConfig e;
    Section s(*llm, "llm");
    s.get("base_url", e.options.base_url);
    s.get("model", e.options.model);
    s.get("api_key_env", e.api_key_env);
    std::int64_t timeout_ms = e.options.timeout.count();
    s.get("timeout_ms", timeout_ms);
    e.options.timeout = std::chrono::milliseconds(timeout_ms);
    s.get("max_in_flight", e.options.max_in_flight);
    s.get("max_retries", e.options.max_retries);
    std::int64_t backoff_ms = e.options.initial_backoff.count();
    s.get("initial_backoff_ms", backoff_ms);
    e.options.initial_backoff = std::chrono::milliseconds(backoff_ms);
    s.finish();
    if (e.options.max_in_flight < 1) throw ConfigError("llm.max_in_flight", "must be at least 1");
    if (!e.api_key_env.empty()) e.options.api_key = api_key_from_env(e.api_key_env);
    c.llm = std::move(e);
  }
  if (const Json* pop = root.find("population")) {
    auto& p = c.population;
    Section s(*pop, "population");
    s.path("graph", p.graph, base_dir);
    s.path("injected_items", p.injected_items, base_dir);
    s.get("ticks", p.ticks);
    s.get("schedule", p.schedule);
    s.get("influence_strength", p.influence_strength);
    s.get("activity_probability", p.activity_probability);
    s.get("tick_hours", p.tick_hours);
    s.get("popularity_weight", p.popularity_weight);
    s.get("injected_boost", p.injected_boost);
    s.get("session_max_turns", p.session_max_turns);
    s.finish();
    if (p.influence_strength < 0.0) throw ConfigError("population.influence_strength", "must be non-negative");
    CheckpointSchedule{p.schedule}.validate(p.ticks);
  }
  if (const Json* svc = root.find("service")) {
    Section s(*svc, "service");
    s.get("host", c.service.host);
    s.get("port", c.service.port);
    std::string store;
    s.get("store", store);
    if (!store.empty()) {
      std::filesystem::path p(store);
      c.service.store = p.is_relative() ? base_dir / p : p;
    }
    s.finish();
  } else {
    c.service.store = base_dir / c.service.store;
  }
  if (const Json* ev = root.find("eval")) {
    Section s(*ev, "eval");
    s.path("dataset", c.eval.dataset, base_dir);
    s.get("n", c.eval.n);
    s.get("holdout", c.eval.holdout);
    s.finish();
    if (c.eval.n < 1) throw ConfigError("eval.n", "must be at least 1");
  }
  root.finish();

  const bool needs_llm = c.session.simulator == "llm" || c.session.recommender == "llm";
  if (needs_llm && !c.llm) throw ConfigError("llm", "an llm endpoint is required by the selected simulator/recommender");
  // chat_client is attached by make_chat_client; validate the rest now.
  auto probe = c.session;
  if (needs_llm) probe.chat_client = std::make_shared<FunctionChatClient>([](const ChatRequest&) { return ""; });
  validate(probe);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  auto base = std::filesystem::absolute(path).parent_path();
  return run_config_from_json(j, base);
}

std::shared_ptr<ChatClient> make_chat_client(const RunConfig& config) {
  if (!config.llm) return nullptr;
  return std::make_shared<OpenAiChatClient>(config.llm->options);
}

Json to_json(const SimulatorParams& p) {
  return {{"watch_affinity", p.watch_affinity},
          {"click_affinity", p.click_affinity},
          {"leave_satisfaction", p.leave_satisfaction},
          {"fatigue_threshold", p.fatigue_threshold},
          {"initial_satisfaction", p.initial_satisfaction},
          {"satisfaction_gain", p.satisfaction_gain},
          {"skip_penalty", p.skip_penalty},
          {"leave_penalty", p.leave_penalty},
          {"instruction_floor", p.instruction_floor},
          {"repetition_decay", p.repetition_decay},
          {"share_probability", p.share_probability},
          {"mindset_max_chars", p.mindset_max_chars},
          {"long_form_s", p.long_form_s},
          {"long_watch_k", p.long_watch_k},
          {"skip_streak_k", p.skip_streak_k},
          {"prompt_budget_chars", p.prompt_budget_chars}};
}

Json to_json(const RecommenderParams& p) {
  return {{"less_multiplier", p.less_multiplier},
          {"more_multiplier", p.more_multiplier},
          {"novel_bonus", p.novel_bonus},
          {"related_jaccard", p.related_jaccard},
          {"smoothing", p.smoothing}};
}

Json to_json(const RunConfig& c) {
  Json j;
  j["mode"] = std::string(to_string(c.session.mode));
  j["k"] = c.session.k;
  j["max_turns"] = c.session.max_turns;
  j["seeds"] = c.seeds;
  j["simulator"] = {{"name", c.session.simulator}, {"params", to_json(c.session.simulator_params)}};
  j["recommender"] = {{"name", c.session.recommender}, {"params", to_json(c.session.recommender_params)}};
  j["reward_weights"] = to_json(c.reward_weights);
  if (c.llm) j["llm"] = {{"base_url", c.llm->options.base_url}, {"model", c.llm->options.model}};
  return j;
}

}  // namespace recsim
