#include "recsim/session.hpp"

#include <algorithm>
#include <chrono>
#include <mutex>
#include <set>

#include "recsim/error.hpp"
#include "recsim/parallel.hpp"
#include "recsim/random.hpp"
#include "recsim/text.hpp"

namespace recsim {

namespace {

constexpr std::array<std::string_view, 4> kModeNames = {"Agentic", "Traditional", "EvalOnly", "HumanAnnotator"};
constexpr std::array<std::string_view, 4> kTerminationNames = {"LeaveWithoutInstruction", "MaxTurns",
                                                               "EvalOnlySingleTurn", "CandidatesExhausted"};

constexpr std::uint64_t kSimulatorStream = 1;
constexpr std::uint64_t kRecommenderStream = 2;

}  // namespace

std::string_view to_string(SessionMode m) noexcept { return kModeNames[static_cast<std::size_t>(m)]; }

std::optional<SessionMode> parse_session_mode(std::string_view s) {
  const auto needle = to_lower(trim(s));
  for (std::size_t i = 0; i < kModeNames.size(); ++i) {
    if (to_lower(kModeNames[i]) == needle) return static_cast<SessionMode>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Termination t) noexcept { return kTerminationNames[static_cast<std::size_t>(t)]; }

std::optional<Termination> parse_termination(std::string_view s) {
  for (std::size_t i = 0; i < kTerminationNames.size(); ++i) {
    if (kTerminationNames[i] == s) return static_cast<Termination>(i);
  }
  return std::nullopt;
}

void validate(const SessionConfig& c) {
  if (c.k == 0) throw ConfigError("k", "must be at least 1");
  if (c.max_turns < 1) throw ConfigError("max_turns", "must be at least 1");
  if (c.mode == SessionMode::EvalOnly && c.max_turns != 1) {
    throw ConfigError("max_turns", "EvalOnly mode requires max_turns = 1");
  }
  if (c.simulator != "scripted" && c.simulator != "llm") {
    throw ConfigError("simulator.name", "unknown simulator '" + c.simulator + "'");
  }
  if (c.recommender != "baseline" && c.recommender != "instruct" && c.recommender != "replay" &&
      c.recommender != "llm") {
    throw ConfigError("recommender.name", "unknown recommender '" + c.recommender + "'");
  }
  if ((c.simulator == "llm" || c.recommender == "llm") && !c.chat_client) {
    throw ConfigError("llm", "an LLM endpoint is required for the llm simulator/recommender");
  }
  if (c.dwell_s < 0) throw ConfigError("dwell_s", "must be non-negative");
  if (c.workers < 1) throw ConfigError("workers", "must be at least 1");
  const auto& p = c.simulator_params;
  if (!(p.initial_satisfaction >= 0.0 && p.initial_satisfaction <= 1.0)) {
    throw ConfigError("simulator.initial_satisfaction", "must lie in [0,1]");
  }
  if (p.fatigue_threshold < 1) throw ConfigError("simulator.fatigue_threshold", "must be at least 1");
  if (!(p.share_probability >= 0.0 && p.share_probability <= 1.0)) {
    throw ConfigError("simulator.share_probability", "must lie in [0,1]");
  }
}

// ---------------------------------------------------------------------------
// Session

Session::Session(UserProfile profile, CatalogPtr catalog, SessionConfig config, std::uint64_t seed,
                 std::unique_ptr<UserSimulator> simulator, std::unique_ptr<Recommender> recommender,
                 UserState initial, std::string session_id, std::map<std::string, double> boosts)
    : profile_(std::move(profile)),
      catalog_(std::move(catalog)),
      config_(std::move(config)),
      simulator_(std::move(simulator)),
      recommender_(std::move(recommender)),
      boosts_(std::move(boosts)),
      state_(std::move(initial)) {
  validate(config_);
  validate(profile_);
  if (!catalog_ || catalog_->empty()) throw Error("session needs a non-empty catalog");
  if (!recommender_) throw ConfigError("recommender.name", "no recommender");
  if (!simulator_ && config_.mode != SessionMode::HumanAnnotator) {
    throw ConfigError("simulator.name", "simulated modes need a simulator");
  }
  clock_ = config_.mode == SessionMode::HumanAnnotator ? now() : config_.start_ts;
  trajectory_.session_id = std::move(session_id);
  trajectory_.user_id = profile_.user_id;
  trajectory_.mode = config_.mode;
  trajectory_.simulator = simulator_ ? std::string(simulator_->name()) : std::string("human");
  trajectory_.recommender = std::string(recommender_->name());
  trajectory_.k = config_.k;
  trajectory_.max_turns = config_.max_turns;
  trajectory_.seed = seed;
  trajectory_.started_ts = clock_;
  trajectory_.initial_state = state_;
  trajectory_.final_state = state_;
  current_list_ = build_list(std::nullopt);
  if (current_list_.items.empty()) finish(Termination::CandidatesExhausted);
}

std::int64_t Session::now() const {
  if (config_.mode != SessionMode::HumanAnnotator) return clock_;
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

RecommendationList Session::build_list(std::optional<Instruction> instruction) {
  RecommendationRequest req;
  req.profile = profile_;
  req.summary = state_.summary;
  req.turn_index = static_cast<int>(trajectory_.turns.size());
  req.excluded = excluded_;
  req.boosts = boosts_;
  if (config_.mode == SessionMode::Traditional) instruction.reset();
  req.instruction = instruction;
  current_instruction_in_ = instruction;
  auto list = recommender_->recommend(req, *catalog_, config_.k);
  for (const auto& id : list.items) {
    if (excluded_.count(id)) throw Error("recommender '" + trajectory_.recommender + "' re-served item '" + id + "'");
  }
  excluded_.insert(list.items.begin(), list.items.end());
  cursor_ = 0;
  current_decisions_.clear();
  return list;
}

std::optional<std::string> Session::current_item() const {
  if (done() || awaiting_leave_ || cursor_ >= current_list_.items.size()) return std::nullopt;
  return current_list_.items[cursor_];
}

void Session::finish(Termination why) {
  trajectory_.termination = why;
  trajectory_.final_state = state_;
  trajectory_.ended_ts = config_.mode == SessionMode::HumanAnnotator ? now() : clock_;
}

std::optional<TurnOutcome> Session::submit_decision(const ActionDecision& decision) {
  if (done()) throw PreconditionError("session '" + trajectory_.session_id + "' is finished");
  if (awaiting_leave_) throw PreconditionError("session is waiting for an instruction or exit after Leave");
  const auto& entry = catalog_->at(current_list_.items.at(cursor_));
  validate(decision, entry.item);

  state_ = simulator_ ? simulator_->update_mindset(state_, entry.item, decision)
                      : advance_state(profile_, state_, entry.item, decision, config_.simulator_params);
  clock_ += decision.watch_s ? *decision.watch_s : config_.dwell_s;
  current_decisions_.push_back({entry.item.item_id, decision});
  ++cursor_;
  if (decision.action == ActionKind::Leave) {
    awaiting_leave_ = true;
    return std::nullopt;
  }
  if (cursor_ >= current_list_.items.size()) return finish_turn(std::nullopt, false);
  return std::nullopt;
}

TurnOutcome Session::resolve_leave(std::optional<Instruction> instruction) {
  if (!awaiting_leave_) throw PreconditionError("no Leave is pending in session '" + trajectory_.session_id + "'");
  awaiting_leave_ = false;
  if (instruction && instruction->issued_after_item.empty()) {
    instruction->issued_after_item = current_decisions_.back().item_id;
  }
  return finish_turn(std::move(instruction), true);
}

TurnOutcome Session::finish_turn(std::optional<Instruction> instruction_out, bool left) {
  Turn turn;
  turn.turn_index = static_cast<int>(trajectory_.turns.size());
  turn.instruction_in = current_instruction_in_;
  turn.shown = current_list_;
  turn.decisions = current_decisions_;
  turn.instruction_out = instruction_out;
  turn.state_after = state_;
  trajectory_.turns.push_back(turn);
  trajectory_.final_state = state_;

  TurnOutcome out;
  out.turn = std::move(turn);
  if (left && !instruction_out) {
    finish(Termination::LeaveWithoutInstruction);
  } else if (config_.mode == SessionMode::EvalOnly) {
    finish(Termination::EvalOnlySingleTurn);
  } else if (static_cast<int>(trajectory_.turns.size()) >= config_.max_turns) {
    finish(Termination::MaxTurns);
  } else {
    current_list_ = build_list(instruction_out);
    if (current_list_.items.empty()) {
      finish(Termination::CandidatesExhausted);
    } else {
      out.next_list = current_list_;
    }
  }
  out.done = done();
  return out;
}

TurnOutcome Session::step() {
  if (done()) throw PreconditionError("session '" + trajectory_.session_id + "' is finished");
  if (!simulator_) throw PreconditionError("step() needs a simulator; annotator sessions submit decisions");
  if (awaiting_leave_) throw PreconditionError("session is waiting for a leave response");
  while (cursor_ < current_list_.items.size()) {
    const auto& entry = catalog_->at(current_list_.items[cursor_]);
    ActionDecision d;
    try {
      d = simulator_->decide_action(profile_, state_, entry.item, entry.metadata);
    } catch (const SimulatorOutputError& e) {
      throw SimulatorOutputError(std::string(e.what()) + " [session " + trajectory_.session_id + ", turn " +
                                     std::to_string(trajectory_.turns.size()) + ", item " + entry.item.item_id + "]",
                                 e.raw());
    }
    if (auto finished = submit_decision(d)) return *finished;
    if (awaiting_leave_) {
      std::vector<ItemDecision> so_far;
      for (const auto& t : trajectory_.turns) so_far.insert(so_far.end(), t.decisions.begin(), t.decisions.end());
      so_far.insert(so_far.end(), current_decisions_.begin(), current_decisions_.end());
      return resolve_leave(simulator_->reflect_and_instruct(profile_, state_, so_far));
    }
  }
  return finish_turn(std::nullopt, false);
}

// ---------------------------------------------------------------------------

std::unique_ptr<UserSimulator> make_simulator(const SessionConfig& config, const UserProfile& profile,
                                              std::uint64_t seed) {
  const auto sim_seed = derive_seed(seed, kSimulatorStream);
  if (config.simulator == "scripted") {
    return std::make_unique<ScriptedSimulator>(profile, config.simulator_params, sim_seed);
  }
  if (config.simulator == "llm") {
    return std::make_unique<LlmSimulator>(profile, config.simulator_params, config.chat_client, config.llm_simulator,
                                          sim_seed);
  }
  throw ConfigError("simulator.name", "unknown simulator '" + config.simulator + "'");
}

SessionHandle reset(const UserProfile& profile, CatalogPtr catalog, const SessionConfig& config, std::uint64_t seed,
                    SessionStart start) {
  validate(config);
  (void)derive_seed(seed, kRecommenderStream);  // recommenders are deterministic; stream reserved
  auto simulator = config.mode == SessionMode::HumanAnnotator ? nullptr : make_simulator(config, profile, seed);
  auto recommender = make_recommender(config.recommender, config.recommender_params, config.chat_client);
  UserState state = start.state ? *start.state : initial_state(config.simulator_params);
  std::string id = start.session_id.empty() ? profile.user_id + "-" + std::to_string(seed) : start.session_id;
  return std::make_unique<Session>(profile, std::move(catalog), config, seed, std::move(simulator),
                                   std::move(recommender), std::move(state), std::move(id), std::move(start.boosts));
}

Trajectory run_session(const UserProfile& profile, CatalogPtr catalog, const SessionConfig& config,
                       std::uint64_t seed, SessionStart start) {
  if (config.mode == SessionMode::HumanAnnotator) {
    throw PreconditionError("run_session drives simulated users; annotator sessions go through the service");
  }
  auto session = reset(profile, std::move(catalog), config, seed, std::move(start));
  while (!session->done()) session->step();
  return session->trajectory();
}

BatchResult run_batch(const std::vector<UserProfile>& profiles, CatalogPtr catalog, const SessionConfig& config,
                      const std::vector<std::uint64_t>& seeds, std::size_t n_per_user) {
  if (n_per_user < 1) throw PreconditionError("n_per_user must be at least 1");
  if (seeds.size() < n_per_user) throw PreconditionError("need at least n_per_user seeds");
  const std::vector<std::uint64_t> used(seeds.begin(), seeds.begin() + static_cast<std::ptrdiff_t>(n_per_user));
  if (std::set<std::uint64_t>(used.begin(), used.end()).size() != used.size()) {
    throw PreconditionError("batch seeds must be distinct");
  }

  struct Job {
    const UserProfile* profile;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& p : profiles) {
    for (auto s : used) jobs.push_back({&p, s});
  }
  std::vector<std::optional<Trajectory>> results(jobs.size());
  std::vector<std::optional<std::string>> errors(jobs.size());
  parallel_for(jobs.size(), config.workers, [&](std::size_t i) {
    try {
      results[i] = run_session(*jobs[i].profile, catalog, config, jobs[i].seed);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  std::vector<std::size_t> order(jobs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(jobs[a].profile->user_id, jobs[a].seed) < std::tie(jobs[b].profile->user_id, jobs[b].seed);
  });
  BatchResult out;
  for (auto i : order) {
    if (results[i]) {
      out.trajectories.push_back(std::move(*results[i]));
    } else {
      out.failures.push_back({jobs[i].profile->user_id, jobs[i].seed, errors[i].value_or("unknown error")});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

Json opt_instruction(const std::optional<Instruction>& i) { return i ? to_json(*i) : Json(nullptr); }

std::optional<Instruction> opt_instruction_from(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return instruction_from_json(j[key]);
}

}  // namespace

Json to_json(const Trajectory& t) {
  Json j;
  j["session_id"] = t.session_id;
  j["user_id"] = t.user_id;
  j["mode"] = to_string(t.mode);
  j["simulator"] = t.simulator;
  j["recommender"] = t.recommender;
  j["k"] = t.k;
  j["max_turns"] = t.max_turns;
  j["seed"] = t.seed;
  j["started_ts"] = t.started_ts;
  j["ended_ts"] = t.ended_ts;
  j["termination"] = t.termination ? Json(to_string(*t.termination)) : Json(nullptr);
  Json turns = Json::array();
  for (const auto& turn : t.turns) {
    Json tj;
    tj["turn_index"] = turn.turn_index;
    tj["instruction_in"] = opt_instruction(turn.instruction_in);
    tj["shown"] = to_json(turn.shown);
    Json decisions = Json::array();
    for (const auto& d : turn.decisions) {
      Json dj;
      dj["item_id"] = d.item_id;
      const Json decision = to_json(d.decision);
      for (const auto& [k, v] : decision.items()) dj[k] = v;
      decisions.push_back(dj);
    }
    tj["decisions"] = decisions;
    tj["instruction_out"] = opt_instruction(turn.instruction_out);
    tj["state_after"] = to_json(turn.state_after);
    turns.push_back(tj);
  }
  j["turns"] = turns;
  j["initial_state"] = to_json(t.initial_state);
  j["final_state"] = to_json(t.final_state);
  for (const auto& [k, v] : t.annotations.items()) j[k] = v;
  return j;
}

Trajectory trajectory_from_json(const Json& j) {
  static const std::set<std::string> kCore = {
      "session_id", "user_id", "mode",   "simulator", "recommender",   "k",           "max_turns",
      "seed",       "started_ts", "ended_ts", "termination", "turns", "initial_state", "final_state"};
  Trajectory t;
  t.session_id = j.at("session_id").get<std::string>();
  t.user_id = j.at("user_id").get<std::string>();
  const auto mode = parse_session_mode(j.at("mode").get<std::string>());
  if (!mode) throw Error("unknown session mode in trajectory '" + t.session_id + "'");
  t.mode = *mode;
  t.simulator = j.value("simulator", std::string());
  t.recommender = j.value("recommender", std::string());
  t.k = j.value("k", std::size_t{0});
  t.max_turns = j.value("max_turns", 0);
  t.seed = j.value("seed", std::uint64_t{0});
  t.started_ts = j.value("started_ts", std::int64_t{0});
  t.ended_ts = j.value("ended_ts", std::int64_t{0});
  if (j.contains("termination") && !j["termination"].is_null()) {
    t.termination = parse_termination(j["termination"].get<std::string>());
    if (!t.termination) throw Error("unknown termination in trajectory '" + t.session_id + "'");
  }
  for (const auto& tj : j.at("turns")) {
    Turn turn;
    turn.turn_index = tj.at("turn_index").get<int>();
    turn.instruction_in = opt_instruction_from(tj, "instruction_in");
    turn.shown = recommendation_list_from_json(tj.at("shown"));
    for (const auto& dj : tj.at("decisions")) {
      turn.decisions.push_back({dj.at("item_id").get<std::string>(), decision_from_json(dj)});
    }
    turn.instruction_out = opt_instruction_from(tj, "instruction_out");
    if (tj.contains("state_after")) turn.state_after = state_from_json(tj["state_after"]);
    t.turns.push_back(std::move(turn));
  }
  if (j.contains("initial_state")) t.initial_state = state_from_json(j["initial_state"]);
  if (j.contains("final_state")) t.final_state = state_from_json(j["final_state"]);
  for (const auto& [k, v] : j.items()) {
    if (!kCore.count(k)) t.annotations[k] = v;
  }
  return t;
}

std::string to_jsonl_line(const Trajectory& t) { return to_json(t).dump(); }

// ---------------------------------------------------------------------------
// Invariants

std::vector<std::string> check_invariants(const Trajectory& t, const Catalog& catalog) {
  std::vector<std::string> v;
  auto where = [&](std::size_t turn) { return "turn " + std::to_string(turn) + ": "; };
  std::set<std::string> seen_items;

  for (std::size_t ti = 0; ti < t.turns.size(); ++ti) {
    const auto& turn = t.turns[ti];
    const bool last = ti + 1 == t.turns.size();
    if (turn.turn_index != static_cast<int>(ti)) v.push_back(where(ti) + "turn_index out of sequence");
    if (t.k && turn.shown.items.size() > t.k) v.push_back(where(ti) + "list longer than k");

    std::set<std::string> in_list;
    for (const auto& id : turn.shown.items) {
      if (!in_list.insert(id).second) v.push_back(where(ti) + "duplicate item " + id);
      if (seen_items.count(id)) v.push_back(where(ti) + "item " + id + " already shown in an earlier turn");
    }
    seen_items.insert(turn.shown.items.begin(), turn.shown.items.end());

    if (turn.decisions.size() > turn.shown.items.size()) v.push_back(where(ti) + "more decisions than items");
    bool left = false;
    for (std::size_t di = 0; di < turn.decisions.size(); ++di) {
      const auto& d = turn.decisions[di];
      if (left) v.push_back(where(ti) + "decision after Leave");
      if (di < turn.shown.items.size() && d.item_id != turn.shown.items[di]) {
        v.push_back(where(ti) + "decision " + std::to_string(di) + " is not for the item shown at that position");
      }
      const auto* entry = catalog.find(d.item_id);
      if (!entry) {
        v.push_back(where(ti) + "unknown item " + d.item_id);
      } else {
        try {
          validate(d.decision, entry->item);
        } catch (const Error& e) {
          v.push_back(where(ti) + "invalid decision on " + d.item_id + ": " + e.what());
        }
      }
      if (d.decision.action == ActionKind::Leave) left = true;
    }
    if (turn.instruction_out && !left) v.push_back(where(ti) + "instruction without Leave");
    if (!left && turn.decisions.size() != turn.shown.items.size() && t.finished()) {
      v.push_back(where(ti) + "turn ended before the list was exhausted without a Leave");
    }
    if (!last && left && !turn.instruction_out) v.push_back(where(ti) + "Leave without instruction before the last turn");

    if (t.mode == SessionMode::Traditional && turn.instruction_in) {
      v.push_back(where(ti) + "Traditional mode passed an instruction to the recommender");
    }
    if (ti > 0 && t.mode != SessionMode::Traditional) {
      if (turn.instruction_in != t.turns[ti - 1].instruction_out) {
        v.push_back(where(ti) + "recommender request does not carry the previous turn's instruction");
      }
    }
    if (ti == 0 && turn.instruction_in) v.push_back(where(ti) + "first turn carries an instruction");
  }

  if (!t.finished()) return v;
  if (t.turns.empty()) {
    if (*t.termination != Termination::CandidatesExhausted) v.push_back("finished without any turn");
    return v;
  }
  const auto& last = t.turns.back();
  const bool last_left = !last.decisions.empty() && last.decisions.back().decision.action == ActionKind::Leave;
  const bool leave_exit = last_left && !last.instruction_out;
  const int n_turns = static_cast<int>(t.turns.size());
  switch (*t.termination) {
    case Termination::LeaveWithoutInstruction:
      if (!leave_exit) v.push_back("termination LeaveWithoutInstruction but last turn does not end that way");
      break;
    case Termination::EvalOnlySingleTurn:
      if (t.mode != SessionMode::EvalOnly) v.push_back("EvalOnly termination outside EvalOnly mode");
      if (leave_exit) v.push_back("EvalOnly termination recorded over a Leave exit");
      break;
    case Termination::MaxTurns:
      if (n_turns != t.max_turns) v.push_back("MaxTurns termination with " + std::to_string(n_turns) + " turns");
      if (leave_exit) v.push_back("MaxTurns termination recorded over a Leave exit");
      if (t.mode == SessionMode::EvalOnly) v.push_back("MaxTurns termination recorded in EvalOnly mode");
      break;
    case Termination::CandidatesExhausted:
      if (leave_exit) v.push_back("CandidatesExhausted recorded over a Leave exit");
      if (n_turns >= t.max_turns) v.push_back("CandidatesExhausted recorded at max_turns");
      break;
  }
  if (t.mode == SessionMode::EvalOnly && n_turns != 1) v.push_back("EvalOnly session with more than one turn");
  if (n_turns > t.max_turns) v.push_back("more turns than max_turns");
  return v;
}

}  // namespace recsim
