#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "recsim/catalog.hpp"
#include "recsim/recommender.hpp"
#include "recsim/user_sim.hpp"

namespace recsim {

enum class SessionMode { Agentic, Traditional, EvalOnly, HumanAnnotator };
std::string_view to_string(SessionMode m) noexcept;
std::optional<SessionMode> parse_session_mode(std::string_view s);

/// Why a finished session ended. Exactly one is recorded per trajectory.
enum class Termination { LeaveWithoutInstruction, MaxTurns, EvalOnlySingleTurn, CandidatesExhausted };
std::string_view to_string(Termination t) noexcept;
std::optional<Termination> parse_termination(std::string_view s);

struct SessionConfig {
  SessionMode mode = SessionMode::Agentic;
  std::size_t k = 5;
  int max_turns = 10;
  std::string simulator = "scripted";  // scripted | llm
  SimulatorParams simulator_params;
  LlmSimulatorOptions llm_simulator;
  std::string recommender = "instruct";  // baseline | instruct | replay | llm
  RecommenderParams recommender_params;
  // Simulated clock: sessions start here and advance by watch seconds, or by
  // dwell_s for any other decision. Annotator sessions use wall-clock time.
  std::int64_t start_ts = 1700000000;
  std::int64_t dwell_s = 3;
  int workers = 1;
  std::shared_ptr<ChatClient> chat_client;  // required for llm simulator/recommender
};

// Throws ConfigError naming the offending field.
void validate(const SessionConfig& config);

struct Turn {
  int turn_index = 0;
  // Instruction handed to the recommender when this turn's list was built.
  std::optional<Instruction> instruction_in;
  RecommendationList shown;
  std::vector<ItemDecision> decisions;
  std::optional<Instruction> instruction_out;
  UserState state_after;

  bool operator==(const Turn&) const = default;
};

struct Trajectory {
  std::string session_id;
  std::string user_id;
  SessionMode mode = SessionMode::Agentic;
  std::string simulator;
  std::string recommender;
  std::size_t k = 0;
  int max_turns = 0;
  std::uint64_t seed = 0;
  std::int64_t started_ts = 0;
  std::int64_t ended_ts = 0;
  std::vector<Turn> turns;
  UserState initial_state;
  UserState final_state;
  std::optional<Termination> termination;  // unset while the session is running
  Json annotations = Json::object();       // e.g. "reward", "judge"; serialized last

  bool finished() const { return termination.has_value(); }
  bool operator==(const Trajectory&) const = default;
};

Json to_json(const Trajectory& t);
Trajectory trajectory_from_json(const Json& j);
// One line, stable field order.
std::string to_jsonl_line(const Trajectory& t);

/// Returns human-readable violations of the trajectory invariants (empty when valid):
/// action closure, no decision after Leave, decisions follow the shown order,
/// disjoint lists across turns, instruction placement, mode contract and a single
/// consistent termination reason.
std::vector<std::string> check_invariants(const Trajectory& t, const Catalog& catalog);

struct TurnOutcome {
  Turn turn;
  bool done = false;
  std::optional<RecommendationList> next_list;
};

/// One user and one recommender over a multi-turn session. The same state machine
/// serves simulated users (step) and externally driven annotators (submit_decision /
/// resolve_leave).
class Session {
 public:
  Session(UserProfile profile, CatalogPtr catalog, SessionConfig config, std::uint64_t seed,
          std::unique_ptr<UserSimulator> simulator, std::unique_ptr<Recommender> recommender, UserState initial,
          std::string session_id, std::map<std::string, double> boosts = {});

  const RecommendationList& current_list() const { return current_list_; }
  const UserState& state() const { return state_; }
  const UserProfile& profile() const { return profile_; }
  const Trajectory& trajectory() const { return trajectory_; }
  const SessionConfig& config() const { return config_; }
  bool done() const { return trajectory_.finished(); }
  bool awaiting_leave_response() const { return awaiting_leave_; }
  // Item the next decision applies to; nullopt when done or awaiting a leave response.
  std::optional<std::string> current_item() const;
  std::size_t cursor() const { return cursor_; }

  /// Runs the simulator over the current list until Leave or exhaustion.
  TurnOutcome step();

  /// Records a decision for current_item(). Returns the finished turn if the list was
  /// exhausted by this decision (no Leave); a Leave instead waits for resolve_leave.
  std::optional<TurnOutcome> submit_decision(const ActionDecision& decision);

  /// Closes a turn that ended with Leave: an instruction continues the session,
  /// nullopt ends it.
  TurnOutcome resolve_leave(std::optional<Instruction> instruction);

 private:
  TurnOutcome finish_turn(std::optional<Instruction> instruction_out, bool left);
  RecommendationList build_list(std::optional<Instruction> instruction);
  std::int64_t now() const;
  void finish(Termination why);

  UserProfile profile_;
  CatalogPtr catalog_;
  SessionConfig config_;
  std::unique_ptr<UserSimulator> simulator_;
  std::unique_ptr<Recommender> recommender_;
  std::map<std::string, double> boosts_;
  UserState state_;
  Trajectory trajectory_;
  RecommendationList current_list_;
  std::optional<Instruction> current_instruction_in_;
  std::vector<ItemDecision> current_decisions_;
  std::set<std::string> excluded_;
  std::size_t cursor_ = 0;
  bool awaiting_leave_ = false;
  std::int64_t clock_ = 0;
};

using SessionHandle = std::unique_ptr<Session>;

std::unique_ptr<UserSimulator> make_simulator(const SessionConfig& config, const UserProfile& profile,
                                              std::uint64_t seed);

struct SessionStart {
  std::optional<UserState> state;  // defaults to a fresh initial_state
  std::map<std::string, double> boosts;
  std::string session_id;  // defaults to "<user_id>-<seed>"
};

/// Fresh session; the initial list comes from the history-only ranking.
SessionHandle reset(const UserProfile& profile, CatalogPtr catalog, const SessionConfig& config, std::uint64_t seed,
                    SessionStart start = {});

Trajectory run_session(const UserProfile& profile, CatalogPtr catalog, const SessionConfig& config,
                       std::uint64_t seed, SessionStart start = {});

struct BatchFailure {
  std::string user_id;
  std::uint64_t seed = 0;
  std::string message;
};

struct BatchResult {
  std::vector<Trajectory> trajectories;  // ordered by (user_id, seed)
  std::vector<BatchFailure> failures;
};

/// n_per_user sessions per profile using the first n_per_user seeds. A failing
/// session is reported in `failures` and does not stop the others.
BatchResult run_batch(const std::vector<UserProfile>& profiles, CatalogPtr catalog, const SessionConfig& config,
                      const std::vector<std::uint64_t>& seeds, std::size_t n_per_user);

}  // namespace recsim
