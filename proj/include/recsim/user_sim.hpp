#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "recsim/catalog.hpp"
#include "recsim/llm_client.hpp"
#include "recsim/types.hpp"

namespace recsim {

enum class TimeOfDay { Morning, Afternoon, Evening, Night };
enum class DayOfWeek { Monday, Tuesday, Wednesday, Thursday, Friday, Saturday, Sunday };

std::string_view to_string(TimeOfDay t) noexcept;
std::string_view to_string(DayOfWeek d) noexcept;
std::optional<TimeOfDay> parse_time_of_day(std::string_view s);
std::optional<DayOfWeek> parse_day_of_week(std::string_view s);

struct Context {
  TimeOfDay time_of_day = TimeOfDay::Evening;
  DayOfWeek day_of_week = DayOfWeek::Saturday;
  std::string device = "phone";

  bool operator==(const Context&) const = default;
};

struct Interest {
  std::string category;
  double affinity = 0.0;  // [0, 1]

  bool operator==(const Interest&) const = default;
};

struct UserProfile {
  std::string user_id;
  int age = 30;
  std::string gender;
  std::string location;
  std::vector<Interest> interests;
  std::vector<std::string> social_groups;
  Context context;

  // 0 for categories the user has no stated interest in.
  double affinity(const std::string& category) const;

  bool operator==(const UserProfile&) const = default;
};

// Throws Error when an affinity is outside [0, 1].
void validate(const UserProfile& profile);

/// The evolving user state (the "mindset").
struct UserState {
  std::string mindset;
  std::map<std::string, std::int64_t> fatigue;
  double satisfaction = 0.5;
  std::int64_t items_seen_this_session = 0;
  HistorySummary summary;
  // Per-category exposures in the current session; drives repetition sensitivity.
  std::map<std::string, std::int64_t> exposures;

  std::int64_t max_fatigue() const;

  bool operator==(const UserState&) const = default;
};

struct ActionDecision {
  ActionKind action = ActionKind::Skip;
  std::optional<std::int64_t> watch_s;
  std::string reasoning;
  std::string mindset_update;

  bool operator==(const ActionDecision&) const = default;
};

// Throws Error unless watch_s is present exactly for Watch, lies in
// [1, item.duration_s], and reasoning is non-empty.
void validate(const ActionDecision& decision, const Item& item);

struct ItemDecision {
  std::string item_id;
  ActionDecision decision;

  bool operator==(const ItemDecision&) const = default;
};

enum class InstructionSource { Explicit, Implicit };
std::string_view to_string(InstructionSource s) noexcept;

struct Instruction {
  std::string text;
  InstructionSource source = InstructionSource::Explicit;
  std::string issued_after_item;

  bool operator==(const Instruction&) const = default;
};

/// Tunables of the behavior model. Defaults are the documented rule table.
struct SimulatorParams {
  double watch_affinity = 0.7;      // effective affinity >= this: Watch (Like for untimed items)
  double click_affinity = 0.4;      // >= this: Click; below: Skip
  double leave_satisfaction = 0.3;  // Leave on a non-engaging item below this satisfaction...
  std::int64_t fatigue_threshold = 3;  // ...or once any category's fatigue reaches this
  double initial_satisfaction = 0.5;
  double satisfaction_gain = 0.1;   // times affinity, on Watch/Like
  double skip_penalty = 0.05;
  double leave_penalty = 0.05;
  double instruction_floor = 0.25;  // below this, Leave exits without an instruction
  // Effective affinity = affinity * repetition_decay^(same-category exposures this session).
  double repetition_decay = 1.0;
  // Probability that a Watch-worthy item is shared instead.
  double share_probability = 0.0;
  std::size_t mindset_max_chars = 800;
  // Implicit-signal rules.
  std::int64_t long_form_s = 300;
  int long_watch_k = 3;
  int skip_streak_k = 5;
  // Prompt construction.
  std::size_t prompt_budget_chars = 8000;
};

UserState initial_state(const SimulatorParams& params, HistorySummary summary = {});

// Starts a new session on a carried-over state: clears session counters, fatigue and
// exposures, and pulls satisfaction halfway back to the initial value.
UserState begin_session(const UserState& carried, const SimulatorParams& params);

/// Affinity after repetition decay for the current session.
double effective_affinity(const UserProfile& profile, const UserState& state, const std::string& category,
                          const SimulatorParams& params);

/// The state transition shared by all simulators: exposures and counters, fatigue
/// (+1 on Skip, reset on Watch/Like), satisfaction (+gain*affinity on Watch/Like,
/// -penalty on Skip and Leave, clamped to [0,1] and kept at 6 decimals), bounded
/// mindset text, and the session history summary.
UserState advance_state(const UserProfile& profile, const UserState& state, const Item& item,
                        const ActionDecision& decision, const SimulatorParams& params);

class UserSimulator {
 public:
  virtual ~UserSimulator() = default;

  virtual ActionDecision decide_action(const UserProfile& profile, const UserState& state, const Item& item,
                                       const ItemMetadata& metadata) = 0;
  virtual UserState update_mindset(const UserState& state, const Item& item, const ActionDecision& decision) = 0;
  // Called after a Leave. nullopt means the user exits the session.
  virtual std::optional<Instruction> reflect_and_instruct(const UserProfile& profile, const UserState& state,
                                                          const std::vector<ItemDecision>& so_far) = 0;
  virtual const SimulatorParams& params() const = 0;
  virtual std::string_view name() const = 0;
};

/// Deterministic rule-table persona. Every decision is a pure function of
/// (profile, state, item, seed).
class ScriptedSimulator final : public UserSimulator {
 public:
  ScriptedSimulator(UserProfile profile, SimulatorParams params, std::uint64_t seed);

  ActionDecision decide_action(const UserProfile& profile, const UserState& state, const Item& item,
                               const ItemMetadata& metadata) override;
  UserState update_mindset(const UserState& state, const Item& item, const ActionDecision& decision) override;
  std::optional<Instruction> reflect_and_instruct(const UserProfile& profile, const UserState& state,
                                                  const std::vector<ItemDecision>& so_far) override;
  const SimulatorParams& params() const override { return params_; }
  std::string_view name() const override { return "scripted"; }

 private:
  UserProfile profile_;
  SimulatorParams params_;
  std::uint64_t seed_;
};

struct PromptBundle {
  std::string system;
  std::string user;

  std::size_t size() const { return system.size() + user.size(); }
};

/// Text-based user modeling prompt: demographics and context in the system text,
/// history summary, mindset and the candidate item in the user text. Drops the
/// oldest recent items until the bundle fits `params.prompt_budget_chars`;
/// throws PreconditionError if it cannot.
PromptBundle build_prompt(const UserProfile& profile, const UserState& state, const Item& item,
                          const ItemMetadata& metadata, const SimulatorParams& params);

/// Parses a labeled REASONING / ACTION / WATCH_SECONDS / MINDSET block.
/// Throws SimulatorOutputError (carrying `raw`) on anything invalid.
ActionDecision parse_simulator_output(const std::string& raw, const Item& item);

/// Parses a REASONING / INSTRUCTION block; "INSTRUCTION: NONE" means exit.
std::optional<std::string> parse_reflection_output(const std::string& raw);

struct LlmSimulatorOptions {
  double temperature = 0.7;  // 0.0 for reproducibility mode
  int max_retries = 2;
};

/// Simulator backed by a chat model. State transitions reuse advance_state with the
/// model's mindset text; only the decision and the reflection come from the model.
class LlmSimulator final : public UserSimulator {
 public:
  LlmSimulator(UserProfile profile, SimulatorParams params, std::shared_ptr<ChatClient> client,
               LlmSimulatorOptions options, std::uint64_t seed);

  ActionDecision decide_action(const UserProfile& profile, const UserState& state, const Item& item,
                               const ItemMetadata& metadata) override;
  UserState update_mindset(const UserState& state, const Item& item, const ActionDecision& decision) override;
  std::optional<Instruction> reflect_and_instruct(const UserProfile& profile, const UserState& state,
                                                  const std::vector<ItemDecision>& so_far) override;
  const SimulatorParams& params() const override { return params_; }
  std::string_view name() const override { return "llm"; }

 private:
  UserProfile profile_;
  SimulatorParams params_;
  std::shared_ptr<ChatClient> client_;
  LlmSimulatorOptions options_;
  std::uint64_t seed_;
};

/// Rule-based inference of instructions the user never typed: repeated completed
/// long-form watches, or a trailing streak of skips. nullopt when the behavior
/// reads as satisfied. Throws PreconditionError on an empty list.
std::optional<Instruction> infer_implicit_signal(const std::vector<ItemDecision>& records, const Catalog& catalog,
                                                 const SimulatorParams& params = {});

Json to_json(const UserProfile& p);
UserProfile profile_from_json(const Json& j);
Json to_json(const UserState& s);
UserState state_from_json(const Json& j);
Json to_json(const ActionDecision& d);
ActionDecision decision_from_json(const Json& j);
Json to_json(const Instruction& i);
Instruction instruction_from_json(const Json& j);

std::vector<UserProfile> load_profiles(const std::filesystem::path& path);

}  // namespace recsim
