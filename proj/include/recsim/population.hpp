#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "recsim/catalog.hpp"
#include "recsim/session.hpp"
#include "recsim/user_sim.hpp"

namespace recsim {

struct Edge {
  std::string from;
  std::string to;
  double weight = 1.0;

  bool operator==(const Edge&) const = default;
};

/// Directed weighted graph over user ids. No self-loops, weights in [0,1].
class SocialGraph {
 public:
  SocialGraph() = default;
  // Endpoints missing from `nodes` are added. Throws Error on a self-loop, a weight
  // outside [0,1] or a repeated edge.
  SocialGraph(std::vector<std::string> nodes, std::vector<Edge> edges);

  const std::vector<std::string>& nodes() const noexcept { return nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  // Sorted by target id.
  const std::vector<Edge>& out_edges(const std::string& user) const;
  std::optional<double> weight(const std::string& from, const std::string& to) const;

 private:
  std::vector<std::string> nodes_;
  std::vector<Edge> edges_;
  std::map<std::string, std::vector<Edge>> out_;
};

/// Edge-list CSV with header `from,to,weight`.
SocialGraph load_graph(const std::filesystem::path& path);
SocialGraph parse_graph(std::string_view csv_text, const std::string& source = "<memory>");
// Each ordered pair (i != j) becomes an edge with probability `edge_probability`.
SocialGraph random_graph(const std::vector<std::string>& nodes, double edge_probability, std::uint64_t seed);

enum class MessageKind { Share, Exposure };

struct Message {
  std::string from;
  std::string to;
  std::string item_id;
  MessageKind kind = MessageKind::Share;
  int tick = 0;  // tick at which it was sent

  bool operator==(const Message&) const = default;
};

struct ItemCounters {
  std::int64_t views = 0;  // Watch and Click
  std::int64_t likes = 0;
  std::int64_t shares = 0;
  std::int64_t comments = 0;

  bool operator==(const ItemCounters&) const = default;
};

struct EnvironmentState {
  int tick = 0;
  std::map<std::string, ItemCounters> per_item_counters;
  double influence_strength = 0.0;

  bool operator==(const EnvironmentState&) const = default;
};

struct EngagementEvent {
  std::string user_id;
  std::string item_id;
  ActionKind action = ActionKind::Click;
};

struct PopulationState {
  int tick = 0;
  std::map<std::string, UserState> users;
  std::map<std::string, std::vector<Message>> inboxes;

  bool operator==(const PopulationState&) const = default;
};

struct CheckpointSchedule {
  std::vector<int> offsets;  // ticks, strictly increasing, >= 1

  void validate(int ticks) const;
  // 6-hour ticks: 6h, 12h, 24h, 2d, 1w.
  static CheckpointSchedule standard() { return {{1, 2, 4, 8, 28}}; }
};

struct PopulationConfig {
  SessionConfig session;  // bounded per-tick sessions
  double influence_strength = 0.0;
  double activity_probability = 0.5;
  double tick_hours = 6.0;
  // Additive boost popularity_weight * log1p(views) from the environment; 0 disables.
  double popularity_weight = 0.0;
  // Platform promotion of new content: additive boost on `promoted_items` for every
  // user. run_population promotes the injected items.
  double injected_boost = 0.0;
  std::vector<std::string> promoted_items;
  int workers = 1;
  // Processing order of users within a tick (indices into profiles); empty = natural.
  std::vector<std::size_t> user_order;
  bool record_states = false;  // keep every tick's user states in the report
};

struct UserUpdateResult {
  UserState state;
  std::vector<Message> emitted;
  std::vector<EngagementEvent> events;
  std::optional<Trajectory> trajectory;
};

/// Additive candidate boosts for one user: influence_strength * edge weight per
/// inbox message (summed per item), plus the promotion and popularity terms.
std::map<std::string, double> inbox_boosts(const std::string& user_id, const std::vector<Message>& inbox,
                                           const EnvironmentState& env, const SocialGraph& graph,
                                           const PopulationConfig& config);

/// One user's tick: a bounded session from the carried-over state with inbox items
/// boosted; every Share is sent to each out-neighbour.
UserUpdateResult user_update(const UserState& state_t, const std::vector<Message>& inbox,
                             const EnvironmentState& env_t, const UserProfile& profile, CatalogPtr catalog,
                             const SocialGraph& graph, const PopulationConfig& config, std::uint64_t seed, int tick);

/// Folds one tick of engagement into the counters and advances the tick.
EnvironmentState env_update(const EnvironmentState& env_t, const std::vector<EngagementEvent>& events);

// Deterministic per-(user, tick) draws used by run_population.
std::uint64_t population_session_seed(std::uint64_t seed, const std::string& user_id, int tick);
bool population_user_active(std::uint64_t seed, const std::string& user_id, int tick, double probability);

struct Checkpoint {
  int offset = 0;
  double hours = 0.0;
  std::map<std::string, ItemCounters> per_item_counters;
};

struct PopulationReport {
  int ticks_run = 0;
  std::map<std::string, ItemCounters> initial_counters;
  std::vector<Checkpoint> checkpoints;
  std::vector<std::string> injected_items;
  std::size_t messages_emitted = 0;
  std::size_t messages_delivered = 0;
  std::size_t sessions_run = 0;
  EnvironmentState final_env;
  PopulationState final_state;
  std::vector<PopulationState> states_by_tick;  // only with record_states
  std::optional<int> failure_tick;
  std::string failure_message;
};

/// Synchronous loop: every user update of tick t reads the tick-t snapshot, messages
/// are delivered at the barrier and read from tick t+1, the environment folds once
/// per tick. On failure the report is returned partially with failure_tick set.
PopulationReport run_population(const SocialGraph& graph, const std::vector<UserProfile>& profiles,
                                const Catalog& catalog, const std::vector<CatalogEntry>& injected_items, int ticks,
                                const CheckpointSchedule& schedule, const PopulationConfig& config,
                                std::uint64_t seed);

struct PopulationRunArgs {
  SocialGraph graph;
  std::vector<UserProfile> profiles;
  Catalog catalog;
  std::vector<CatalogEntry> injected_items;
  int ticks = 28;
  CheckpointSchedule schedule = CheckpointSchedule::standard();
  PopulationConfig config;
};

struct MetricStats {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  double min = 0.0;
  double max = 0.0;
};

MetricStats describe(const std::vector<double>& values);

struct VarianceReport {
  std::vector<std::uint64_t> seeds;
  // Per checkpoint offset: metric name -> stats. Metrics: total_views, total_likes,
  // total_shares, total_comments and views:<item> for each injected item.
  std::vector<std::pair<int, std::map<std::string, MetricStats>>> checkpoints;
};

// Throws PreconditionError unless at least two seeds are given.
VarianceReport rerun_variance(const PopulationRunArgs& args, const std::vector<std::uint64_t>& seeds);

Json to_json(const PopulationReport& r);
Json to_json(const VarianceReport& r);
Json to_json(const PopulationState& s);

}  // namespace recsim
