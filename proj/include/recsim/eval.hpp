#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "recsim/catalog.hpp"
#include "recsim/recommender.hpp"
#include "recsim/session.hpp"
#include "recsim/user_sim.hpp"

namespace recsim {

/// |top-n ∩ relevant| / |relevant|; 0 when `relevant` is empty.
double recall_at_n(const std::vector<std::string>& ranked, const std::set<std::string>& relevant, std::size_t n);

/// Binary-gain NDCG with a log2(rank + 1) discount, ranks starting at 1; 0 when
/// `relevant` is empty.
double ndcg_at_n(const std::vector<std::string>& ranked, const std::set<std::string>& relevant, std::size_t n);

struct ReplayBreak {
  std::size_t position = 0;  // 1-based position of the item the user left on
  std::string item_id;
  Instruction instruction;
  std::vector<std::string> tail_before;
  std::vector<std::string> tail_after;
};

struct ReplayTrace {
  std::vector<ItemDecision> decisions;
  std::vector<ReplayBreak> breaks;
  bool exited = false;  // the user left without an instruction
  UserState final_state;
};

struct ReplayResult {
  std::vector<std::string> final_list;
  ReplayTrace trace;
};

/// Walks `recorded_list` with the simulator. At every Leave followed by an
/// instruction the consumed prefix stays put and only the unseen tail is reordered;
/// the walk then continues on the new tail until the list ends or the user exits.
ReplayResult replay_protocol(const std::vector<std::string>& recorded_list, UserSimulator& simulator,
                             const UserProfile& profile, const Catalog& catalog,
                             const RecommenderParams& params = {}, std::optional<UserState> initial = std::nullopt);

struct EvalUser {
  UserProfile profile;
  std::vector<std::string> recorded_list;
  std::set<std::string> relevant;
};

struct EvalDataset {
  std::vector<EvalUser> users;
};

using SimulatorFactory = std::function<std::unique_ptr<UserSimulator>(const UserProfile&, std::uint64_t seed)>;

struct EvalConfig {
  std::size_t n = 10;  // cutoff for Recall@N and NDCG@N
  std::uint64_t seed = 1;
  SessionConfig session;  // simulator selection and parameters
  SimulatorFactory simulator_factory;  // overrides `session` when set
  int workers = 1;
};

struct UserEvalResult {
  std::string user_id;
  double recall_initial = 0.0;
  double recall_final = 0.0;
  double ndcg_initial = 0.0;
  double ndcg_final = 0.0;
  int turns_used = 0;  // reorder rounds + 1
  std::vector<std::string> final_list;
};

struct EvalReport {
  std::vector<UserEvalResult> per_user;  // sorted by user_id
  std::size_t users_skipped = 0;         // users without a relevant set
  // Means over per_user; all 0 when no user was evaluated.
  double mean_recall_initial = 0.0;
  double mean_recall_final = 0.0;
  double mean_ndcg_initial = 0.0;
  double mean_ndcg_final = 0.0;
  double mean_turns_used = 0.0;
  Json config_echo = Json::object();
};

EvalReport run_eval(const EvalDataset& dataset, const Catalog& catalog, const EvalConfig& config);

Json to_json(const EvalReport& r);
std::string format_report_table(const EvalReport& r);

/// Persona derived from history: affinity(category) = positive interactions
/// in the category / the largest such count.
UserProfile profile_from_history(const std::string& user_id, const std::vector<InteractionRecord>& history,
                                 const Catalog& catalog);

/// Leave-last-N split: each user's last `holdout_n` positive interactions form the
/// relevant set; the history before them builds the profile (unless given) and the
/// recorded list, a baseline ranking of `list_len` items not consumed in history.
EvalDataset build_eval_dataset(const std::vector<InteractionRecord>& records, const Catalog& catalog,
                               std::size_t holdout_n, std::size_t list_len,
                               const std::vector<UserProfile>& profiles = {});

/// Reads a dataset directory: items.{csv,jsonl} (required); then either
/// lists.jsonl ({user_id, recorded_list, relevant}) with profiles.jsonl, or
/// interactions.{csv,jsonl} split with build_eval_dataset.
struct LoadedEvalDataset {
  Catalog catalog;
  EvalDataset dataset;
};
LoadedEvalDataset load_eval_dataset(const std::filesystem::path& dir, std::size_t holdout_n = 3,
                                    std::size_t list_len = 10);

void write_eval_dataset(const std::filesystem::path& dir, const Catalog& catalog, const EvalDataset& dataset);

/// Synthetic replay dataset in which every user has a disliked category F and a
/// liked category R. Each recorded list is: an optional warm-up prefix, four F items
/// (three skips then a Leave on the fourth), then a tail with F items ahead of
/// neutral and R items. R items are the relevant set. `expected_final` is derived
/// from the construction alone: prefix, F block, then the tail as neutral, R, F.
struct SyntheticReplayCase {
  EvalUser user;
  std::vector<std::string> expected_final;
  std::size_t expected_break_position = 0;
};

struct SyntheticReplayDataset {
  Catalog catalog;
  std::vector<SyntheticReplayCase> cases;

  EvalDataset dataset() const;
};

SyntheticReplayDataset make_synthetic_replay_dataset(std::size_t n_users, std::uint64_t seed);

}  // namespace recsim
