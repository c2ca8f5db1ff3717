#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "recsim/error.hpp"
#include "recsim/llm_client.hpp"
#include "recsim/session.hpp"

namespace recsim {

/// Per-unit weights of the composite retention reward.
struct RewardWeights {
  double watch_s = 1.0;
  double click = 5.0;
  double like = 10.0;
  double share = 20.0;
  double comment = 15.0;
  double extra_turn = 30.0;  // per turn beyond the first

  RewardWeights scaled(double c) const {
    return {watch_s * c, click * c, like * c, share * c, comment * c, extra_turn * c};
  }
};

/// Trajectory-level engagement counts and the weighted composite.
struct RewardSignal {
  std::int64_t total_watch_s = 0;
  std::int64_t clicks = 0;
  std::int64_t likes = 0;
  std::int64_t shares = 0;
  std::int64_t comments = 0;
  std::int64_t items_consumed = 0;  // decisions other than Skip and Leave
  std::int64_t turns = 0;
  std::int64_t session_span_s = 0;
  double composite = 0.0;

  bool operator==(const RewardSignal&) const = default;
};

// Throws PreconditionError for an unfinished trajectory.
RewardSignal compute_trajectory_reward(const Trajectory& trajectory, const RewardWeights& weights = {});

inline const std::vector<std::string>& reward_metric_names() {
  static const std::vector<std::string> names = {"total_watch_s", "clicks", "likes", "shares", "comments",
                                                 "items_consumed", "turns", "session_span_s", "composite"};
  return names;
}
// Throws Error for a name outside reward_metric_names().
double metric_value(const RewardSignal& r, const std::string& metric);

/// items_consumed / (k * max_turns), the session-scale stand-in for retention.
double retention_proxy(const Trajectory& trajectory);

enum class Comparator { Ge, Gt, Le, Lt, Eq, Ne };
std::string_view to_string(Comparator c) noexcept;
std::optional<Comparator> parse_comparator(std::string_view s);

struct MechanicalCriterion {
  std::string metric;
  Comparator comparator = Comparator::Ge;
  double threshold = 0.0;

  std::string describe() const;
};

struct Rubric {
  std::string rubric_id;
  std::vector<MechanicalCriterion> criteria;
  std::vector<std::string> free_text;  // judged by the LLM backend
};

// Throws ConfigError for unknown metrics or comparators.
Rubric rubric_from_json(const Json& j);
Rubric load_rubric(const std::filesystem::path& path);

struct CriterionResult {
  std::string criterion;
  bool pass = false;
  std::string note;
};

struct JudgeVerdict {
  bool pass = true;  // conjunction of per_criterion
  std::vector<CriterionResult> per_criterion;
};

class JudgeError : public Error {
 public:
  using Error::Error;
};

/// Evaluates one free-text criterion against a serialized trajectory.
class JudgeBackend {
 public:
  virtual ~JudgeBackend() = default;
  // Throws JudgeError when no verdict could be obtained.
  virtual CriterionResult evaluate(const std::string& criterion, const std::string& trajectory_json) = 0;
};

/// Judge over the chat-completions protocol; expects VERDICT: PASS|FAIL and NOTE lines.
class LlmJudgeBackend final : public JudgeBackend {
 public:
  explicit LlmJudgeBackend(std::shared_ptr<ChatClient> client, int max_retries = 2)
      : client_(std::move(client)), max_retries_(max_retries) {}
  CriterionResult evaluate(const std::string& criterion, const std::string& trajectory_json) override;

 private:
  std::shared_ptr<ChatClient> client_;
  int max_retries_;
};

/// Mechanical criteria are checked locally; free-text ones go to `backend`.
/// Throws JudgeError if a free-text criterion cannot be judged.
JudgeVerdict judge_trajectory(const Trajectory& trajectory, const RewardSignal& reward, const Rubric& rubric,
                              JudgeBackend* backend);

struct UnjudgedTrajectory {
  Trajectory trajectory;
  std::string reason;
};

struct FilterResult {
  std::vector<Trajectory> retained;
  std::vector<Trajectory> rejected;
  std::vector<UnjudgedTrajectory> unjudged;
};

/// Partitions in input order. Judged trajectories get "reward" and "judge" annotations.
FilterResult filter_trajectories(const std::vector<Trajectory>& trajectories, const Rubric& rubric,
                                 JudgeBackend* backend, const RewardWeights& weights = {});

enum class Quadrant { StrongExploitation, SuboptimalRepetitive, EffectiveExploration, Poor };
std::string_view to_string(Quadrant q) noexcept;

struct QuadrantThresholds {
  double ndcg = 0.5;
  double retention = 0.5;
};

/// A value equal to its threshold counts as high. Throws PreconditionError for inputs
/// outside [0,1] or thresholds outside (0,1).
Quadrant quadrant_classify(double ndcg, double retention, const QuadrantThresholds& thresholds = {});

Json to_json(const RewardSignal& r);
Json to_json(const RewardWeights& w);
RewardWeights weights_from_json(const Json& j);
Json to_json(const JudgeVerdict& v);

}  // namespace recsim
