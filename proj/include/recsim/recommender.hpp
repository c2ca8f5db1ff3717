#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "recsim/catalog.hpp"
#include "recsim/llm_client.hpp"
#include "recsim/user_sim.hpp"

namespace recsim {

/// What the instruction asks for, in the closed directive grammar
/// (`more <category>`, `less <category>`, `different`, `related`).
struct Directives {
  std::set<std::string> less;
  std::set<std::string> more;
  bool novel = false;
  bool related = false;

  bool empty() const { return less.empty() && more.empty() && !novel && !related; }
  std::string describe() const;

  bool operator==(const Directives&) const = default;
};

/// Keyword parser. Category mentions are matched against `known_categories`
/// (loose stemming, so "political" finds "politics"); the polarity comes from cue
/// words in the same clause ("too many", "less", "fewer", "stop" vs "more", "want").
Directives parse_instruction(const std::string& text, const std::vector<std::string>& known_categories);

struct RecommenderParams {
  double less_multiplier = 0.2;
  double more_multiplier = 2.0;
  double novel_bonus = 0.5;
  double related_jaccard = 0.3;
  // Added to every base score before directive multipliers so that zero-affinity
  // categories can still be promoted. A constant shift keeps the baseline order.
  double smoothing = 0.1;
};

// Categories whose tag sets have Jaccard similarity >= threshold with any of `seeds`
// (the seeds themselves excluded).
std::set<std::string> related_categories(const Catalog& catalog, const std::set<std::string>& seeds,
                                         double threshold);

struct RecommendationRequest {
  UserProfile profile;
  HistorySummary summary;
  std::optional<Instruction> instruction;
  int turn_index = 0;
  std::set<std::string> excluded;
  // Additive per-item score boosts (e.g. items shared by neighbours).
  std::map<std::string, double> boosts;
};

struct RecommendationList {
  std::vector<std::string> items;
  std::string strategy_note;

  bool operator==(const RecommendationList&) const = default;
};

// Throws PreconditionError on turn_index < 0 or an instruction on turn 0.
void validate(const RecommendationRequest& request);

/// Baseline score: affinity(category) * (1 + sum over recent engaged items of that
/// category of 1/(rank+1)) plus any boost for the item.
double baseline_score(const RecommendationRequest& request, const Catalog& catalog, const CatalogEntry& entry);

/// History-only ranking (instructions are not read). Ties break by item_id ascending.
/// Throws Error on an empty catalog and PreconditionError if an instruction is present.
RecommendationList recommend_initial(const RecommendationRequest& request, const Catalog& catalog, std::size_t k,
                                     const RecommenderParams& params = {});

/// Instruction-aware ranking. With `directives` unset the instruction text is parsed
/// with parse_instruction. When nothing is recognized the baseline ranking is
/// returned and the note records the fallback.
RecommendationList respond_to_instruction(const RecommendationRequest& request, const Catalog& catalog, std::size_t k,
                                          const RecommenderParams& params = {},
                                          std::optional<Directives> directives = std::nullopt);

/// Reorders a recorded list by instruction-adjusted score; the output is always a
/// permutation of `remaining` and equal scores keep their recorded order.
std::vector<std::string> replay_rerank(const std::vector<std::string>& remaining,
                                       const std::optional<Instruction>& instruction, const Catalog& catalog,
                                       const RecommenderParams& params = {});

class Recommender {
 public:
  virtual ~Recommender() = default;
  virtual RecommendationList recommend(const RecommendationRequest& request, const Catalog& catalog,
                                       std::size_t k) = 0;
  virtual std::string_view name() const = 0;
};

/// Traditional recommender: ignores instructions entirely.
class BaselineRecommender final : public Recommender {
 public:
  explicit BaselineRecommender(RecommenderParams params = {}) : params_(params) {}
  RecommendationList recommend(const RecommendationRequest& request, const Catalog& catalog, std::size_t k) override;
  std::string_view name() const override { return "baseline"; }

 private:
  RecommenderParams params_;
};

class InstructRecommender final : public Recommender {
 public:
  explicit InstructRecommender(RecommenderParams params = {}) : params_(params) {}
  RecommendationList recommend(const RecommendationRequest& request, const Catalog& catalog, std::size_t k) override;
  std::string_view name() const override { return "instruct"; }

 private:
  RecommenderParams params_;
};

/// Serves a fixed recorded list in order and only ever reorders its unshown tail.
/// Without an explicit list, the baseline ranking of the whole catalog at the first
/// request becomes the recorded list.
class ReplayRecommender final : public Recommender {
 public:
  explicit ReplayRecommender(std::optional<std::vector<std::string>> recorded = std::nullopt,
                             RecommenderParams params = {})
      : recorded_(std::move(recorded)), params_(params) {}
  RecommendationList recommend(const RecommendationRequest& request, const Catalog& catalog, std::size_t k) override;
  std::string_view name() const override { return "replay"; }

 private:
  std::optional<std::vector<std::string>> recorded_;
  RecommenderParams params_;
};

/// Instruction parsing delegated to a chat model (answering LESS/MORE/NOVEL/RELATED
/// lines); falls back to the keyword parser when the model output is unusable.
class LlmInstructRecommender final : public Recommender {
 public:
  LlmInstructRecommender(std::shared_ptr<ChatClient> client, RecommenderParams params = {})
      : client_(std::move(client)), params_(params) {}
  RecommendationList recommend(const RecommendationRequest& request, const Catalog& catalog, std::size_t k) override;
  std::string_view name() const override { return "llm"; }

  // nullopt if the completion is not in the expected format.
  static std::optional<Directives> parse_directive_output(const std::string& raw,
                                                          const std::vector<std::string>& known_categories);

 private:
  std::shared_ptr<ChatClient> client_;
  RecommenderParams params_;
};

// Names: baseline, instruct, replay, llm. `client` is required for llm.
std::unique_ptr<Recommender> make_recommender(const std::string& name, const RecommenderParams& params,
                                              std::shared_ptr<ChatClient> client = nullptr);

Json to_json(const RecommendationList& l);
RecommendationList recommendation_list_from_json(const Json& j);

}  // namespace recsim
