#include "recsim/recommender.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "recsim/error.hpp"
#include "recsim/text.hpp"

namespace recsim {

namespace {

const std::set<std::string> kLessCues = {"less", "fewer", "stop", "enough", "tired", "not", "don", "dont",
                                         "hate", "avoid", "without", "reduce", "bored", "sick"};
const std::set<std::string> kMoreCues = {"more", "want", "wanna", "show", "see", "like", "love", "prefer", "give",
                                         "interested"};
const std::set<std::string> kNovelCues = {"different", "new", "novel", "interesting", "else",
                                          "fresh", "variety", "diverse", "something"};
const std::set<std::string> kRelatedCues = {"related", "similar", "adjacent"};

std::vector<std::vector<std::string>> clauses_of(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::string chunk;
  auto flush = [&] {
    auto toks = word_tokens(chunk);
    chunk.clear();
    std::vector<std::string> cur;
    for (auto& t : toks) {
      if (t == "but") {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
      } else {
        cur.push_back(std::move(t));
      }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
  };
  for (char c : text) {
    if (c == ';' || c == '.' || c == ',' || c == '!' || c == '?' || c == '\n') {
      flush();
    } else {
      chunk.push_back(c);
    }
  }
  flush();
  return out;
}

bool token_matches(const std::string& text_tok, const std::string& cat_tok) {
  if (text_tok == cat_tok) return true;
  return stem_match(text_tok, cat_tok);
}

bool mentions(const std::vector<std::string>& clause, const std::vector<std::string>& cat_toks) {
  if (cat_toks.empty() || clause.size() < cat_toks.size()) return false;
  for (std::size_t i = 0; i + cat_toks.size() <= clause.size(); ++i) {
    bool all = true;
    for (std::size_t j = 0; j < cat_toks.size() && all; ++j) all = token_matches(clause[i + j], cat_toks[j]);
    if (all) return true;
  }
  return false;
}

bool has_less_cue(const std::vector<std::string>& clause) {
  for (std::size_t i = 0; i < clause.size(); ++i) {
    const auto& t = clause[i];
    if (kLessCues.count(t)) return true;
    if (t == "too" && i + 1 < clause.size() && (clause[i + 1] == "many" || clause[i + 1] == "much")) return true;
    if (t == "no" && i + 1 < clause.size() && clause[i + 1] == "more") return true;
  }
  return false;
}

bool any_of_set(const std::vector<std::string>& clause, const std::set<std::string>& cues) {
  return std::any_of(clause.begin(), clause.end(), [&](const std::string& t) { return cues.count(t) > 0; });
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

struct Scored {
  const CatalogEntry* entry;
  double score;
};

RecommendationList top_k(std::vector<Scored> scored, std::size_t k, std::string note) {
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.entry->item.item_id < b.entry->item.item_id;
  });
  RecommendationList out;
  out.strategy_note = std::move(note);
  for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.items.push_back(scored[i].entry->item.item_id);
  return out;
}

// Multiplicative directive adjustment shared by the full-catalog and replay rankers.
double directive_factor(const std::string& category, const Directives& d, const std::set<std::string>& related,
                        const RecommenderParams& params) {
  double f = 1.0;
  if (d.less.count(category)) f *= params.less_multiplier;
  if (d.more.count(category)) f *= params.more_multiplier;
  if (related.count(category)) f *= params.more_multiplier;
  return f;
}

std::set<std::string> related_for(const Directives& d, const Catalog& catalog, const RecommenderParams& params) {
  if (!d.related) return {};
  const auto& seeds = d.less.empty() ? d.more : d.less;
  auto rel = related_categories(catalog, seeds, params.related_jaccard);
  for (const auto& c : d.less) rel.erase(c);
  return rel;
}

}  // namespace

std::string Directives::describe() const {
  std::vector<std::string> parts;
  if (!less.empty()) parts.push_back("less=[" + join({less.begin(), less.end()}, ",") + "]");
  if (!more.empty()) parts.push_back("more=[" + join({more.begin(), more.end()}, ",") + "]");
  if (novel) parts.push_back("novel");
  if (related) parts.push_back("related");
  return parts.empty() ? std::string("none") : join(parts, "; ");
}

Directives parse_instruction(const std::string& text, const std::vector<std::string>& known_categories) {
  Directives d;
  std::vector<std::pair<std::string, std::vector<std::string>>> cats;
  for (const auto& c : known_categories) cats.emplace_back(c, word_tokens(c));

  for (const auto& clause : clauses_of(text)) {
    const bool less = has_less_cue(clause);
    bool mentioned_any = false;
    for (const auto& [name, toks] : cats) {
      if (!mentions(clause, toks)) continue;
      mentioned_any = true;
      if (less) {
        d.less.insert(name);
      } else {
        d.more.insert(name);
      }
    }
    if (!mentioned_any && any_of_set(clause, kNovelCues)) d.novel = true;
    if (mentioned_any && any_of_set(clause, {"different", "else", "new"})) d.novel = true;
    if (any_of_set(clause, kRelatedCues)) d.related = true;
  }
  return d;
}

std::set<std::string> related_categories(const Catalog& catalog, const std::set<std::string>& seeds,
                                         double threshold) {
  std::set<std::string> out;
  if (seeds.empty()) return out;
  for (const auto& cat : catalog.categories()) {
    if (seeds.count(cat)) continue;
    for (const auto& s : seeds) {
      if (jaccard(catalog.category_tags(cat), catalog.category_tags(s)) >= threshold) {
        out.insert(cat);
        break;
      }
    }
  }
  return out;
}

void validate(const RecommendationRequest& request) {
  if (request.turn_index < 0) throw PreconditionError("turn_index must be non-negative");
  if (request.turn_index == 0 && request.instruction) {
    throw PreconditionError("the first turn cannot carry an instruction");
  }
}

double baseline_score(const RecommendationRequest& request, const Catalog& catalog, const CatalogEntry& entry) {
  const auto& cat = entry.item.category;
  double recency = 1.0;
  const auto& recent = request.summary.recent_items;
  for (std::size_t rank = 0; rank < recent.size(); ++rank) {
    if (!is_engagement(recent[rank].second)) continue;
    const auto* e = catalog.find(recent[rank].first);
    if (e && e->item.category == cat) recency += 1.0 / static_cast<double>(rank + 1);
  }
  double score = request.profile.affinity(cat) * recency;
  if (auto it = request.boosts.find(entry.item.item_id); it != request.boosts.end()) score += it->second;
  return score;
}

RecommendationList recommend_initial(const RecommendationRequest& request, const Catalog& catalog, std::size_t k,
                                     const RecommenderParams&) {
  if (catalog.empty()) throw Error("cannot recommend from an empty catalog");
  if (request.instruction) throw PreconditionError("recommend_initial does not take an instruction");
  validate(request);
  std::vector<Scored> scored;
  for (const auto& e : catalog.entries()) {
    if (request.excluded.count(e.item.item_id)) continue;
    scored.push_back({&e, baseline_score(request, catalog, e)});
  }
  return top_k(std::move(scored), k, "baseline: affinity x category recency");
}

RecommendationList respond_to_instruction(const RecommendationRequest& request, const Catalog& catalog, std::size_t k,
                                          const RecommenderParams& params, std::optional<Directives> directives) {
  if (catalog.empty()) throw Error("cannot recommend from an empty catalog");
  validate(request);
  if (!request.instruction) throw PreconditionError("respond_to_instruction needs an instruction");
  const Directives d = directives ? *directives : parse_instruction(request.instruction->text, catalog.categories());
  if (d.empty()) {
    auto plain = request;
    plain.instruction.reset();
    plain.turn_index = std::max(plain.turn_index, 1);
    auto base = recommend_initial(plain, catalog, k, params);
    base.strategy_note = "fallback: no directives recognized in \"" + request.instruction->text +
                         "\"; baseline ranking";
    return base;
  }
  const auto related = related_for(d, catalog, params);
  std::vector<Scored> scored;
  for (const auto& e : catalog.entries()) {
    if (request.excluded.count(e.item.item_id)) continue;
    const auto& cat = e.item.category;
    double s = (baseline_score(request, catalog, e) + params.smoothing) * directive_factor(cat, d, related, params);
    if (d.novel) {
      auto it = request.summary.per_category_counts.find(cat);
      if (it == request.summary.per_category_counts.end() || it->second == 0) s += params.novel_bonus;
    }
    scored.push_back({&e, s});
  }
  std::string note = "instruction directives: " + d.describe();
  if (!related.empty()) note += "; related categories boosted: " + join({related.begin(), related.end()}, ",");
  return top_k(std::move(scored), k, std::move(note));
}

std::vector<std::string> replay_rerank(const std::vector<std::string>& remaining,
                                       const std::optional<Instruction>& instruction, const Catalog& catalog,
                                       const RecommenderParams& params) {
  if (!instruction || remaining.empty()) return remaining;
  const Directives d = parse_instruction(instruction->text, catalog.categories());
  if (d.empty()) return remaining;
  const auto related = related_for(d, catalog, params);
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(remaining.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) {
    const auto* e = catalog.find(remaining[i]);
    const double s = e ? directive_factor(e->item.category, d, related, params) : 1.0;
    keyed.emplace_back(s, i);
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::string> out;
  out.reserve(remaining.size());
  for (const auto& [_, i] : keyed) out.push_back(remaining[i]);
  return out;
}

RecommendationList BaselineRecommender::recommend(const RecommendationRequest& request, const Catalog& catalog,
                                                  std::size_t k) {
  auto plain = request;
  plain.instruction.reset();
  return recommend_initial(plain, catalog, k, params_);
}

RecommendationList InstructRecommender::recommend(const RecommendationRequest& request, const Catalog& catalog,
                                                  std::size_t k) {
  if (request.instruction) return respond_to_instruction(request, catalog, k, params_);
  return recommend_initial(request, catalog, k, params_);
}

RecommendationList ReplayRecommender::recommend(const RecommendationRequest& request, const Catalog& catalog,
                                                std::size_t k) {
  if (!recorded_) {
    auto plain = request;
    plain.instruction.reset();
    plain.excluded.clear();
    recorded_ = recommend_initial(plain, catalog, catalog.size(), params_).items;
  }
  std::vector<std::string> remaining;
  for (const auto& id : *recorded_) {
    if (!request.excluded.count(id)) remaining.push_back(id);
  }
  std::string note = "replay: recorded order";
  if (request.instruction) {
    auto reordered = replay_rerank(remaining, request.instruction, catalog, params_);
    if (reordered != remaining) note = "replay: tail reordered by instruction";
    remaining = std::move(reordered);
    // The reordered tail becomes the recorded order for later turns.
    std::vector<std::string> updated;
    for (const auto& id : *recorded_) {
      if (request.excluded.count(id)) updated.push_back(id);
    }
    updated.insert(updated.end(), remaining.begin(), remaining.end());
    recorded_ = std::move(updated);
  }
  if (remaining.size() > k) remaining.resize(k);
  return {remaining, note};
}

std::optional<Directives> LlmInstructRecommender::parse_directive_output(
    const std::string& raw, const std::vector<std::string>& known_categories) {
  Directives d;
  bool saw_any = false;
  auto resolve = [&](std::string_view name) -> std::optional<std::string> {
    const auto want = word_tokens(name);
    for (const auto& c : known_categories) {
      if (word_tokens(c) == want) return c;
    }
    return std::nullopt;
  };
  for (const auto& line : split(raw, '\n')) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const auto key = to_lower(trim(std::string_view(line).substr(0, colon)));
    const auto value = std::string(trim(std::string_view(line).substr(colon + 1)));
    const auto lowered = to_lower(value);
    if (key == "less" || key == "more") {
      saw_any = true;
      if (lowered.empty() || lowered == "none") continue;
      for (const auto& part : split(value, ',')) {
        auto c = resolve(part);
        if (!c) continue;
        (key == "less" ? d.less : d.more).insert(*c);
      }
    } else if (key == "novel" || key == "related") {
      saw_any = true;
      const bool yes = lowered == "yes" || lowered == "true";
      (key == "novel" ? d.novel : d.related) = yes;
    }
  }
  if (!saw_any) return std::nullopt;
  return d;
}

RecommendationList LlmInstructRecommender::recommend(const RecommendationRequest& request, const Catalog& catalog,
                                                     std::size_t k) {
  if (!request.instruction) return recommend_initial(request, catalog, k, params_);
  const auto cats = catalog.categories();
  ChatRequest req;
  req.temperature = 0.0;
  req.messages = {
      {"system",
       "You translate a user's feed instruction into ranking directives. Known categories: " + join(cats, ", ") +
           ". Answer with exactly four lines:\nLESS: <comma-separated categories or NONE>\n"
           "MORE: <comma-separated categories or NONE>\nNOVEL: <yes|no>\nRELATED: <yes|no>"},
      {"user", request.instruction->text}};
  std::optional<Directives> d;
  try {
    d = parse_directive_output(client_->complete(req), cats);
  } catch (const BackendError&) {
    d.reset();
  }
  if (!d) {
    auto list = respond_to_instruction(request, catalog, k, params_);
    list.strategy_note = "llm parser unavailable; keyword " + list.strategy_note;
    return list;
  }
  return respond_to_instruction(request, catalog, k, params_, d);
}

std::unique_ptr<Recommender> make_recommender(const std::string& name, const RecommenderParams& params,
                                              std::shared_ptr<ChatClient> client) {
  if (name == "baseline") return std::make_unique<BaselineRecommender>(params);
  if (name == "instruct") return std::make_unique<InstructRecommender>(params);
  if (name == "replay") return std::make_unique<ReplayRecommender>(std::nullopt, params);
  if (name == "llm") {
    if (!client) throw ConfigError("recommender.name", "llm recommender requires llm endpoint settings");
    return std::make_unique<LlmInstructRecommender>(std::move(client), params);
  }
  throw ConfigError("recommender.name", "unknown recommender '" + name + "'");
}

Json to_json(const RecommendationList& l) { return Json{{"items", l.items}, {"strategy_note", l.strategy_note}}; }

RecommendationList recommendation_list_from_json(const Json& j) {
  return {j.at("items").get<std::vector<std::string>>(), j.value("strategy_note", std::string())};
}

}  // namespace recsim
