#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "recsim/catalog.hpp"
#include "recsim/rewards.hpp"
#include "recsim/session.hpp"
#include "recsim/user_sim.hpp"

namespace fx {

using namespace recsim;

inline CatalogEntry item(const std::string& id, const std::string& category, std::int64_t duration = 60,
                         std::vector<std::string> tags = {}, const std::string& title = "") {
  CatalogEntry e;
  e.item.item_id = id;
  e.item.title = title.empty() ? id : title;
  e.item.description = "About " + category + ".";
  e.item.category = category;
  e.item.duration_s = duration;
  e.item.content_type = duration > 0 ? ContentType::ShortVideo : ContentType::TextPost;
  e.metadata.tags = std::move(tags);
  return e;
}

inline UserProfile profile(const std::string& id, std::vector<Interest> interests) {
  UserProfile p;
  p.user_id = id;
  p.interests = std::move(interests);
  return p;
}

/// Random generator of small catalogs and personas for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t next() { return rng_(); }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return uniform() < p; }

  std::vector<std::string> categories(int n) {
    static const std::vector<std::string> pool = {"fishing", "cooking", "politics", "hairstyling", "ufc",
                                                  "travel",  "music",   "gaming",   "finance",     "comedy"};
    std::vector<std::string> out(pool.begin(), pool.begin() + std::min<int>(n, static_cast<int>(pool.size())));
    return out;
  }

  CatalogPtr catalog(int n_items, int n_categories) {
    const auto cats = categories(n_categories);
    static const std::vector<std::string> tags = {"outdoor", "food", "news", "beauty", "sports", "culture", "tech"};
    std::vector<CatalogEntry> entries;
    for (int i = 0; i < n_items; ++i) {
      const auto& cat = cats[static_cast<std::size_t>(uniform_int(0, static_cast<int>(cats.size()) - 1))];
      const int kind = uniform_int(0, 3);
      std::int64_t duration = kind == 0 ? 0 : uniform_int(5, 900);
      std::vector<std::string> t = {tags[std::hash<std::string>{}(cat) % tags.size()]};
      if (coin()) t.push_back(tags[static_cast<std::size_t>(uniform_int(0, static_cast<int>(tags.size()) - 1))]);
      char id[16];
      std::snprintf(id, sizeof id, "it%03d", i);
      entries.push_back(item(id, cat, duration, t));
    }
    return std::make_shared<const Catalog>(entries);
  }

  UserProfile persona(const std::string& id, int n_categories) {
    UserProfile p;
    p.user_id = id;
    for (const auto& c : categories(n_categories)) {
      if (coin(0.6)) p.interests.push_back({c, std::round(uniform() * 100.0) / 100.0});
    }
    if (p.interests.empty()) p.interests.push_back({categories(1)[0], 0.8});
    return p;
  }

  SessionConfig config() {
    SessionConfig c;
    const int m = uniform_int(0, 2);
    c.mode = m == 0 ? SessionMode::Agentic : m == 1 ? SessionMode::Traditional : SessionMode::EvalOnly;
    c.k = static_cast<std::size_t>(uniform_int(1, 6));
    c.max_turns = c.mode == SessionMode::EvalOnly ? 1 : uniform_int(1, 8);
    const int r = uniform_int(0, 2);
    c.recommender = r == 0 ? "baseline" : r == 1 ? "instruct" : "replay";
    c.simulator_params.repetition_decay = coin() ? 1.0 : uniform(0.5, 1.0);
    c.simulator_params.share_probability = coin() ? 0.0 : uniform(0.0, 0.3);
    c.simulator_params.fatigue_threshold = uniform_int(1, 4);
    return c;
  }

 private:
  std::mt19937_64 rng_;
};

/// Independent recount of a trajectory's engagement fields.
struct Tally {
  std::int64_t watch_s = 0, clicks = 0, likes = 0, shares = 0, comments = 0, consumed = 0, turns = 0;
};

inline Tally tally(const Trajectory& t) {
  Tally out;
  out.turns = static_cast<std::int64_t>(t.turns.size());
  for (const auto& turn : t.turns) {
    for (const auto& d : turn.decisions) {
      const auto a = d.decision.action;
      if (a == ActionKind::Watch) out.watch_s += d.decision.watch_s.value_or(0);
      if (a == ActionKind::Click) ++out.clicks;
      if (a == ActionKind::Like) ++out.likes;
      if (a == ActionKind::Share) ++out.shares;
      if (a == ActionKind::Comment) ++out.comments;
      if (a != ActionKind::Skip && a != ActionKind::Leave) ++out.consumed;
    }
  }
  return out;
}

/// NDCG straight from the definition: DCG = sum over 1-based ranks r of rel/log2(r+1).
inline double brute_ndcg(const std::vector<std::string>& ranked, const std::set<std::string>& relevant,
                         std::size_t n) {
  if (relevant.empty()) return 0.0;
  double dcg = 0.0;
  for (std::size_t r = 1; r <= std::min(n, ranked.size()); ++r) {
    if (relevant.count(ranked[r - 1])) dcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
  }
  double idcg = 0.0;
  for (std::size_t r = 1; r <= std::min(n, relevant.size()); ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
  return dcg / idcg;
}

inline double brute_recall(const std::vector<std::string>& ranked, const std::set<std::string>& relevant,
                           std::size_t n) {
  if (relevant.empty()) return 0.0;
  std::size_t hit = 0;
  for (const auto& r : relevant) {
    for (std::size_t i = 0; i < std::min(n, ranked.size()); ++i) {
      if (ranked[i] == r) {
        ++hit;
        break;
      }
    }
  }
  return static_cast<double>(hit) / static_cast<double>(relevant.size());
}

}  // namespace fx
