#include "recsim/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "recsim/error.hpp"
#include "recsim/parallel.hpp"
#include "recsim/random.hpp"
#include "recsim/text.hpp"

namespace recsim {

double recall_at_n(const std::vector<std::string>& ranked, const std::set<std::string>& relevant, std::size_t n) {
  if (n < 1) throw PreconditionError("n must be at least 1");
  if (relevant.empty()) return 0.0;
  std::set<std::string> hits;
  for (std::size_t i = 0; i < ranked.size() && i < n; ++i) {
    if (relevant.count(ranked[i])) hits.insert(ranked[i]);
  }
  return static_cast<double>(hits.size()) / static_cast<double>(relevant.size());
}

double ndcg_at_n(const std::vector<std::string>& ranked, const std::set<std::string>& relevant, std::size_t n) {
  if (n < 1) throw PreconditionError("n must be at least 1");
  if (relevant.empty()) return 0.0;
  double dcg = 0.0;
  std::set<std::string> counted;
  for (std::size_t i = 0; i < ranked.size() && i < n; ++i) {
    if (relevant.count(ranked[i]) && counted.insert(ranked[i]).second) {
      dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    }
  }
  double idcg = 0.0;
  for (std::size_t i = 0; i < relevant.size() && i < n; ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return dcg / idcg;
}

ReplayResult replay_protocol(const std::vector<std::string>& recorded_list, UserSimulator& simulator,
                             const UserProfile& profile, const Catalog& catalog, const RecommenderParams& params,
                             std::optional<UserState> initial) {
  if (recorded_list.empty()) throw PreconditionError("replay needs a non-empty recorded list");
  ReplayResult out;
  out.final_list = recorded_list;
  UserState state = initial ? *initial : initial_state(simulator.params());
  auto& list = out.final_list;
  for (std::size_t pos = 0; pos < list.size();) {
    const auto& entry = catalog.at(list[pos]);
    auto decision = simulator.decide_action(profile, state, entry.item, entry.metadata);
    validate(decision, entry.item);
    state = simulator.update_mindset(state, entry.item, decision);
    out.trace.decisions.push_back({entry.item.item_id, decision});
    ++pos;
    if (decision.action != ActionKind::Leave) continue;

    auto instruction = simulator.reflect_and_instruct(profile, state, out.trace.decisions);
    if (!instruction) {
      out.trace.exited = true;
      break;
    }
    ReplayBreak br;
    br.position = pos;
    br.item_id = entry.item.item_id;
    br.instruction = *instruction;
    br.tail_before.assign(list.begin() + static_cast<std::ptrdiff_t>(pos), list.end());
    br.tail_after = replay_rerank(br.tail_before, instruction, catalog, params);
    std::copy(br.tail_after.begin(), br.tail_after.end(), list.begin() + static_cast<std::ptrdiff_t>(pos));
    out.trace.breaks.push_back(std::move(br));
  }
  out.trace.final_state = state;
  return out;
}

EvalReport run_eval(const EvalDataset& dataset, const Catalog& catalog, const EvalConfig& config) {
  if (config.n < 1) throw ConfigError("n", "must be at least 1");
  std::vector<std::optional<UserEvalResult>> results(dataset.users.size());
  parallel_for(dataset.users.size(), config.workers, [&](std::size_t i) {
    const auto& u = dataset.users[i];
    if (u.relevant.empty() || u.recorded_list.empty()) return;
    const auto seed = derive_seed(config.seed, stable_hash(u.profile.user_id));
    auto sim = config.simulator_factory ? config.simulator_factory(u.profile, seed)
                                        : make_simulator(config.session, u.profile, seed);
    const auto replay =
        replay_protocol(u.recorded_list, *sim, u.profile, catalog, config.session.recommender_params);
    UserEvalResult r;
    r.user_id = u.profile.user_id;
    r.recall_initial = recall_at_n(u.recorded_list, u.relevant, config.n);
    r.recall_final = recall_at_n(replay.final_list, u.relevant, config.n);
    r.ndcg_initial = ndcg_at_n(u.recorded_list, u.relevant, config.n);
    r.ndcg_final = ndcg_at_n(replay.final_list, u.relevant, config.n);
    r.turns_used = static_cast<int>(replay.trace.breaks.size()) + 1;
    r.final_list = replay.final_list;
    results[i] = std::move(r);
  });

  EvalReport report;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i]) {
      report.per_user.push_back(std::move(*results[i]));
    } else {
      ++report.users_skipped;
    }
  }
  std::stable_sort(report.per_user.begin(), report.per_user.end(),
                   [](const auto& a, const auto& b) { return a.user_id < b.user_id; });
  if (!report.per_user.empty()) {
    const double n = static_cast<double>(report.per_user.size());
    for (const auto& r : report.per_user) {
      report.mean_recall_initial += r.recall_initial;
      report.mean_recall_final += r.recall_final;
      report.mean_ndcg_initial += r.ndcg_initial;
      report.mean_ndcg_final += r.ndcg_final;
      report.mean_turns_used += r.turns_used;
    }
    report.mean_recall_initial /= n;
    report.mean_recall_final /= n;
    report.mean_ndcg_initial /= n;
    report.mean_ndcg_final /= n;
    report.mean_turns_used /= n;
  }
  report.config_echo["n"] = config.n;
  report.config_echo["seed"] = config.seed;
  report.config_echo["simulator"] = config.simulator_factory ? std::string("custom") : config.session.simulator;
  report.config_echo["fatigue_threshold"] = config.session.simulator_params.fatigue_threshold;
  report.config_echo["less_multiplier"] = config.session.recommender_params.less_multiplier;
  report.config_echo["more_multiplier"] = config.session.recommender_params.more_multiplier;
  return report;
}

Json to_json(const EvalReport& r) {
  Json j;
  Json users = Json::array();
  for (const auto& u : r.per_user) {
    users.push_back({{"user_id", u.user_id},
                     {"recall_initial", u.recall_initial},
                     {"recall_final", u.recall_final},
                     {"ndcg_initial", u.ndcg_initial},
                     {"ndcg_final", u.ndcg_final},
                     {"turns_used", u.turns_used},
                     {"final_list", u.final_list}});
  }
  j["per_user"] = users;
  j["users_evaluated"] = r.per_user.size();
  j["users_skipped"] = r.users_skipped;
  j["aggregate"] = {{"recall_initial", r.mean_recall_initial}, {"recall_final", r.mean_recall_final},
                    {"ndcg_initial", r.mean_ndcg_initial},     {"ndcg_final", r.mean_ndcg_final},
                    {"turns_used", r.mean_turns_used}};
  j["config"] = r.config_echo;
  return j;
}

std::string format_report_table(const EvalReport& r) {
  std::ostringstream s;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %10s %10s %10s %10s %6s\n", "user", "recall_0", "recall_f", "ndcg_0",
                "ndcg_f", "turns");
  s << line;
  for (const auto& u : r.per_user) {
    std::snprintf(line, sizeof line, "%-16s %10.4f %10.4f %10.4f %10.4f %6d\n", u.user_id.c_str(), u.recall_initial,
                  u.recall_final, u.ndcg_initial, u.ndcg_final, u.turns_used);
    s << line;
  }
  std::snprintf(line, sizeof line, "%-16s %10.4f %10.4f %10.4f %10.4f %6.2f\n", "MEAN", r.mean_recall_initial,
                r.mean_recall_final, r.mean_ndcg_initial, r.mean_ndcg_final, r.mean_turns_used);
  s << line;
  s << "users evaluated: " << r.per_user.size() << ", skipped (no relevant set): " << r.users_skipped << "\n";
  return s.str();
}

UserProfile profile_from_history(const std::string& user_id, const std::vector<InteractionRecord>& history,
                                 const Catalog& catalog) {
  std::map<std::string, std::int64_t> counts;
  for (const auto& r : history) {
    if (is_engagement(r.action)) ++counts[catalog.at(r.item_id).item.category];
  }
  std::int64_t peak = 0;
  for (const auto& [_, c] : counts) peak = std::max(peak, c);
  UserProfile p;
  p.user_id = user_id;
  for (const auto& [cat, c] : counts) {
    p.interests.push_back({cat, std::round(100.0 * static_cast<double>(c) / static_cast<double>(peak)) / 100.0});
  }
  return p;
}

EvalDataset build_eval_dataset(const std::vector<InteractionRecord>& records, const Catalog& catalog,
                               std::size_t holdout_n, std::size_t list_len, const std::vector<UserProfile>& profiles) {
  if (holdout_n < 1) throw PreconditionError("holdout_n must be at least 1");
  if (list_len < 1) throw PreconditionError("list_len must be at least 1");
  std::map<std::string, std::vector<const InteractionRecord*>> by_user;
  for (const auto& r : records) by_user[r.user_id].push_back(&r);
  std::map<std::string, const UserProfile*> given;
  for (const auto& p : profiles) given[p.user_id] = &p;

  EvalDataset ds;
  for (auto& [user, recs] : by_user) {
    std::stable_sort(recs.begin(), recs.end(), [](const auto* a, const auto* b) { return a->ts < b->ts; });
    std::vector<std::size_t> positives;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (is_engagement(recs[i]->action)) positives.push_back(i);
    }
    EvalUser u;
    std::size_t cut = recs.size();
    if (!positives.empty()) {
      const std::size_t first_held = positives.size() > holdout_n ? positives.size() - holdout_n : 0;
      cut = positives[first_held];
      for (std::size_t i = first_held; i < positives.size(); ++i) u.relevant.insert(recs[positives[i]]->item_id);
    }
    std::vector<InteractionRecord> history;
    for (std::size_t i = 0; i < cut; ++i) history.push_back(*recs[i]);
    u.profile = given.count(user) ? *given[user] : profile_from_history(user, history, catalog);

    RecommendationRequest req;
    req.profile = u.profile;
    if (!history.empty()) req.summary = summarize_history(history, catalog, 36500, history.back().ts);
    for (const auto& h : history) req.excluded.insert(h.item_id);
    for (const auto& id : u.relevant) req.excluded.erase(id);
    u.recorded_list = recommend_initial(req, catalog, list_len).items;
    ds.users.push_back(std::move(u));
  }
  return ds;
}

namespace {

std::optional<std::filesystem::path> first_existing(const std::filesystem::path& dir,
                                                    std::initializer_list<const char*> names) {
  for (const char* n : names) {
    if (std::filesystem::exists(dir / n)) return dir / n;
  }
  return std::nullopt;
}

}  // namespace

LoadedEvalDataset load_eval_dataset(const std::filesystem::path& dir, std::size_t holdout_n, std::size_t list_len) {
  const auto items = first_existing(dir, {"items.csv", "items.jsonl"});
  if (!items) throw Error("dataset '" + dir.string() + "' has no items.csv or items.jsonl");
  LoadedEvalDataset out{load_items(*items, format_from_path(*items)), {}};

  std::vector<UserProfile> profiles;
  if (auto p = first_existing(dir, {"profiles.jsonl"})) profiles = load_profiles(*p);

  if (auto lists = first_existing(dir, {"lists.jsonl"})) {
    std::map<std::string, const UserProfile*> given;
    for (const auto& p : profiles) given[p.user_id] = &p;
    std::ifstream in(*lists);
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
      ++row;
      if (trim(line).empty()) continue;
      Json j;
      try {
        j = Json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(lists->string(), row, "", e.what());
      }
      EvalUser u;
      const auto user_id = j.at("user_id").get<std::string>();
      if (!given.count(user_id)) throw ParseError(lists->string(), row, "user_id", "no profile for '" + user_id + "'");
      u.profile = *given[user_id];
      u.recorded_list = j.at("recorded_list").get<std::vector<std::string>>();
      for (const auto& id : u.recorded_list) {
        if (!out.catalog.contains(id)) throw ParseError(lists->string(), row, "recorded_list", "unknown item '" + id + "'");
      }
      if (j.contains("relevant")) {
        const auto rel = j["relevant"].get<std::vector<std::string>>();
        u.relevant.insert(rel.begin(), rel.end());
      }
      out.dataset.users.push_back(std::move(u));
    }
    return out;
  }

  const auto inter = first_existing(dir, {"interactions.csv", "interactions.jsonl"});
  if (!inter) throw Error("dataset '" + dir.string() + "' has neither lists.jsonl nor interactions.{csv,jsonl}");
  const auto records = load_interactions(*inter, format_from_path(*inter));
  out.dataset = build_eval_dataset(records, out.catalog, holdout_n, list_len, profiles);
  return out;
}

void write_eval_dataset(const std::filesystem::path& dir, const Catalog& catalog, const EvalDataset& dataset) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "items.jsonl");
    write_items_jsonl(catalog, out);
  }
  std::ofstream profiles(dir / "profiles.jsonl");
  std::ofstream lists(dir / "lists.jsonl");
  for (const auto& u : dataset.users) {
    profiles << to_json(u.profile).dump() << '\n';
    Json l;
    l["user_id"] = u.profile.user_id;
    l["recorded_list"] = u.recorded_list;
    l["relevant"] = std::vector<std::string>(u.relevant.begin(), u.relevant.end());
    lists << l.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Synthetic replay dataset

namespace {

struct CategorySpec {
  const char* name;
  const char* slug;
  std::vector<std::string> tags;
};

// Pairs of related categories (shared tags); no tags are shared across pairs.
const std::vector<std::vector<CategorySpec>>& category_pairs() {
  static const std::vector<std::vector<CategorySpec>> pairs = {
      {{"hairstyling", "hair", {"beauty", "style", "hair"}}, {"makeup", "makeup", {"beauty", "style", "cosmetics"}}},
      {{"deep-sea fishing", "fish", {"ocean", "boats", "angling"}}, {"sailing", "sail", {"ocean", "boats", "wind"}}},
      {{"cooking", "cook", {"food", "kitchen", "recipes"}}, {"baking", "bake", {"food", "kitchen", "dessert"}}},
      {{"UFC", "ufc", {"combat", "fight-night", "mma"}}, {"boxing", "box", {"combat", "fight-night", "gloves"}}},
      {{"politics", "pol", {"news", "government", "elections"}}, {"economics", "econ", {"news", "government", "markets"}}},
  };
  return pairs;
}

constexpr std::size_t kItemsPerCategory = 10;

std::string synthetic_id(const CategorySpec& c, std::size_t i) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s-%02zu", c.slug, i);
  return buf;
}

Catalog synthetic_catalog() {
  std::vector<CatalogEntry> entries;
  for (const auto& pair : category_pairs()) {
    for (const auto& c : pair) {
      for (std::size_t i = 0; i < kItemsPerCategory; ++i) {
        CatalogEntry e;
        e.item.item_id = synthetic_id(c, i);
        e.item.title = std::string(c.name) + " clip " + std::to_string(i);
        e.item.description = "A short video about " + std::string(c.name) + ".";
        e.item.category = c.name;
        e.item.content_type = ContentType::ShortVideo;
        e.item.duration_s = 15 + static_cast<std::int64_t>((i * 37) % 90);
        e.metadata.publish_ts = 1700000000 - static_cast<std::int64_t>(i) * 3600;
        e.metadata.creator_id = std::string("creator-") + c.slug;
        e.metadata.likes = static_cast<std::int64_t>(100 + 13 * i);
        e.metadata.tags = c.tags;
        entries.push_back(std::move(e));
      }
    }
  }
  return Catalog(std::move(entries));
}

}  // namespace

EvalDataset SyntheticReplayDataset::dataset() const {
  EvalDataset ds;
  for (const auto& c : cases) ds.users.push_back(c.user);
  return ds;
}

SyntheticReplayDataset make_synthetic_replay_dataset(std::size_t n_users, std::uint64_t seed) {
  SyntheticReplayDataset out{synthetic_catalog(), {}};
  const auto& pairs = category_pairs();

  for (std::size_t u = 0; u < n_users; ++u) {
    Rng rng(derive_seed(seed, u));
    const std::size_t f_pair = rng.below(pairs.size());
    std::size_t r_pair = rng.below(pairs.size() - 1);
    if (r_pair >= f_pair) ++r_pair;
    const auto& f_cat = pairs[f_pair][rng.below(2)];
    const auto& r_cat = pairs[r_pair][rng.below(2)];
    // Neutral category: any category outside F's pair other than R.
    std::vector<const CategorySpec*> neutral_pool;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      if (p == f_pair) continue;
      for (const auto& c : pairs[p]) {
        if (std::string(c.name) != r_cat.name) neutral_pool.push_back(&c);
      }
    }
    const auto& n_cat = *neutral_pool[rng.below(neutral_pool.size())];

    // Draw distinct items per category.
    std::map<std::string, std::vector<std::size_t>> unused;
    for (const auto* cat : {&f_cat, &r_cat, &n_cat}) {
      auto& pool = unused[cat->name];
      for (std::size_t i = 0; i < kItemsPerCategory; ++i) pool.push_back(i);
    }
    auto take = [&](const CategorySpec& cat) {
      auto& pool = unused.at(cat.name);
      const auto pick = rng.below(pool.size());
      const auto idx = pool[pick];
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
      return synthetic_id(cat, idx);
    };

    SyntheticReplayCase c;
    char uid[32];
    std::snprintf(uid, sizeof uid, "user-%03zu", u);
    c.user.profile.user_id = uid;
    c.user.profile.age = 18 + static_cast<int>(rng.below(50));
    c.user.profile.gender = rng.below(2) ? "female" : "male";
    c.user.profile.location = "Bay Area";
    const double r_aff = std::round(100.0 * (0.7 + 0.3 * rng.uniform())) / 100.0;
    c.user.profile.interests = {{r_cat.name, r_aff}, {n_cat.name, 0.5}};

    std::vector<std::string> prefix, f_block, tail_f, tail_n, tail_r;
    const std::size_t n_prefix = rng.below(3);
    for (std::size_t i = 0; i < n_prefix; ++i) prefix.push_back(rng.below(2) ? take(r_cat) : take(n_cat));
    for (int i = 0; i < 4; ++i) f_block.push_back(take(f_cat));
    const std::size_t n_tail_f = 1 + rng.below(3);
    const std::size_t n_tail_n = rng.below(2);
    const std::size_t n_tail_r = 2 + rng.below(2);
    for (std::size_t i = 0; i < n_tail_f; ++i) tail_f.push_back(take(f_cat));
    for (std::size_t i = 0; i < n_tail_n; ++i) tail_n.push_back(take(n_cat));
    for (std::size_t i = 0; i < n_tail_r; ++i) tail_r.push_back(take(r_cat));

    auto& list = c.user.recorded_list;
    for (const auto* part : {&prefix, &f_block, &tail_f, &tail_n, &tail_r}) list.insert(list.end(), part->begin(), part->end());
    for (const auto& id : list) {
      if (out.catalog.at(id).item.category == r_cat.name) c.user.relevant.insert(id);
    }
    auto& expected = c.expected_final;
    for (const auto* part : {&prefix, &f_block, &tail_n, &tail_r, &tail_f}) {
      expected.insert(expected.end(), part->begin(), part->end());
    }
    c.expected_break_position = prefix.size() + f_block.size();
    out.cases.push_back(std::move(c));
  }
  return out;
}

}  // namespace recsim
