#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "recsim/error.hpp"
#include "recsim/recommender.hpp"

using namespace recsim;

namespace {

RecommendationRequest request_for(UserProfile p) {
  RecommendationRequest r;
  r.profile = std::move(p);
  return r;
}

RecommendationRequest with_instruction(RecommendationRequest r, const std::string& text) {
  r.turn_index = 1;
  r.instruction = Instruction{text, InstructionSource::Explicit, ""};
  return r;
}

// Brute-force baseline: score every item from the documented formula, sort by
// (score desc, id asc).
std::vector<std::string> oracle_baseline(const RecommendationRequest& r, const Catalog& cat, std::size_t k) {
  std::vector<std::pair<double, std::string>> all;
  for (const auto& e : cat.entries()) {
    if (r.excluded.count(e.item.item_id)) continue;
    double recency = 1.0;
    for (std::size_t i = 0; i < r.summary.recent_items.size(); ++i) {
      const auto& [id, action] = r.summary.recent_items[i];
      if (action == ActionKind::Skip || action == ActionKind::Leave) continue;
      if (cat.at(id).item.category == e.item.category) recency += 1.0 / static_cast<double>(i + 1);
    }
    double s = r.profile.affinity(e.item.category) * recency;
    if (r.boosts.count(e.item.item_id)) s += r.boosts.at(e.item.item_id);
    all.emplace_back(-s, e.item.item_id);
  }
  std::sort(all.begin(), all.end());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < all.size() && i < k; ++i) out.push_back(all[i].second);
  return out;
}

Catalog hair_catalog() {
  return Catalog({fx::item("h1", "hairstyling", 30, {"beauty", "fashion", "tutorials"}),
                  fx::item("h2", "hairstyling", 30, {"beauty", "tutorials"}),
                  fx::item("m1", "makeup", 30, {"beauty", "fashion", "tutorials"}),
                  fx::item("n1", "nails", 30, {"beauty", "fashion"}),
                  fx::item("p1", "politics", 30, {"news", "debate"}),
                  fx::item("s1", "sports", 30, {"ball", "teams"})});
}

}  // namespace

TEST(RecommendInitial, FishingPersonaTieBreak) {
  const Catalog cat({fx::item("A", "fishing"), fx::item("B", "cooking"), fx::item("C", "fishing")});
  const auto r = request_for(fx::profile("u", {{"fishing", 0.9}}));
  EXPECT_EQ(recommend_initial(r, cat, 2).items, (std::vector<std::string>{"A", "C"}));
  EXPECT_EQ(recommend_initial(r, cat, 2).items, oracle_baseline(r, cat, 2));
}

TEST(RecommendInitial, ExhaustionAndZeroAffinity) {
  const Catalog cat({fx::item("z", "a"), fx::item("b", "b"), fx::item("m", "c")});
  const auto r = request_for(fx::profile("u", {{"c", 0.5}}));
  EXPECT_EQ(recommend_initial(r, cat, 10).items, (std::vector<std::string>{"m", "b", "z"}));
  const auto zero = request_for(fx::profile("u", {{"c", 0.0}}));
  EXPECT_EQ(recommend_initial(zero, cat, 2).items, (std::vector<std::string>{"b", "m"}));
}

TEST(RecommendInitial, Preconditions) {
  const auto r = request_for(fx::profile("u", {{"c", 0.5}}));
  EXPECT_THROW(recommend_initial(r, Catalog{}, 3), Error);
  auto bad = r;
  bad.instruction = Instruction{"more c", InstructionSource::Explicit, ""};
  EXPECT_THROW(recommend_initial(bad, Catalog({fx::item("a", "c")}), 1), PreconditionError);
  EXPECT_THROW(validate(bad), PreconditionError);
}

TEST(RecommendInitial, MatchesBruteForceOnRandomRequests) {
  fx::Gen g(21);
  for (int round = 0; round < 300; ++round) {
    const auto cat = g.catalog(g.uniform_int(1, 40), 6);
    auto r = request_for(g.persona("u", 6));
    for (int i = 0; i < g.uniform_int(0, 8); ++i) {
      const auto& e = cat->entries()[static_cast<std::size_t>(g.uniform_int(0, static_cast<int>(cat->size()) - 1))];
      r.summary.record(e.item.item_id, e.item.category, g.coin() ? ActionKind::Watch : ActionKind::Skip);
      if (g.coin(0.3)) r.excluded.insert(e.item.item_id);
      if (g.coin(0.2)) r.boosts[e.item.item_id] = g.uniform();
    }
    const auto k = static_cast<std::size_t>(g.uniform_int(1, 10));
    const auto got = recommend_initial(r, *cat, k);
    ASSERT_EQ(got.items, oracle_baseline(r, *cat, k));
    std::set<std::string> uniq(got.items.begin(), got.items.end());
    EXPECT_EQ(uniq.size(), got.items.size());
    for (const auto& id : got.items) EXPECT_FALSE(r.excluded.count(id));
  }
}

TEST(ParseInstruction, Grammar) {
  const std::vector<std::string> cats = {"politics", "hairstyling", "cooking", "deep-sea fishing"};
  EXPECT_EQ(parse_instruction("Show me less political content", cats).less, (std::set<std::string>{"politics"}));
  const auto hair = parse_instruction(
      "There are too many recommendations about hairstyling; I wanna see something different but related", cats);
  EXPECT_EQ(hair.less, (std::set<std::string>{"hairstyling"}));
  EXPECT_TRUE(hair.novel);
  EXPECT_TRUE(hair.related);
  const auto mixed = parse_instruction("Fewer politics but more cooking please", cats);
  EXPECT_EQ(mixed.less, (std::set<std::string>{"politics"}));
  EXPECT_EQ(mixed.more, (std::set<std::string>{"cooking"}));
  EXPECT_EQ(parse_instruction("I want deep-sea fishing videos", cats).more, (std::set<std::string>{"deep-sea fishing"}));
  EXPECT_TRUE(parse_instruction("Show me more interesting content", cats).novel);
  EXPECT_TRUE(parse_instruction("blah blah", cats).empty());
}

TEST(RespondToInstruction, LessPoliticsDemotes) {
  const auto cat = hair_catalog();
  RecommenderParams params;
  auto r = with_instruction(request_for(fx::profile("u", {{"politics", 0.9}, {"sports", 0.5}})),
                            "Show me less political content");
  const auto list = respond_to_instruction(r, cat, 6, params);
  // politics: (0.9 + 0.1) * 0.2 = 0.2 < sports: 0.5 + 0.1 = 0.6
  EXPECT_EQ(list.items.front(), "s1");
  EXPECT_LT(params.less_multiplier, 1.0);
  EXPECT_NE(list.strategy_note.find("less=[politics]"), std::string::npos);
}

TEST(RespondToInstruction, HairstylingDifferentButRelated) {
  const auto cat = hair_catalog();
  auto base = request_for(fx::profile("u", {{"hairstyling", 0.9}, {"politics", 0.3}, {"makeup", 0.1}}));
  base.summary.record("h1", "hairstyling", ActionKind::Watch);
  base.excluded = {"h1"};
  const auto r = with_instruction(base, "There are too many recommendations about hairstyling; I wanna see something "
                                        "different but related");
  RecommenderParams params;
  const auto related = related_categories(cat, {"hairstyling"}, params.related_jaccard);
  // hairstyling tags {beauty,fashion,tutorials}; makeup J=1, nails J=2/3, others 0.
  EXPECT_EQ(related, (std::set<std::string>{"makeup", "nails"}));
  const auto list = respond_to_instruction(r, cat, 5, params);
  // Hand scores: makeup (0.1+0.1)*2+0.5=0.9, nails 0.1*2+0.5=0.7, politics 0.4+0.5=0.9 (id order after m1),
  // sports 0.1+0.5=0.6, h2 (0.9*2+0.1)*0.2=0.38.
  EXPECT_EQ(list.items, (std::vector<std::string>{"m1", "p1", "n1", "s1", "h2"}));
  EXPECT_EQ(std::find(list.items.begin(), list.items.end(), "h1"), list.items.end());
  const auto baseline = recommend_initial(base, cat, 5);
  EXPECT_EQ(baseline.items.front(), "h2");
}

TEST(RespondToInstruction, NeutralDirectiveEqualsBaseline) {
  fx::Gen g(4);
  for (int round = 0; round < 100; ++round) {
    const auto cat = g.catalog(30, 5);
    auto r = request_for(g.persona("u", 5));
    r.summary.record(cat->entries()[0].item.item_id, cat->entries()[0].item.category, ActionKind::Like);
    const auto instructed = with_instruction(r, "hmm okay then");
    const auto got = respond_to_instruction(instructed, *cat, 7);
    auto plain = r;
    plain.turn_index = 1;
    EXPECT_EQ(got.items, recommend_initial(plain, *cat, 7).items);
    EXPECT_NE(got.strategy_note.find("fallback"), std::string::npos);
    // Explicit empty directives: same argsort.
    EXPECT_EQ(respond_to_instruction(instructed, *cat, 7, {}, Directives{}).items, got.items);
  }
}

TEST(RespondToInstruction, ScoreOracle) {
  // Independent re-evaluation of the instruct score for random directives.
  fx::Gen g(31);
  RecommenderParams params;
  for (int round = 0; round < 200; ++round) {
    const auto cat = g.catalog(25, 5);
    auto r = with_instruction(request_for(g.persona("u", 5)), "x");
    const auto cats = cat->categories();
    Directives d;
    for (const auto& c : cats) {
      const int roll = g.uniform_int(0, 3);
      if (roll == 0) d.less.insert(c);
      if (roll == 1) d.more.insert(c);
    }
    d.novel = g.coin();
    if (g.coin()) r.summary.record(cat->entries()[0].item.item_id, cat->entries()[0].item.category, ActionKind::Click);
    std::vector<std::pair<double, std::string>> expected;
    for (const auto& e : cat->entries()) {
      const auto& c = e.item.category;
      double s = baseline_score(r, *cat, e) + params.smoothing;
      if (d.less.count(c)) s *= params.less_multiplier;
      if (d.more.count(c)) s *= params.more_multiplier;
      if (d.novel && !r.summary.per_category_counts.count(c)) s += params.novel_bonus;
      expected.emplace_back(-s, e.item.item_id);
    }
    std::sort(expected.begin(), expected.end());
    const auto got = respond_to_instruction(r, *cat, 25, params, d);
    ASSERT_EQ(got.items.size(), expected.size());
    for (std::size_t i = 0; i < got.items.size(); ++i) ASSERT_EQ(got.items[i], expected[i].second);
  }
}

TEST(ReplayRerank, WorkedExample) {
  const Catalog cat({fx::item("i4", "cooking"), fx::item("i5", "fishing")});
  const Instruction ins{"Show me more fishing", InstructionSource::Explicit, "i3"};
  EXPECT_EQ(replay_rerank({"i4", "i5"}, ins, cat), (std::vector<std::string>{"i5", "i4"}));
  EXPECT_TRUE(replay_rerank({}, ins, cat).empty());
  const Instruction neutral{"ok", InstructionSource::Explicit, ""};
  EXPECT_EQ(replay_rerank({"i4", "i5"}, neutral, cat), (std::vector<std::string>{"i4", "i5"}));
  EXPECT_EQ(replay_rerank({"i4", "i5"}, std::nullopt, cat), (std::vector<std::string>{"i4", "i5"}));
}

TEST(ReplayRerank, AlwaysAPermutation) {
  fx::Gen g(17);
  const std::vector<std::string> texts = {"less fishing", "more cooking", "too many politics, more travel",
                                          "something different but related to music", "nothing"};
  for (int round = 0; round < 500; ++round) {
    const auto cat = g.catalog(30, 8);
    std::vector<std::string> remaining;
    for (const auto& e : cat->entries()) {
      if (g.coin(0.4)) remaining.push_back(e.item.item_id);
    }
    const Instruction ins{texts[static_cast<std::size_t>(g.uniform_int(0, 4))], InstructionSource::Explicit, ""};
    auto out = replay_rerank(remaining, ins, *cat);
    auto a = remaining, b = out;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    ASSERT_EQ(a, b);
  }
}

TEST(Recommenders, ReplayServesRecordedOrderAndReordersTail) {
  const Catalog cat({fx::item("i1", "a"), fx::item("i2", "a"), fx::item("i3", "b"), fx::item("i4", "b"),
                     fx::item("i5", "c")});
  ReplayRecommender rec(std::vector<std::string>{"i1", "i2", "i3", "i4", "i5"});
  auto r = request_for(fx::profile("u", {{"a", 0.5}}));
  EXPECT_EQ(rec.recommend(r, cat, 2).items, (std::vector<std::string>{"i1", "i2"}));
  r.excluded = {"i1", "i2"};
  r = with_instruction(r, "more c");
  EXPECT_EQ(rec.recommend(r, cat, 5).items, (std::vector<std::string>{"i5", "i3", "i4"}));
}

TEST(Recommenders, FactoryAndLlmParser) {
  EXPECT_EQ(make_recommender("baseline", {})->name(), "baseline");
  EXPECT_EQ(make_recommender("instruct", {})->name(), "instruct");
  EXPECT_EQ(make_recommender("replay", {})->name(), "replay");
  EXPECT_THROW(make_recommender("llm", {}), Error);
  EXPECT_THROW(make_recommender("magic", {}), Error);

  const std::vector<std::string> cats = {"politics", "cooking"};
  const auto d = LlmInstructRecommender::parse_directive_output(
      "LESS: politics\nMORE: cooking\nNOVEL: yes\nRELATED: no", cats);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->less, (std::set<std::string>{"politics"}));
  EXPECT_EQ(d->more, (std::set<std::string>{"cooking"}));
  EXPECT_TRUE(d->novel);
  EXPECT_FALSE(d->related);
  EXPECT_FALSE(LlmInstructRecommender::parse_directive_output("sure thing!", cats));

  const Catalog cat({fx::item("p", "politics"), fx::item("c", "cooking")});
  auto client = std::make_shared<FunctionChatClient>([](const ChatRequest&) { return std::string("nonsense"); });
  LlmInstructRecommender llm(client);
  auto r = with_instruction(request_for(fx::profile("u", {{"politics", 0.9}, {"cooking", 0.3}})), "less politics");
  // Unusable model output falls back to the keyword parser.
  EXPECT_EQ(llm.recommend(r, cat, 2).items, (std::vector<std::string>{"c", "p"}));
}

TEST(Recommenders, BaselineIgnoresInstructions) {
  const auto cat = hair_catalog();
  const auto r = with_instruction(request_for(fx::profile("u", {{"politics", 0.9}, {"sports", 0.5}})), "less politics");
  BaselineRecommender b;
  EXPECT_EQ(b.recommend(r, cat, 1).items, (std::vector<std::string>{"p1"}));
  InstructRecommender i;
  EXPECT_NE(i.recommend(r, cat, 1).items, (std::vector<std::string>{"p1"}));
}
