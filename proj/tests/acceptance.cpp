// Acceptance checks: one PASS/FAIL line per criterion. Exit status is the number of
// failures.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <httplib.h>
#include <iostream>
#include <sstream>

#include "fixtures.hpp"
#include "recsim/error.hpp"
#include "recsim/eval.hpp"
#include "recsim/population.hpp"
#include "recsim/service.hpp"
#include "recsim/store.hpp"

using namespace recsim;
namespace fs = std::filesystem;

namespace {

constexpr double kSimulateBudgetS = 1.0;
constexpr int kDeterminismRuns = 3;
constexpr int kInvariantSessions = 1000;
constexpr int kMetricInstances = 10000;
constexpr double kMetricTol = 1e-12;
constexpr double kHandNdcg = 0.9197;
constexpr double kHandNdcgTol = 1e-4;
constexpr std::size_t kSyntheticUsers = 50;
constexpr double kStrictImprovementShare = 0.8;
constexpr double kReplayBudgetS = 10.0;
constexpr int kRewardTrajectories = 1000;
constexpr int kPopulationUsers = 20;
constexpr int kPopulationTicks = 28;
constexpr int kJudgeTrajectories = 100;

const fs::path kData = RECSIM_DATA_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string run_process(const std::string& cmd, int& rc) {
  std::string out;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) {
    rc = -1;
    return out;
  }
  char buf[65536];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  rc = ::pclose(p);
  return out;
}

// ---------------------------------------------------------------------------

Outcome determinism() {
  const std::string cmd = std::string("'") + RECSIM_BIN + "' simulate --config '" + (kData / "config.json").string() +
                          "' --seeds 7 2>&1";
  std::vector<std::string> outputs;
  double slowest = 0.0;
  for (int i = 0; i < kDeterminismRuns; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    int rc = 0;
    outputs.push_back(run_process(cmd, rc));
    slowest = std::max(slowest, seconds_since(t0));
    if (rc != 0) return {false, "simulate exited with status " + std::to_string(rc)};
  }
  const Catalog cat = load_items(kData / "catalog.csv", DataFormat::Csv);
  const bool same = outputs[0] == outputs[1] && outputs[1] == outputs[2];
  const auto lines = std::count(outputs[0].begin(), outputs[0].end(), '\n');
  std::ostringstream d;
  d << kDeterminismRuns << " runs, " << lines << " sessions, " << outputs[0].size() << " bytes, catalog "
    << cat.size() << " items, slowest " << slowest << " s";
  return {same && lines > 0 && cat.size() == 100 && slowest < kSimulateBudgetS, d.str()};
}

Outcome session_invariants() {
  fx::Gen g(2024);
  int violations = 0, traditional = 0, eval_only = 0;
  std::string first;
  auto fail = [&](const std::string& why) {
    if (violations++ == 0) first = why;
  };
  for (int i = 0; i < kInvariantSessions; ++i) {
    const auto cat = g.catalog(g.uniform_int(1, 60), g.uniform_int(1, 8));
    const auto c = g.config();
    const auto t = run_session(g.persona("u" + std::to_string(i), 8), cat, c, g.next());
    for (const auto& v : check_invariants(t, *cat)) fail(v);
    // Independent restatement of the headline properties.
    if (!t.termination) fail("no termination");
    std::set<std::string> seen;
    for (const auto& turn : t.turns) {
      bool left = false;
      for (const auto& d : turn.decisions) {
        if (left) fail("decision after Leave");
        const auto a = static_cast<int>(d.decision.action);
        if (a < 0 || a > 6) fail("action outside the closed set");
        const auto& item = cat->at(d.item_id).item;
        if (d.decision.watch_s && *d.decision.watch_s > item.duration_s) fail("watch_s beyond duration");
        left = left || d.decision.action == ActionKind::Leave;
      }
      for (const auto& id : turn.shown.items) {
        if (!seen.insert(id).second) fail("item repeated across turns");
      }
      if (c.mode == SessionMode::Traditional && turn.instruction_in) fail("Traditional passed an instruction");
    }
    if (c.mode == SessionMode::Traditional) ++traditional;
    if (c.mode == SessionMode::EvalOnly) {
      ++eval_only;
      if (t.turns.size() != 1) fail("EvalOnly ran more than one turn");
    }
  }
  std::ostringstream d;
  d << kInvariantSessions << " sessions (" << traditional << " Traditional, " << eval_only << " EvalOnly), "
    << violations << " violations" << (first.empty() ? "" : ": " + first);
  return {violations == 0, d.str()};
}

Outcome replay_example() {
  // Politics-averse user: three politics items in a row trip the fatigue threshold
  // of 2 on i3; the instruction asks for less politics.
  const Catalog cat({fx::item("i1", "politics"), fx::item("i2", "politics"), fx::item("i3", "politics"),
                     fx::item("i4", "politics"), fx::item("i5", "cooking")});
  const auto user = fx::profile("u", {{"cooking", 0.5}});
  SimulatorParams p;
  p.fatigue_threshold = 2;
  ScriptedSimulator sim(user, p, 1);
  const auto r = replay_protocol({"i1", "i2", "i3", "i4", "i5"}, sim, user, cat);
  const std::vector<std::string> want_final = {"i1", "i2", "i3", "i5", "i4"};
  const bool ok = !r.trace.breaks.empty() && r.trace.breaks[0].item_id == "i3" && r.trace.breaks[0].position == 3 &&
                  r.trace.breaks[0].tail_before == std::vector<std::string>{"i4", "i5"} &&
                  r.trace.breaks[0].tail_after == std::vector<std::string>{"i5", "i4"} && r.final_list == want_final;
  std::string got;
  for (const auto& id : r.final_list) got += (got.empty() ? "" : ",") + id;
  return {ok, "break at " + (r.trace.breaks.empty() ? std::string("none") : r.trace.breaks[0].item_id) +
                  ", final [" + got + "]"};
}

Outcome metric_oracles() {
  fx::Gen g(99);
  double worst = 0.0;
  for (int i = 0; i < kMetricInstances; ++i) {
    const int pool = g.uniform_int(1, 40);
    std::vector<std::string> ids;
    for (int j = 0; j < pool; ++j) ids.push_back("x" + std::to_string(j));
    std::shuffle(ids.begin(), ids.end(), std::mt19937_64(g.next()));
    std::vector<std::string> ranked(ids.begin(), ids.begin() + g.uniform_int(0, pool));
    std::set<std::string> relevant;
    for (const auto& id : ids) {
      if (g.coin(0.25)) relevant.insert(id);
    }
    const auto n = static_cast<std::size_t>(g.uniform_int(1, 50));
    worst = std::max(worst, std::abs(ndcg_at_n(ranked, relevant, n) - fx::brute_ndcg(ranked, relevant, n)));
    worst = std::max(worst, std::abs(recall_at_n(ranked, relevant, n) - fx::brute_recall(ranked, relevant, n)));
  }
  const double hand = ndcg_at_n({"A", "B", "C"}, {"A", "C"}, 3);
  std::ostringstream d;
  d << kMetricInstances << " instances, max deviation " << worst << "; hand case " << hand;
  return {worst <= kMetricTol && std::abs(hand - kHandNdcg) <= kHandNdcgTol, d.str()};
}

Outcome replay_improvement() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto synth = make_synthetic_replay_dataset(kSyntheticUsers, 7);
  EvalConfig cfg;
  const auto report = run_eval(synth.dataset(), synth.catalog, cfg);
  const double elapsed = seconds_since(t0);
  std::size_t strict = 0, matches = 0;
  std::map<std::string, const SyntheticReplayCase*> by_user;
  for (const auto& c : synth.cases) by_user[c.user.profile.user_id] = &c;
  for (const auto& u : report.per_user) {
    if (u.ndcg_final > u.ndcg_initial) ++strict;
    if (u.final_list == by_user.at(u.user_id)->expected_final) ++matches;
  }
  const double share = static_cast<double>(strict) / static_cast<double>(report.per_user.size());
  std::ostringstream d;
  d << report.per_user.size() << " users, mean ndcg " << report.mean_ndcg_initial << " -> " << report.mean_ndcg_final
    << ", strict " << strict << "/" << report.per_user.size() << ", constructed finals matched " << matches
    << ", " << elapsed << " s";
  return {report.per_user.size() == kSyntheticUsers && report.mean_ndcg_final >= report.mean_ndcg_initial &&
              share >= kStrictImprovementShare && matches == kSyntheticUsers && elapsed < kReplayBudgetS,
          d.str()};
}

// Serves only the given category.
class RepetitiveRecommender final : public Recommender {
 public:
  explicit RepetitiveRecommender(std::string category) : category_(std::move(category)) {}
  RecommendationList recommend(const RecommendationRequest& r, const Catalog& catalog, std::size_t k) override {
    RecommendationList out;
    for (const auto& e : catalog.entries()) {
      if (out.items.size() == k) break;
      if (e.item.category == category_ && !r.excluded.count(e.item.item_id)) out.items.push_back(e.item.item_id);
    }
    return out;
  }
  std::string_view name() const override { return "repetitive"; }

 private:
  std::string category_;
};

// Round-robin over categories in descending affinity.
class DiversifiedRecommender final : public Recommender {
 public:
  RecommendationList recommend(const RecommendationRequest& r, const Catalog& catalog, std::size_t k) override {
    auto cats = catalog.categories();
    std::stable_sort(cats.begin(), cats.end(),
                     [&](const auto& a, const auto& b) { return r.profile.affinity(a) > r.profile.affinity(b); });
    std::map<std::string, std::vector<std::string>> pools;
    for (const auto& e : catalog.entries()) {
      if (!r.excluded.count(e.item.item_id)) pools[e.item.category].push_back(e.item.item_id);
    }
    RecommendationList out;
    for (std::size_t round = 0; out.items.size() < k; ++round) {
      bool any = false;
      for (const auto& c : cats) {
        if (out.items.size() == k) break;
        if (round < pools[c].size()) {
          out.items.push_back(pools[c][round]);
          any = true;
        }
      }
      if (!any) break;
    }
    return out;
  }
  std::string_view name() const override { return "diversified"; }
};

Outcome quadrant_hypothesis() {
  std::vector<CatalogEntry> entries;
  const std::vector<std::string> cats = {"ufc", "cooking", "travel", "music", "comedy"};
  for (const auto& c : cats) {
    for (int i = 0; i < 20; ++i) entries.push_back(fx::item(c + "-" + std::to_string(100 + i), c, 120));
  }
  const auto catalog = std::make_shared<const Catalog>(entries);
  const auto user =
      fx::profile("fan", {{"ufc", 0.9}, {"cooking", 0.75}, {"travel", 0.75}, {"music", 0.75}, {"comedy", 0.75}});
  SessionConfig cfg;
  cfg.k = 5;
  cfg.max_turns = 5;
  cfg.recommender = "baseline";
  cfg.simulator_params.repetition_decay = 0.8;  // fatigue-sensitive

  std::set<std::string> relevant;  // NDCG proxy: the user's top category
  for (const auto& e : catalog->entries()) {
    if (e.item.category == "ufc") relevant.insert(e.item.item_id);
  }
  auto run = [&](std::unique_ptr<Recommender> rec) {
    Session s(user, catalog, cfg, 3, make_simulator(cfg, user, 3), std::move(rec), initial_state(cfg.simulator_params),
              "quadrant");
    while (!s.done()) s.step();
    const auto& t = s.trajectory();
    const double ndcg = ndcg_at_n(t.turns.front().shown.items, relevant, cfg.k);
    return std::pair{ndcg, retention_proxy(t)};
  };
  const auto [rep_ndcg, rep_ret] = run(std::make_unique<RepetitiveRecommender>("ufc"));
  const auto [div_ndcg, div_ret] = run(std::make_unique<DiversifiedRecommender>());
  const auto rep_q = quadrant_classify(rep_ndcg, rep_ret);
  const auto div_q = quadrant_classify(div_ndcg, div_ret);
  std::ostringstream d;
  d << "repetitive (ndcg " << rep_ndcg << ", retention " << rep_ret << ") " << to_string(rep_q)
    << "; diversified (ndcg " << div_ndcg << ", retention " << div_ret << ") " << to_string(div_q);
  return {rep_q == Quadrant::SuboptimalRepetitive && div_ret > rep_ret, d.str()};
}

Outcome reward_recount() {
  fx::Gen g(555);
  int mismatches = 0;
  for (int i = 0; i < kRewardTrajectories; ++i) {
    const auto cat = g.catalog(g.uniform_int(1, 60), 6);
    auto c = g.config();
    c.simulator_params.share_probability = g.uniform(0.0, 0.5);
    const auto t = run_session(g.persona("u", 6), cat, c, g.next());
    // Integer weights keep every sum exact in double arithmetic.
    auto iw = [&] { return static_cast<double>(g.uniform_int(0, 50)); };
    const RewardWeights w1{iw(), iw(), iw(), iw(), iw(), iw()};
    const RewardWeights w2{iw(), iw(), iw(), iw(), iw(), iw()};
    const RewardWeights sum{w1.watch_s + w2.watch_s, w1.click + w2.click,       w1.like + w2.like,
                            w1.share + w2.share,     w1.comment + w2.comment, w1.extra_turn + w2.extra_turn};
    const auto r = compute_trajectory_reward(t, w1);
    const auto tl = fx::tally(t);
    const bool fields = r.total_watch_s == tl.watch_s && r.clicks == tl.clicks && r.likes == tl.likes &&
                        r.shares == tl.shares && r.comments == tl.comments && r.items_consumed == tl.consumed &&
                        r.turns == tl.turns && r.session_span_s == t.ended_ts - t.started_ts;
    const double folded = w1.watch_s * tl.watch_s + w1.click * tl.clicks + w1.like * tl.likes +
                          w1.share * tl.shares + w1.comment * tl.comments +
                          w1.extra_turn * std::max<std::int64_t>(0, tl.turns - 1);
    const bool linear = compute_trajectory_reward(t, sum).composite ==
                            r.composite + compute_trajectory_reward(t, w2).composite &&
                        compute_trajectory_reward(t, w1.scaled(3.0)).composite == 3.0 * r.composite;
    if (!fields || r.composite != folded || !linear) ++mismatches;
  }
  return {mismatches == 0, std::to_string(kRewardTrajectories) + " trajectories, " + std::to_string(mismatches) +
                               " mismatches"};
}

Outcome population_reductions() {
  fx::Gen g(31337);
  const auto catalog = g.catalog(100, 8);
  std::vector<UserProfile> users;
  std::vector<std::string> ids;
  for (int i = 0; i < kPopulationUsers; ++i) {
    char id[8];
    std::snprintf(id, sizeof id, "v%02d", i);
    ids.push_back(id);
    users.push_back(g.persona(id, 8));
  }
  PopulationConfig cfg;
  cfg.session.k = 4;
  cfg.session.max_turns = 2;
  cfg.session.simulator_params.share_probability = 0.3;
  cfg.activity_probability = 0.6;
  cfg.record_states = true;
  std::vector<std::string> problems;

  // (1) No influence, no graph: independent per-user chains, compared tick by tick.
  const std::uint64_t seed = 17;
  const auto solo = run_population(SocialGraph{}, users, *catalog, {}, kPopulationTicks, CheckpointSchedule::standard(),
                                   cfg, seed);
  for (const auto& u : users) {
    auto state = initial_state(cfg.session.simulator_params);
    for (int t = 0; t < kPopulationTicks; ++t) {
      if (population_user_active(seed, u.user_id, t, cfg.activity_probability)) {
        state = user_update(state, {}, EnvironmentState{}, u, catalog, SocialGraph{}, cfg,
                            population_session_seed(seed, u.user_id, t), t)
                    .state;
      }
      if (solo.states_by_tick[static_cast<std::size_t>(t + 1)].users.at(u.user_id) != state) {
        problems.push_back("solo mismatch for " + u.user_id + " at tick " + std::to_string(t + 1));
        break;
      }
    }
  }

  // (2) Message conservation on a random 20-node graph.
  const auto graph = random_graph(ids, 0.3, 5);
  auto social = cfg;
  social.influence_strength = 0.7;
  const auto pop = run_population(graph, users, *catalog, {}, kPopulationTicks, CheckpointSchedule::standard(), social,
                                  seed);
  std::size_t delivered = 0;
  std::map<std::tuple<std::string, int, std::string>, std::map<std::string, int>> groups;
  for (int t = 0; t < kPopulationTicks; ++t) {
    const auto& before = pop.states_by_tick[static_cast<std::size_t>(t)].inboxes;
    const auto& after = pop.states_by_tick[static_cast<std::size_t>(t + 1)].inboxes;
    for (const auto& [user, inbox] : after) {
      const bool active = population_user_active(seed, user, t, social.activity_probability);
      const std::size_t carried = active ? 0 : before.at(user).size();
      for (std::size_t i = carried; i < inbox.size(); ++i) {
        const auto& m = inbox[i];
        ++delivered;
        if (m.tick != t || m.to != user || !graph.weight(m.from, m.to)) problems.push_back("stray message");
        ++groups[{m.from, m.tick, m.item_id}][m.to];
      }
    }
  }
  std::int64_t fanned_shares = 0;
  bool all_have_edges = true;
  for (const auto& id : ids) all_have_edges = all_have_edges && !graph.out_edges(id).empty();
  for (const auto& [key, targets] : groups) {
    const auto& out = graph.out_edges(std::get<0>(key));
    const int copies = targets.begin()->second;
    if (targets.size() != out.size()) problems.push_back("partial fan-out");
    for (const auto& [to, n] : targets) {
      if (n != copies) problems.push_back("uneven fan-out");
    }
    fanned_shares += copies;
  }
  std::int64_t env_shares = 0;
  for (const auto& [_, c] : pop.final_env.per_item_counters) env_shares += c.shares;
  if (pop.messages_emitted != pop.messages_delivered || delivered != pop.messages_delivered) {
    problems.push_back("emitted " + std::to_string(pop.messages_emitted) + " delivered " +
                       std::to_string(pop.messages_delivered) + " observed " + std::to_string(delivered));
  }
  if (all_have_edges && fanned_shares != env_shares) problems.push_back("shares not all fanned out");

  // (3) Processing order within a tick.
  auto permuted = social;
  std::vector<std::size_t> order(users.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = order.size() - 1 - i;
  std::shuffle(order.begin(), order.end(), std::mt19937_64(9));
  permuted.user_order = order;
  permuted.workers = 4;
  const auto perm = run_population(graph, users, *catalog, {}, kPopulationTicks, CheckpointSchedule::standard(),
                                   permuted, seed);
  if (perm.final_state != pop.final_state || perm.final_env != pop.final_env ||
      perm.states_by_tick != pop.states_by_tick) {
    problems.push_back("processing order changed the result");
  }

  // (4) Identical seeds: zero spread.
  auto light = social;
  light.record_states = false;
  const auto var = rerun_variance({graph, users, *catalog, {}, kPopulationTicks, CheckpointSchedule::standard(), light},
                                  {seed, seed, seed});
  for (const auto& [offset, metrics] : var.checkpoints) {
    for (const auto& [name, s] : metrics) {
      if (s.stddev != 0.0) problems.push_back("stddev of " + name + " is not 0");
    }
  }

  std::ostringstream d;
  d << kPopulationUsers << " users x " << kPopulationTicks << " ticks; " << pop.messages_emitted
    << " messages conserved; " << env_shares << " shares";
  if (!problems.empty()) d << "; " << problems.size() << " problems, first: " << problems.front();
  return {problems.empty() && pop.messages_emitted > 0, d.str()};
}

Outcome judge_partition() {
  fx::Gen g(4242);
  std::vector<Trajectory> ts;
  int want_retained = 0, want_rejected = 0, want_unjudged = 0;
  for (int i = 0; i < kJudgeTrajectories; ++i) {
    const auto cat = g.catalog(40, 5);
    auto t = run_session(g.persona("u" + std::to_string(i), 5), cat, g.config(), g.next());
    if (i % 10 == 9) {
      t.termination.reset();
      ++want_unjudged;
    } else {
      const auto tl = fx::tally(t);
      (tl.turns >= 2 && tl.consumed >= 3 ? want_retained : want_rejected)++;
    }
    ts.push_back(std::move(t));
  }
  const auto rubric = load_rubric(kData / "rubric.json");
  const auto f = filter_trajectories(ts, rubric, nullptr);
  std::ostringstream d;
  d << "retained " << f.retained.size() << "/" << want_retained << ", rejected " << f.rejected.size() << "/"
    << want_rejected << ", unjudged " << f.unjudged.size() << "/" << want_unjudged;
  return {static_cast<int>(f.retained.size()) == want_retained &&
              static_cast<int>(f.rejected.size()) == want_rejected &&
              static_cast<int>(f.unjudged.size()) == want_unjudged,
          d.str()};
}

Outcome service_conformance() {
  const auto dir = fs::temp_directory_path() / "recsim_acceptance_service";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto store_path = dir / "trajectories.jsonl";
  const auto catalog = std::make_shared<const Catalog>(load_items(kData / "catalog.csv", DataFormat::Csv));
  const auto profiles = load_profiles(kData / "profiles.jsonl");
  SessionConfig cfg;
  std::vector<std::string> problems;
  {
    TrajectoryStore store(store_path);
    AnnotatorService service(catalog, profiles, cfg, RewardWeights{}, store);
    HttpService http(service);
    const int port = http.start("127.0.0.1", 0);
    httplib::Client client("127.0.0.1", port);
    auto post = [&](const std::string& path, const Json& body) {
      auto res = client.Post(path, body.dump(), "application/json");
      if (!res) throw std::runtime_error("no response from " + path);
      if (res->status != 200) problems.push_back(path + " -> " + std::to_string(res->status) + " " + res->body);
      return Json::parse(res->body);
    };

    const auto created = post("/v1/sessions", {{"user_id", profiles.front().user_id}, {"seed", 11}});
    const std::string base = "/v1/sessions/" + created["session_id"].get<std::string>();
    post(base + "/actions", {{"action", "Click"}, {"idempotency_key", "a1"}});
    post(base + "/actions", {{"action", "Leave"}, {"idempotency_key", "a2"}});
    const auto refreshed = post(base + "/leave", {{"instruction", "Show me less political content"},
                                                  {"idempotency_key", "l1"}});
    if (!refreshed.value("refreshed", false)) problems.push_back("list was not refreshed");
    if (refreshed["items"] == created["items"]) problems.push_back("refreshed list equals the first list");
    post(base + "/actions", {{"action", "Like"}, {"idempotency_key", "a3"}});
    post(base + "/actions", {{"action", "Leave"}, {"idempotency_key", "a4"}});
    const auto exited = post(base + "/leave", {{"idempotency_key", "l2"}});
    if (exited["termination"] != "LeaveWithoutInstruction") problems.push_back("session did not exit");
    // Retries of already-applied requests replay the first answer.
    const auto again = post(base + "/leave", {{"idempotency_key", "l2"}});
    post(base + "/actions", {{"action", "Leave"}, {"idempotency_key", "a4"}});
    if (again != exited) problems.push_back("idempotent retry returned a different reply");
    http.stop();
  }
  TrajectoryStore reopened(store_path);
  std::ifstream raw(store_path);
  const auto lines = std::count(std::istreambuf_iterator<char>(raw), {}, '\n');
  if (reopened.size() != 1 || lines != 1) problems.push_back("store holds " + std::to_string(lines) + " records");
  std::size_t violations = 0;
  if (reopened.size() == 1) {
    const auto t = reopened.list().front();
    violations = check_invariants(t, *catalog).size();
    if (t.turns.size() != 2 || t.mode != SessionMode::HumanAnnotator) problems.push_back("unexpected trajectory shape");
  }
  fs::remove_all(dir);
  std::ostringstream d;
  d << "stored " << reopened.size() << " trajectory, " << violations << " invariant violations";
  if (!problems.empty()) d << "; " << problems.front();
  return {problems.empty() && violations == 0, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"determinism", determinism},
      {"session-invariants", session_invariants},
      {"replay-worked-example", replay_example},
      {"metric-oracles", metric_oracles},
      {"replay-improvement", replay_improvement},
      {"quadrant-hypothesis", quadrant_hypothesis},
      {"reward-recount", reward_recount},
      {"population-reductions", population_reductions},
      {"judge-partition", judge_partition},
      {"service-conformance", service_conformance},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << index << "/" << criteria.size() << "] " << name << ": "
              << o.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures;
}
