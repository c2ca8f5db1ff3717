#include "recsim/population.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "recsim/csv.hpp"
#include "recsim/error.hpp"
#include "recsim/parallel.hpp"
#include "recsim/random.hpp"
#include "recsim/text.hpp"

namespace recsim {

namespace {

constexpr std::uint64_t kActivityStream = 0x61637469ULL;
constexpr std::uint64_t kSessionStream = 0x73657373ULL;

const std::vector<Edge> kNoEdges;

std::uint64_t user_tick_key(const std::string& user_id, int tick) {
  return splitmix64(stable_hash(user_id) ^ (static_cast<std::uint64_t>(tick) * 0x9E3779B97F4A7C15ULL));
}

}  // namespace

SocialGraph::SocialGraph(std::vector<std::string> nodes, std::vector<Edge> edges) : nodes_(std::move(nodes)) {
  std::set<std::string> known(nodes_.begin(), nodes_.end());
  if (known.size() != nodes_.size()) throw Error("graph: duplicate node id");
  std::set<std::pair<std::string, std::string>> seen;
  for (auto& e : edges) {
    if (e.from == e.to) throw Error("graph: self-loop on '" + e.from + "'");
    if (!(e.weight >= 0.0 && e.weight <= 1.0)) {
      throw Error("graph: weight of " + e.from + "->" + e.to + " outside [0,1]");
    }
    if (!seen.emplace(e.from, e.to).second) throw Error("graph: repeated edge " + e.from + "->" + e.to);
    for (const auto* id : {&e.from, &e.to}) {
      if (known.insert(*id).second) nodes_.push_back(*id);
    }
    out_[e.from].push_back(e);
  }
  for (auto& [_, list] : out_) {
    std::sort(list.begin(), list.end(), [](const Edge& a, const Edge& b) { return a.to < b.to; });
  }
  edges_ = std::move(edges);
}

const std::vector<Edge>& SocialGraph::out_edges(const std::string& user) const {
  auto it = out_.find(user);
  return it == out_.end() ? kNoEdges : it->second;
}

std::optional<double> SocialGraph::weight(const std::string& from, const std::string& to) const {
  for (const auto& e : out_edges(from)) {
    if (e.to == to) return e.weight;
  }
  return std::nullopt;
}

SocialGraph parse_graph(std::string_view csv_text, const std::string& source) {
  const auto rows = csv::parse(csv_text);
  if (rows.empty()) return {};
  const auto& header = rows.front().fields;
  auto col = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (to_lower(trim(header[i])) == name) return i;
    }
    throw ParseError(source, rows.front().line, name, "missing column");
  };
  const auto c_from = col("from"), c_to = col("to"), c_weight = col("weight");
  std::vector<Edge> edges;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != header.size()) {
      throw ParseError(source, row.line, "", "expected " + std::to_string(header.size()) + " fields");
    }
    Edge e{std::string(trim(row.fields[c_from])), std::string(trim(row.fields[c_to])), 0.0};
    if (e.from.empty()) throw ParseError(source, row.line, "from", "empty");
    if (e.to.empty()) throw ParseError(source, row.line, "to", "empty");
    try {
      std::size_t used = 0;
      const std::string w(trim(row.fields[c_weight]));
      e.weight = std::stod(w, &used);
      if (used != w.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(source, row.line, "weight", "not a number");
    }
    if (e.from == e.to) throw ParseError(source, row.line, "to", "self-loop");
    if (!(e.weight >= 0.0 && e.weight <= 1.0)) throw ParseError(source, row.line, "weight", "outside [0,1]");
    edges.push_back(std::move(e));
  }
  return SocialGraph({}, std::move(edges));
}

SocialGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open graph file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_graph(ss.str(), path.string());
}

SocialGraph random_graph(const std::vector<std::string>& nodes, double edge_probability, std::uint64_t seed) {
  if (!(edge_probability >= 0.0 && edge_probability <= 1.0)) {
    throw PreconditionError("edge_probability must be in [0,1]");
  }
  Rng rng(seed);
  std::vector<Edge> edges;
  for (const auto& a : nodes) {
    for (const auto& b : nodes) {
      if (a == b) continue;
      if (rng.uniform() < edge_probability) edges.push_back({a, b, 0.5 + 0.5 * rng.uniform()});
    }
  }
  return SocialGraph(nodes, std::move(edges));
}

void CheckpointSchedule::validate(int ticks) const {
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (offsets[i] < 1) throw ConfigError("checkpoints", "offsets must be at least 1");
    if (i > 0 && offsets[i] <= offsets[i - 1]) throw ConfigError("checkpoints", "offsets must be strictly increasing");
    if (offsets[i] > ticks) {
      throw ConfigError("checkpoints", "offset " + std::to_string(offsets[i]) + " exceeds ticks");
    }
  }
}

std::map<std::string, double> inbox_boosts(const std::string& user_id, const std::vector<Message>& inbox,
                                           const EnvironmentState& env, const SocialGraph& graph,
                                           const PopulationConfig& config) {
  std::map<std::string, double> boosts;
  for (const auto& m : inbox) {
    if (m.to != user_id) continue;
    const double w = graph.weight(m.from, m.to).value_or(0.0);
    boosts[m.item_id] += config.influence_strength * w;
  }
  if (config.injected_boost != 0.0) {
    for (const auto& id : config.promoted_items) boosts[id] += config.injected_boost;
  }
  if (config.popularity_weight != 0.0) {
    for (const auto& [item, c] : env.per_item_counters) {
      if (c.views > 0) boosts[item] += config.popularity_weight * std::log1p(static_cast<double>(c.views));
    }
  }
  return boosts;
}

UserUpdateResult user_update(const UserState& state_t, const std::vector<Message>& inbox,
                             const EnvironmentState& env_t, const UserProfile& profile, CatalogPtr catalog,
                             const SocialGraph& graph, const PopulationConfig& config, std::uint64_t seed, int tick) {
  SessionStart start;
  start.state = begin_session(state_t, config.session.simulator_params);
  start.boosts = inbox_boosts(profile.user_id, inbox, env_t, graph, config);
  start.session_id = profile.user_id + "-t" + std::to_string(tick);

  UserUpdateResult out;
  out.trajectory = run_session(profile, std::move(catalog), config.session, seed, std::move(start));
  out.state = out.trajectory->final_state;
  for (const auto& turn : out.trajectory->turns) {
    for (const auto& d : turn.decisions) {
      out.events.push_back({profile.user_id, d.item_id, d.decision.action});
      if (d.decision.action != ActionKind::Share) continue;
      for (const auto& e : graph.out_edges(profile.user_id)) {
        out.emitted.push_back({profile.user_id, e.to, d.item_id, MessageKind::Share, tick});
      }
    }
  }
  return out;
}

EnvironmentState env_update(const EnvironmentState& env_t, const std::vector<EngagementEvent>& events) {
  EnvironmentState next = env_t;
  for (const auto& ev : events) {
    auto& c = next.per_item_counters[ev.item_id];
    switch (ev.action) {
      case ActionKind::Watch:
      case ActionKind::Click: ++c.views; break;
      case ActionKind::Like: ++c.likes; break;
      case ActionKind::Share: ++c.shares; break;
      case ActionKind::Comment: ++c.comments; break;
      case ActionKind::Skip:
      case ActionKind::Leave: break;
    }
  }
  ++next.tick;
  return next;
}

std::uint64_t population_session_seed(std::uint64_t seed, const std::string& user_id, int tick) {
  return derive_seed(derive_seed(seed, kSessionStream), user_tick_key(user_id, tick));
}

bool population_user_active(std::uint64_t seed, const std::string& user_id, int tick, double probability) {
  if (probability >= 1.0) return true;
  if (probability <= 0.0) return false;
  return to_unit(derive_seed(derive_seed(seed, kActivityStream), user_tick_key(user_id, tick))) < probability;
}

PopulationReport run_population(const SocialGraph& graph, const std::vector<UserProfile>& profiles,
                                const Catalog& catalog, const std::vector<CatalogEntry>& injected_items, int ticks,
                                const CheckpointSchedule& schedule, const PopulationConfig& config,
                                std::uint64_t seed) {
  if (ticks < 0) throw ConfigError("ticks", "must be non-negative");
  schedule.validate(ticks);
  validate(config.session);
  if (!(config.activity_probability >= 0.0 && config.activity_probability <= 1.0)) {
    throw ConfigError("activity_probability", "must be in [0,1]");
  }
  if (config.session.mode == SessionMode::HumanAnnotator) {
    throw ConfigError("session.mode", "population runs need simulated users");
  }
  std::vector<std::size_t> order = config.user_order;
  if (order.empty()) {
    for (std::size_t i = 0; i < profiles.size(); ++i) order.push_back(i);
  } else {
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] != i || sorted.size() != profiles.size()) {
        throw ConfigError("user_order", "must be a permutation of the user indices");
      }
    }
  }
  {
    std::set<std::string> ids;
    for (const auto& p : profiles) {
      if (!ids.insert(p.user_id).second) throw DuplicateIdError(p.user_id);
    }
  }

  auto full = std::make_shared<const Catalog>(catalog.with_items(injected_items));
  PopulationConfig cfg = config;
  for (const auto& e : injected_items) cfg.promoted_items.push_back(e.item.item_id);

  PopulationReport report;
  EnvironmentState env;
  env.influence_strength = config.influence_strength;
  for (const auto& e : injected_items) {
    env.per_item_counters[e.item.item_id];
    report.injected_items.push_back(e.item.item_id);
  }
  report.initial_counters = env.per_item_counters;

  PopulationState state;
  for (const auto& p : profiles) {
    state.users[p.user_id] = initial_state(config.session.simulator_params);
    state.inboxes[p.user_id];
  }
  if (config.record_states) report.states_by_tick.push_back(state);

  std::size_t next_checkpoint = 0;
  for (int t = 0; t < ticks; ++t) {
    const PopulationState snapshot = state;
    std::vector<std::optional<UserUpdateResult>> results(profiles.size());
    std::vector<std::optional<std::string>> errors(profiles.size());
    parallel_for(order.size(), config.workers, [&](std::size_t pos) {
      const auto idx = order[pos];
      const auto& p = profiles[idx];
      if (!population_user_active(seed, p.user_id, t, config.activity_probability)) return;
      try {
        results[idx] = user_update(snapshot.users.at(p.user_id), snapshot.inboxes.at(p.user_id), env, p, full, graph,
                                   cfg, population_session_seed(seed, p.user_id, t), t);
      } catch (const std::exception& e) {
        errors[idx] = e.what();
      }
    });
    for (std::size_t i = 0; i < errors.size(); ++i) {
      if (errors[i]) {
        report.failure_tick = t;
        report.failure_message = profiles[i].user_id + ": " + *errors[i];
        break;
      }
    }
    if (report.failure_tick) break;

    // Barrier: apply states, then deliver in (sender id, emission) order.
    std::vector<EngagementEvent> events;
    std::vector<Message> outgoing;
    std::vector<std::size_t> by_id(profiles.size());
    for (std::size_t i = 0; i < by_id.size(); ++i) by_id[i] = i;
    std::sort(by_id.begin(), by_id.end(),
              [&](std::size_t a, std::size_t b) { return profiles[a].user_id < profiles[b].user_id; });
    for (auto i : by_id) {
      auto& r = results[i];
      if (!r) continue;
      const auto& id = profiles[i].user_id;
      state.users[id] = r->state;
      state.inboxes[id].clear();
      ++report.sessions_run;
      events.insert(events.end(), r->events.begin(), r->events.end());
      outgoing.insert(outgoing.end(), r->emitted.begin(), r->emitted.end());
    }
    report.messages_emitted += outgoing.size();
    for (auto& m : outgoing) {
      auto it = state.inboxes.find(m.to);
      if (it == state.inboxes.end()) continue;  // neighbour without a profile
      it->second.push_back(std::move(m));
      ++report.messages_delivered;
    }
    env = env_update(env, events);
    state.tick = t + 1;
    report.ticks_run = t + 1;
    if (config.record_states) report.states_by_tick.push_back(state);

    if (next_checkpoint < schedule.offsets.size() && schedule.offsets[next_checkpoint] == t + 1) {
      report.checkpoints.push_back({t + 1, (t + 1) * config.tick_hours, env.per_item_counters});
      ++next_checkpoint;
    }
  }
  report.final_env = env;
  report.final_state = state;
  return report;
}

MetricStats describe(const std::vector<double>& values) {
  MetricStats s;
  if (values.empty()) return s;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

VarianceReport rerun_variance(const PopulationRunArgs& args, const std::vector<std::uint64_t>& seeds) {
  if (seeds.size() < 2) throw PreconditionError("rerun_variance needs at least two repetitions");
  VarianceReport out;
  out.seeds = seeds;
  std::vector<PopulationReport> runs;
  for (auto s : seeds) {
    runs.push_back(run_population(args.graph, args.profiles, args.catalog, args.injected_items, args.ticks,
                                  args.schedule, args.config, s));
    if (runs.back().failure_tick) {
      throw Error("rerun_variance: run with seed " + std::to_string(s) + " failed: " + runs.back().failure_message);
    }
  }
  for (std::size_t c = 0; c < args.schedule.offsets.size(); ++c) {
    std::map<std::string, std::vector<double>> samples;
    for (const auto& run : runs) {
      const auto& counters = run.checkpoints.at(c).per_item_counters;
      ItemCounters total;
      for (const auto& [_, v] : counters) {
        total.views += v.views;
        total.likes += v.likes;
        total.shares += v.shares;
        total.comments += v.comments;
      }
      samples["total_views"].push_back(static_cast<double>(total.views));
      samples["total_likes"].push_back(static_cast<double>(total.likes));
      samples["total_shares"].push_back(static_cast<double>(total.shares));
      samples["total_comments"].push_back(static_cast<double>(total.comments));
      for (const auto& id : run.injected_items) {
        auto it = counters.find(id);
        samples["views:" + id].push_back(it == counters.end() ? 0.0 : static_cast<double>(it->second.views));
      }
    }
    std::map<std::string, MetricStats> stats;
    for (const auto& [name, v] : samples) stats[name] = describe(v);
    out.checkpoints.emplace_back(args.schedule.offsets[c], std::move(stats));
  }
  return out;
}

namespace {

Json counters_json(const std::map<std::string, ItemCounters>& m) {
  Json j = Json::object();
  for (const auto& [id, c] : m) {
    j[id] = {{"views", c.views}, {"likes", c.likes}, {"shares", c.shares}, {"comments", c.comments}};
  }
  return j;
}

}  // namespace

Json to_json(const PopulationState& s) {
  Json users = Json::object();
  for (const auto& [id, st] : s.users) users[id] = to_json(st);
  Json inboxes = Json::object();
  for (const auto& [id, msgs] : s.inboxes) {
    Json arr = Json::array();
    for (const auto& m : msgs) {
      arr.push_back({{"from", m.from},
                     {"to", m.to},
                     {"item_id", m.item_id},
                     {"kind", m.kind == MessageKind::Share ? "Share" : "Exposure"},
                     {"tick", m.tick}});
    }
    inboxes[id] = std::move(arr);
  }
  return {{"tick", s.tick}, {"users", std::move(users)}, {"inboxes", std::move(inboxes)}};
}

Json to_json(const PopulationReport& r) {
  Json j;
  j["ticks_run"] = r.ticks_run;
  j["injected_items"] = r.injected_items;
  j["initial_counters"] = counters_json(r.initial_counters);
  Json cps = Json::array();
  for (const auto& c : r.checkpoints) {
    cps.push_back({{"offset", c.offset}, {"hours", c.hours}, {"per_item_counters", counters_json(c.per_item_counters)}});
  }
  j["checkpoints"] = std::move(cps);
  j["sessions_run"] = r.sessions_run;
  j["messages_emitted"] = r.messages_emitted;
  j["messages_delivered"] = r.messages_delivered;
  j["final_counters"] = counters_json(r.final_env.per_item_counters);
  if (r.failure_tick) {
    j["failure"] = {{"tick", *r.failure_tick}, {"message", r.failure_message}};
  } else {
    j["failure"] = nullptr;
  }
  return j;
}

Json to_json(const VarianceReport& r) {
  Json j;
  j["seeds"] = r.seeds;
  Json cps = Json::array();
  for (const auto& [offset, stats] : r.checkpoints) {
    Json m = Json::object();
    for (const auto& [name, s] : stats) {
      m[name] = {{"mean", s.mean}, {"stddev", s.stddev}, {"min", s.min}, {"max", s.max}};
    }
    cps.push_back({{"offset", offset}, {"metrics", std::move(m)}});
  }
  j["checkpoints"] = std::move(cps);
  return j;
}

}  // namespace recsim
