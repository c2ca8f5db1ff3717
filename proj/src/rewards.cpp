#include "recsim/rewards.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "recsim/error.hpp"
#include "recsim/text.hpp"

namespace recsim {

RewardSignal compute_trajectory_reward(const Trajectory& t, const RewardWeights& w) {
  if (!t.finished()) throw PreconditionError("trajectory '" + t.session_id + "' is not finished");
  RewardSignal r;
  for (const auto& turn : t.turns) {
    for (const auto& d : turn.decisions) {
      switch (d.decision.action) {
        case ActionKind::Watch: r.total_watch_s += d.decision.watch_s.value_or(0); break;
        case ActionKind::Click: ++r.clicks; break;
        case ActionKind::Like: ++r.likes; break;
        case ActionKind::Share: ++r.shares; break;
        case ActionKind::Comment: ++r.comments; break;
        default: break;
      }
      if (is_engagement(d.decision.action)) ++r.items_consumed;
    }
  }
  r.turns = static_cast<std::int64_t>(t.turns.size());
  r.session_span_s = t.ended_ts - t.started_ts;
  const auto extra = static_cast<double>(std::max<std::int64_t>(0, r.turns - 1));
  r.composite = w.watch_s * static_cast<double>(r.total_watch_s) + w.click * static_cast<double>(r.clicks) +
                w.like * static_cast<double>(r.likes) + w.share * static_cast<double>(r.shares) +
                w.comment * static_cast<double>(r.comments) + w.extra_turn * extra;
  return r;
}

double metric_value(const RewardSignal& r, const std::string& m) {
  if (m == "total_watch_s") return static_cast<double>(r.total_watch_s);
  if (m == "clicks") return static_cast<double>(r.clicks);
  if (m == "likes") return static_cast<double>(r.likes);
  if (m == "shares") return static_cast<double>(r.shares);
  if (m == "comments") return static_cast<double>(r.comments);
  if (m == "items_consumed") return static_cast<double>(r.items_consumed);
  if (m == "turns") return static_cast<double>(r.turns);
  if (m == "session_span_s") return static_cast<double>(r.session_span_s);
  if (m == "composite") return r.composite;
  throw Error("unknown reward metric '" + m + "'");
}

double retention_proxy(const Trajectory& t) {
  const double capacity = static_cast<double>(t.k) * static_cast<double>(t.max_turns);
  if (capacity <= 0) return 0.0;
  std::int64_t consumed = 0;
  for (const auto& turn : t.turns) {
    for (const auto& d : turn.decisions) consumed += is_engagement(d.decision.action) ? 1 : 0;
  }
  return std::min(1.0, static_cast<double>(consumed) / capacity);
}

namespace {
constexpr std::array<std::string_view, 6> kComparatorNames = {">=", ">", "<=", "<", "==", "!="};

bool compare(double lhs, Comparator c, double rhs) {
  switch (c) {
    case Comparator::Ge: return lhs >= rhs;
    case Comparator::Gt: return lhs > rhs;
    case Comparator::Le: return lhs <= rhs;
    case Comparator::Lt: return lhs < rhs;
    case Comparator::Eq: return lhs == rhs;
    case Comparator::Ne: return lhs != rhs;
  }
  return false;
}

std::string format_number(double v) {
  if (v == static_cast<double>(static_cast<std::int64_t>(v))) return std::to_string(static_cast<std::int64_t>(v));
  std::ostringstream s;
  s << v;
  return s.str();
}
}  // namespace

std::string_view to_string(Comparator c) noexcept { return kComparatorNames[static_cast<std::size_t>(c)]; }

std::optional<Comparator> parse_comparator(std::string_view s) {
  const auto t = trim(s);
  for (std::size_t i = 0; i < kComparatorNames.size(); ++i) {
    if (kComparatorNames[i] == t) return static_cast<Comparator>(i);
  }
  if (t == "ge") return Comparator::Ge;
  if (t == "gt") return Comparator::Gt;
  if (t == "le") return Comparator::Le;
  if (t == "lt") return Comparator::Lt;
  if (t == "eq") return Comparator::Eq;
  if (t == "ne") return Comparator::Ne;
  return std::nullopt;
}

std::string MechanicalCriterion::describe() const {
  return metric + " " + std::string(to_string(comparator)) + " " + format_number(threshold);
}

Rubric rubric_from_json(const Json& j) {
  Rubric r;
  r.rubric_id = j.value("rubric_id", std::string("rubric"));
  const auto& names = reward_metric_names();
  if (j.contains("criteria")) {
    for (const auto& c : j["criteria"]) {
      MechanicalCriterion m;
      m.metric = c.at("metric").get<std::string>();
      if (std::find(names.begin(), names.end(), m.metric) == names.end()) {
        throw ConfigError("criteria.metric", "unknown reward metric '" + m.metric + "'");
      }
      const auto cmp = parse_comparator(c.at("comparator").get<std::string>());
      if (!cmp) throw ConfigError("criteria.comparator", "unknown comparator '" + c["comparator"].dump() + "'");
      m.comparator = *cmp;
      m.threshold = c.at("threshold").get<double>();
      r.criteria.push_back(std::move(m));
    }
  }
  if (j.contains("free_text")) r.free_text = j["free_text"].get<std::vector<std::string>>();
  return r;
}

Rubric load_rubric(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open rubric '" + path.string() + "'");
  try {
    return rubric_from_json(Json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("rubric", e.what());
  }
}

CriterionResult LlmJudgeBackend::evaluate(const std::string& criterion, const std::string& trajectory_json) {
  ChatRequest req;
  req.temperature = 0.0;
  req.messages = {{"system",
                   "You are a strict judge of recommender-session trajectories. Decide whether the trajectory "
                   "satisfies the criterion. Answer with exactly two lines:\nVERDICT: PASS or FAIL\nNOTE: <one "
                   "sentence>"},
                  {"user", "Criterion: " + criterion + "\nTrajectory JSON:\n" + trajectory_json}};
  std::string last_raw;
  for (int attempt = 0; attempt <= max_retries_; ++attempt) {
    try {
      last_raw = client_->complete(req);
    } catch (const BackendError& e) {
      if (attempt == max_retries_) throw JudgeError(std::string("judge backend failed: ") + e.what());
      continue;
    }
    std::optional<bool> verdict;
    std::string note;
    for (const auto& line : split(last_raw, '\n')) {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      const auto key = to_lower(trim(std::string_view(line).substr(0, colon)));
      const auto value = std::string(trim(std::string_view(line).substr(colon + 1)));
      if (key == "verdict") {
        const auto v = to_lower(value);
        if (v.rfind("pass", 0) == 0) verdict = true;
        if (v.rfind("fail", 0) == 0) verdict = false;
      } else if (key == "note") {
        note = value;
      }
    }
    if (verdict) return {criterion, *verdict, note};
  }
  throw JudgeError("judge output unparseable: " + last_raw.substr(0, 200));
}

JudgeVerdict judge_trajectory(const Trajectory& trajectory, const RewardSignal& reward, const Rubric& rubric,
                              JudgeBackend* backend) {
  JudgeVerdict v;
  for (const auto& c : rubric.criteria) {
    const double value = metric_value(reward, c.metric);
    const bool ok = compare(value, c.comparator, c.threshold);
    v.per_criterion.push_back({c.describe(), ok, "observed " + format_number(value)});
  }
  if (!rubric.free_text.empty()) {
    if (!backend) throw JudgeError("rubric '" + rubric.rubric_id + "' has free-text criteria but no judge backend");
    const auto serialized = to_jsonl_line(trajectory);
    for (const auto& text : rubric.free_text) v.per_criterion.push_back(backend->evaluate(text, serialized));
  }
  v.pass = std::all_of(v.per_criterion.begin(), v.per_criterion.end(), [](const auto& c) { return c.pass; });
  return v;
}

FilterResult filter_trajectories(const std::vector<Trajectory>& trajectories, const Rubric& rubric,
                                 JudgeBackend* backend, const RewardWeights& weights) {
  FilterResult out;
  for (const auto& t : trajectories) {
    try {
      const auto reward = compute_trajectory_reward(t, weights);
      const auto verdict = judge_trajectory(t, reward, rubric, backend);
      Trajectory annotated = t;
      annotated.annotations["reward"] = to_json(reward);
      annotated.annotations["judge"] = to_json(verdict);
      (verdict.pass ? out.retained : out.rejected).push_back(std::move(annotated));
    } catch (const JudgeError& e) {
      out.unjudged.push_back({t, e.what()});
    } catch (const PreconditionError& e) {
      out.unjudged.push_back({t, e.what()});
    }
  }
  return out;
}

std::string_view to_string(Quadrant q) noexcept {
  switch (q) {
    case Quadrant::StrongExploitation: return "StrongExploitation";
    case Quadrant::SuboptimalRepetitive: return "SuboptimalRepetitive";
    case Quadrant::EffectiveExploration: return "EffectiveExploration";
    case Quadrant::Poor: return "Poor";
  }
  return "?";
}

Quadrant quadrant_classify(double ndcg, double retention, const QuadrantThresholds& th) {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(ndcg) || !unit(retention)) throw PreconditionError("ndcg and retention must lie in [0,1]");
  if (!(th.ndcg > 0.0 && th.ndcg < 1.0) || !(th.retention > 0.0 && th.retention < 1.0)) {
    throw PreconditionError("quadrant thresholds must lie in (0,1)");
  }
  const bool high_ndcg = ndcg >= th.ndcg;
  const bool high_retention = retention >= th.retention;
  if (high_ndcg) return high_retention ? Quadrant::StrongExploitation : Quadrant::SuboptimalRepetitive;
  return high_retention ? Quadrant::EffectiveExploration : Quadrant::Poor;
}

Json to_json(const RewardSignal& r) {
  Json j;
  j["total_watch_s"] = r.total_watch_s;
  j["clicks"] = r.clicks;
  j["likes"] = r.likes;
  j["shares"] = r.shares;
  j["comments"] = r.comments;
  j["items_consumed"] = r.items_consumed;
  j["turns"] = r.turns;
  j["session_span_s"] = r.session_span_s;
  j["composite"] = r.composite;
  return j;
}

Json to_json(const RewardWeights& w) {
  return Json{{"watch_s", w.watch_s}, {"click", w.click},     {"like", w.like},
              {"share", w.share},     {"comment", w.comment}, {"extra_turn", w.extra_turn}};
}

RewardWeights weights_from_json(const Json& j) {
  RewardWeights w;
  w.watch_s = j.value("watch_s", w.watch_s);
  w.click = j.value("click", w.click);
  w.like = j.value("like", w.like);
  w.share = j.value("share", w.share);
  w.comment = j.value("comment", w.comment);
  w.extra_turn = j.value("extra_turn", w.extra_turn);
  return w;
}

Json to_json(const JudgeVerdict& v) {
  Json j;
  j["pass"] = v.pass;
  Json per = Json::array();
  for (const auto& c : v.per_criterion) per.push_back({{"criterion", c.criterion}, {"pass", c.pass}, {"note", c.note}});
  j["per_criterion"] = per;
  return j;
}

}  // namespace recsim
