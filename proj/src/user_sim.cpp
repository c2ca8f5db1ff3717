#include "recsim/user_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "recsim/error.hpp"
#include "recsim/random.hpp"
#include "recsim/text.hpp"

namespace recsim {

namespace {

constexpr std::array<std::string_view, 4> kTimeNames = {"Morning", "Afternoon", "Evening", "Night"};
constexpr std::array<std::string_view, 7> kDayNames = {"Monday", "Tuesday",  "Wednesday", "Thursday",
                                                       "Friday", "Saturday", "Sunday"};

double round6(double v) { return std::round(v * 1e6) / 1e6; }

}  // namespace

std::string_view to_string(TimeOfDay t) noexcept { return kTimeNames[static_cast<std::size_t>(t)]; }
std::string_view to_string(DayOfWeek d) noexcept { return kDayNames[static_cast<std::size_t>(d)]; }

std::optional<TimeOfDay> parse_time_of_day(std::string_view s) {
  const auto needle = to_lower(trim(s));
  for (std::size_t i = 0; i < kTimeNames.size(); ++i) {
    if (to_lower(kTimeNames[i]) == needle) return static_cast<TimeOfDay>(i);
  }
  return std::nullopt;
}

std::optional<DayOfWeek> parse_day_of_week(std::string_view s) {
  const auto needle = to_lower(trim(s));
  for (std::size_t i = 0; i < kDayNames.size(); ++i) {
    if (to_lower(kDayNames[i]) == needle) return static_cast<DayOfWeek>(i);
  }
  return std::nullopt;
}

std::string_view to_string(InstructionSource s) noexcept {
  return s == InstructionSource::Explicit ? "Explicit" : "Implicit";
}

double UserProfile::affinity(const std::string& category) const {
  for (const auto& i : interests) {
    if (i.category == category) return i.affinity;
  }
  return 0.0;
}

void validate(const UserProfile& profile) {
  if (profile.user_id.empty()) throw Error("profile has an empty user_id");
  for (const auto& i : profile.interests) {
    if (!(i.affinity >= 0.0 && i.affinity <= 1.0)) {
      throw Error("profile '" + profile.user_id + "': affinity for '" + i.category + "' outside [0,1]");
    }
  }
}

std::int64_t UserState::max_fatigue() const {
  std::int64_t m = 0;
  for (const auto& [_, f] : fatigue) m = std::max(m, f);
  return m;
}

void validate(const ActionDecision& d, const Item& item) {
  if (d.reasoning.empty()) throw Error("decision reasoning is empty");
  if (d.action == ActionKind::Watch) {
    if (!d.watch_s) throw Error("Watch decision without watch seconds");
    if (*d.watch_s < 1 || *d.watch_s > item.duration_s) {
      throw Error("watch seconds " + std::to_string(*d.watch_s) + " outside [1, " +
                  std::to_string(item.duration_s) + "] for item '" + item.item_id + "'");
    }
  } else if (d.watch_s) {
    throw Error("watch seconds present on a " + std::string(to_string(d.action)) + " decision");
  }
}

UserState initial_state(const SimulatorParams& params, HistorySummary summary) {
  UserState s;
  s.satisfaction = params.initial_satisfaction;
  s.summary = std::move(summary);
  return s;
}

UserState begin_session(const UserState& carried, const SimulatorParams& params) {
  UserState s = carried;
  s.fatigue.clear();
  s.exposures.clear();
  s.items_seen_this_session = 0;
  s.satisfaction = round6(0.5 * (carried.satisfaction + params.initial_satisfaction));
  return s;
}

double effective_affinity(const UserProfile& profile, const UserState& state, const std::string& category,
                          const SimulatorParams& params) {
  double a = profile.affinity(category);
  if (params.repetition_decay != 1.0) {
    auto it = state.exposures.find(category);
    if (it != state.exposures.end()) a *= std::pow(params.repetition_decay, static_cast<double>(it->second));
  }
  return a;
}

UserState advance_state(const UserProfile& profile, const UserState& state, const Item& item,
                        const ActionDecision& decision, const SimulatorParams& params) {
  UserState next = state;
  const double affinity = effective_affinity(profile, state, item.category, params);
  switch (decision.action) {
    case ActionKind::Skip:
      ++next.fatigue[item.category];
      next.satisfaction -= params.skip_penalty;
      break;
    case ActionKind::Watch:
    case ActionKind::Like:
      next.fatigue[item.category] = 0;
      next.satisfaction += params.satisfaction_gain * affinity;
      break;
    case ActionKind::Leave:
      next.satisfaction -= params.leave_penalty;
      break;
    default:
      break;
  }
  next.satisfaction = std::clamp(round6(next.satisfaction), 0.0, 1.0);
  ++next.exposures[item.category];
  ++next.items_seen_this_session;
  if (!decision.mindset_update.empty()) {
    std::string m = next.mindset;
    if (!m.empty()) m += ' ';
    m += decision.mindset_update;
    next.mindset = keep_tail(m, params.mindset_max_chars);
  }
  next.summary.record(item.item_id, item.category, decision.action);
  return next;
}

// ---------------------------------------------------------------------------
// Scripted persona

ScriptedSimulator::ScriptedSimulator(UserProfile profile, SimulatorParams params, std::uint64_t seed)
    : profile_(std::move(profile)), params_(params), seed_(seed) {}

ActionDecision ScriptedSimulator::decide_action(const UserProfile& profile, const UserState& state, const Item& item,
                                                const ItemMetadata&) {
  const double a = effective_affinity(profile, state, item.category, params_);
  const auto label = "'" + item.title + "' (" + item.category + ")";
  ActionDecision d;

  if (a < params_.click_affinity) {
    const std::int64_t peak = state.max_fatigue();
    if (peak >= params_.fatigue_threshold || state.satisfaction < params_.leave_satisfaction) {
      d.action = ActionKind::Leave;
      d.reasoning = peak >= params_.fatigue_threshold
                        ? "Another uninteresting item after too many similar ones; time to leave."
                        : "Nothing here has been engaging; satisfaction is low, leaving.";
      d.mindset_update = "Left the session at " + label + ".";
      return d;
    }
    d.action = ActionKind::Skip;
    const auto it = state.fatigue.find(item.category);
    if (it != state.fatigue.end() && it->second > 0) {
      d.reasoning = "Not interested, expected fewer recommendations about " + item.category + ".";
      d.mindset_update = "Seeing " + item.category + " again is getting repetitive.";
    } else {
      d.reasoning = "Not interested in " + item.category + ".";
      d.mindset_update = "Skipped " + label + ".";
    }
    return d;
  }

  if (a >= params_.watch_affinity) {
    if (params_.share_probability > 0.0) {
      const auto draw = derive_seed(seed_, stable_hash(item.item_id) ^
                                               static_cast<std::uint64_t>(state.items_seen_this_session));
      if (to_unit(draw) < params_.share_probability) {
        d.action = ActionKind::Share;
        d.reasoning = label + " strongly matches their interests; worth sharing with friends.";
        d.mindset_update = "Shared " + label + ".";
        return d;
      }
    }
    if (is_timed(item.content_type)) {
      d.action = ActionKind::Watch;
      d.watch_s = std::min<std::int64_t>(item.duration_s, std::lround(20.0 + 10.0 * a));
      d.reasoning = label + " matches their interest in " + item.category + ", so they watch it.";
      d.mindset_update = "Enjoyed " + label + ", watched " + std::to_string(*d.watch_s) + "s.";
    } else {
      d.action = ActionKind::Like;
      d.reasoning = label + " matches their interest in " + item.category + ".";
      d.mindset_update = "Liked " + label + ".";
    }
    return d;
  }

  d.action = ActionKind::Click;
  d.reasoning = "Somewhat curious about " + item.category + ".";
  d.mindset_update = "Opened " + label + ".";
  return d;
}

UserState ScriptedSimulator::update_mindset(const UserState& state, const Item& item, const ActionDecision& decision) {
  return advance_state(profile_, state, item, decision, params_);
}

std::optional<Instruction> ScriptedSimulator::reflect_and_instruct(const UserProfile&, const UserState& state,
                                                                   const std::vector<ItemDecision>& so_far) {
  if (state.satisfaction < params_.instruction_floor) return std::nullopt;
  Instruction ins;
  ins.source = InstructionSource::Explicit;
  ins.issued_after_item = so_far.empty() ? std::string() : so_far.back().item_id;

  // Most fatigued category; ties go to the alphabetically first (map order).
  std::string worst;
  std::int64_t peak = 0;
  for (const auto& [cat, f] : state.fatigue) {
    if (f > peak) {
      peak = f;
      worst = cat;
    }
  }
  if (peak == 0) {
    ins.text = "Show me more interesting content";
  } else {
    ins.text = "There are too many recommendations about " + worst +
               "; I wanna see something different but related";
  }
  return ins;
}

// ---------------------------------------------------------------------------
// Prompt construction

namespace {

std::string describe_demographics(const UserProfile& p) {
  std::ostringstream s;
  s << "You are role-playing a user of a short-video and social feed app. You are a " << p.age << "-year-old "
    << (p.gender.empty() ? std::string("person") : p.gender);
  if (!p.location.empty()) s << " living in " << p.location;
  s << ".";
  if (!p.interests.empty()) {
    s << " Interests:";
    for (std::size_t i = 0; i < p.interests.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", p.interests[i].affinity);
      s << (i ? ", " : " ") << p.interests[i].category << " (affinity " << buf << ")";
    }
    s << ".";
  }
  if (!p.social_groups.empty()) s << " Social groups: " << join(p.social_groups, ", ") << ".";
  s << " Context: " << to_string(p.context.time_of_day) << ", " << to_string(p.context.day_of_week) << ", on a "
    << p.context.device << ".";
  return s.str();
}

std::string describe_history(const HistorySummary& h, std::size_t recent_to_show) {
  std::ostringstream s;
  if (h.empty()) {
    s << "History: no prior interactions.";
    return s.str();
  }
  s << "History (past " << h.window_days << " days, " << h.total() << " interactions):";
  for (const auto& [cat, n] : h.per_category_counts) s << " " << cat << "=" << n << ";";
  s << " Actions:";
  for (const auto& [a, n] : h.per_action_counts) s << " " << to_string(a) << "=" << n << ";";
  const std::size_t shown = std::min(recent_to_show, h.recent_items.size());
  if (shown > 0) {
    s << " Most recent first:";
    for (std::size_t i = 0; i < shown; ++i) {
      s << (i ? ", " : " ") << h.recent_items[i].first << ":" << to_string(h.recent_items[i].second);
    }
    s << ".";
  }
  return s.str();
}

std::string describe_item(const Item& item, const ItemMetadata& m) {
  std::ostringstream s;
  s << "Item: '" << item.title << "' [" << to_string(item.content_type) << ", category: " << item.category;
  if (is_timed(item.content_type)) s << ", " << item.duration_s << " seconds";
  s << "]";
  if (!item.description.empty()) s << " " << item.description;
  s << " (creator " << (m.creator_id.empty() ? std::string("unknown") : m.creator_id) << ", " << m.likes
    << " likes, " << m.shares << " shares, " << m.comments << " comments";
  if (!m.tags.empty()) s << ", tags: " << join(m.tags, ", ");
  s << ")";
  return s.str();
}

}  // namespace

PromptBundle build_prompt(const UserProfile& profile, const UserState& state, const Item& item,
                          const ItemMetadata& metadata, const SimulatorParams& params) {
  PromptBundle b;
  b.system = describe_demographics(profile);
  const std::string mindset =
      "Current mindset: " + (state.mindset.empty() ? std::string("just opened the app.") : state.mindset);
  const std::string item_text = describe_item(item, metadata);

  std::size_t recent = state.summary.recent_items.size();
  while (true) {
    b.user = describe_history(state.summary, recent) + "\n" + mindset + "\n" + item_text;
    if (b.size() <= params.prompt_budget_chars) return b;
    if (recent == 0) break;
    --recent;
  }
  throw PreconditionError("prompt of " + std::to_string(b.size()) + " chars exceeds the budget of " +
                          std::to_string(params.prompt_budget_chars) + " even without recent items");
}

// ---------------------------------------------------------------------------
// Model output parsing

namespace {

// Splits "LABEL: value" blocks. Values may continue over several lines until the
// next known label. Markdown emphasis around labels is tolerated.
std::map<std::string, std::string> labeled_fields(const std::string& raw, std::initializer_list<const char*> labels) {
  std::map<std::string, std::string> out;
  std::string current;
  for (const auto& line_raw : split(raw, '\n')) {
    std::string line(trim(line_raw));
    std::string stripped;
    for (char c : line) {
      if (c != '*' && c != '#') stripped.push_back(c);
    }
    stripped = std::string(trim(stripped));
    bool matched = false;
    for (const char* label : labels) {
      const std::string l = label;
      if (stripped.size() > l.size() && to_lower(stripped.substr(0, l.size())) == to_lower(l) &&
          stripped[l.size()] == ':') {
        current = l;
        out[current] = std::string(trim(std::string_view(stripped).substr(l.size() + 1)));
        matched = true;
        break;
      }
      if (to_lower(stripped) == to_lower(l) + ":") {
        current = l;
        out[current] = "";
        matched = true;
        break;
      }
    }
    if (!matched && !current.empty() && !line.empty()) {
      auto& v = out[current];
      if (!v.empty()) v += ' ';
      v += line;
    }
  }
  return out;
}

}  // namespace

ActionDecision parse_simulator_output(const std::string& raw, const Item& item) {
  const auto f = labeled_fields(raw, {"REASONING", "ACTION", "WATCH_SECONDS", "MINDSET"});
  auto fail = [&](const std::string& why) -> SimulatorOutputError {
    return SimulatorOutputError("unparseable simulator output: " + why, raw);
  };
  auto it = f.find("ACTION");
  if (it == f.end() || it->second.empty()) throw fail("missing ACTION");
  const auto words = word_tokens(it->second);
  if (words.empty()) throw fail("empty ACTION");
  const auto action = parse_action(words.front());
  if (!action) throw fail("unknown action '" + it->second + "'");

  ActionDecision d;
  d.action = *action;
  if (auto r = f.find("REASONING"); r != f.end()) d.reasoning = r->second;
  if (auto m = f.find("MINDSET"); m != f.end()) d.mindset_update = m->second;
  if (d.reasoning.empty()) throw fail("missing REASONING");

  std::optional<std::int64_t> seconds;
  if (auto w = f.find("WATCH_SECONDS"); w != f.end()) {
    const auto v = to_lower(trim(w->second));
    if (!v.empty() && v != "n/a" && v != "na" && v != "none" && v != "null" && v != "-") {
      std::size_t pos = 0;
      try {
        seconds = std::stoll(std::string(v), &pos);
      } catch (const std::exception&) {
        throw fail("WATCH_SECONDS is not an integer: '" + w->second + "'");
      }
    }
  }
  if (d.action == ActionKind::Watch) {
    if (!seconds) throw fail("Watch without WATCH_SECONDS");
    d.watch_s = seconds;
  } else if (seconds && *seconds != 0) {
    throw fail("WATCH_SECONDS given for " + std::string(to_string(d.action)));
  }
  try {
    validate(d, item);
  } catch (const Error& e) {
    throw fail(e.what());
  }
  return d;
}

std::optional<std::string> parse_reflection_output(const std::string& raw) {
  const auto f = labeled_fields(raw, {"REASONING", "INSTRUCTION"});
  auto it = f.find("INSTRUCTION");
  if (it == f.end()) throw SimulatorOutputError("unparseable reflection output: missing INSTRUCTION", raw);
  std::string text(trim(it->second));
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') text = text.substr(1, text.size() - 2);
  const auto lowered = to_lower(text);
  if (lowered.empty() || lowered == "none" || lowered == "none." || lowered == "exit") return std::nullopt;
  return text;
}

// ---------------------------------------------------------------------------
// LLM-backed simulator

namespace {

constexpr const char* kDecisionFormat =
    "\n\nFor the item shown, think it through, take one action, then update your mindset. Actions: Click, "
    "Comment, Share, Like, Watch (give the duration in seconds), Skip, Leave (end the session). "
    "Answer with exactly these labeled lines:\n"
    "REASONING: <why>\nACTION: <one action>\nWATCH_SECONDS: <integer seconds if Watch, otherwise N/A>\n"
    "MINDSET: <how this affects your current thinking>";

constexpr const char* kReflectFormat =
    "\n\nYou decided to leave. Reflect on the session, identify reasons for dissatisfaction, and either give "
    "a short instruction to the recommender or exit. Answer with exactly these labeled lines:\n"
    "REASONING: <why>\nINSTRUCTION: <short instruction, or NONE to exit>";

}  // namespace

LlmSimulator::LlmSimulator(UserProfile profile, SimulatorParams params, std::shared_ptr<ChatClient> client,
                           LlmSimulatorOptions options, std::uint64_t seed)
    : profile_(std::move(profile)), params_(params), client_(std::move(client)), options_(options), seed_(seed) {
  if (!client_) throw ConfigError("simulator.llm", "no chat client configured");
}

ActionDecision LlmSimulator::decide_action(const UserProfile& profile, const UserState& state, const Item& item,
                                           const ItemMetadata& metadata) {
  const auto prompt = build_prompt(profile, state, item, metadata, params_);
  ChatRequest req;
  req.temperature = options_.temperature;
  req.seed = derive_seed(seed_, static_cast<std::uint64_t>(state.items_seen_this_session));
  req.messages = {{"system", prompt.system + kDecisionFormat}, {"user", prompt.user}};
  std::string raw;
  for (int attempt = 0;; ++attempt) {
    raw = client_->complete(req);
    try {
      return parse_simulator_output(raw, item);
    } catch (const SimulatorOutputError& e) {
      if (attempt >= options_.max_retries) throw;
      req.messages.push_back({"assistant", raw});
      req.messages.push_back({"user", std::string("That answer could not be used (") + e.what() +
                                          "). Answer again using exactly the labeled lines."});
    }
  }
}

UserState LlmSimulator::update_mindset(const UserState& state, const Item& item, const ActionDecision& decision) {
  return advance_state(profile_, state, item, decision, params_);
}

std::optional<Instruction> LlmSimulator::reflect_and_instruct(const UserProfile& profile, const UserState& state,
                                                              const std::vector<ItemDecision>& so_far) {
  std::ostringstream session;
  session << "Current mindset: " << (state.mindset.empty() ? "neutral" : state.mindset) << "\nThis session:";
  for (const auto& d : so_far) {
    session << "\n- " << d.item_id << ": " << to_string(d.decision.action);
    if (d.decision.watch_s) session << " " << *d.decision.watch_s << "s";
    session << " (" << d.decision.reasoning << ")";
  }
  ChatRequest req;
  req.temperature = options_.temperature;
  req.seed = derive_seed(seed_, 0xfeedULL + static_cast<std::uint64_t>(state.items_seen_this_session));
  PromptBundle base;
  base.system = describe_demographics(profile);
  req.messages = {{"system", base.system + kReflectFormat}, {"user", session.str()}};
  for (int attempt = 0;; ++attempt) {
    const auto raw = client_->complete(req);
    try {
      auto text = parse_reflection_output(raw);
      if (!text) return std::nullopt;
      return Instruction{*text, InstructionSource::Explicit, so_far.empty() ? std::string() : so_far.back().item_id};
    } catch (const SimulatorOutputError& e) {
      if (attempt >= options_.max_retries) throw;
      req.messages.push_back({"assistant", raw});
      req.messages.push_back({"user", std::string("That answer could not be used (") + e.what() +
                                          "). Answer again using exactly the labeled lines."});
    }
  }
}

// ---------------------------------------------------------------------------
// Implicit signals

std::optional<Instruction> infer_implicit_signal(const std::vector<ItemDecision>& records, const Catalog& catalog,
                                                 const SimulatorParams& params) {
  if (records.empty()) throw PreconditionError("infer_implicit_signal needs at least one record");

  int completed_long = 0;
  for (const auto& r : records) {
    const auto& item = catalog.at(r.item_id).item;
    if (r.decision.action == ActionKind::Watch && item.duration_s > params.long_form_s && r.decision.watch_s &&
        *r.decision.watch_s >= item.duration_s) {
      ++completed_long;
    }
  }
  if (completed_long >= params.long_watch_k) {
    return Instruction{"Receptive to long-form content: keeps finishing videos longer than " +
                           std::to_string(params.long_form_s / 60) + " minutes",
                       InstructionSource::Implicit, records.back().item_id};
  }

  int streak = 0;
  for (auto it = records.rbegin(); it != records.rend() && it->decision.action == ActionKind::Skip; ++it) ++streak;
  if (streak >= params.skip_streak_k) {
    return Instruction{"Previous recommendations failed to engage; show something different",
                       InstructionSource::Implicit, records.back().item_id};
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// JSON

Json to_json(const UserProfile& p) {
  Json j;
  j["user_id"] = p.user_id;
  j["age"] = p.age;
  j["gender"] = p.gender;
  j["location"] = p.location;
  Json interests = Json::array();
  for (const auto& i : p.interests) interests.push_back({{"category", i.category}, {"affinity", i.affinity}});
  j["interests"] = interests;
  j["social_groups"] = p.social_groups;
  j["context"] = {{"time_of_day", to_string(p.context.time_of_day)},
                  {"day_of_week", to_string(p.context.day_of_week)},
                  {"device", p.context.device}};
  return j;
}

UserProfile profile_from_json(const Json& j) {
  UserProfile p;
  p.user_id = j.at("user_id").get<std::string>();
  p.age = j.value("age", 30);
  p.gender = j.value("gender", std::string());
  p.location = j.value("location", std::string());
  if (j.contains("interests")) {
    const auto& in = j["interests"];
    if (in.is_object()) {
      for (const auto& [cat, a] : in.items()) p.interests.push_back({cat, a.get<double>()});
    } else {
      for (const auto& i : in) p.interests.push_back({i.at("category").get<std::string>(), i.at("affinity").get<double>()});
    }
  }
  if (j.contains("social_groups")) p.social_groups = j["social_groups"].get<std::vector<std::string>>();
  if (j.contains("context")) {
    const auto& c = j["context"];
    if (c.contains("time_of_day")) {
      auto t = parse_time_of_day(c["time_of_day"].get<std::string>());
      if (!t) throw Error("unknown time_of_day in profile '" + p.user_id + "'");
      p.context.time_of_day = *t;
    }
    if (c.contains("day_of_week")) {
      auto d = parse_day_of_week(c["day_of_week"].get<std::string>());
      if (!d) throw Error("unknown day_of_week in profile '" + p.user_id + "'");
      p.context.day_of_week = *d;
    }
    p.context.device = c.value("device", p.context.device);
  }
  validate(p);
  return p;
}

Json to_json(const UserState& s) {
  Json j;
  j["mindset"] = s.mindset;
  j["fatigue"] = Json::object();
  for (const auto& [c, f] : s.fatigue) j["fatigue"][c] = f;
  j["satisfaction"] = s.satisfaction;
  j["items_seen_this_session"] = s.items_seen_this_session;
  j["exposures"] = Json::object();
  for (const auto& [c, n] : s.exposures) j["exposures"][c] = n;
  j["summary"] = to_json(s.summary);
  return j;
}

UserState state_from_json(const Json& j) {
  UserState s;
  s.mindset = j.value("mindset", std::string());
  if (j.contains("fatigue")) {
    for (const auto& [c, f] : j["fatigue"].items()) s.fatigue[c] = f.get<std::int64_t>();
  }
  s.satisfaction = j.value("satisfaction", 0.5);
  s.items_seen_this_session = j.value("items_seen_this_session", std::int64_t{0});
  if (j.contains("exposures")) {
    for (const auto& [c, n] : j["exposures"].items()) s.exposures[c] = n.get<std::int64_t>();
  }
  if (j.contains("summary")) s.summary = summary_from_json(j["summary"]);
  return s;
}

Json to_json(const ActionDecision& d) {
  Json j;
  j["action"] = to_string(d.action);
  j["watch_s"] = d.watch_s ? Json(*d.watch_s) : Json(nullptr);
  j["reasoning"] = d.reasoning;
  j["mindset_update"] = d.mindset_update;
  return j;
}

ActionDecision decision_from_json(const Json& j) {
  ActionDecision d;
  const auto name = j.at("action").get<std::string>();
  auto a = parse_action(name);
  if (!a) throw Error("unknown action '" + name + "'");
  d.action = *a;
  if (j.contains("watch_s") && !j["watch_s"].is_null()) d.watch_s = j["watch_s"].get<std::int64_t>();
  d.reasoning = j.value("reasoning", std::string());
  d.mindset_update = j.value("mindset_update", std::string());
  return d;
}

Json to_json(const Instruction& i) {
  return Json{{"text", i.text}, {"source", to_string(i.source)}, {"issued_after_item", i.issued_after_item}};
}

Instruction instruction_from_json(const Json& j) {
  Instruction i;
  i.text = j.at("text").get<std::string>();
  i.source = j.value("source", std::string("Explicit")) == "Implicit" ? InstructionSource::Implicit
                                                                      : InstructionSource::Explicit;
  i.issued_after_item = j.value("issued_after_item", std::string());
  return i;
}

std::vector<UserProfile> load_profiles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::vector<UserProfile> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(profile_from_json(Json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), n, "", e.what());
    }
  }
  return out;
}

}  // namespace recsim
