#include "recsim/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "recsim/csv.hpp"
#include "recsim/error.hpp"
#include "recsim/text.hpp"

namespace recsim {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::int64_t parse_int(std::string_view raw, const std::string& source, std::size_t row,
                       const std::string& field) {
  const auto s = trim(raw);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError(source, row, field, "expected an integer, got '" + std::string(raw) + "'");
  }
  return v;
}

std::int64_t non_negative(std::int64_t v, const std::string& source, std::size_t row,
                          const std::string& field) {
  if (v < 0) throw ParseError(source, row, field, "must be non-negative");
  return v;
}

// Applies the content_type/duration rules shared by both formats.
void finish_entry(CatalogEntry& e, const std::optional<std::string>& content_type,
                  const std::string& source, std::size_t row) {
  if (e.item.item_id.empty()) throw ParseError(source, row, "item_id", "must not be empty");
  if (e.item.category.empty()) throw ParseError(source, row, "category", "must not be empty");
  if (content_type && !trim(*content_type).empty()) {
    auto ct = parse_content_type(*content_type);
    if (!ct) throw ParseError(source, row, "content_type", "unknown content type '" + *content_type + "'");
    e.item.content_type = *ct;
  } else {
    e.item.content_type = e.item.duration_s > 0 ? ContentType::ShortVideo : ContentType::TextPost;
  }
  if (is_timed(e.item.content_type) != (e.item.duration_s > 0)) {
    throw ParseError(source, row, "duration_s",
                     "duration_s must be > 0 exactly for timed content (ShortVideo, MixedMedia)");
  }
}

std::vector<std::string> split_tags(std::string_view raw) {
  std::vector<std::string> tags;
  for (const auto& t : split(raw, '|')) {
    auto tt = trim(t);
    if (!tt.empty()) tags.emplace_back(tt);
  }
  return tags;
}

struct Header {
  std::map<std::string, std::size_t> index;

  std::optional<std::string> get(const csv::Row& row, const std::string& name) const {
    auto it = index.find(name);
    if (it == index.end() || it->second >= row.fields.size()) return std::nullopt;
    return row.fields[it->second];
  }
};

Header read_header(const std::vector<csv::Row>& rows, const std::string& source,
                   std::initializer_list<const char*> required) {
  if (rows.empty()) throw ParseError(source, 1, "", "missing header row");
  Header h;
  for (std::size_t i = 0; i < rows[0].fields.size(); ++i) {
    h.index.emplace(std::string(trim(rows[0].fields[i])), i);
  }
  for (const char* name : required) {
    if (!h.index.count(name)) throw ParseError(source, rows[0].line, name, "missing column");
  }
  return h;
}

std::vector<CatalogEntry> items_from_csv(std::string_view text, const std::string& source) {
  const auto rows = csv::parse(text);
  const Header h = read_header(rows, source, {"item_id", "category"});
  std::vector<CatalogEntry> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != rows[0].fields.size()) {
      throw ParseError(source, row.line, "", "expected " + std::to_string(rows[0].fields.size()) +
                                                 " fields, got " + std::to_string(row.fields.size()));
    }
    CatalogEntry e;
    auto str = [&](const char* name) { return std::string(trim(h.get(row, name).value_or(""))); };
    auto num = [&](const char* name) -> std::int64_t {
      auto v = h.get(row, name);
      if (!v || trim(*v).empty()) return 0;
      return non_negative(parse_int(*v, source, row.line, name), source, row.line, name);
    };
    e.item.item_id = str("item_id");
    e.item.title = str("title");
    e.item.description = str("description");
    e.item.category = str("category");
    e.item.duration_s = num("duration_s");
    e.metadata.publish_ts = num("publish_ts");
    e.metadata.creator_id = str("creator_id");
    e.metadata.likes = num("likes");
    e.metadata.shares = num("shares");
    e.metadata.comments = num("comments");
    e.metadata.tags = split_tags(str("tags"));
    finish_entry(e, h.get(row, "content_type"), source, row.line);
    out.push_back(std::move(e));
  }
  return out;
}

template <typename Fn>
void for_each_json_line(std::string_view text, const std::string& source, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const auto line = trim(text.substr(start, end - start));
    if (!line.empty()) {
      Json j;
      try {
        j = Json::parse(line);
      } catch (const nlohmann::json::parse_error& ex) {
        throw ParseError(source, line_no, "", std::string("invalid JSON: ") + ex.what());
      }
      if (!j.is_object()) throw ParseError(source, line_no, "", "expected a JSON object");
      fn(j, line_no);
    }
    start = end + 1;
  }
}

std::string json_string(const Json& j, const char* field, const std::string& source, std::size_t row,
                        bool required) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) {
    if (required) throw ParseError(source, row, field, "missing required field");
    return {};
  }
  if (!it->is_string()) throw ParseError(source, row, field, "expected a string");
  return it->get<std::string>();
}

std::optional<std::int64_t> json_int(const Json& j, const char* field, const std::string& source,
                                     std::size_t row) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (it->is_number_integer()) return it->get<std::int64_t>();
  if (it->is_number_float()) {
    const double d = it->get<double>();
    if (d == static_cast<double>(static_cast<std::int64_t>(d))) return static_cast<std::int64_t>(d);
  }
  if (it->is_string()) return parse_int(it->get<std::string>(), source, row, field);
  throw ParseError(source, row, field, "expected an integer");
}

}  // namespace

DataFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = to_lower(path.extension().string());
  if (ext == ".csv") return DataFormat::Csv;
  if (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") return DataFormat::Jsonl;
  throw Error("cannot infer data format from extension of '" + path.string() + "'");
}

Catalog::Catalog(std::vector<CatalogEntry> entries) : entries_(std::move(entries)) {
  index_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (!index_.emplace(e.item.item_id, i).second) throw DuplicateIdError(e.item.item_id);
    auto& tags = tags_by_category_[e.item.category];
    tags.insert(e.metadata.tags.begin(), e.metadata.tags.end());
  }
}

bool Catalog::contains(std::string_view id) const { return find(id) != nullptr; }

const CatalogEntry* Catalog::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

const CatalogEntry& Catalog::at(std::string_view id) const {
  const auto* e = find(id);
  if (!e) throw UnknownItemError(std::string(id));
  return *e;
}

std::vector<std::string> Catalog::categories() const {
  std::vector<std::string> out;
  out.reserve(tags_by_category_.size());
  for (const auto& [cat, _] : tags_by_category_) out.push_back(cat);
  return out;
}

const std::set<std::string>& Catalog::category_tags(const std::string& category) const {
  static const std::set<std::string> kEmpty;
  auto it = tags_by_category_.find(category);
  return it == tags_by_category_.end() ? kEmpty : it->second;
}

Catalog Catalog::with_items(const std::vector<CatalogEntry>& extra) const {
  auto all = entries_;
  all.insert(all.end(), extra.begin(), extra.end());
  return Catalog(std::move(all));
}

Json to_json(const CatalogEntry& e) {
  Json j;
  j["item_id"] = e.item.item_id;
  j["title"] = e.item.title;
  j["description"] = e.item.description;
  j["category"] = e.item.category;
  j["content_type"] = to_string(e.item.content_type);
  j["duration_s"] = e.item.duration_s;
  j["publish_ts"] = e.metadata.publish_ts;
  j["creator_id"] = e.metadata.creator_id;
  j["likes"] = e.metadata.likes;
  j["shares"] = e.metadata.shares;
  j["comments"] = e.metadata.comments;
  j["tags"] = e.metadata.tags;
  return j;
}

CatalogEntry entry_from_json(const Json& j, const std::string& source, std::size_t row) {
  CatalogEntry e;
  e.item.item_id = json_string(j, "item_id", source, row, true);
  e.item.category = json_string(j, "category", source, row, true);
  e.item.title = json_string(j, "title", source, row, false);
  e.item.description = json_string(j, "description", source, row, false);
  auto num = [&](const char* f) {
    return non_negative(json_int(j, f, source, row).value_or(0), source, row, f);
  };
  e.item.duration_s = num("duration_s");
  e.metadata.publish_ts = num("publish_ts");
  e.metadata.creator_id = json_string(j, "creator_id", source, row, false);
  e.metadata.likes = num("likes");
  e.metadata.shares = num("shares");
  e.metadata.comments = num("comments");
  if (auto it = j.find("tags"); it != j.end() && !it->is_null()) {
    if (it->is_string()) {
      e.metadata.tags = split_tags(it->get<std::string>());
    } else if (it->is_array()) {
      for (const auto& t : *it) {
        if (!t.is_string()) throw ParseError(source, row, "tags", "expected an array of strings");
        e.metadata.tags.push_back(t.get<std::string>());
      }
    } else {
      throw ParseError(source, row, "tags", "expected an array of strings");
    }
  }
  std::optional<std::string> ct;
  if (j.contains("content_type") && !j["content_type"].is_null()) {
    ct = json_string(j, "content_type", source, row, false);
  }
  finish_entry(e, ct, source, row);
  return e;
}

Catalog parse_items(std::string_view text, DataFormat format, const std::string& source) {
  std::vector<CatalogEntry> entries;
  if (format == DataFormat::Csv) {
    entries = items_from_csv(text, source);
  } else {
    for_each_json_line(text, source, [&](const Json& j, std::size_t row) {
      entries.push_back(entry_from_json(j, source, row));
    });
  }
  return Catalog(std::move(entries));
}

Catalog load_items(const std::filesystem::path& path, DataFormat format) {
  return parse_items(read_file(path), format, path.string());
}

void write_items_jsonl(const Catalog& catalog, std::ostream& out) {
  for (const auto& e : catalog.entries()) out << to_json(e).dump() << '\n';
}

void write_items_csv(const Catalog& catalog, std::ostream& out) {
  out << "item_id,title,description,category,content_type,duration_s,publish_ts,creator_id,likes,"
         "shares,comments,tags\n";
  for (const auto& e : catalog.entries()) {
    out << csv::format_row({e.item.item_id, e.item.title, e.item.description, e.item.category,
                            std::string(to_string(e.item.content_type)), std::to_string(e.item.duration_s),
                            std::to_string(e.metadata.publish_ts), e.metadata.creator_id,
                            std::to_string(e.metadata.likes), std::to_string(e.metadata.shares),
                            std::to_string(e.metadata.comments), join(e.metadata.tags, "|")})
        << '\n';
  }
}

namespace {

InteractionRecord make_record(std::string user_id, std::string item_id, std::string_view action_raw,
                              std::optional<std::int64_t> watch_s, std::int64_t ts,
                              const std::string& source, std::size_t row) {
  if (user_id.empty()) throw ParseError(source, row, "user_id", "must not be empty");
  if (item_id.empty()) throw ParseError(source, row, "item_id", "must not be empty");
  auto action = parse_action(action_raw);
  if (!action) {
    throw ParseError(source, row, "action", "unknown action '" + std::string(action_raw) + "'");
  }
  if (*action == ActionKind::Watch && !watch_s) {
    throw ParseError(source, row, "watch_s", "required for Watch rows");
  }
  if (*action != ActionKind::Watch && watch_s) {
    throw ParseError(source, row, "watch_s", "only allowed on Watch rows");
  }
  if (watch_s && *watch_s < 0) throw ParseError(source, row, "watch_s", "must be non-negative");
  if (ts < 0) throw ParseError(source, row, "ts", "must be non-negative");
  return {std::move(user_id), std::move(item_id), *action, watch_s, ts};
}

}  // namespace

std::vector<InteractionRecord> parse_interactions(std::string_view text, DataFormat format,
                                                  const std::string& source) {
  std::vector<InteractionRecord> out;
  if (format == DataFormat::Csv) {
    const auto rows = csv::parse(text);
    const Header h = read_header(rows, source, {"user_id", "item_id", "action", "ts"});
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      auto str = [&](const char* name) { return std::string(trim(h.get(row, name).value_or(""))); };
      std::optional<std::int64_t> watch;
      if (auto w = str("watch_s"); !w.empty()) watch = parse_int(w, source, row.line, "watch_s");
      const auto ts_raw = str("ts");
      if (ts_raw.empty()) throw ParseError(source, row.line, "ts", "missing required field");
      out.push_back(make_record(str("user_id"), str("item_id"), str("action"), watch,
                                parse_int(ts_raw, source, row.line, "ts"), source, row.line));
    }
  } else {
    for_each_json_line(text, source, [&](const Json& j, std::size_t row) {
      auto ts = json_int(j, "ts", source, row);
      if (!ts) throw ParseError(source, row, "ts", "missing required field");
      out.push_back(make_record(json_string(j, "user_id", source, row, true),
                                json_string(j, "item_id", source, row, true),
                                json_string(j, "action", source, row, true),
                                json_int(j, "watch_s", source, row), *ts, source, row));
    });
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.user_id, a.ts) < std::tie(b.user_id, b.ts);
  });
  return out;
}

std::vector<InteractionRecord> load_interactions(const std::filesystem::path& path, DataFormat format) {
  return parse_interactions(read_file(path), format, path.string());
}

void write_interactions_csv(const std::vector<InteractionRecord>& records, std::ostream& out) {
  out << "user_id,item_id,action,watch_s,ts\n";
  for (const auto& r : records) {
    out << csv::format_row({r.user_id, r.item_id, std::string(to_string(r.action)),
                            r.watch_s ? std::to_string(*r.watch_s) : std::string(), std::to_string(r.ts)})
        << '\n';
  }
}

std::int64_t HistorySummary::total() const {
  std::int64_t n = 0;
  for (const auto& [_, c] : per_category_counts) n += c;
  return n;
}

void HistorySummary::record(const std::string& item_id, const std::string& category, ActionKind action) {
  ++per_category_counts[category];
  ++per_action_counts[action];
  recent_items.insert(recent_items.begin(), {item_id, action});
  if (recent_items.size() > recent_cap) recent_items.resize(recent_cap);
}

HistorySummary summarize_history(const std::vector<InteractionRecord>& records, const Catalog& catalog,
                                 int window_days, std::int64_t now_ts, std::size_t recent_cap) {
  if (window_days <= 0) throw PreconditionError("window_days must be positive");
  HistorySummary out;
  out.window_days = window_days;
  out.recent_cap = recent_cap;
  const std::int64_t from = now_ts - static_cast<std::int64_t>(window_days) * 86400;

  std::vector<const InteractionRecord*> in_window;
  for (const auto& r : records) {
    const auto& entry = catalog.at(r.item_id);
    if (r.ts < from || r.ts > now_ts) continue;
    ++out.per_category_counts[entry.item.category];
    ++out.per_action_counts[r.action];
    in_window.push_back(&r);
  }
  // Newest first; equal timestamps keep the later record first.
  std::stable_sort(in_window.begin(), in_window.end(),
                   [](const auto* a, const auto* b) { return a->ts > b->ts; });
  for (auto it = in_window.begin(); it != in_window.end() && out.recent_items.size() < recent_cap; ++it) {
    out.recent_items.emplace_back((*it)->item_id, (*it)->action);
  }
  return out;
}

Json to_json(const HistorySummary& h) {
  Json j;
  j["window_days"] = h.window_days;
  Json cats = Json::object();
  for (const auto& [c, n] : h.per_category_counts) cats[c] = n;
  j["per_category_counts"] = cats;
  Json acts = Json::object();
  for (const auto& [a, n] : h.per_action_counts) acts[std::string(to_string(a))] = n;
  j["per_action_counts"] = acts;
  Json recent = Json::array();
  for (const auto& [id, a] : h.recent_items) recent.push_back(Json::array({id, to_string(a)}));
  j["recent_items"] = recent;
  j["recent_cap"] = h.recent_cap;
  return j;
}

HistorySummary summary_from_json(const Json& j) {
  HistorySummary h;
  h.window_days = j.value("window_days", 7);
  h.recent_cap = j.value("recent_cap", kDefaultRecentCap);
  if (j.contains("per_category_counts")) {
    for (const auto& [c, n] : j["per_category_counts"].items()) h.per_category_counts[c] = n.get<std::int64_t>();
  }
  if (j.contains("per_action_counts")) {
    for (const auto& [a, n] : j["per_action_counts"].items()) {
      auto kind = parse_action(a);
      if (!kind) throw Error("unknown action '" + a + "' in history summary");
      h.per_action_counts[*kind] = n.get<std::int64_t>();
    }
  }
  if (j.contains("recent_items")) {
    for (const auto& r : j["recent_items"]) {
      auto kind = parse_action(r.at(1).get<std::string>());
      if (!kind) throw Error("unknown action in history summary recent_items");
      h.recent_items.emplace_back(r.at(0).get<std::string>(), *kind);
    }
  }
  return h;
}

}  // namespace recsim
