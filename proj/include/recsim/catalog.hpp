#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "recsim/types.hpp"

namespace recsim {

using Json = nlohmann::ordered_json;

struct Item {
  std::string item_id;
  std::string title;
  std::string description;
  std::string category;
  ContentType content_type = ContentType::ShortVideo;
  std::int64_t duration_s = 0;

  bool operator==(const Item&) const = default;
};

struct ItemMetadata {
  std::int64_t publish_ts = 0;
  std::string creator_id;
  std::int64_t likes = 0;
  std::int64_t shares = 0;
  std::int64_t comments = 0;
  std::vector<std::string> tags;

  bool operator==(const ItemMetadata&) const = default;
};

struct CatalogEntry {
  Item item;
  ItemMetadata metadata;

  bool operator==(const CatalogEntry&) const = default;
};

enum class DataFormat { Csv, Jsonl };

// Chooses the format from the file extension (.csv, .jsonl/.json).
DataFormat format_from_path(const std::filesystem::path& path);

/// Immutable-after-load collection of items. Entries keep insertion order; lookups
/// by id are O(1).
class Catalog {
 public:
  Catalog() = default;

  // Throws DuplicateIdError on a repeated id and Error on an invariant violation.
  explicit Catalog(std::vector<CatalogEntry> entries);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<CatalogEntry>& entries() const noexcept { return entries_; }

  bool contains(std::string_view id) const;
  const CatalogEntry* find(std::string_view id) const;
  // Throws UnknownItemError.
  const CatalogEntry& at(std::string_view id) const;

  // Sorted, distinct.
  std::vector<std::string> categories() const;
  // Union of the tags of all items in `category`.
  const std::set<std::string>& category_tags(const std::string& category) const;

  // New catalog with `extra` appended (used for injected content).
  Catalog with_items(const std::vector<CatalogEntry>& extra) const;

  bool operator==(const Catalog& other) const { return entries_ == other.entries_; }

 private:
  std::vector<CatalogEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::map<std::string, std::set<std::string>> tags_by_category_;
};

using CatalogPtr = std::shared_ptr<const Catalog>;

Catalog load_items(const std::filesystem::path& path, DataFormat format);
Catalog parse_items(std::string_view text, DataFormat format, const std::string& source = "<memory>");

void write_items_jsonl(const Catalog& catalog, std::ostream& out);
void write_items_csv(const Catalog& catalog, std::ostream& out);

Json to_json(const CatalogEntry& e);
// `row` is used for error messages only.
CatalogEntry entry_from_json(const Json& j, const std::string& source = "<json>", std::size_t row = 0);

struct InteractionRecord {
  std::string user_id;
  std::string item_id;
  ActionKind action = ActionKind::Click;
  std::optional<std::int64_t> watch_s;
  std::int64_t ts = 0;

  bool operator==(const InteractionRecord&) const = default;
};

// Sorted by (user_id, ts), stable for equal keys.
std::vector<InteractionRecord> load_interactions(const std::filesystem::path& path, DataFormat format);
std::vector<InteractionRecord> parse_interactions(std::string_view text, DataFormat format,
                                                  const std::string& source = "<memory>");
void write_interactions_csv(const std::vector<InteractionRecord>& records, std::ostream& out);

inline constexpr std::size_t kDefaultRecentCap = 50;

/// Statistical compression of a user's engagement history over a time window.
struct HistorySummary {
  int window_days = 7;
  std::map<std::string, std::int64_t> per_category_counts;
  std::map<ActionKind, std::int64_t> per_action_counts;
  // Newest first.
  std::vector<std::pair<std::string, ActionKind>> recent_items;
  std::size_t recent_cap = kDefaultRecentCap;

  std::int64_t total() const;
  bool empty() const { return total() == 0; }

  // Adds one interaction as the newest entry, evicting the oldest recent item past the cap.
  void record(const std::string& item_id, const std::string& category, ActionKind action);

  bool operator==(const HistorySummary&) const = default;
};

/// Counts the records with ts in [now_ts - window_days * 86400, now_ts].
/// Throws PreconditionError when window_days <= 0 and UnknownItemError for ids
/// missing from the catalog.
HistorySummary summarize_history(const std::vector<InteractionRecord>& records, const Catalog& catalog,
                                 int window_days, std::int64_t now_ts,
                                 std::size_t recent_cap = kDefaultRecentCap);

Json to_json(const HistorySummary& h);
HistorySummary summary_from_json(const Json& j);

}  // namespace recsim
