#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace recsim {

/// The per-item action space of a simulated user.
enum class ActionKind { Click, Comment, Share, Like, Watch, Skip, Leave };

inline constexpr std::array<ActionKind, 7> kAllActions = {
    ActionKind::Click, ActionKind::Comment, ActionKind::Share, ActionKind::Like,
    ActionKind::Watch, ActionKind::Skip,    ActionKind::Leave};

enum class ContentType { ShortVideo, TextPost, MixedMedia, FriendSuggestion };

std::string_view to_string(ActionKind a) noexcept;
std::string_view to_string(ContentType c) noexcept;

// Case-insensitive; nullopt for anything outside the closed set.
std::optional<ActionKind> parse_action(std::string_view s);
std::optional<ContentType> parse_content_type(std::string_view s);

/// Timed content can be watched for a number of seconds.
constexpr bool is_timed(ContentType c) noexcept {
  return c == ContentType::ShortVideo || c == ContentType::MixedMedia;
}

/// Engagement that counts as "consuming" the item (everything but Skip and Leave).
constexpr bool is_engagement(ActionKind a) noexcept {
  return a != ActionKind::Skip && a != ActionKind::Leave;
}

}  // namespace recsim
