#include "recsim/types.hpp"

#include "recsim/text.hpp"

namespace recsim {

std::string_view to_string(ActionKind a) noexcept {
  switch (a) {
    case ActionKind::Click: return "Click";
    case ActionKind::Comment: return "Comment";
    case ActionKind::Share: return "Share";
    case ActionKind::Like: return "Like";
    case ActionKind::Watch: return "Watch";
    case ActionKind::Skip: return "Skip";
    case ActionKind::Leave: return "Leave";
  }
  return "?";
}

std::string_view to_string(ContentType c) noexcept {
  switch (c) {
    case ContentType::ShortVideo: return "ShortVideo";
    case ContentType::TextPost: return "TextPost";
    case ContentType::MixedMedia: return "MixedMedia";
    case ContentType::FriendSuggestion: return "FriendSuggestion";
  }
  return "?";
}

std::optional<ActionKind> parse_action(std::string_view s) {
  const std::string needle = to_lower(trim(s));
  for (ActionKind a : kAllActions) {
    if (to_lower(to_string(a)) == needle) return a;
  }
  return std::nullopt;
}

std::optional<ContentType> parse_content_type(std::string_view s) {
  const std::string needle = to_lower(trim(s));
  for (ContentType c : {ContentType::ShortVideo, ContentType::TextPost, ContentType::MixedMedia,
                        ContentType::FriendSuggestion}) {
    if (to_lower(to_string(c)) == needle) return c;
  }
  return std::nullopt;
}

}  // namespace recsim
