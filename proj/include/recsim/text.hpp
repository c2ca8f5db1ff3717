#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace recsim {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Lowercase alphanumeric word tokens; every other character is a separator.
std::vector<std::string> word_tokens(std::string_view s);

// Loose stem match for category mentions ("political" ~ "politics").
bool stem_match(std::string_view a, std::string_view b);

// Truncates to at most `max_chars`, keeping the tail (most recent text).
std::string keep_tail(std::string_view s, std::size_t max_chars);

}  // namespace recsim
