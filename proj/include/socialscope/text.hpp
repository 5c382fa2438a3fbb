#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace socialscope::text {

/// Lower-cases ASCII letters and the precomposed Latin-1 capitals (U+00C0..U+00DE),
/// which covers German umlauts. Other code points pass through unchanged.
std::string casefold(std::string_view s);

/// True for bytes that may appear inside a word: ASCII alphanumerics, '_' and
/// any byte of a multi-byte UTF-8 sequence.
bool is_word_byte(unsigned char c);

bool starts_with_ci(std::string_view s, std::string_view prefix);
bool contains_ci(std::string_view haystack, std::string_view needle);

/// Hashtags in order of appearance, surface form including the leading '#'.
std::vector<std::string> extract_hashtags(std::string_view s);

/// Mentioned usernames (case-folded, without '@'). A mention is '@' followed by
/// 1..15 of [A-Za-z0-9_] and terminated by a non-username character.
std::vector<std::string> extract_mentions(std::string_view s);

/// Retweet prefix rule: text starts with "RT @" (case-insensitive), leading
/// whitespace ignored.
bool has_retweet_prefix(std::string_view s);

/// Drops a leading "RT @user:" header if present.
std::string_view strip_retweet_prefix(std::string_view s);

std::string collapse_whitespace(std::string_view s);
std::string_view trim(std::string_view s);

std::uint64_t fnv1a64(std::string_view s);
std::string hex64(std::uint64_t v);

}  // namespace socialscope::text

namespace socialscope::text {

bool is_valid_utf8(std::string_view s);

}  // namespace socialscope::text
