#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace reliefmatch {

inline constexpr std::string_view kUrlToken = "HTTPURL";
inline constexpr std::string_view kMentionToken = "@MENTION";

// Normalizes a social-media post, applying in order:
//   1. http(s):// and bare www. links -> HTTPURL
//   2. @handles -> @MENTION
//   3. HTML entity decoding (named and numeric)
//   4. newlines dropped, whitespace runs collapsed, ends trimmed
//   5. repair of UTF-8 text that was mis-decoded as cp1252/latin-1
//   6. emoji -> :short_name: from the shipped table; unknown emoji kept
// The passes are repeated until the text stops changing, so the result is a
// fixed point: preprocess_text(preprocess_text(x)) == preprocess_text(x).
// Throws Error(kInvalidUtf8) for malformed input.
std::string preprocess_text(std::string_view raw);

// Individual passes, exposed for testing. All expect valid UTF-8.
std::string replace_urls(std::string_view text);
std::string replace_mentions(std::string_view text);
std::string decode_html_entities(std::string_view text);
std::string collapse_whitespace(std::string_view text);
std::string repair_mojibake(std::string_view text);
std::string replace_emoji(std::string_view text);

// Version tag and entry count of the compiled-in emoji table.
int emoji_table_version();
std::size_t emoji_table_size();

}  // namespace reliefmatch
