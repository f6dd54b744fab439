#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reliefmatch::utf8 {

// Strict decoder: rejects overlong forms, surrogates and code points above
// U+10FFFF. Returns nullopt on the first malformed sequence.
std::optional<std::u32string> decode(std::string_view bytes);

void append(std::string& out, char32_t cp);
std::string encode(std::u32string_view cps);

inline bool is_valid(std::string_view bytes) { return decode(bytes).has_value(); }

}  // namespace reliefmatch::utf8
