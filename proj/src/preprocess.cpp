#include "reliefmatch/preprocess.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <sstream>
#include <unordered_map>

#include "reliefmatch/error.hpp"
#include "utf8.hpp"

namespace reliefmatch {

namespace detail {
extern const char* const kEmojiTableTsv;
}  // namespace detail

namespace {

bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_';
}

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool starts_with_icase(std::string_view text, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > text.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    if (std::tolower(static_cast<unsigned char>(text[pos + k])) != prefix[k]) return false;
  }
  return true;
}

bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\v': case U'\f':
    case 0x0085: case 0x00A0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

struct EmojiTable {
  int version = 0;
  std::unordered_map<char32_t, std::string> names;
};

const EmojiTable& emoji_table() {
  static const EmojiTable table = [] {
    EmojiTable t;
    std::istringstream in(detail::kEmojiTableTsv);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line[0] == '#') {
        const auto pos = line.find("version ");
        if (pos != std::string::npos) t.version = std::stoi(line.substr(pos + 8));
        continue;
      }
      const auto tab = line.find('\t');
      if (tab == std::string::npos) continue;
      const auto cp = static_cast<char32_t>(std::stoul(line.substr(0, tab), nullptr, 16));
      t.names.emplace(cp, ":" + line.substr(tab + 1) + ":");
    }
    return t;
  }();
  return table;
}

const std::unordered_map<std::string_view, char32_t>& named_entities() {
  static const std::unordered_map<std::string_view, char32_t> table = {
      {"amp", U'&'},     {"lt", U'<'},      {"gt", U'>'},      {"quot", U'"'},
      {"apos", U'\''},   {"nbsp", 0x00A0},  {"ndash", 0x2013}, {"mdash", 0x2014},
      {"lsquo", 0x2018}, {"rsquo", 0x2019}, {"ldquo", 0x201C}, {"rdquo", 0x201D},
      {"hellip", 0x2026}, {"bull", 0x2022}, {"middot", 0x00B7}, {"copy", 0x00A9},
      {"reg", 0x00AE},   {"trade", 0x2122}, {"euro", 0x20AC},  {"pound", 0x00A3},
      {"yen", 0x00A5},   {"cent", 0x00A2},  {"deg", 0x00B0},   {"laquo", 0x00AB},
      {"raquo", 0x00BB}, {"times", 0x00D7}, {"divide", 0x00F7}, {"hearts", 0x2665},
  };
  return table;
}

// Byte a cp1252 (or latin-1, for the C1 range) decoder would have produced
// this code point from, or -1.
int cp1252_byte(char32_t cp) {
  if (cp >= 0x80 && cp <= 0xFF) return static_cast<int>(cp);
  static constexpr std::array<std::pair<char32_t, int>, 27> kHigh = {{
      {0x20AC, 0x80}, {0x201A, 0x82}, {0x0192, 0x83}, {0x201E, 0x84}, {0x2026, 0x85},
      {0x2020, 0x86}, {0x2021, 0x87}, {0x02C6, 0x88}, {0x2030, 0x89}, {0x0160, 0x8A},
      {0x2039, 0x8B}, {0x0152, 0x8C}, {0x017D, 0x8E}, {0x2018, 0x91}, {0x2019, 0x92},
      {0x201C, 0x93}, {0x201D, 0x94}, {0x2022, 0x95}, {0x2013, 0x96}, {0x2014, 0x97},
      {0x02DC, 0x98}, {0x2122, 0x99}, {0x0161, 0x9A}, {0x203A, 0x9B}, {0x0153, 0x9C},
      {0x017E, 0x9E}, {0x0178, 0x9F},
  }};
  for (const auto& [from, byte] : kHigh) {
    if (from == cp) return byte;
  }
  return -1;
}

std::u32string decode_or_throw(std::string_view text) {
  auto cps = utf8::decode(text);
  if (!cps) throw Error(ErrorCode::kInvalidUtf8, "input is not valid UTF-8");
  return std::move(*cps);
}

std::string single_pass(std::string_view text) {
  std::string s = replace_urls(text);
  s = replace_mentions(s);
  s = decode_html_entities(s);
  s = collapse_whitespace(s);
  s = repair_mojibake(s);
  return replace_emoji(s);
}

}  // namespace

std::string replace_urls(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const bool boundary = i == 0 || !is_word_byte(text[i - 1]);
    if (boundary && (starts_with_icase(text, i, "http://") ||
                     starts_with_icase(text, i, "https://") ||
                     starts_with_icase(text, i, "www."))) {
      while (i < text.size() && !is_ascii_space(text[i])) ++i;
      out += kUrlToken;
      continue;
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::string replace_mentions(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '@' && (i == 0 || !is_word_byte(text[i - 1])) && i + 1 < text.size() &&
        is_word_byte(text[i + 1])) {
      ++i;
      while (i < text.size() && is_word_byte(text[i])) ++i;
      out += kMentionToken;
      continue;
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::string decode_html_entities(std::string_view text) {
  constexpr std::size_t kMaxEntity = 12;
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '&') {
      out.push_back(text[i++]);
      continue;
    }
    const auto semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i - 1 > kMaxEntity || semi == i + 1) {
      out.push_back(text[i++]);
      continue;
    }
    const auto body = text.substr(i + 1, semi - i - 1);
    char32_t cp = 0;
    bool ok = false;
    if (body[0] == '#') {
      const bool hex = body.size() > 1 && (body[1] == 'x' || body[1] == 'X');
      const auto digits = body.substr(hex ? 2 : 1);
      std::uint32_t value = 0;
      const auto [ptr, ec] =
          std::from_chars(digits.data(), digits.data() + digits.size(), value, hex ? 16 : 10);
      ok = ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty() &&
           value > 0 && value <= 0x10FFFF && !(value >= 0xD800 && value <= 0xDFFF);
      cp = value;
    } else if (auto it = named_entities().find(body); it != named_entities().end()) {
      cp = it->second;
      ok = true;
    }
    if (!ok) {
      out.push_back(text[i++]);
      continue;
    }
    utf8::append(out, cp);
    i = semi + 1;
  }
  return out;
}

std::string collapse_whitespace(std::string_view text) {
  const auto cps = decode_or_throw(text);
  std::u32string out;
  out.reserve(cps.size());
  bool pending_space = false;
  for (char32_t cp : cps) {
    if (is_unicode_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(cp);
  }
  return utf8::encode(out);
}

std::string repair_mojibake(std::string_view text) {
  const auto cps = decode_or_throw(text);
  std::u32string out;
  out.reserve(cps.size());
  std::size_t i = 0;
  while (i < cps.size()) {
    const int lead = cp1252_byte(cps[i]);
    int len = 0;
    if (lead >= 0xC2 && lead <= 0xDF) len = 2;
    else if (lead >= 0xE0 && lead <= 0xEF) len = 3;
    else if (lead >= 0xF0 && lead <= 0xF4) len = 4;
    bool repaired = false;
    if (len > 0 && i + len <= cps.size()) {
      std::string bytes(1, static_cast<char>(lead));
      bool continuation = true;
      for (int k = 1; k < len && continuation; ++k) {
        const int b = cp1252_byte(cps[i + k]);
        continuation = b >= 0x80 && b <= 0xBF;
        bytes.push_back(static_cast<char>(b));
      }
      if (continuation) {
        if (auto decoded = utf8::decode(bytes); decoded && decoded->size() == 1) {
          out.push_back((*decoded)[0]);
          i += len;
          repaired = true;
        }
      }
    }
    if (!repaired) out.push_back(cps[i++]);
  }
  return utf8::encode(out);
}

std::string replace_emoji(std::string_view text) {
  const auto cps = decode_or_throw(text);
  const auto& names = emoji_table().names;
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (auto it = names.find(cps[i]); it != names.end()) {
      out += it->second;
      // Drop the emoji-presentation selector that usually trails the symbol.
      if (i + 1 < cps.size() && cps[i + 1] == 0xFE0F) ++i;
      continue;
    }
    utf8::append(out, cps[i]);
  }
  return out;
}

std::string preprocess_text(std::string_view raw) {
  if (!utf8::is_valid(raw)) throw Error(ErrorCode::kInvalidUtf8, "input is not valid UTF-8");
  constexpr int kMaxPasses = 8;
  std::string current = single_pass(raw);
  for (int pass = 1; pass < kMaxPasses; ++pass) {
    std::string next = single_pass(current);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

int emoji_table_version() { return emoji_table().version; }
std::size_t emoji_table_size() { return emoji_table().names.size(); }

}  // namespace reliefmatch
