#include "reliefmatch/filter.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "reliefmatch/error.hpp"

namespace reliefmatch {

namespace {

constexpr auto kRegexFlags =
    std::regex::ECMAScript | std::regex::icase | std::regex::optimize;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

RegexSet::RegexSet(std::vector<RegexPattern> patterns) : patterns_(std::move(patterns)) {
  std::set<int> ids;
  compiled_.reserve(patterns_.size());
  for (const auto& p : patterns_) {
    if (!ids.insert(p.id).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate pattern id " + std::to_string(p.id));
    }
    try {
      compiled_.emplace_back(p.pattern, kRegexFlags);
    } catch (const std::regex_error& e) {
      throw Error(ErrorCode::kInvalidArgument,
                  "pattern " + std::to_string(p.id) + " does not compile: " + e.what());
    }
  }
}

RegexSet RegexSet::defaults() {
  return RegexSet({
      {1, R"(\b(donate|donor|donors|help|fundraising|fundraiser|relief|fund|aiding|volunteer|volunteers|response team|response teams|victim|victims)\b)"},
      {2, R"(\b(donate|donating|donation|donations)\b)"},
      {3, R"(\b(cloth|clothes|clothing|jersey|sweater|sweaters|vest|vests|jeans|jacket|jackets|blazer|blazers|glove|gloves|blanket|blankets|mask|masks|ppe|sanitizers|supplies)\b)"},
      {4, R"(\b(need|needing|inform|informing|looking|sharing|share|offer|offering|providing|seeking|searching)\b.*\b(supplies|shelter|testing|vaccination|emergency services|help|support|aid|assistance|information|update|updates)\b)"},
      {5, R"(\b\w*\s*\b\?)"},
  });
}

std::vector<RegexPattern> RegexSet::read_pattern_file(const std::filesystem::path& path,
                                                      int first_id) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open pattern file " + path.string());
  std::vector<RegexPattern> out;
  std::string line;
  int id = first_id;
  while (std::getline(in, line)) {
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    out.push_back({id++, std::string(body)});
  }
  return out;
}

RegexSet RegexSet::extended(std::vector<RegexPattern> more) const {
  auto all = patterns_;
  all.insert(all.end(), std::make_move_iterator(more.begin()),
             std::make_move_iterator(more.end()));
  return RegexSet(std::move(all));
}

int RegexSet::max_id() const noexcept {
  int best = 0;
  for (const auto& p : patterns_) best = std::max(best, p.id);
  return best;
}

std::vector<int> RegexSet::match(std::string_view text) const {
  std::vector<int> ids;
  for (std::size_t i = 0; i < compiled_.size(); ++i) {
    if (std::regex_search(text.begin(), text.end(), compiled_[i])) ids.push_back(patterns_[i].id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

bool RegexSet::matches_any(std::string_view text) const {
  return std::any_of(compiled_.begin(), compiled_.end(), [&](const std::regex& re) {
    return std::regex_search(text.begin(), text.end(), re);
  });
}

std::vector<Candidate> filter_candidates(std::span<const Post> posts, const RegexSet& regexes) {
  std::vector<Candidate> out;
  for (const auto& post : posts) {
    auto ids = regexes.match(post.text);
    if (ids.empty()) continue;
    Candidate c{post, std::move(ids)};
    c.post.kind = PostKind::kPotentialCandidate;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace reliefmatch
