#pragma once

#include <filesystem>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reliefmatch/core.hpp"

namespace reliefmatch {

struct RegexPattern {
  int id = 0;
  std::string pattern;
};

// Ordered, immutable set of case-insensitive patterns with stable ids.
// \b and \w use ASCII word semantics.
class RegexSet {
 public:
  // Throws kInvalidArgument when a pattern fails to compile or ids repeat.
  explicit RegexSet(std::vector<RegexPattern> patterns);

  // The five most productive published patterns, ids 1-5 in rank order.
  static RegexSet defaults();

  // Pattern file: one regex per line, '#' starts a comment line, blank lines
  // ignored. Ids continue from first_id in file order.
  static std::vector<RegexPattern> read_pattern_file(const std::filesystem::path& path,
                                                     int first_id);

  RegexSet extended(std::vector<RegexPattern> more) const;

  // Ids of all matching patterns, ascending.
  std::vector<int> match(std::string_view text) const;
  bool matches_any(std::string_view text) const;

  const std::vector<RegexPattern>& patterns() const noexcept { return patterns_; }
  std::size_t size() const noexcept { return patterns_.size(); }
  int max_id() const noexcept;

 private:
  std::vector<RegexPattern> patterns_;
  std::vector<std::regex> compiled_;
};

struct Candidate {
  Post post;  // kind set to kPotentialCandidate
  std::vector<int> matched_ids;
};

// Keeps the posts whose text matches at least one pattern.
std::vector<Candidate> filter_candidates(std::span<const Post> posts, const RegexSet& regexes);

}  // namespace reliefmatch
