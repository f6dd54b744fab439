#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reliefmatch/core.hpp"
#include "reliefmatch/match.hpp"

namespace reliefmatch {

// One-to-one mapping request id -> true offer id.
class GroundTruth {
 public:
  GroundTruth() = default;

  // Throws kInvalidArgument on a repeated request id or a repeated offer id.
  void add(const std::string& request_id, const std::string& offer_id);

  std::optional<std::string> offer_for(const std::string& request_id) const;
  bool contains(const std::string& request_id) const { return pairs_.count(request_id) != 0; }
  std::size_t size() const noexcept { return pairs_.size(); }
  const std::map<std::string, std::string>& pairs() const noexcept { return pairs_; }

  // Every referenced id must exist in its corpus. Throws kInvalidArgument.
  void check_against(const std::vector<Post>& requests, const std::vector<Post>& offers) const;

  // JSON lines {"request_id","offer_id"}, sorted by request id on write.
  static GroundTruth read(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;

 private:
  std::map<std::string, std::string> pairs_;
  std::map<std::string, std::string> request_of_;
};

// Fraction of results whose true offer is among the first min(n, |matches|)
// matches. Results for requests absent from the truth throw kUnknownRequestId;
// an empty result list yields 0.
double topn_accuracy(const std::vector<MatchResult>& results, const GroundTruth& truth,
                     std::size_t n);

enum class GroupBy { kNone, kCountry, kRegion };

std::string_view to_string(GroupBy g);
GroupBy parse_group_by(std::string_view name);

struct RatioRow {
  std::string group;  // "all" when ungrouped
  std::size_t requests = 0;
  std::size_t offers = 0;
  std::optional<double> or_ratio;  // null when requests == 0
};

// Offers-to-requests ratio per group, groups in lexicographic order. Posts
// that are neither requests nor offers are ignored. Throws kMissingGroupKey
// when a request or offer lacks the grouping field.
std::vector<RatioRow> offer_request_ratio(const std::vector<Post>& posts, GroupBy group_by);

std::string ratio_to_json_line(const RatioRow& row);

}  // namespace reliefmatch
