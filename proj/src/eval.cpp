#include "reliefmatch/eval.hpp"

#include <algorithm>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "file_io.hpp"
#include "reliefmatch/error.hpp"

namespace reliefmatch {

void GroundTruth::add(const std::string& request_id, const std::string& offer_id) {
  if (pairs_.count(request_id)) {
    throw Error(ErrorCode::kInvalidArgument, "request '" + request_id + "' mapped twice");
  }
  if (request_of_.count(offer_id)) {
    throw Error(ErrorCode::kInvalidArgument, "offer '" + offer_id + "' is the truth for both '" +
                                                 request_of_[offer_id] + "' and '" + request_id +
                                                 "'");
  }
  pairs_[request_id] = offer_id;
  request_of_[offer_id] = request_id;
}

std::optional<std::string> GroundTruth::offer_for(const std::string& request_id) const {
  auto it = pairs_.find(request_id);
  if (it == pairs_.end()) return std::nullopt;
  return it->second;
}

void GroundTruth::check_against(const std::vector<Post>& requests,
                                const std::vector<Post>& offers) const {
  std::unordered_set<std::string> req, off;
  for (const auto& p : requests) req.insert(p.id);
  for (const auto& p : offers) off.insert(p.id);
  for (const auto& [r, o] : pairs_) {
    if (!req.count(r)) throw Error(ErrorCode::kInvalidArgument, "unknown request '" + r + "'");
    if (!off.count(o)) throw Error(ErrorCode::kInvalidArgument, "unknown offer '" + o + "'");
  }
}

GroundTruth GroundTruth::read(const std::filesystem::path& path) {
  GroundTruth truth;
  detail::for_each_jsonl_line(path, [&](const std::string& line) {
    try {
      const auto j = nlohmann::json::parse(line);
      truth.add(j.at("request_id").get<std::string>(), j.at("offer_id").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat, std::string("bad truth record: ") + e.what());
    }
  });
  return truth;
}

void GroundTruth::write(const std::filesystem::path& path) const {
  auto out = detail::open_out(path);
  for (const auto& [r, o] : pairs_) {
    nlohmann::ordered_json j;
    j["request_id"] = r;
    j["offer_id"] = o;
    out << j.dump() << '\n';
  }
}

double topn_accuracy(const std::vector<MatchResult>& results, const GroundTruth& truth,
                     std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "n must be at least 1");
  if (results.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& r : results) {
    const auto want = truth.offer_for(r.request_id);
    if (!want) throw Error(ErrorCode::kUnknownRequestId, r.request_id);
    const std::size_t depth = std::min(n, r.matches.size());
    for (std::size_t i = 0; i < depth; ++i) {
      if (r.matches[i].offer_id == *want) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

std::string_view to_string(GroupBy g) {
  switch (g) {
    case GroupBy::kNone:
      return "none";
    case GroupBy::kCountry:
      return "country";
    case GroupBy::kRegion:
      return "region";
  }
  return "none";
}

GroupBy parse_group_by(std::string_view name) {
  if (name == "none") return GroupBy::kNone;
  if (name == "country") return GroupBy::kCountry;
  if (name == "region") return GroupBy::kRegion;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown group-by '" + std::string(name) + "' (country|region|none)");
}

std::vector<RatioRow> offer_request_ratio(const std::vector<Post>& posts, GroupBy group_by) {
  std::map<std::string, RatioRow> groups;
  for (const auto& p : posts) {
    if (p.kind != PostKind::kRequest && p.kind != PostKind::kOffer) continue;
    std::string key = "all";
    if (group_by != GroupBy::kNone) {
      const auto& field = group_by == GroupBy::kCountry ? p.country : p.region;
      if (!field) {
        throw Error(ErrorCode::kMissingGroupKey,
                    "post '" + p.id + "' has no " + std::string(to_string(group_by)));
      }
      key = *field;
    }
    auto& row = groups[key];
    row.group = key;
    (p.kind == PostKind::kRequest ? row.requests : row.offers) += 1;
  }
  std::vector<RatioRow> out;
  for (auto& [key, row] : groups) {
    if (row.requests > 0) {
      row.or_ratio = static_cast<double>(row.offers) / static_cast<double>(row.requests);
    }
    out.push_back(row);
  }
  return out;
}

std::string ratio_to_json_line(const RatioRow& row) {
  nlohmann::ordered_json j;
  j["group"] = row.group;
  j["requests"] = row.requests;
  j["offers"] = row.offers;
  j["or_ratio"] = row.or_ratio ? nlohmann::ordered_json(*row.or_ratio) : nlohmann::ordered_json();
  return j.dump();
}

}  // namespace reliefmatch
