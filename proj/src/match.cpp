#include "reliefmatch/match.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <thread>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "file_io.hpp"
#include "reliefmatch/error.hpp"

namespace reliefmatch {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<double> read_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

bool requires_geo(ScoringMode mode) { return mode != ScoringMode::kText; }
bool requires_time(ScoringMode mode) { return mode == ScoringMode::kTextTemporalSpatial; }

}  // namespace

OfferCorpus::OfferCorpus(std::vector<Post> offers, EmbeddingMatrix embeddings,
                         const IndexConfig& config, bool per_resource)
    : offers_(std::move(offers)),
      embeddings_(std::move(embeddings)),
      config_(config),
      per_resource_(per_resource) {
  check_sizes();
  config_.validate();
  if (offers_.empty()) return;
  auto built = build_index(embeddings_, config_);
  index_ = std::move(built.index);
  stats_ = std::move(built.stats);
  if (per_resource_) build_resource_indices();
}

OfferCorpus::OfferCorpus(std::vector<Post> offers, EmbeddingMatrix embeddings,
                         std::unique_ptr<VectorIndex> prebuilt, bool per_resource)
    : offers_(std::move(offers)),
      embeddings_(std::move(embeddings)),
      per_resource_(per_resource),
      index_(std::move(prebuilt)) {
  check_sizes();
  if (!index_) throw Error(ErrorCode::kInvalidArgument, "no index given");
  config_ = index_->config();
  if (index_->size() != embeddings_.rows() || (index_->size() && index_->dim() != embeddings_.dim())) {
    throw Error(ErrorCode::kCorpusMismatch,
                "index holds " + std::to_string(index_->size()) + " vectors of dim " +
                    std::to_string(index_->dim()) + " but the corpus has " +
                    std::to_string(embeddings_.rows()) + " of dim " +
                    std::to_string(embeddings_.dim()));
  }
  if (per_resource_ && !offers_.empty()) build_resource_indices();
}

void OfferCorpus::check_sizes() const {
  if (offers_.size() != embeddings_.rows()) {
    throw Error(ErrorCode::kCorpusMismatch,
                std::to_string(offers_.size()) + " offers but " +
                    std::to_string(embeddings_.rows()) + " embedding rows");
  }
}

void OfferCorpus::build_resource_indices() {
  std::map<Resource, std::vector<std::size_t>> rows_of;
  for (std::size_t i = 0; i < offers_.size(); ++i) {
    if (offers_[i].resource) rows_of[*offers_[i].resource].push_back(i);
  }
  for (auto& [resource, rows] : rows_of) {
    IndexConfig sub = config_;
    const bool partitioned =
        sub.backend == IndexBackend::kIvf || sub.backend == IndexBackend::kIvfPq;
    if (partitioned && rows.size() < sub.ivf_partitions) {
      stats_.warnings.push_back("resource '" + std::string(to_string(resource)) + "' has " +
                                std::to_string(rows.size()) +
                                " offers, fewer than the partition count; searched exhaustively");
      sub.backend = IndexBackend::kExhaustive;
    }
    auto part = build_index(embeddings_.select(rows), sub);
    stats_.index_time_ms += part.stats.index_time_ms;
    for (auto& w : part.stats.warnings) stats_.warnings.push_back(std::move(w));
    by_resource_[resource] = Partition{std::move(part.index), std::move(rows)};
  }
}

OfferCorpus::Retrieval OfferCorpus::retrieve(EmbeddingView query, std::size_t k,
                                             std::optional<Resource> resource) const {
  if (empty()) throw Error(ErrorCode::kEmptyOfferCorpus, "no offers to match against");
  Retrieval out;
  if (resource) {
    if (!per_resource_) {
      throw Error(ErrorCode::kInvalidArgument,
                  "resource filtering requested but the corpus has no per-resource indices");
    }
    auto it = by_resource_.find(*resource);
    if (it == by_resource_.end()) {
      if (query.size() != embeddings_.dim()) {
        throw Error(ErrorCode::kDimensionMismatch, "query dim does not match offer embeddings");
      }
      return out;
    }
    auto timed = timed_search(*it->second.index, query, k);
    out.search_time_ms = timed.stats.search_time_ms;
    for (const auto& h : timed.hits) out.rows.push_back(it->second.rows[h.row]);
    return out;
  }
  auto timed = timed_search(*index_, query, k);
  out.search_time_ms = timed.stats.search_time_ms;
  for (const auto& h : timed.hits) out.rows.push_back(h.row);
  return out;
}

namespace {

MatchResult match_one_timed(const Post& request, EmbeddingView request_embedding,
                            const OfferCorpus& offers, const MatchParams& params,
                            double* search_ms) {
  params.validate();
  validate_post(request, requires_geo(params.mode), requires_time(params.mode));
  if (offers.empty()) throw Error(ErrorCode::kEmptyOfferCorpus, "no offers to match against");

  std::optional<Resource> resource;
  if (params.filter_resource) resource = request.resource;
  const auto retrieval = offers.retrieve(request_embedding, params.k, resource);
  if (search_ms) *search_ms = retrieval.search_time_ms;

  MatchResult result;
  result.request_id = request.id;
  const ScoredPost req{request, request_embedding};
  for (auto row : retrieval.rows) {
    const Post& offer = offers.offers()[row];
    auto breakdown = score_pair(req, {offer, offers.embeddings().row(row)}, params);
    if (params.mode == ScoringMode::kTextTemporalSpatial && breakdown.s_overall <= 0.0) continue;
    result.matches.push_back(Match{offer.id, 0, breakdown});
  }
  std::sort(result.matches.begin(), result.matches.end(), [](const Match& a, const Match& b) {
    if (a.breakdown.s_overall != b.breakdown.s_overall) {
      return a.breakdown.s_overall > b.breakdown.s_overall;
    }
    return a.offer_id < b.offer_id;
  });
  if (result.matches.size() > params.top_n) result.matches.resize(params.top_n);
  for (std::size_t i = 0; i < result.matches.size(); ++i) result.matches[i].rank = i + 1;
  return result;
}

}  // namespace

MatchResult match_one(const Post& request, EmbeddingView request_embedding,
                      const OfferCorpus& offers, const MatchParams& params) {
  return match_one_timed(request, request_embedding, offers, params, nullptr);
}

MatchRun match_all(const std::vector<Post>& requests, const EmbeddingMatrix& request_embeddings,
                   const OfferCorpus& offers, const MatchParams& params, std::size_t workers) {
  params.validate();
  if (requests.size() != request_embeddings.rows()) {
    throw Error(ErrorCode::kCorpusMismatch,
                std::to_string(requests.size()) + " requests but " +
                    std::to_string(request_embeddings.rows()) + " embedding rows");
  }
  if (params.filter_resource && !offers.has_resource_indices()) {
    throw Error(ErrorCode::kInvalidArgument,
                "resource filtering requested but the corpus has no per-resource indices");
  }
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(requests.size(), 1));

  MatchRun run;
  run.results.resize(requests.size());
  std::vector<double> times(requests.size(), 0.0);
  std::vector<std::exception_ptr> errors(requests.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto work = [&] {
    for (std::size_t i = next++; i < requests.size() && !failed; i = next++) {
      try {
        run.results[i] = match_one_timed(requests[i], request_embeddings.row(i), offers, params,
                                         &times[i]);
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  auto& r = run.report;
  r.params = params;
  r.index_config = offers.index_config();
  r.build = offers.build_stats();
  r.requests = requests.size();
  r.offers = offers.size();
  r.workers = workers;
  for (const auto& res : run.results) {
    r.total_matches += res.matches.size();
    if (!res.matches.empty()) ++r.requests_with_matches;
  }
  if (!times.empty()) {
    r.search.count = times.size();
    r.search.min_ms = *std::min_element(times.begin(), times.end());
    r.search.max_ms = *std::max_element(times.begin(), times.end());
    double sum = 0.0;
    for (double t : times) sum += t;
    r.search.mean_ms = sum / static_cast<double>(times.size());
  }
  return run;
}

void validate_corpora(const std::vector<Post>& requests, const std::vector<Post>& offers,
                      const EmbeddingStore& store) {
  std::unordered_set<std::string> offer_ids;
  for (const auto& o : offers) offer_ids.insert(o.id);
  for (const auto& r : requests) {
    if (offer_ids.count(r.id)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "id '" + r.id + "' appears in both the request and offer corpora");
    }
  }
  std::vector<std::string> missing;
  for (const auto* corpus : {&requests, &offers}) {
    for (const auto& p : *corpus) {
      if (!store.find(p.id)) missing.push_back(p.id);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size(); ++i) list += (i ? ", " : "") + missing[i];
    throw Error(ErrorCode::kEmbeddingMissing, list);
  }
}

MatchRun match_all(const std::vector<Post>& requests, const std::vector<Post>& offers,
                   const EmbeddingStore& store, const MatchParams& params,
                   const IndexConfig& index_config, std::size_t workers) {
  validate_corpora(requests, offers, store);
  OfferCorpus corpus(offers, store.gather(offers), index_config, params.filter_resource);
  return match_all(requests, store.gather(requests), corpus, params, workers);
}

std::string result_to_json_line(const MatchResult& result) {
  ordered_json j;
  j["request_id"] = result.request_id;
  j["matches"] = ordered_json::array();
  for (const auto& m : result.matches) {
    ordered_json e;
    e["offer_id"] = m.offer_id;
    e["rank"] = m.rank;
    e["s_overall"] = m.breakdown.s_overall;
    e["s_text"] = m.breakdown.s_text;
    e["w_time"] = optional_number(m.breakdown.w_time);
    e["w_location"] = optional_number(m.breakdown.w_location);
    e["distance_km"] = optional_number(m.breakdown.distance_km);
    e["delta_t_days"] = optional_number(m.breakdown.delta_t_days);
    j["matches"].push_back(std::move(e));
  }
  return j.dump();
}

MatchResult result_from_json_line(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    MatchResult r;
    r.request_id = j.at("request_id").get<std::string>();
    for (const auto& e : j.at("matches")) {
      Match m;
      m.offer_id = e.at("offer_id").get<std::string>();
      m.rank = e.at("rank").get<std::size_t>();
      m.breakdown.s_overall = e.at("s_overall").get<double>();
      m.breakdown.s_text = e.at("s_text").get<double>();
      m.breakdown.w_time = read_optional(e, "w_time");
      m.breakdown.w_location = read_optional(e, "w_location");
      m.breakdown.distance_km = read_optional(e, "distance_km");
      m.breakdown.delta_t_days = read_optional(e, "delta_t_days");
      r.matches.push_back(std::move(m));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("bad match record: ") + e.what());
  }
}

std::vector<MatchResult> read_results(const std::filesystem::path& path) {
  std::vector<MatchResult> out;
  detail::for_each_jsonl_line(path, [&](const std::string& line) {
    out.push_back(result_from_json_line(line));
  });
  return out;
}

void write_results(const std::filesystem::path& path, const std::vector<MatchResult>& results) {
  auto out = detail::open_out(path);
  for (const auto& r : results) out << result_to_json_line(r) << '\n';
}

std::string report_to_json(const RunReport& report) {
  const auto& p = report.params;
  const auto& c = report.index_config;
  ordered_json j;
  j["params"] = {{"mode", std::string(to_string(p.mode))},
                 {"delta_time_days", p.delta_time_days},
                 {"delta_distance_km", p.delta_distance_km},
                 {"k", p.k},
                 {"top_n", p.top_n},
                 {"ts_alpha", p.ts_alpha},
                 {"earth_radius_km", p.earth_radius_km},
                 {"filter_resource", p.filter_resource}};
  j["index"] = {{"backend", std::string(to_string(c.backend))},
                {"description", c.describe()},
                {"ivf_partitions", c.ivf_partitions},
                {"ivf_nprobe", c.ivf_nprobe},
                {"pq_m", c.pq_m},
                {"pq_bits", c.pq_bits},
                {"hnsw_m", c.hnsw_m},
                {"hnsw_ef_construction", c.hnsw_ef_construction},
                {"hnsw_ef_search", c.hnsw_ef_search},
                {"kmeans_iters", c.kmeans_iters},
                {"seed", c.seed}};
  j["build"] = {{"index_time_ms", report.build.index_time_ms},
                {"warnings", report.build.warnings}};
  j["search_time_ms"] = {{"count", report.search.count},
                         {"min", report.search.min_ms},
                         {"max", report.search.max_ms},
                         {"mean", report.search.mean_ms}};
  j["counts"] = {{"requests", report.requests},
                 {"offers", report.offers},
                 {"requests_with_matches", report.requests_with_matches},
                 {"total_matches", report.total_matches}};
  j["workers"] = report.workers;
  return j.dump(2);
}

}  // namespace reliefmatch
