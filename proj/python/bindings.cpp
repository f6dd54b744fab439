#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "reliefmatch/classify.hpp"
#include "reliefmatch/error.hpp"
#include "reliefmatch/eval.hpp"
#include "reliefmatch/filter.hpp"
#include "reliefmatch/index.hpp"
#include "reliefmatch/io.hpp"
#include "reliefmatch/match.hpp"
#include "reliefmatch/preprocess.hpp"
#include "reliefmatch/scoring.hpp"
#include "reliefmatch/synthetic.hpp"

namespace py = pybind11;
using namespace reliefmatch;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

EmbeddingMatrix to_matrix(const FloatArray& a) {
  if (a.ndim() == 1) {
    return EmbeddingMatrix(1, static_cast<std::size_t>(a.shape(0)),
                           std::vector<float>(a.data(), a.data() + a.size()));
  }
  if (a.ndim() != 2) throw Error(ErrorCode::kInvalidArgument, "expected a 1-D or 2-D array");
  return EmbeddingMatrix(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                         std::vector<float>(a.data(), a.data() + a.size()));
}

FloatArray to_array(const EmbeddingMatrix& m) {
  FloatArray a({m.rows(), m.dim()});
  std::copy(m.values().begin(), m.values().end(), a.mutable_data());
  return a;
}

std::vector<float> to_vector(const FloatArray& a) {
  if (a.ndim() != 1) throw Error(ErrorCode::kInvalidArgument, "expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

py::object optional_geo(const Post& p) {
  if (!p.geo) return py::none();
  return py::make_tuple(p.geo->lat(), p.geo->lon());
}

py::dict breakdown_dict(const ScoreBreakdown& b) {
  py::dict d;
  d["s_overall"] = b.s_overall;
  d["s_text"] = b.s_text;
  d["w_time"] = b.w_time ? py::cast(*b.w_time) : py::none();
  d["w_location"] = b.w_location ? py::cast(*b.w_location) : py::none();
  d["distance_km"] = b.distance_km ? py::cast(*b.distance_km) : py::none();
  d["delta_t_days"] = b.delta_t_days ? py::cast(*b.delta_t_days) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_reliefmatch, m) {
  m.doc() = "Crisis request/offer matching engine";

  // The module attribute keeps the type alive.
  static PyObject* error_type = py::exception<Error>(m, "ReliefmatchError").ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  m.attr("DEFAULT_EARTH_RADIUS_KM") = kDefaultEarthRadiusKm;

  // --- posts ---------------------------------------------------------------
  py::class_<Post>(m, "Post")
      .def(py::init([](std::string id, std::string text, std::string lang,
                       std::optional<std::int64_t> timestamp, std::optional<double> lat,
                       std::optional<double> lon, std::string kind,
                       std::optional<std::string> resource, std::optional<std::string> country,
                       std::optional<std::string> region) {
             Post p;
             p.id = std::move(id);
             p.text = std::move(text);
             p.lang = std::move(lang);
             p.timestamp = timestamp;
             if (lat.has_value() != lon.has_value()) {
               throw Error(ErrorCode::kInvalidArgument, "lat and lon must be given together");
             }
             if (lat) p.geo = GeoPoint(*lat, *lon);
             p.kind = parse_post_kind(kind);
             if (resource) p.resource = parse_resource(*resource);
             p.country = std::move(country);
             p.region = std::move(region);
             return p;
           }),
           py::arg("id"), py::arg("text"), py::arg("lang") = "und",
           py::arg("timestamp") = py::none(), py::arg("lat") = py::none(),
           py::arg("lon") = py::none(), py::arg("kind") = "unlabeled",
           py::arg("resource") = py::none(), py::arg("country") = py::none(),
           py::arg("region") = py::none())
      .def_readwrite("id", &Post::id)
      .def_readwrite("text", &Post::text)
      .def_readwrite("lang", &Post::lang)
      .def_readwrite("timestamp", &Post::timestamp)
      .def_property_readonly("geo", &optional_geo)
      .def_property(
          "kind", [](const Post& p) { return std::string(to_string(p.kind)); },
          [](Post& p, const std::string& k) { p.kind = parse_post_kind(k); })
      .def_property(
          "resource",
          [](const Post& p) -> py::object {
            return p.resource ? py::cast(std::string(to_string(*p.resource))) : py::none();
          },
          [](Post& p, std::optional<std::string> r) {
            p.resource = r ? std::optional<Resource>(parse_resource(*r)) : std::nullopt;
          })
      .def_readwrite("country", &Post::country)
      .def_readwrite("region", &Post::region)
      .def("to_json", &post_to_json_line)
      .def_static("from_json", &post_from_json_line, py::arg("line"))
      .def("__repr__", [](const Post& p) { return "<Post " + p.id + " " + std::string(to_string(p.kind)) + ">"; });

  m.def("read_posts", &read_posts, py::arg("path"));
  m.def("write_posts", &write_posts, py::arg("path"), py::arg("posts"));

  // --- text ----------------------------------------------------------------
  m.def("preprocess_text", &preprocess_text, py::arg("raw"));

  py::class_<RegexSet>(m, "RegexSet")
      .def_static("defaults", &RegexSet::defaults)
      .def(py::init([](const std::vector<std::pair<int, std::string>>& patterns) {
             std::vector<RegexPattern> ps;
             for (const auto& [id, pat] : patterns) ps.push_back({id, pat});
             return RegexSet(std::move(ps));
           }),
           py::arg("patterns"))
      .def("extended_from_file",
           [](const RegexSet& s, const std::filesystem::path& path) {
             return s.extended(RegexSet::read_pattern_file(path, s.max_id() + 1));
           },
           py::arg("path"))
      .def("match", &RegexSet::match, py::arg("text"))
      .def("matches_any", &RegexSet::matches_any, py::arg("text"))
      .def("__len__", &RegexSet::size);

  m.def(
      "filter_candidates",
      [](const std::vector<Post>& posts, const RegexSet& regexes) {
        std::vector<std::pair<Post, std::vector<int>>> out;
        for (auto& c : filter_candidates(posts, regexes)) out.emplace_back(c.post, c.matched_ids);
        return out;
      },
      py::arg("posts"), py::arg("regexes"),
      "Returns (post, matched pattern ids) for every post matching at least one pattern.");

  m.def(
      "classify_heuristic",
      [](std::vector<Post> posts) {
        HeuristicClassifier h;
        for (auto& p : posts) classify(p, h);
        return posts;
      },
      py::arg("posts"), "Labels copies of the posts with the built-in heuristic classifier.");

  // --- scoring -------------------------------------------------------------
  m.def(
      "haversine_km",
      [](double lat1, double lon1, double lat2, double lon2, double radius) {
        return haversine_km(GeoPoint(lat1, lon1), GeoPoint(lat2, lon2), radius);
      },
      py::arg("lat1"), py::arg("lon1"), py::arg("lat2"), py::arg("lon2"),
      py::arg("radius_km") = kDefaultEarthRadiusKm);
  m.def("temporal_weight", &temporal_weight, py::arg("r_time"), py::arg("q_time"),
        py::arg("delta_time_days"));
  m.def(
      "cosine_similarity",
      [](const FloatArray& a, const FloatArray& b) {
        const auto x = to_vector(a), y = to_vector(b);
        return cosine_similarity(x, y);
      },
      py::arg("a"), py::arg("b"));

  py::class_<MatchParams>(m, "MatchParams")
      .def(py::init([](const std::string& mode, double delta_time_days, double delta_distance_km,
                       std::size_t k, std::size_t top_n, double ts_alpha, double earth_radius_km,
                       bool filter_resource) {
             MatchParams p;
             p.mode = parse_scoring_mode(mode);
             p.delta_time_days = delta_time_days;
             p.delta_distance_km = delta_distance_km;
             p.k = k;
             p.top_n = top_n;
             p.ts_alpha = ts_alpha;
             p.earth_radius_km = earth_radius_km;
             p.filter_resource = filter_resource;
             p.validate();
             return p;
           }),
           py::arg("mode") = "tts", py::arg("delta_time_days") = 30.0,
           py::arg("delta_distance_km") = 10.0, py::arg("k") = 100, py::arg("top_n") = 3,
           py::arg("ts_alpha") = 0.5, py::arg("earth_radius_km") = kDefaultEarthRadiusKm,
           py::arg("filter_resource") = false)
      .def_property_readonly("mode", [](const MatchParams& p) { return std::string(to_string(p.mode)); })
      .def_readonly("delta_time_days", &MatchParams::delta_time_days)
      .def_readonly("delta_distance_km", &MatchParams::delta_distance_km)
      .def_readonly("k", &MatchParams::k)
      .def_readonly("top_n", &MatchParams::top_n)
      .def_readonly("ts_alpha", &MatchParams::ts_alpha)
      .def_readonly("filter_resource", &MatchParams::filter_resource);

  m.def(
      "score_pair",
      [](const Post& request, const FloatArray& r_emb, const Post& offer, const FloatArray& o_emb,
         const MatchParams& params) {
        const auto r = to_vector(r_emb), o = to_vector(o_emb);
        return breakdown_dict(score_pair({request, r}, {offer, o}, params));
      },
      py::arg("request"), py::arg("request_embedding"), py::arg("offer"),
      py::arg("offer_embedding"), py::arg("params"));

  // --- indices -------------------------------------------------------------
  py::class_<IndexConfig>(m, "IndexConfig")
      .def(py::init([](const std::string& backend, std::uint32_t partitions, std::uint32_t nprobe,
                       std::uint32_t pq_m, std::uint32_t pq_bits, std::uint32_t hnsw_m,
                       std::uint32_t ef_construction, std::uint32_t ef_search,
                       std::uint32_t kmeans_iters, std::uint64_t seed) {
             IndexConfig c;
             c.backend = parse_index_backend(backend);
             c.ivf_partitions = partitions;
             c.ivf_nprobe = nprobe;
             c.pq_m = pq_m;
             c.pq_bits = pq_bits;
             c.hnsw_m = hnsw_m;
             c.hnsw_ef_construction = ef_construction;
             c.hnsw_ef_search = ef_search;
             c.kmeans_iters = kmeans_iters;
             c.seed = seed;
             c.validate();
             return c;
           }),
           py::arg("backend") = "exhaustive", py::arg("partitions") = 3, py::arg("nprobe") = 2,
           py::arg("pq_m") = 8, py::arg("pq_bits") = 4, py::arg("hnsw_m") = 16,
           py::arg("ef_construction") = 200, py::arg("ef_search") = 64,
           py::arg("kmeans_iters") = 25, py::arg("seed") = 42)
      .def_property_readonly("backend",
                             [](const IndexConfig& c) { return std::string(to_string(c.backend)); })
      .def("describe", &IndexConfig::describe)
      .def("__repr__", [](const IndexConfig& c) { return "<IndexConfig " + c.describe() + ">"; });

  py::class_<VectorIndex, std::shared_ptr<VectorIndex>>(m, "VectorIndex")
      .def_property_readonly("backend",
                             [](const VectorIndex& i) { return std::string(to_string(i.backend())); })
      .def_property_readonly("config", &VectorIndex::config)
      .def("__len__", &VectorIndex::size)
      .def_property_readonly("dim", &VectorIndex::dim)
      .def(
          "search",
          [](const VectorIndex& index, const FloatArray& query, std::size_t k) {
            const auto q = to_vector(query);
            if (q.size() != index.dim()) {
              throw Error(ErrorCode::kDimensionMismatch, "query dim does not match index dim");
            }
            std::vector<std::pair<std::uint32_t, double>> out;
            for (const auto& h : index.search(q, k)) out.emplace_back(h.row, h.similarity);
            return out;
          },
          py::arg("query"), py::arg("k"), "Returns (row, similarity) pairs, best first.")
      .def(
          "save", [](const VectorIndex& i, const std::filesystem::path& p) { save_index(p, i); },
          py::arg("path"));

  m.def(
      "build_index",
      [](const FloatArray& vectors, const IndexConfig& config) {
        return std::shared_ptr<VectorIndex>(build_index(to_matrix(vectors), config).index);
      },
      py::arg("vectors"), py::arg("config") = IndexConfig{});
  m.def(
      "load_index",
      [](const std::filesystem::path& p) { return std::shared_ptr<VectorIndex>(load_index(p)); },
      py::arg("path"));
  m.def(
      "recall_at_k",
      [](const VectorIndex& index, const VectorIndex& oracle, const FloatArray& queries,
         std::size_t k) { return recall_at_k(index, oracle, to_matrix(queries), k); },
      py::arg("index"), py::arg("oracle"), py::arg("queries"), py::arg("k"));

  // --- matching ------------------------------------------------------------
  py::class_<MatchResult>(m, "MatchResult")
      .def_readonly("request_id", &MatchResult::request_id)
      .def_property_readonly("matches",
                             [](const MatchResult& r) {
                               py::list out;
                               for (const auto& mt : r.matches) {
                                 py::dict d = breakdown_dict(mt.breakdown);
                                 d["offer_id"] = mt.offer_id;
                                 d["rank"] = mt.rank;
                                 out.append(d);
                               }
                               return out;
                             })
      .def("to_json", &result_to_json_line);

  py::class_<OfferCorpus>(m, "OfferCorpus")
      .def(py::init([](std::vector<Post> offers, const FloatArray& embeddings,
                       const IndexConfig& config, bool per_resource) {
             return std::make_unique<OfferCorpus>(std::move(offers), to_matrix(embeddings), config,
                                                  per_resource);
           }),
           py::arg("offers"), py::arg("embeddings"), py::arg("config") = IndexConfig{},
           py::arg("per_resource") = false)
      .def("__len__", &OfferCorpus::size)
      .def_property_readonly("index_config", &OfferCorpus::index_config);

  m.def(
      "match_all",
      [](const std::vector<Post>& requests, const FloatArray& embeddings,
         const OfferCorpus& corpus, const MatchParams& params, std::size_t workers) {
        const auto matrix = to_matrix(embeddings);
        py::gil_scoped_release release;
        return match_all(requests, matrix, corpus, params, workers).results;
      },
      py::arg("requests"), py::arg("embeddings"), py::arg("corpus"), py::arg("params") = MatchParams{},
      py::arg("workers") = 1);

  m.def("read_results", &read_results, py::arg("path"));
  m.def("write_results", &write_results, py::arg("path"), py::arg("results"));

  // --- evaluation ----------------------------------------------------------
  py::class_<GroundTruth>(m, "GroundTruth")
      .def(py::init<>())
      .def(py::init([](const std::map<std::string, std::string>& pairs) {
             GroundTruth t;
             for (const auto& [r, o] : pairs) t.add(r, o);
             return t;
           }),
           py::arg("pairs"))
      .def("add", &GroundTruth::add, py::arg("request_id"), py::arg("offer_id"))
      .def("offer_for", &GroundTruth::offer_for, py::arg("request_id"))
      .def("__len__", &GroundTruth::size)
      .def_property_readonly("pairs", &GroundTruth::pairs)
      .def_static("read", &GroundTruth::read, py::arg("path"))
      .def("write", &GroundTruth::write, py::arg("path"));

  m.def("topn_accuracy", &topn_accuracy, py::arg("results"), py::arg("truth"), py::arg("n"));

  m.def(
      "offer_request_ratio",
      [](const std::vector<Post>& posts, const std::string& group_by) {
        py::list out;
        for (const auto& r : offer_request_ratio(posts, parse_group_by(group_by))) {
          py::dict d;
          d["group"] = r.group;
          d["requests"] = r.requests;
          d["offers"] = r.offers;
          d["or_ratio"] = r.or_ratio ? py::cast(*r.or_ratio) : py::none();
          out.append(d);
        }
        return out;
      },
      py::arg("posts"), py::arg("group_by") = "none");

  // --- synthetic data ------------------------------------------------------
  py::class_<SyntheticCorpus>(m, "SyntheticCorpus")
      .def_readonly("requests", &SyntheticCorpus::requests)
      .def_readonly("offers", &SyntheticCorpus::offers)
      .def_property_readonly("request_embeddings",
                             [](const SyntheticCorpus& c) { return to_array(c.request_embeddings); })
      .def_property_readonly("offer_embeddings",
                             [](const SyntheticCorpus& c) { return to_array(c.offer_embeddings); })
      .def_property_readonly("offer_classes",
                             [](const SyntheticCorpus& c) {
                               std::vector<std::string> out;
                               for (auto k : c.offer_classes) out.emplace_back(to_string(k));
                               return out;
                             })
      .def_readonly("truth", &SyntheticCorpus::truth);

  m.def(
      "generate_synthetic",
      [](std::size_t pairs, std::size_t distractors, std::size_t dim, std::uint64_t seed,
         double time_window_days, double distance_window_km,
         std::optional<std::vector<std::string>> classes) {
        GenSpec spec;
        spec.n_pairs = pairs;
        spec.n_distractors_per_pair = distractors;
        spec.embedding_dim = dim;
        spec.seed = seed;
        spec.time_window_days = time_window_days;
        spec.distance_window_km = distance_window_km;
        if (classes) {
          spec.distractor_classes.clear();
          for (const auto& c : *classes) spec.distractor_classes.push_back(parse_offer_class(c));
        }
        return generate_synthetic(spec);
      },
      py::arg("pairs") = 100, py::arg("distractors") = 4, py::arg("dim") = 128,
      py::arg("seed") = 42, py::arg("time_window_days") = 3.0,
      py::arg("distance_window_km") = 10.0, py::arg("distractor_classes") = py::none());
}
