#include "reliefmatch/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <random>

#include "index/kmeans.hpp"
#include "reliefmatch/error.hpp"
#include "reliefmatch/scoring.hpp"

namespace reliefmatch {

namespace {

using detail::uniform01;
using detail::uniform_index;
using Vec = std::vector<double>;

constexpr double kBetaSq = 0.1;        // offset of requests and offers along the shared axis
constexpr double kTopicShare = 0.9;    // squared weight of the family topic in a request
constexpr double kMaxCosGap = 0.02;    // keeps the highest cosine below the s = 1 ceiling
constexpr std::size_t kMaxAttempts = 2000;
constexpr double kSecondsPerDay = 86400.0;

constexpr const char* kClassNames[] = {"true", "temporal_out", "spatial_out", "high_cos_far",
                                       "low_sim_in"};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Box-Muller on the portable uniform source.
double gaussian(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void scale(Vec& v, double f) {
  for (double& x : v) x *= f;
}

void axpy(Vec& y, double a, const Vec& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

// Random unit vector orthogonal to the given orthonormal set.
Vec random_orthogonal(std::mt19937_64& rng, std::size_t dim, const std::vector<const Vec*>& basis) {
  for (;;) {
    Vec v(dim);
    for (double& x : v) x = gaussian(rng);
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vec* b : basis) axpy(v, -dot(v, *b), *b);
    }
    const double n = std::sqrt(dot(v, v));
    if (n > 1e-6) {
      scale(v, 1.0 / n);
      return v;
    }
  }
}

Vec blend(double a, const Vec& x, double b, const Vec& y) {
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

std::vector<float> to_float(const Vec& v) {
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i]);
  return out;
}

double float_cosine(const std::vector<float>& a, const std::vector<float>& b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<double>(a[i]) * b[i];
    aa += static_cast<double>(a[i]) * a[i];
    bb += static_cast<double>(b[i]) * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

// Point at `distance_km` from `from` along `bearing` radians.
GeoPoint destination(const GeoPoint& from, double bearing, double distance_km) {
  const double d = distance_km / kDefaultEarthRadiusKm;
  const double lat1 = from.lat() * std::numbers::pi / 180.0;
  const double lon1 = from.lon() * std::numbers::pi / 180.0;
  const double lat2 =
      std::asin(std::sin(lat1) * std::cos(d) + std::cos(lat1) * std::sin(d) * std::cos(bearing));
  const double lon2 =
      lon1 + std::atan2(std::sin(bearing) * std::sin(d) * std::cos(lat1),
                        std::cos(d) - std::sin(lat1) * std::sin(lat2));
  double lon = std::remainder(lon2 * 180.0 / std::numbers::pi, 360.0);
  if (lon == -180.0) lon = 180.0;
  return GeoPoint(std::clamp(lat2 * 180.0 / std::numbers::pi, -90.0, 90.0), lon);
}

// Uniform bearing, distance uniform in [lo, hi) km, redrawn until the
// haversine distance lands inside the interval.
GeoPoint place(std::mt19937_64& rng, const GeoPoint& from, double lo, double hi) {
  for (;;) {
    const GeoPoint p =
        destination(from, uniform(rng, 0.0, 2.0 * std::numbers::pi), uniform(rng, lo, hi));
    const double d = haversine_km(from, p);
    if (d >= lo && d < hi) return p;
  }
}

struct Member {
  Post post;
  std::vector<float> embedding;
  OfferClass cls = OfferClass::kTrue;
};

struct PairDraft {
  Member request;
  std::vector<Member> offers;  // true offer first
};

std::string pad(std::size_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", v);
  return buf;
}

class Generator {
 public:
  explicit Generator(const GenSpec& spec) : spec_(spec), rng_(spec.seed) {
    const std::size_t dim = spec.embedding_dim;
    Vec g(dim);
    for (double& x : g) x = gaussian(rng_);
    scale(g, 1.0 / std::sqrt(dot(g, g)));
    axis_ = g;
    const std::size_t families = (spec.n_pairs + spec.family_size - 1) / spec.family_size;
    const std::size_t n_topics = std::min(families, dim - 3);
    std::vector<const Vec*> basis{&axis_};
    topics_.reserve(n_topics);
    for (std::size_t t = 0; t < n_topics; ++t) {
      topics_.push_back(random_orthogonal(rng_, dim, basis));
      basis.clear();
      basis.push_back(&axis_);
      for (const auto& tp : topics_) basis.push_back(&tp);
    }
  }

  SyntheticCorpus run() {
    std::vector<PairDraft> pairs;
    pairs.reserve(spec_.n_pairs);
    for (std::size_t p = 0; p < spec_.n_pairs; ++p) {
      std::size_t attempt = 0;
      for (;; ++attempt) {
        if (attempt == kMaxAttempts) {
          throw Error(ErrorCode::kInvalidArgument,
                      "could not isolate pair " + std::to_string(p) +
                          "; widen time_span_days or add centers");
        }
        auto draft = draft_pair(p);
        if (draft && isolated(*draft, pairs)) {
          pairs.push_back(std::move(*draft));
          break;
        }
      }
    }
    return assemble(pairs);
  }

 private:
  const CityCenter& center_of(std::size_t p) const {
    return spec_.centers[(p % spec_.family_size) % spec_.centers.size()];
  }

  // Nullopt when an in-window distractor found no spot near both the
  // request and the center; the caller redraws the pair.
  std::optional<PairDraft> draft_pair(std::size_t p) {
    const std::size_t family = p / spec_.family_size;
    const Vec& topic = topics_[family % topics_.size()];
    const Resource resource = kAllResources[family % std::size(kAllResources)];
    const CityCenter& center = center_of(p);
    const double w_km = spec_.distance_window_km;
    const double w_days = spec_.time_window_days;

    // u: request direction inside the offer-free subspace.
    const Vec noise = random_orthogonal(rng_, spec_.embedding_dim, {&axis_, &topic});
    const Vec u = blend(std::sqrt(kTopicShare), topic, std::sqrt(1.0 - kTopicShare), noise);
    const double sb = std::sqrt(kBetaSq), cb = std::sqrt(1.0 - kBetaSq);
    const Vec req_vec = blend(sb, axis_, cb, u);

    // An offer with cosine c to the request: -beta*g + sqrt(1-beta^2)*(s*u + sqrt(1-s^2)*z).
    auto offer_vec = [&](double c) {
      const double s = std::clamp((c + kBetaSq) / (1.0 - kBetaSq), -1.0, 1.0);
      const Vec z = random_orthogonal(rng_, spec_.embedding_dim, {&axis_, &u});
      return blend(-sb, axis_, cb, blend(s, u, std::sqrt(1.0 - s * s), z));
    };

    const double t0 = static_cast<double>(spec_.base_time) +
                      uniform(rng_, 0.0, spec_.time_span_days) * kSecondsPerDay;
    const auto req_ts = static_cast<std::int64_t>(std::llround(t0));
    const GeoPoint req_geo = place(rng_, center.point, 0.0, w_km);

    PairDraft d;
    d.request.post = make_post("req-" + pad(p), PostKind::kRequest, resource, center, req_ts,
                               req_geo, request_text(p, family, center, resource));
    d.request.embedding = to_float(req_vec);

    // True offer: inside the window of the center and of the request.
    GeoPoint true_geo = req_geo;
    for (;;) {
      true_geo = place(rng_, center.point, 0.0, w_km);
      if (haversine_km(req_geo, true_geo) < w_km) break;
    }
    const double dt_true = random_sign() * uniform(rng_, 0.0, w_days);
    const auto true_ts = shifted(req_ts, dt_true);
    const double d_true = haversine_km(req_geo, true_geo);
    const double c_true = uniform(rng_, spec_.true_cos_min, spec_.true_cos_max);
    const double c_cap = 1.0 - 2.0 * kBetaSq - kMaxCosGap;

    Member truth;
    truth.cls = OfferClass::kTrue;
    truth.embedding = to_float(offer_vec(c_true));
    truth.post = make_post("off-" + pad(p), PostKind::kOffer, resource, center, true_ts, true_geo,
                           offer_text(p, family, center, resource, OfferClass::kTrue));
    d.offers.push_back(std::move(truth));

    for (std::size_t k = 0; k < spec_.n_distractors_per_pair; ++k) {
      const OfferClass cls = spec_.distractor_classes[k % spec_.distractor_classes.size()];
      GeoPoint geo = req_geo;
      double dt = 0.0;
      double c = 0.0;
      switch (cls) {
        case OfferClass::kTemporalOut:
          geo = place(rng_, center.point, 0.0, w_km);
          dt = random_sign() * uniform(rng_, spec_.far_min_days, spec_.far_max_days);
          c = std::min(c_true + uniform(rng_, spec_.boost_min, spec_.boost_max), c_cap);
          break;
        case OfferClass::kSpatialOut:
          geo = place(rng_, req_geo, spec_.far_min_km, spec_.far_max_km);
          dt = random_sign() * uniform(rng_, 0.0, w_days);
          c = std::min(c_true + uniform(rng_, spec_.boost_min, spec_.boost_max), c_cap);
          break;
        case OfferClass::kHighCosFar:
          geo = place(rng_, req_geo, spec_.far_min_km, spec_.far_max_km);
          dt = random_sign() * uniform(rng_, spec_.far_min_days, spec_.far_max_days);
          c = std::min(c_true + uniform(rng_, spec_.boost_min, spec_.boost_max), c_cap);
          break;
        case OfferClass::kLowSimIn:
          if (!place_low_sim(req_geo, center.point, d_true, geo)) return std::nullopt;
          dt = random_sign() * uniform(rng_, std::abs(dt_true), w_days);
          c = c_true - spec_.margin - uniform(rng_, 0.0, 0.2);
          break;
        case OfferClass::kTrue:
          throw Error(ErrorCode::kInvalidArgument, "'true' is not a distractor class");
      }
      Member m;
      m.cls = cls;
      m.embedding = to_float(offer_vec(c));
      m.post = make_post("dis-" + pad(p) + "-" + std::to_string(k + 1), PostKind::kOffer,
                         resource, center, shifted(req_ts, dt), geo,
                         offer_text(p, family, center, resource, cls));
      d.offers.push_back(std::move(m));
    }
    return d;
  }

  // At distance [d_true, window) from the request and inside the center window.
  bool place_low_sim(const GeoPoint& req, const GeoPoint& center, double d_true, GeoPoint& out) {
    for (int i = 0; i < 200; ++i) {
      out = place(rng_, req, d_true, spec_.distance_window_km);
      if (haversine_km(center, out) < spec_.distance_window_km) return true;
    }
    return false;
  }

  double random_sign() { return uniform01(rng_) < 0.5 ? -1.0 : 1.0; }

  static std::int64_t shifted(std::int64_t ts, double days) {
    return ts + static_cast<std::int64_t>(std::trunc(days * kSecondsPerDay));
  }

  bool separated(const Member& r, const Member& o) const {
    if (haversine_km(*r.post.geo, *o.post.geo) >= spec_.far_min_km) return true;
    if (std::abs(delta_days(*r.post.timestamp, *o.post.timestamp)) >= spec_.far_min_days) {
      return true;
    }
    return float_cosine(r.embedding, o.embedding) <= 0.0;
  }

  bool isolated(const PairDraft& d, const std::vector<PairDraft>& done) const {
    for (const auto& other : done) {
      for (const auto& o : other.offers) {
        if (!separated(d.request, o)) return false;
      }
      for (const auto& o : d.offers) {
        if (!separated(other.request, o)) return false;
      }
    }
    return true;
  }

  Post make_post(std::string id, PostKind kind, Resource resource, const CityCenter& center,
                 std::int64_t ts, const GeoPoint& geo, std::string text) const {
    Post p;
    p.id = std::move(id);
    p.text = std::move(text);
    p.lang = "en";
    p.timestamp = ts;
    p.geo = geo;
    p.kind = kind;
    p.resource = resource;
    p.country = spec_.country;
    p.region = center.name;
    return p;
  }

  static std::string request_text(std::size_t p, std::size_t family, const CityCenter& center,
                                  Resource resource) {
    const std::string res(to_string(resource));
    return "[syn role=request pair=" + pad(p) + " family=" + std::to_string(family) +
           " center=" + center.name + " resource=" + res + "] Need " + res + " near " +
           center.name + ", can anyone help?";
  }

  static std::string offer_text(std::size_t p, std::size_t family, const CityCenter& center,
                                Resource resource, OfferClass cls) {
    const std::string res(to_string(resource));
    return "[syn role=offer pair=" + pad(p) + " family=" + std::to_string(family) +
           " center=" + center.name + " resource=" + res + " class=" +
           std::string(to_string(cls)) + "] Offering " + res + " around " + center.name + ".";
  }

  SyntheticCorpus assemble(std::vector<PairDraft>& pairs) {
    SyntheticCorpus out;
    out.request_embeddings = EmbeddingMatrix(0, spec_.embedding_dim);
    out.offer_embeddings = EmbeddingMatrix(0, spec_.embedding_dim);
    std::vector<std::pair<Member*, const CityCenter*>> offers;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      auto& d = pairs[p];
      out.truth.add(d.request.post.id, d.offers.front().post.id);
      out.requests.push_back(d.request.post);
      out.request_embeddings.append(d.request.embedding);
      for (auto& o : d.offers) offers.emplace_back(&o, &center_of(p));
    }
    // Fisher-Yates so that the planted offer has no fixed position.
    for (std::size_t i = offers.size(); i > 1; --i) {
      std::swap(offers[i - 1], offers[uniform_index(rng_, i)]);
    }
    for (auto& [m, center] : offers) {
      out.offers.push_back(std::move(m->post));
      out.offer_embeddings.append(m->embedding);
      out.offer_classes.push_back(m->cls);
      out.offer_centers.push_back(center->name);
    }
    return out;
  }

  const GenSpec& spec_;
  std::mt19937_64 rng_;
  Vec axis_;
  std::vector<Vec> topics_;
};

}  // namespace

std::vector<CityCenter> default_centers() {
  return {{"Sydney", GeoPoint(-33.8688, 151.2093)},
          {"Melbourne", GeoPoint(-37.8136, 144.9631)},
          {"Brisbane", GeoPoint(-27.4698, 153.0251)},
          {"Adelaide", GeoPoint(-34.9285, 138.6007)},
          {"Perth", GeoPoint(-31.9505, 115.8605)}};
}

std::string_view to_string(OfferClass c) { return kClassNames[static_cast<int>(c)]; }

OfferClass parse_offer_class(std::string_view name) {
  for (int i = 0; i < static_cast<int>(std::size(kClassNames)); ++i) {
    if (name == kClassNames[i]) return static_cast<OfferClass>(i);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown offer class '" + std::string(name) + "'");
}

void GenSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  if (n_pairs == 0) fail("n_pairs must be at least 1");
  if (centers.empty()) fail("at least one center is required");
  if (!(time_window_days > 0.0)) fail("time_window_days must be positive");
  if (!(distance_window_km > 0.0)) fail("distance_window_km must be positive");
  if (embedding_dim < 4) fail("embedding_dim must be at least 4");
  if (family_size == 0) fail("family_size must be at least 1");
  if (!(time_span_days > 0.0)) fail("time_span_days must be positive");
  if (n_distractors_per_pair > 0 && distractor_classes.empty()) {
    fail("distractor_classes is empty");
  }
  for (auto c : distractor_classes) {
    if (c == OfferClass::kTrue) fail("'true' is not a distractor class");
  }
  if (!(-1.0 <= true_cos_min && true_cos_min <= true_cos_max &&
        true_cos_max < 1.0 - 2.0 * kBetaSq - kMaxCosGap)) {
    fail("true cosine range must lie within [-1, " +
         std::to_string(1.0 - 2.0 * kBetaSq - kMaxCosGap) + ")");
  }
  if (!(0.0 < boost_min && boost_min <= boost_max)) fail("boost range must be positive");
  if (!(margin > 0.0)) fail("margin must be positive");
  if (!(far_min_km > distance_window_km && far_min_km <= far_max_km)) {
    fail("far_min_km must exceed distance_window_km and not exceed far_max_km");
  }
  if (!(far_min_days > time_window_days && far_min_days <= far_max_days)) {
    fail("far_min_days must exceed time_window_days and not exceed far_max_days");
  }
}

std::vector<std::string> SyntheticCorpus::ids() const {
  std::vector<std::string> out;
  out.reserve(requests.size() + offers.size());
  for (const auto& p : requests) out.push_back(p.id);
  for (const auto& p : offers) out.push_back(p.id);
  return out;
}

EmbeddingMatrix SyntheticCorpus::embeddings() const {
  EmbeddingMatrix out(0, request_embeddings.dim());
  for (std::size_t i = 0; i < request_embeddings.rows(); ++i) out.append(request_embeddings.row(i));
  for (std::size_t i = 0; i < offer_embeddings.rows(); ++i) out.append(offer_embeddings.row(i));
  return out;
}

SyntheticCorpus generate_synthetic(const GenSpec& spec) {
  spec.validate();
  return Generator(spec).run();
}

}  // namespace reliefmatch
