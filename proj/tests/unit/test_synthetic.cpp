#include <gtest/gtest.h>

#include <map>

#include "../support/oracles.hpp"
#include "reliefmatch/error.hpp"
#include "reliefmatch/eval.hpp"
#include "reliefmatch/match.hpp"
#include "reliefmatch/synthetic.hpp"

using namespace reliefmatch;

namespace {

oracle::Side side(const Post& p) { return {*p.timestamp, p.geo->lat(), p.geo->lon()}; }

double km(const Post& a, const Post& b) {
  return oracle::haversine_asin_km(a.geo->lat(), a.geo->lon(), b.geo->lat(), b.geo->lon(), 6371.0);
}

double days(const Post& a, const Post& b) {
  return std::abs(static_cast<double>(*a.timestamp - *b.timestamp)) / 86400.0;
}

const CityCenter& center_named(const std::string& name) {
  static const auto centers = default_centers();
  for (const auto& c : centers) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("no center " + name);
}

double km_to_center(const Post& p, const std::string& center) {
  const auto& c = center_named(center);
  return oracle::haversine_asin_km(p.geo->lat(), p.geo->lon(), c.point.lat(), c.point.lon(), 6371.0);
}

std::map<std::string, std::size_t> offer_rows(const SyntheticCorpus& c) {
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < c.offers.size(); ++i) out[c.offers[i].id] = i;
  return out;
}

GenSpec small_spec(std::size_t pairs, std::size_t distractors, std::uint64_t seed = 7) {
  GenSpec s;
  s.n_pairs = pairs;
  s.n_distractors_per_pair = distractors;
  s.embedding_dim = 64;
  s.seed = seed;
  return s;
}

}  // namespace

TEST(Synthetic, MinimalSpec) {
  const auto c = generate_synthetic(small_spec(1, 0));
  ASSERT_EQ(c.requests.size(), 1u);
  ASSERT_EQ(c.offers.size(), 1u);
  EXPECT_EQ(c.truth.size(), 1u);
  EXPECT_EQ(c.truth.offer_for(c.requests[0].id), c.offers[0].id);
  EXPECT_EQ(c.offer_classes[0], OfferClass::kTrue);
  EXPECT_EQ(c.requests[0].kind, PostKind::kRequest);
  EXPECT_EQ(c.offers[0].kind, PostKind::kOffer);
  EXPECT_NO_THROW(c.truth.check_against(c.requests, c.offers));
  const auto ids = c.ids();
  ASSERT_EQ(ids.size(), 2u);
  EXPECT_EQ(c.embeddings().rows(), 2u);
  EXPECT_NE(c.requests[0].text.find("role=request"), std::string::npos);
}

TEST(Synthetic, PostsStayInsideTheirCenterWindow) {
  const auto plain = generate_synthetic(small_spec(50, 0));
  for (const auto& p : plain.requests) EXPECT_LT(km_to_center(p, *p.region), 10.0) << p.id;
  for (const auto& p : plain.offers) EXPECT_LT(km_to_center(p, *p.region), 10.0) << p.id;

  std::map<std::string, std::size_t> per_center;
  for (const auto& p : plain.requests) ++per_center[*p.region];
  EXPECT_EQ(per_center.size(), 5u);
  for (const auto& [name, n] : per_center) EXPECT_EQ(n, 10u) << name;

  // Only the deliberately displaced classes leave the window.
  const auto c = generate_synthetic(small_spec(50, 4));
  for (std::size_t i = 0; i < c.offers.size(); ++i) {
    const bool displaced = c.offer_classes[i] == OfferClass::kSpatialOut ||
                           c.offer_classes[i] == OfferClass::kHighCosFar;
    if (!displaced) EXPECT_LT(km_to_center(c.offers[i], c.offer_centers[i]), 10.0) << c.offers[i].id;
  }
}

TEST(Synthetic, TruePairsInsideWindowsWithPositiveWeights) {
  const auto c = generate_synthetic(small_spec(100, 4));
  const auto rows = offer_rows(c);
  for (const auto& r : c.requests) {
    const auto& o = c.offers[rows.at(*c.truth.offer_for(r.id))];
    EXPECT_LE(days(r, o), 3.0);
    EXPECT_LT(km(r, o), 10.0);
    EXPECT_GT(oracle::ramp(days(r, o), 30.0), 0.0);
    EXPECT_GT(oracle::ramp(km(r, o), 10.0), 0.0);
    EXPECT_EQ(r.resource, o.resource);
  }
}

TEST(Synthetic, DistractorClassesHoldRelativeToTheirRequest) {
  const auto spec = small_spec(60, 8);
  const auto c = generate_synthetic(spec);
  std::map<std::string, std::size_t> req_row;
  for (std::size_t i = 0; i < c.requests.size(); ++i) req_row[c.requests[i].id] = i;
  const auto rows = offer_rows(c);
  std::map<OfferClass, std::size_t> seen;
  for (std::size_t i = 0; i < c.offers.size(); ++i) {
    const auto& o = c.offers[i];
    const std::string pair = o.id.substr(4, 6);
    const std::size_t ri = req_row.at("req-" + pair);
    const auto& r = c.requests[ri];
    const auto& t = c.offers[rows.at("off-" + pair)];
    const double cos_o = oracle::cosine(c.request_embeddings.row(ri), c.offer_embeddings.row(i));
    const double cos_t =
        oracle::cosine(c.request_embeddings.row(ri), c.offer_embeddings.row(rows.at(t.id)));
    ++seen[c.offer_classes[i]];
    switch (c.offer_classes[i]) {
      case OfferClass::kTrue:
        EXPECT_GE(cos_o, spec.true_cos_min - 1e-6);
        EXPECT_LE(cos_o, spec.true_cos_max + 1e-6);
        break;
      case OfferClass::kTemporalOut:
        EXPECT_GE(days(r, o), 45.0);
        EXPECT_GT(cos_o, cos_t);
        break;
      case OfferClass::kSpatialOut:
        EXPECT_GE(km(r, o), 50.0 - 1e-6);
        EXPECT_LT(days(r, o), 3.0);
        EXPECT_GT(cos_o, cos_t);
        break;
      case OfferClass::kHighCosFar:
        EXPECT_GE(km(r, o), 50.0 - 1e-6);
        EXPECT_GE(days(r, o), 45.0);
        EXPECT_GT(cos_o, cos_t);
        break;
      case OfferClass::kLowSimIn:
        EXPECT_LE(cos_o, cos_t - spec.margin + 1e-6);
        EXPECT_GE(km(r, o), km(r, t) - 1e-6);
        EXPECT_GE(days(r, o), days(r, t));
        EXPECT_LT(days(r, o), 3.0);
        EXPECT_LT(km(r, o), 10.0);
        break;
    }
  }
  EXPECT_EQ(seen[OfferClass::kTrue], 60u);
  for (auto cls : {OfferClass::kTemporalOut, OfferClass::kSpatialOut, OfferClass::kHighCosFar,
                   OfferClass::kLowSimIn}) {
    EXPECT_EQ(seen[cls], 120u) << to_string(cls);
  }
}

// The planted offer is the unique top TTS score over the whole corpus,
// checked pairwise without the index or the library scorer.
TEST(SyntheticProperty, SoundUnderBruteForceTts) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto c = generate_synthetic(small_spec(120, 5, seed));
    std::vector<oracle::Item> items;
    for (std::size_t i = 0; i < c.offers.size(); ++i) {
      items.push_back({c.offers[i].id, c.offer_embeddings.row(i), side(c.offers[i])});
    }
    for (std::size_t i = 0; i < c.requests.size(); ++i) {
      const oracle::Item req{c.requests[i].id, c.request_embeddings.row(i), side(c.requests[i])};
      const auto ranked = oracle::brute_force(req, items, oracle::Mode::kTTS, 30.0, 10.0, 0.5, 6371.0, 2);
      ASSERT_FALSE(ranked.empty());
      EXPECT_EQ(ranked[0].id, *c.truth.offer_for(req.id)) << "seed " << seed;
      if (ranked.size() > 1) EXPECT_GT(ranked[0].score, ranked[1].score);
    }
  }
}

TEST(SyntheticProperty, Deterministic) {
  const auto a = generate_synthetic(small_spec(40, 3, 99));
  const auto b = generate_synthetic(small_spec(40, 3, 99));
  const auto d = generate_synthetic(small_spec(40, 3, 100));
  EXPECT_EQ(a.ids(), b.ids());
  EXPECT_EQ(a.embeddings().values(), b.embeddings().values());
  for (std::size_t i = 0; i < a.offers.size(); ++i) {
    EXPECT_EQ(a.offers[i].timestamp, b.offers[i].timestamp);
    EXPECT_EQ(a.offers[i].geo, b.offers[i].geo);
    EXPECT_EQ(a.offers[i].text, b.offers[i].text);
  }
  EXPECT_NE(a.embeddings().values(), d.embeddings().values());
}

TEST(SyntheticProperty, AccuracyOrderingOnAdversarialCorpus) {
  auto spec = small_spec(200, 5, 21);
  spec.distractor_classes = {OfferClass::kTemporalOut, OfferClass::kSpatialOut,
                             OfferClass::kHighCosFar};
  const auto c = generate_synthetic(spec);
  OfferCorpus corpus(c.offers, c.offer_embeddings, IndexConfig{});
  std::map<ScoringMode, double> top1;
  for (auto mode : {ScoringMode::kText, ScoringMode::kTextSpatial, ScoringMode::kTextTemporalSpatial}) {
    MatchParams p;
    p.mode = mode;
    const auto run = match_all(c.requests, c.request_embeddings, corpus, p);
    top1[mode] = topn_accuracy(run.results, c.truth, 1);
  }
  EXPECT_DOUBLE_EQ(top1[ScoringMode::kTextTemporalSpatial], 1.0);
  EXPECT_GE(top1[ScoringMode::kTextTemporalSpatial], top1[ScoringMode::kTextSpatial]);
  EXPECT_GE(top1[ScoringMode::kTextSpatial], top1[ScoringMode::kText]);
  EXPECT_LE(top1[ScoringMode::kText], 0.5);
}

TEST(SyntheticProperty, LargerCandidatePoolNeverHurtsTts) {
  const auto c = generate_synthetic(small_spec(200, 5, 22));
  OfferCorpus corpus(c.offers, c.offer_embeddings, IndexConfig{});
  double prev = -1.0;
  for (std::size_t k : {10u, 25u, 50u, 100u}) {
    MatchParams p;
    p.k = k;
    const double acc = topn_accuracy(match_all(c.requests, c.request_embeddings, corpus, p).results, c.truth, 3);
    EXPECT_GE(acc, prev) << "k=" << k;
    prev = acc;
  }
}

TEST(Synthetic, SpecValidation) {
  auto bad = [](auto mutate) {
    GenSpec s;
    mutate(s);
    try {
      s.validate();
    } catch (const Error& e) {
      return e.code() == ErrorCode::kInvalidArgument;
    }
    return false;
  };
  EXPECT_TRUE(bad([](GenSpec& s) { s.n_pairs = 0; }));
  EXPECT_TRUE(bad([](GenSpec& s) { s.time_window_days = 0; }));
  EXPECT_TRUE(bad([](GenSpec& s) { s.distance_window_km = -1; }));
  EXPECT_TRUE(bad([](GenSpec& s) { s.centers.clear(); }));
  EXPECT_TRUE(bad([](GenSpec& s) { s.embedding_dim = 3; }));
  EXPECT_TRUE(bad([](GenSpec& s) { s.distractor_classes = {OfferClass::kTrue}; }));
  EXPECT_TRUE(bad([](GenSpec& s) { s.far_min_km = 5; }));
  EXPECT_TRUE(bad([](GenSpec& s) { s.true_cos_max = 0.95; }));
  EXPECT_NO_THROW(GenSpec{}.validate());
  EXPECT_EQ(parse_offer_class("low_sim_in"), OfferClass::kLowSimIn);
  EXPECT_THROW(parse_offer_class("nope"), Error);
}

TEST(Synthetic, ImpossibleIsolationIsReported) {
  auto s = small_spec(40, 0);
  s.centers = {default_centers()[0]};
  s.embedding_dim = 4;  // one shared topic
  s.time_span_days = 10.0;
  try {
    generate_synthetic(s);
    FAIL() << "expected failure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}
