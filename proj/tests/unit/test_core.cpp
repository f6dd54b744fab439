#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "reliefmatch/core.hpp"
#include "reliefmatch/error.hpp"

using namespace reliefmatch;

namespace {

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no reliefmatch::Error thrown";
  return ErrorCode::kIo;
}

Post make_post() {
  Post p;
  p.id = "p1";
  p.text = "need water";
  return p;
}

}  // namespace

TEST(GeoPoint, AcceptsBoundsAndRejectsOutOfRange) {
  EXPECT_NO_THROW(GeoPoint(90, 180));
  EXPECT_NO_THROW(GeoPoint(-90, -180));
  EXPECT_EQ(code_of([] { GeoPoint(91, 0); }), ErrorCode::kInvalidRange);
  EXPECT_EQ(code_of([] { GeoPoint(0, -180.5); }), ErrorCode::kInvalidRange);
  EXPECT_EQ(code_of([] { GeoPoint(std::nan(""), 0); }), ErrorCode::kInvalidRange);
}

TEST(ValidatePost, MelbourneWithGeoIsAccepted) {
  Post p = make_post();
  p.geo = GeoPoint(-37.81, 144.96);
  EXPECT_EQ(&validate_post(p, true, false), &p);
}

TEST(ValidatePost, MissingGeoAndTime) {
  Post p = make_post();
  EXPECT_EQ(code_of([&] { validate_post(p, true, false); }), ErrorCode::kMissingGeo);
  EXPECT_EQ(code_of([&] { validate_post(p, false, true); }), ErrorCode::kMissingTime);
  p.timestamp = 0;
  EXPECT_EQ(code_of([&] { validate_post(p, false, true); }), ErrorCode::kMissingTime);
  p.timestamp = 1700000000;
  EXPECT_NO_THROW(validate_post(p, false, true));
}

TEST(ValidatePost, ResourceOnlyOnRequestOrOffer) {
  Post p = make_post();
  p.resource = Resource::kFood;
  p.kind = PostKind::kOther;
  EXPECT_EQ(code_of([&] { validate_post(p, false, false); }), ErrorCode::kInvalidArgument);
  p.kind = PostKind::kRequest;
  EXPECT_NO_THROW(validate_post(p, false, false));
}

TEST(ValidatePost, EmptyIdOrText) {
  Post p = make_post();
  p.id.clear();
  EXPECT_EQ(code_of([&] { validate_post(p, false, false); }), ErrorCode::kInvalidArgument);
  p = make_post();
  p.text.clear();
  EXPECT_EQ(code_of([&] { validate_post(p, false, false); }), ErrorCode::kInvalidArgument);
}

TEST(Enums, RoundTripNames) {
  for (auto r : kAllResources) EXPECT_EQ(parse_resource(to_string(r)), r);
  for (auto k : {PostKind::kUnlabeled, PostKind::kPotentialCandidate, PostKind::kRequest,
                 PostKind::kOffer, PostKind::kOther}) {
    EXPECT_EQ(parse_post_kind(to_string(k)), k);
  }
  EXPECT_EQ(parse_scoring_mode("TTS"), ScoringMode::kTextTemporalSpatial);
  EXPECT_EQ(parse_scoring_mode("ts"), ScoringMode::kTextSpatial);
  EXPECT_EQ(parse_scoring_mode("t"), ScoringMode::kText);
  EXPECT_EQ(code_of([] { parse_resource("water"); }), ErrorCode::kFormat);
}

TEST(Normalize, ZeroVectorIsAnError) {
  std::vector<float> v(4, 0.0f);
  EXPECT_EQ(code_of([&] { normalize(v); }), ErrorCode::kZeroVector);
}

TEST(NormalizeProperty, UnitNormAndIdempotent) {
  std::mt19937_64 rng(7);
  std::normal_distribution<float> g(0.0f, 3.0f);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t dim = 1 + rng() % 300;
    std::vector<float> v(dim);
    for (auto& x : v) x = g(rng);
    if (l2_norm(v) == 0.0) continue;
    const auto once = normalized(v);
    EXPECT_LE(std::abs(l2_norm(once) - 1.0), 1e-4);
    const auto twice = normalized(once);
    for (std::size_t i = 0; i < dim; ++i) EXPECT_NEAR(twice[i], once[i], 1e-6);
  }
}

TEST(EmbeddingMatrix, AppendSelectAndRows) {
  EmbeddingMatrix m;
  m.append(std::vector<float>{1, 0});
  m.append(std::vector<float>{0, 1});
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.dim(), 2u);
  const std::size_t pick[] = {1};
  const auto s = m.select(pick);
  EXPECT_EQ(s.rows(), 1u);
  EXPECT_EQ(s.row(0)[1], 1.0f);
  EXPECT_EQ(code_of([&] { m.append(std::vector<float>{1, 2, 3}); }),
            ErrorCode::kDimensionMismatch);
}

TEST(MatchParams, Invariants) {
  MatchParams p;
  EXPECT_NO_THROW(p.validate());
  p.top_n = p.k + 1;
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::kInvalidArgument);
  p = {};
  p.delta_time_days = 0;
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::kNonPositiveDelta);
  p = {};
  p.delta_distance_km = -1;
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::kNonPositiveDelta);
  p = {};
  p.ts_alpha = 1.5;
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::kInvalidArgument);
  p = {};
  p.earth_radius_km = 0;
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::kInvalidArgument);
}
