#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "reliefmatch/error.hpp"
#include "reliefmatch/io.hpp"

using namespace reliefmatch;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("rm_io_" + name);
}

}  // namespace

TEST(PostJson, RoundTrip) {
  Post p;
  p.id = "r1";
  p.text = "need \"water\" \xC3\xA9";
  p.lang = "en";
  p.timestamp = 1700000000;
  p.geo = GeoPoint(-37.81, 144.96);
  p.kind = PostKind::kRequest;
  p.resource = Resource::kFood;
  p.country = "Australia";
  const auto line = post_to_json_line(p);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  const auto back = post_from_json_line(line);
  EXPECT_EQ(back.id, p.id);
  EXPECT_EQ(back.text, p.text);
  EXPECT_EQ(back.timestamp, p.timestamp);
  EXPECT_EQ(back.geo, p.geo);
  EXPECT_EQ(back.kind, p.kind);
  EXPECT_EQ(back.resource, p.resource);
  EXPECT_EQ(back.country, p.country);
  EXPECT_FALSE(back.region.has_value());
  EXPECT_EQ(post_to_json_line(back), line);
}

TEST(PostJson, NullGeoAndDefaults) {
  const auto p = post_from_json_line(R"({"id":"x","text":"t","lat":null,"lon":null,"extra":1})");
  EXPECT_FALSE(p.geo.has_value());
  EXPECT_FALSE(p.timestamp.has_value());
  EXPECT_EQ(p.lang, "und");
  EXPECT_EQ(p.kind, PostKind::kUnlabeled);
}

TEST(PostJson, RejectsMalformed) {
  EXPECT_THROW(post_from_json_line("{not json"), Error);
  EXPECT_THROW(post_from_json_line(R"({"id":"x","text":"t","lat":1.0,"lon":null})"), Error);
  EXPECT_THROW(post_from_json_line(R"({"id":"x","text":"t","ts":1.5})"), Error);
  EXPECT_THROW(post_from_json_line(R"({"id":"x","text":"t","lat":95,"lon":0})"), Error);
  EXPECT_THROW(post_from_json_line(R"({"text":"t"})"), Error);
}

TEST(Embeddings, BinaryLayoutIsExact) {
  EmbeddingMatrix m(3, 2, {1, 0, 0, 1, 0.6f, 0.8f});
  std::stringstream ss;
  write_embeddings(ss, m);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 20u + 3 * 2 * 4);
  EXPECT_EQ(bytes.substr(0, 8), "CREMAEMB");
  EXPECT_EQ(bytes[8], 1);   // version, little-endian
  EXPECT_EQ(bytes[12], 3);  // count
  EXPECT_EQ(bytes[16], 2);  // dim
  // 1.0f = 0x3F800000 little-endian.
  EXPECT_EQ(static_cast<unsigned char>(bytes[20 + 3]), 0x3F);
  EXPECT_EQ(static_cast<unsigned char>(bytes[20 + 2]), 0x80);
  const auto back = read_embeddings(ss);
  EXPECT_EQ(back.values(), m.values());
}

TEST(Embeddings, RejectsBadMagicAndTruncation) {
  std::stringstream bad("NOTMAGIC........");
  EXPECT_THROW(read_embeddings(bad), Error);
  EmbeddingMatrix m(2, 2, {1, 0, 0, 1});
  std::stringstream ss;
  write_embeddings(ss, m);
  std::string s = ss.str();
  s.resize(s.size() - 3);
  std::stringstream cut(s);
  EXPECT_THROW(read_embeddings(cut), Error);
}

TEST(EmbeddingStore, JoinByIdNormalizesAndReportsMissing) {
  const auto emb = temp_path("e.bin");
  const auto ids = temp_path("e.ids");
  write_embedding_file(emb, EmbeddingMatrix(2, 2, {3, 4, 0, 2}));
  write_id_file(ids, {"a", "b"});
  const auto store = EmbeddingStore::load(emb, ids);
  ASSERT_TRUE(store.find("a").has_value());
  EXPECT_FLOAT_EQ((*store.find("a"))[0], 0.6f);
  EXPECT_FLOAT_EQ((*store.find("b"))[1], 1.0f);
  EXPECT_FALSE(store.find("c").has_value());

  Post pa, pc, pd;
  pa.id = "a";
  pc.id = "c";
  pd.id = "d";
  try {
    store.gather({pa, pc, pd});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmbeddingMissing);
    const std::string what = e.what();
    EXPECT_NE(what.find("c"), std::string::npos);
    EXPECT_NE(what.find("d"), std::string::npos);
  }
  EXPECT_EQ(store.gather({pa}).rows(), 1u);
  std::filesystem::remove(emb);
  std::filesystem::remove(ids);
}

TEST(EmbeddingStore, CountMismatchAndDuplicateIds) {
  EXPECT_THROW(EmbeddingStore({"a"}, EmbeddingMatrix(2, 1, {1, 1})), Error);
  EXPECT_THROW(EmbeddingStore({"a", "a"}, EmbeddingMatrix(2, 1, {1, 1})), Error);
}
