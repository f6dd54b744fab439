#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "../support/oracles.hpp"
#include "reliefmatch/error.hpp"
#include "reliefmatch/index.hpp"

using namespace reliefmatch;

namespace {

EmbeddingMatrix random_unit_matrix(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g;
  EmbeddingMatrix m(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = m.mutable_row(i);
    for (auto& x : row) x = g(rng);
    normalize(row);
  }
  return m;
}

IndexConfig config_for(IndexBackend b) {
  IndexConfig c;
  c.backend = b;
  return c;
}

// Naive double loop: every row scored, full sort by (similarity desc, row asc).
std::vector<SearchHit> brute_force(const EmbeddingMatrix& m, EmbeddingView q, std::size_t k) {
  std::vector<std::pair<long double, std::uint32_t>> all;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    all.push_back({oracle::dot(q, m.row(i)), static_cast<std::uint32_t>(i)});
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  std::vector<SearchHit> out;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) {
    out.push_back({all[i].second, static_cast<double>(all[i].first)});
  }
  return out;
}

void expect_sorted(const std::vector<SearchHit>& hits) {
  for (std::size_t i = 1; i < hits.size(); ++i) {
    EXPECT_TRUE(hits[i - 1].similarity > hits[i].similarity ||
                (hits[i - 1].similarity == hits[i].similarity && hits[i - 1].row < hits[i].row));
  }
}

constexpr IndexBackend kAll[] = {IndexBackend::kExhaustive, IndexBackend::kIvf,
                                 IndexBackend::kIvfPq, IndexBackend::kHnsw};

}  // namespace

TEST(Index, SingletonExhaustive) {
  const auto m = random_unit_matrix(1, 8, 1);
  const auto built = build_index(m, config_for(IndexBackend::kExhaustive));
  ASSERT_EQ(built.index->size(), 1u);
  const auto hits = built.index->search(m.row(0), 5);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].row, 0u);
  EXPECT_NEAR(hits[0].similarity, 1.0, 1e-6);
}

TEST(Index, IvfPostingListsPartitionTheCorpus) {
  const auto m = random_unit_matrix(300, 32, 2);
  const auto built = build_index(m, config_for(IndexBackend::kIvf));
  const auto sizes = built.index->summary().posting_list_sizes;
  ASSERT_EQ(sizes.size(), 3u);
  std::size_t total = 0;
  for (auto s : sizes) total += s;
  EXPECT_EQ(total, 300u);
}

TEST(Index, IvfPqLayout) {
  const auto m = random_unit_matrix(300, 64, 3);
  IndexConfig c = config_for(IndexBackend::kIvfPq);
  c.pq_m = 8;
  c.pq_bits = 4;
  const auto s = build_index(m, c).index->summary();
  EXPECT_EQ(s.code_bytes_per_vector, 8u);
  EXPECT_LE(s.codebook_size, 16u);
  EXPECT_EQ(s.subquantizers, 8u);
}

TEST(Index, BuildErrors) {
  const auto m = random_unit_matrix(2, 10, 4);
  auto code = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  EXPECT_EQ(code([&] { build_index(m, config_for(IndexBackend::kIvf)); }),
            ErrorCode::kTooFewVectors);
  EXPECT_EQ(code([&] { build_index(EmbeddingMatrix(0, 4), config_for(IndexBackend::kHnsw)); }),
            ErrorCode::kTooFewVectors);
  IndexConfig pq = config_for(IndexBackend::kIvfPq);
  pq.ivf_partitions = 1;
  pq.ivf_nprobe = 1;
  pq.pq_m = 3;
  EXPECT_EQ(code([&] { build_index(m, pq); }), ErrorCode::kDimNotDivisible);
  IndexConfig bad = config_for(IndexBackend::kIvf);
  bad.ivf_nprobe = 4;
  EXPECT_EQ(code([&] { bad.validate(); }), ErrorCode::kInvalidArgument);
  bad = config_for(IndexBackend::kIvfPq);
  bad.pq_bits = 9;
  EXPECT_EQ(code([&] { bad.validate(); }), ErrorCode::kInvalidArgument);
}

TEST(Index, DegenerateKMeansWarns) {
  EmbeddingMatrix m(4, 2, {1, 0, 1, 0, 1, 0, 1, 0});
  const auto built = build_index(m, config_for(IndexBackend::kIvf));
  ASSERT_FALSE(built.stats.warnings.empty());
  EXPECT_NE(built.stats.warnings[0].find("DegenerateKMeans"), std::string::npos);
  EXPECT_EQ(built.index->search(m.row(0), 4).size(), 4u);
}

TEST(Index, SearchErrors) {
  const auto m = random_unit_matrix(10, 8, 5);
  for (auto b : kAll) {
    IndexConfig c = config_for(b);
    c.pq_m = 4;
    const auto built = build_index(m, c);
    std::vector<float> wrong(7, 0.1f);
    EXPECT_THROW(built.index->search(wrong, 3), Error);
    EXPECT_THROW(built.index->search(m.row(0), 0), Error);
  }
}

TEST(Index, SelfRetrievalEveryBackend) {
  const auto m = random_unit_matrix(500, 32, 6);
  for (auto b : kAll) {
    IndexConfig c = config_for(b);
    c.ivf_nprobe = c.ivf_partitions;
    const auto built = build_index(m, c);
    for (std::size_t q : {0u, 17u, 499u}) {
      const auto hits = built.index->search(m.row(q), 5);
      ASSERT_FALSE(hits.empty());
      expect_sorted(hits);
      if (b == IndexBackend::kIvfPq) continue;
      EXPECT_EQ(hits[0].row, q) << to_string(b);
      EXPECT_NEAR(hits[0].similarity, 1.0, 1e-6);
    }
  }
}

TEST(IndexProperty, ExhaustiveEqualsNaiveOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = random_unit_matrix(200 + 150 * seed, 24, 100 + seed);
    const auto queries = random_unit_matrix(20, 24, 200 + seed);
    const auto built = build_index(m, config_for(IndexBackend::kExhaustive));
    for (std::size_t q = 0; q < queries.rows(); ++q) {
      const auto got = built.index->search(queries.row(q), 50);
      const auto want = brute_force(m, queries.row(q), 50);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].row, want[i].row);
        EXPECT_NEAR(got[i].similarity, want[i].similarity, 1e-12);
      }
    }
  }
}

TEST(IndexProperty, TiesBrokenByRow) {
  EmbeddingMatrix m(6, 2, {1, 0, 0, 1, 1, 0, 0, 1, 1, 0, 0, 1});
  const std::vector<float> q{1, 0};
  for (auto b : {IndexBackend::kExhaustive, IndexBackend::kHnsw}) {
    const auto hits = build_index(m, config_for(b)).index->search(q, 6);
    ASSERT_EQ(hits.size(), 6u);
    EXPECT_EQ(hits[0].row, 0u);
    EXPECT_EQ(hits[1].row, 2u);
    EXPECT_EQ(hits[2].row, 4u);
  }
}

TEST(IndexProperty, FullProbeEqualsExhaustive) {
  const auto m = random_unit_matrix(1000, 32, 7);
  const auto q = random_unit_matrix(30, 32, 8);
  const auto exact = build_index(m, config_for(IndexBackend::kExhaustive));
  IndexConfig c = config_for(IndexBackend::kIvf);
  c.ivf_partitions = 5;
  c.ivf_nprobe = 5;
  const auto ivf = build_index(m, c);
  for (std::size_t i = 0; i < q.rows(); ++i) {
    EXPECT_EQ(ivf.index->search(q.row(i), 20), exact.index->search(q.row(i), 20));
  }
  EXPECT_EQ(recall_at_k(*ivf.index, *exact.index, q, 20), 1.0);
  EXPECT_EQ(recall_at_k(*exact.index, *exact.index, q, 20), 1.0);
}

TEST(IndexProperty, RecallMonotoneInNprobe) {
  const auto m = random_unit_matrix(2000, 16, 9);
  const auto q = random_unit_matrix(100, 16, 10);
  const auto exact = build_index(m, config_for(IndexBackend::kExhaustive));
  IndexConfig c = config_for(IndexBackend::kIvf);
  c.ivf_partitions = 8;
  c.ivf_nprobe = 1;
  const auto built = build_index(m, c);
  double prev = -1.0;
  for (std::uint32_t np = 1; np <= 8; ++np) {
    SearchOptions o;
    o.nprobe = np;
    const double r = recall_at_k(*built.index, *exact.index, q, 10, o);
    EXPECT_GE(r, prev) << "np=" << np;
    prev = r;
  }
  EXPECT_EQ(prev, 1.0);
}

TEST(IndexProperty, HnswRecallAndGraphInvariants) {
  const auto m = random_unit_matrix(5000, 64, 11);
  const auto q = random_unit_matrix(100, 64, 12);
  const auto exact = build_index(m, config_for(IndexBackend::kExhaustive));
  IndexConfig c = config_for(IndexBackend::kHnsw);
  const auto built = build_index(m, c);
  EXPECT_GE(recall_at_k(*built.index, *exact.index, q, 10), 0.90);
  const auto s = built.index->summary();
  EXPECT_TRUE(s.hnsw_levels_nested);
  ASSERT_FALSE(s.hnsw_max_degree.empty());
  EXPECT_EQ(s.hnsw_nodes_per_level[0], 5000u);
  EXPECT_LE(s.hnsw_max_degree[0], 2u * c.hnsw_m);
  for (std::size_t l = 1; l < s.hnsw_max_degree.size(); ++l) {
    EXPECT_LE(s.hnsw_max_degree[l], c.hnsw_m);
    EXPECT_LE(s.hnsw_nodes_per_level[l], s.hnsw_nodes_per_level[l - 1]);
  }
}

TEST(IndexProperty, RecallDenominatorAndMismatch) {
  const auto m = random_unit_matrix(5, 8, 13);
  const auto other = random_unit_matrix(6, 8, 13);
  const auto a = build_index(m, config_for(IndexBackend::kExhaustive));
  const auto b = build_index(other, config_for(IndexBackend::kExhaustive));
  EXPECT_THROW(recall_at_k(*a.index, *b.index, m, 3), Error);
  EXPECT_EQ(recall_at_k(*a.index, *a.index, m, 100), 1.0);
}

TEST(IndexProperty, DeterministicBuildsAndRoundTrip) {
  const auto m = random_unit_matrix(800, 32, 14);
  const auto q = random_unit_matrix(25, 32, 15);
  for (auto b : kAll) {
    IndexConfig c = config_for(b);
    c.seed = 77;
    const auto one = build_index(m, c);
    const auto two = build_index(m, c);
    std::stringstream s1, s2;
    save_index(s1, *one.index);
    save_index(s2, *two.index);
    EXPECT_EQ(s1.str(), s2.str()) << to_string(b);
    EXPECT_EQ(s1.str().substr(0, 8), "CREMAIDX");
    EXPECT_EQ(static_cast<std::uint8_t>(s1.str()[12]), static_cast<std::uint8_t>(b));

    const auto loaded = load_index(s1);
    EXPECT_EQ(loaded->backend(), b);
    EXPECT_EQ(loaded->size(), m.rows());
    EXPECT_EQ(loaded->config().seed, 77u);
    for (std::size_t i = 0; i < q.rows(); ++i) {
      EXPECT_EQ(loaded->search(q.row(i), 10), one.index->search(q.row(i), 10)) << to_string(b);
    }
  }
}

TEST(IndexPersistence, RejectsCorruptFiles) {
  std::stringstream bad("NOTANIDX");
  EXPECT_THROW(load_index(bad), Error);
  const auto m = random_unit_matrix(50, 8, 16);
  std::stringstream ss;
  save_index(ss, *build_index(m, config_for(IndexBackend::kHnsw)).index);
  std::string bytes = ss.str();
  bytes.resize(bytes.size() / 2);
  std::stringstream cut(bytes);
  EXPECT_THROW(load_index(cut), Error);
}

TEST(IndexConfig, DescribeAndParse) {
  IndexConfig c = config_for(IndexBackend::kIvfPq);
  EXPECT_EQ(c.describe(), "ivfpq(part=3,np=2,m=8,bits=4)");
  EXPECT_EQ(parse_index_backend("hnsw"), IndexBackend::kHnsw);
  EXPECT_THROW(parse_index_backend("faiss"), Error);
}
