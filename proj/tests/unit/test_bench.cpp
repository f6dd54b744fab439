#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "reliefmatch/bench.hpp"
#include "reliefmatch/error.hpp"

using namespace reliefmatch;

namespace {

EmbeddingMatrix random_unit_matrix(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g;
  EmbeddingMatrix m(0, dim);
  std::vector<float> v(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : v) x = g(rng);
    normalize(v);
    m.append(v);
  }
  return m;
}

IndexConfig ivf(std::size_t partitions, std::size_t nprobe) {
  IndexConfig c;
  c.backend = IndexBackend::kIvf;
  c.ivf_partitions = partitions;
  c.ivf_nprobe = nprobe;
  return c;
}

}  // namespace

TEST(Bench, ExhaustiveAndFullProbeHaveUnitRecall) {
  const auto corpus = random_unit_matrix(4000, 32, 1);
  const auto queries = random_unit_matrix(60, 32, 2);
  BenchOptions opt;
  opt.k_values = {1, 10, 25};
  const auto rows = bench_indices(corpus, {IndexConfig{}, ivf(8, 1), ivf(8, 8)}, queries, opt);
  ASSERT_EQ(rows.size(), 9u);
  for (const auto& r : rows) {
    if (r.config.backend == IndexBackend::kExhaustive || r.config.ivf_nprobe == 8) {
      EXPECT_DOUBLE_EQ(r.recall, 1.0) << r.config.describe() << " k=" << r.k;
    } else {
      EXPECT_LT(r.recall, 1.0);
    }
    EXPECT_LE(r.index.min_ms, r.index.mean_ms);
    EXPECT_LE(r.index.mean_ms, r.index.max_ms);
    EXPECT_LE(r.search.min_ms, r.search.mean_ms);
    EXPECT_LE(r.search.mean_ms, r.search.max_ms);
    EXPECT_FALSE(r.target_hit_rate.has_value());
  }
  // Probing every list does strictly more work than probing one.
  for (std::size_t i = 0; i < 3; ++i) EXPECT_GE(rows[6 + i].search.mean_ms, rows[3 + i].search.mean_ms);
}

TEST(Bench, RecallIsSeedStable) {
  const auto corpus = random_unit_matrix(1500, 16, 3);
  const auto queries = random_unit_matrix(30, 16, 4);
  IndexConfig hnsw;
  hnsw.backend = IndexBackend::kHnsw;
  hnsw.hnsw_m = 4;
  hnsw.hnsw_ef_search = 8;
  IndexConfig pq = ivf(4, 2);
  pq.backend = IndexBackend::kIvfPq;
  BenchOptions opt;
  opt.k_values = {5, 20};
  const auto a = bench_indices(corpus, {hnsw, pq}, queries, opt);
  const auto b = bench_indices(corpus, {hnsw, pq}, queries, opt);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].recall, b[i].recall);
}

TEST(Bench, TargetsAndFormatting) {
  const auto corpus = random_unit_matrix(200, 8, 5);
  // Queries are corpus rows, so each target is its own row.
  std::vector<std::size_t> rows_{3, 50, 199};
  const auto queries = corpus.select(rows_);
  BenchOptions opt;
  opt.k_values = {1, 3};
  opt.targets = rows_;
  const auto rows = bench_indices(corpus, {IndexConfig{}, ivf(2, 1)}, queries, opt);
  EXPECT_DOUBLE_EQ(*rows[0].target_hit_rate, 1.0);

  const auto csv = bench_to_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "backend,params,k,index_ms_min,index_ms_max,index_ms_mean,search_ms_min,search_ms_max,"
            "search_ms_mean,recall,target_hit_rate");
  EXPECT_NE(csv.find("\nexhaustive,exhaustive,1,"), std::string::npos);
  EXPECT_NE(csv.find("\"ivf(part=2,np=1)\""), std::string::npos);

  const auto table = bench_to_table(rows);
  EXPECT_NE(table.find("k=1 search time"), std::string::npos);
  EXPECT_NE(table.find("k=3 search time"), std::string::npos);
  EXPECT_NE(table.find("ivf(part=2,np=1)"), std::string::npos);
  EXPECT_NE(table.find("acc."), std::string::npos);
  EXPECT_NE(table.find("--"), std::string::npos);
}

TEST(Bench, Preconditions) {
  const auto corpus = random_unit_matrix(50, 8, 6);
  const auto queries = random_unit_matrix(5, 8, 7);
  BenchOptions opt;
  opt.reps = 2;
  EXPECT_THROW(bench_indices(corpus, {IndexConfig{}}, queries, opt), Error);
  opt.reps = 3;
  EXPECT_THROW(bench_indices(corpus, {}, queries, opt), Error);
  opt.k_values = {};
  EXPECT_THROW(bench_indices(corpus, {IndexConfig{}}, queries, opt), Error);
  opt.k_values = {3};
  opt.targets = std::vector<std::size_t>{0};
  EXPECT_THROW(bench_indices(corpus, {IndexConfig{}}, queries, opt), Error);
  opt.targets.reset();
  EXPECT_THROW(bench_indices(corpus, {IndexConfig{}}, random_unit_matrix(5, 4, 8), opt), Error);
}

TEST(Bench, ConfigFile) {
  const auto path = std::filesystem::temp_directory_path() / "rm_bench_configs.txt";
  {
    std::ofstream out(path);
    out << "# backends\n"
           "backend=exhaustive\n"
           "\n"
           "backend=ivf partitions=3 nprobe=2\n"
           "backend=ivfpq partitions=3 nprobe=1 pq-m=16 pq_bits=4  # trailing\n"
           "backend=hnsw hnsw_m=16 ef-construction=16 ef_search=32 seed=9\n";
  }
  const auto configs = read_bench_configs(path.string(), IndexConfig{});
  ASSERT_EQ(configs.size(), 4u);
  EXPECT_EQ(configs[1].describe(), "ivf(part=3,np=2)");
  EXPECT_EQ(configs[2].pq_m, 16u);
  EXPECT_EQ(configs[3].hnsw_ef_construction, 16u);
  EXPECT_EQ(configs[3].seed, 9u);

  {
    std::ofstream out(path);
    out << "backend=ivf colour=blue\n";
  }
  try {
    read_bench_configs(path.string(), IndexConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat);
    EXPECT_NE(std::string(e.what()).find(":1:"), std::string::npos);
  }
  {
    std::ofstream out(path);
    out << "backend=ivf partitions=2 nprobe=3\n";
  }
  EXPECT_THROW(read_bench_configs(path.string(), IndexConfig{}), Error);
  std::filesystem::remove(path);

  IndexConfig c;
  EXPECT_FALSE(apply_index_setting(c, "nope", "1"));
  EXPECT_THROW(apply_index_setting(c, "partitions", "-1"), Error);
  EXPECT_THROW(apply_index_setting(c, "partitions", "3x"), Error);
}
