#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "reliefmatch/core.hpp"
#include "reliefmatch/index.hpp"

namespace reliefmatch {

struct TimeStats {
  double min_ms = 0.0;
  double max_ms = 0.0;
  double mean_ms = 0.0;

  static TimeStats of(const std::vector<double>& samples_ms);
};

struct BenchRow {
  IndexConfig config;
  std::size_t k = 0;
  TimeStats index;   // one sample per build
  TimeStats search;  // one sample per query per rep
  double recall = 0.0;  // overlap with the exhaustive top-k
  // Fraction of queries whose known target row is in the top-k; only when
  // targets were supplied.
  std::optional<double> target_hit_rate;
  std::vector<std::string> warnings;
};

struct BenchOptions {
  std::vector<std::size_t> k_values{25, 50, 100};
  std::size_t reps = 3;
  // Optional row of the expected answer for each query.
  std::optional<std::vector<std::size_t>> targets;
};

// For each config: build the index `reps` times, run one untimed warm-up
// pass over the queries, then time every query individually for `reps`
// passes, serially, on a monotonic clock. Recall is measured against an
// exhaustive index over the same corpus. Throws kInvalidArgument when
// reps < 3, k_values or configs are empty, or targets are misaligned.
std::vector<BenchRow> bench_indices(const EmbeddingMatrix& corpus,
                                    const std::vector<IndexConfig>& configs,
                                    const EmbeddingMatrix& queries, const BenchOptions& options);

// backend,params,k,index_ms_min,index_ms_max,index_ms_mean,search_ms_min,
// search_ms_max,search_ms_mean,recall,target_hit_rate
std::string bench_to_csv(const std::vector<BenchRow>& rows);

// One line per config; index time, then search time and recall per k, each
// time as "min--max (mean)".
std::string bench_to_table(const std::vector<BenchRow>& rows);

// Reads configs from a text file, one per line, as space-separated
// key=value pairs (backend=ivf partitions=3 nprobe=2 ...). Blank lines and
// '#' comments are skipped. Throws kFormat.
std::vector<IndexConfig> read_bench_configs(const std::string& path, const IndexConfig& defaults);

// Applies one key=value setting to a config. Keys: backend, partitions,
// nprobe, pq_m, pq_bits, hnsw_m, ef_construction, ef_search, kmeans_iters,
// seed. Returns false for an unknown key; throws kInvalidArgument on a bad
// value.
bool apply_index_setting(IndexConfig& config, const std::string& key, const std::string& value);

}  // namespace reliefmatch
