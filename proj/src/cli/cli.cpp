#include "cli/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "reliefmatch/bench.hpp"
#include "reliefmatch/classify.hpp"
#include "reliefmatch/error.hpp"
#include "reliefmatch/eval.hpp"
#include "reliefmatch/filter.hpp"
#include "reliefmatch/index.hpp"
#include "reliefmatch/io.hpp"
#include "reliefmatch/match.hpp"
#include "reliefmatch/preprocess.hpp"
#include "reliefmatch/synthetic.hpp"

namespace reliefmatch::cli {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr const char* kProgram = "reliefmatch";

// A bad flag value or config entry; reported with exit code 1.
struct UsageError : std::runtime_error {
  UsageError(std::string flag, const std::string& what)
      : std::runtime_error(what), flag(std::move(flag)) {}
  std::string flag;
};

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  const Globals& globals;
  const CLI::App& command;
  bool data_phase = false;
};

// Rethrows library validation errors as usage errors naming `flag`.
template <class Fn>
void check_flag(const std::string& flag, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    throw UsageError(flag, e.what());
  }
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

// Every long option of `app` and its parent with its final value.
ordered_json resolved_config(const CLI::App& app) {
  ordered_json j;
  auto add = [&](const CLI::App& a) {
    for (const CLI::Option* opt : a.get_options()) {
      const auto& names = opt->get_lnames();
      if (names.empty() || names.front() == "help" || names.front() == "help-all" ||
          names.front() == "config") {
        continue;
      }
      if (opt->get_expected_min() == 0) {
        j[names.front()] = opt->count() > 0;
      } else if (opt->count() > 0) {
        j[names.front()] = join(opt->results(), ",");
      } else {
        j[names.front()] = opt->get_default_str();
      }
    }
  };
  if (app.get_parent()) add(*app.get_parent());
  add(app);
  return j;
}

void log_run(Context& ctx, ordered_json summary) {
  ordered_json line;
  line["command"] = ctx.command.get_name();
  line["config"] = resolved_config(ctx.command);
  for (auto& [k, v] : summary.items()) line[k] = v;
  ctx.err << line.dump() << '\n';
}

// --- flag groups ----------------------------------------------------------

struct IndexFlags {
  std::string backend = "exhaustive";
  IndexConfig config;

  void add(CLI::App* app) {
    app->add_option("--backend", backend, "exhaustive|ivf|ivfpq|hnsw")
        ->check(CLI::IsMember({"exhaustive", "ivf", "ivfpq", "hnsw"}));
    app->add_option("--partitions", config.ivf_partitions, "IVF partitions");
    app->add_option("--nprobe", config.ivf_nprobe, "IVF partitions probed per query");
    app->add_option("--pq-m", config.pq_m, "PQ subspaces");
    app->add_option("--pq-bits", config.pq_bits, "bits per PQ code (1-8)");
    app->add_option("--hnsw-m", config.hnsw_m, "HNSW max degree");
    app->add_option("--ef-construction", config.hnsw_ef_construction, "HNSW build beam");
    app->add_option("--ef-search", config.hnsw_ef_search, "HNSW search beam");
    app->add_option("--kmeans-iters", config.kmeans_iters, "Lloyd iterations for k-means");
  }

  IndexConfig resolve(const Globals& g) {
    config.backend = parse_index_backend(backend);
    if (g.seed) config.seed = *g.seed;
    check_flag("--backend", [&] { config.validate(); });
    return config;
  }
};

struct MatchFlags {
  std::string mode = "tts";
  MatchParams params;

  void add(CLI::App* app) {
    app->add_option("--mode", mode, "t|ts|tts")->check(CLI::IsMember({"t", "ts", "tts"}));
    app->add_option("--delta-time", params.delta_time_days, "temporal window, days");
    app->add_option("--delta-distance", params.delta_distance_km, "spatial window, km");
    app->add_option("--k", params.k, "candidates retrieved per request");
    app->add_option("--top-n", params.top_n, "matches kept per request");
    app->add_option("--ts-alpha", params.ts_alpha, "text weight in ts mode");
    app->add_option("--earth-radius", params.earth_radius_km, "sphere radius, km");
    app->add_flag("--filter-resource", params.filter_resource,
                  "search only offers of the request's resource category");
  }

  MatchParams resolve() {
    params.mode = parse_scoring_mode(mode);
    check_flag("--top-n", [&] { params.validate(); });
    return params;
  }
};

// --- subcommands ----------------------------------------------------------

struct FilterCmd {
  std::string in, out, patterns;
  bool no_preprocess = false;

  void add(CLI::App* app) {
    app->add_option("--in", in, "posts JSONL")->required();
    app->add_option("--out", out, "candidates JSONL (posts plus matched_ids)")->required();
    app->add_option("--patterns", patterns, "extra patterns, one regex per line; ids follow 5");
    app->add_flag("--no-preprocess", no_preprocess, "texts are already preprocessed");
  }

  void run(Context& ctx) {
    RegexSet regexes = RegexSet::defaults();
    ctx.data_phase = true;
    if (!patterns.empty()) {
      regexes = regexes.extended(RegexSet::read_pattern_file(patterns, regexes.max_id() + 1));
    }
    auto posts = read_posts(in);
    if (!no_preprocess) {
      for (auto& p : posts) p.text = preprocess_text(p.text);
    }
    const auto candidates = filter_candidates(posts, regexes);
    std::ofstream os(out, std::ios::trunc);
    if (!os) throw Error(ErrorCode::kIo, "cannot write " + out);
    for (const auto& c : candidates) {
      auto j = ordered_json::parse(post_to_json_line(c.post));
      j["matched_ids"] = c.matched_ids;
      os << j.dump() << '\n';
    }
    log_run(ctx, {{"posts", posts.size()}, {"candidates", candidates.size()},
                  {"patterns", regexes.size()}});
  }
};

struct ClassifyCmd {
  std::string in, out, plugin = "heuristic", verdicts;

  void add(CLI::App* app) {
    app->add_option("--in", in, "candidate posts JSONL")->required();
    app->add_option("--out", out, "classified posts JSONL")->required();
    app->add_option("--plugin", plugin, "classifier plugin (heuristic|external)");
    app->add_option("--verdicts", verdicts, "verdict JSONL for the external plugin");
  }

  void run(Context& ctx) {
    auto registry = PluginRegistry::with_defaults();
    if (plugin == "external" && verdicts.empty()) {
      throw UsageError("--verdicts", "the external plugin needs a verdict file");
    }
    if (!registry.contains(plugin) && plugin != "external") {
      throw UsageError("--plugin", "unknown plugin '" + plugin + "' (available: " +
                                       join(registry.names(), ", ") + ", external)");
    }
    ctx.data_phase = true;
    if (!verdicts.empty()) {
      registry.register_plugin(
          "external", std::make_shared<ExternalClassifier>(ExternalClassifier::from_file(verdicts)));
    }
    const auto& backend = registry.get(plugin);
    auto posts = read_posts(in);
    std::map<std::string, std::size_t> counts;
    for (auto& p : posts) {
      classify(p, backend);
      ++counts[std::string(to_string(p.kind))];
    }
    write_posts(out, posts);
    log_run(ctx, {{"posts", posts.size()}, {"kinds", counts}});
  }
};

// Reads requests and offers either from two files or from one labelled file.
struct CorpusFlags {
  std::string requests, offers, posts, embeddings, ids;

  void add(CLI::App* app, bool need_requests) {
    app->add_option("--requests", requests, "request posts JSONL");
    app->add_option("--offers", offers, "offer posts JSONL");
    app->add_option("--posts", posts, "classified posts JSONL, split by kind");
    app->add_option("--embeddings", embeddings, "CREMAEMB embedding file")->required();
    app->add_option("--ids", ids, "id file aligned with the embedding rows")->required();
    need_requests_ = need_requests;
  }

  void check() const {
    if (!posts.empty() && (!requests.empty() || !offers.empty())) {
      throw UsageError("--posts", "use either --posts or --requests/--offers");
    }
    if (posts.empty() && offers.empty()) throw UsageError("--offers", "no offer corpus given");
    if (need_requests_ && posts.empty() && requests.empty()) {
      throw UsageError("--requests", "no request corpus given");
    }
  }

  std::pair<std::vector<Post>, std::vector<Post>> load() const {
    std::vector<Post> req, off;
    if (!posts.empty()) {
      for (auto& p : read_posts(posts)) {
        if (p.kind == PostKind::kRequest) req.push_back(std::move(p));
        if (p.kind == PostKind::kOffer) off.push_back(std::move(p));
      }
    } else {
      if (!requests.empty()) req = read_posts(requests);
      off = read_posts(offers);
    }
    return {std::move(req), std::move(off)};
  }

  bool need_requests_ = true;
};

struct IndexCmd {
  std::string embeddings, ids, offers, out;
  IndexFlags index;

  void add(CLI::App* app) {
    app->add_option("--embeddings", embeddings, "CREMAEMB embedding file")->required();
    app->add_option("--ids", ids, "id file aligned with the embedding rows")->required();
    app->add_option("--offers", offers, "index only these posts, in file order");
    app->add_option("--out", out, "index file")->required();
    index.add(app);
  }

  void run(Context& ctx) {
    const auto config = index.resolve(ctx.globals);
    ctx.data_phase = true;
    const auto store = EmbeddingStore::load(embeddings, ids);
    const EmbeddingMatrix matrix = offers.empty() ? store.matrix() : store.gather(read_posts(offers));
    const auto built = build_index(matrix, config);
    save_index(std::filesystem::path(out), *built.index);
    log_run(ctx, {{"vectors", matrix.rows()},
                  {"dim", matrix.dim()},
                  {"index", config.describe()},
                  {"index_time_ms", built.stats.index_time_ms},
                  {"warnings", built.stats.warnings}});
  }
};

struct MatchCmd {
  CorpusFlags corpus;
  std::string index_file, out, report;
  IndexFlags index;
  MatchFlags match;

  void add(CLI::App* app) {
    corpus.add(app, true);
    app->add_option("--index", index_file, "prebuilt index over the offers, same order");
    app->add_option("--out", out, "match results JSONL")->required();
    app->add_option("--report", report, "run report JSON");
    index.add(app);
    match.add(app);
  }

  void run(Context& ctx) {
    corpus.check();
    const auto params = match.resolve();
    const auto config = index.resolve(ctx.globals);
    if (ctx.globals.workers == 0) throw UsageError("--workers", "workers must be at least 1");
    ctx.data_phase = true;

    auto [requests, offers] = corpus.load();
    const auto store = EmbeddingStore::load(corpus.embeddings, corpus.ids);
    validate_corpora(requests, offers, store);
    std::optional<OfferCorpus> offer_corpus;
    if (index_file.empty()) {
      offer_corpus.emplace(offers, store.gather(offers), config, params.filter_resource);
    } else {
      offer_corpus.emplace(offers, store.gather(offers), load_index(index_file),
                           params.filter_resource);
    }
    const auto run = match_all(requests, store.gather(requests), *offer_corpus, params,
                               ctx.globals.workers);
    write_results(out, run.results);
    if (!report.empty()) {
      auto j = ordered_json::parse(report_to_json(run.report));
      j["config"] = resolved_config(ctx.command);
      std::ofstream os(report, std::ios::trunc);
      if (!os) throw Error(ErrorCode::kIo, "cannot write " + report);
      os << j.dump(2) << '\n';
    }
    log_run(ctx, {{"requests", run.report.requests},
                  {"offers", run.report.offers},
                  {"requests_with_matches", run.report.requests_with_matches},
                  {"index", offer_corpus->index_config().describe()},
                  {"index_time_ms", run.report.build.index_time_ms},
                  {"search_ms_mean", run.report.search.mean_ms}});
  }
};

struct EvalCmd {
  std::string results, truth;
  std::vector<std::size_t> n{1, 3};

  void add(CLI::App* app) {
    app->add_option("--results", results, "match results JSONL")->required();
    app->add_option("--truth", truth, "ground truth JSONL")->required();
    app->add_option("--n", n, "Top-n depths, comma separated")->delimiter(',');
  }

  void run(Context& ctx) {
    for (auto v : n) {
      if (v == 0) throw UsageError("--n", "n must be at least 1");
    }
    ctx.data_phase = true;
    const auto rs = read_results(results);
    const auto gt = GroundTruth::read(truth);
    for (auto v : n) {
      ordered_json j;
      j["n"] = v;
      j["accuracy"] = topn_accuracy(rs, gt, v);
      j["requests"] = rs.size();
      ctx.out << j.dump() << '\n';
    }
    log_run(ctx, {{"requests", rs.size()}, {"truth_pairs", gt.size()}});
  }
};

struct BenchCmd {
  CorpusFlags corpus;
  std::string configs, truth, csv;
  std::size_t reps = 3;
  std::vector<std::size_t> k{25, 50, 100};
  IndexFlags index;

  void add(CLI::App* app) {
    corpus.add(app, true);
    app->add_option("--configs", configs, "index configs, one 'key=value ...' line each");
    app->add_option("--truth", truth, "ground truth JSONL; adds a target accuracy column");
    app->add_option("--csv", csv, "write the table as CSV");
    app->add_option("--reps", reps, "timed repetitions (at least 3)");
    app->add_option("--k", k, "k values, comma separated")->delimiter(',');
    index.add(app);
  }

  void run(Context& ctx) {
    corpus.check();
    if (reps < 3) throw UsageError("--reps", "reps must be at least 3");
    const auto defaults = index.resolve(ctx.globals);
    ctx.data_phase = true;
    const auto config_list =
        configs.empty() ? std::vector<IndexConfig>{defaults} : read_bench_configs(configs, defaults);
    auto [requests, offers] = corpus.load();
    const auto store = EmbeddingStore::load(corpus.embeddings, corpus.ids);
    validate_corpora(requests, offers, store);

    BenchOptions opt;
    opt.reps = reps;
    opt.k_values = k;
    if (!truth.empty()) {
      const auto gt = GroundTruth::read(truth);
      std::map<std::string, std::size_t> row_of;
      for (std::size_t i = 0; i < offers.size(); ++i) row_of[offers[i].id] = i;
      std::vector<std::size_t> targets;
      for (const auto& r : requests) {
        const auto want = gt.offer_for(r.id);
        if (!want || !row_of.count(*want)) {
          throw Error(ErrorCode::kUnknownRequestId, "no true offer for request '" + r.id + "'");
        }
        targets.push_back(row_of.at(*want));
      }
      opt.targets = std::move(targets);
    }
    const auto rows =
        bench_indices(store.gather(offers), config_list, store.gather(requests), opt);
    ctx.out << bench_to_table(rows);
    if (!csv.empty()) {
      std::ofstream os(csv, std::ios::trunc);
      if (!os) throw Error(ErrorCode::kIo, "cannot write " + csv);
      os << bench_to_csv(rows);
    }
    log_run(ctx, {{"corpus", offers.size()}, {"queries", requests.size()}, {"rows", rows.size()}});
  }
};

struct GenCmd {
  GenSpec spec;
  std::string out_dir;
  std::vector<std::string> centers;
  std::string classes = "temporal_out,spatial_out,high_cos_far,low_sim_in";

  void add(CLI::App* app) {
    app->add_option("--out-dir", out_dir, "directory for the generated files")->required();
    app->add_option("--pairs", spec.n_pairs, "request/offer pairs");
    app->add_option("--distractors", spec.n_distractors_per_pair, "distractor offers per pair");
    app->add_option("--distractor-classes", classes,
                    "comma list of temporal_out, spatial_out, high_cos_far, low_sim_in");
    app->add_option("--dim", spec.embedding_dim, "embedding dimension");
    app->add_option("--time-window", spec.time_window_days, "pair time window, days");
    app->add_option("--distance-window", spec.distance_window_km, "pair distance window, km");
    app->add_option("--center", centers, "NAME:LAT:LON, repeatable; default five Australian cities");
    app->add_option("--margin", spec.margin, "cosine gap below the planted offer for in-window distractors");
    app->add_option("--family-size", spec.family_size, "pairs sharing a topic direction");
    app->add_option("--time-span", spec.time_span_days, "days spanned by pair base times");
    app->add_option("--far-min-km", spec.far_min_km, "minimum distance of out-of-window placements");
    app->add_option("--far-min-days", spec.far_min_days, "minimum time gap of out-of-window placements");
  }

  void run(Context& ctx) {
    if (ctx.globals.seed) spec.seed = *ctx.globals.seed;
    spec.distractor_classes.clear();
    std::stringstream ss(classes);
    for (std::string item; std::getline(ss, item, ',');) {
      if (item.empty()) continue;
      check_flag("--distractor-classes",
                 [&] { spec.distractor_classes.push_back(parse_offer_class(item)); });
    }
    if (!centers.empty()) {
      spec.centers.clear();
      for (const auto& c : centers) spec.centers.push_back(parse_center(c));
    }
    check_flag("--pairs", [&] { spec.validate(); });
    ctx.data_phase = true;

    const auto corpus = generate_synthetic(spec);
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    write_posts(dir / "requests.jsonl", corpus.requests);
    write_posts(dir / "offers.jsonl", corpus.offers);
    write_embedding_file(dir / "embeddings.bin", corpus.embeddings());
    write_id_file(dir / "ids.txt", corpus.ids());
    corpus.truth.write(dir / "truth.jsonl");
    std::ofstream labels(dir / "offer_classes.jsonl", std::ios::trunc);
    for (std::size_t i = 0; i < corpus.offers.size(); ++i) {
      ordered_json j;
      j["id"] = corpus.offers[i].id;
      j["class"] = std::string(to_string(corpus.offer_classes[i]));
      j["center"] = corpus.offer_centers[i];
      labels << j.dump() << '\n';
    }
    log_run(ctx, {{"requests", corpus.requests.size()},
                  {"offers", corpus.offers.size()},
                  {"dim", spec.embedding_dim},
                  {"out_dir", dir.string()}});
  }

  static CityCenter parse_center(const std::string& text) {
    const auto a = text.find(':');
    const auto b = text.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos || a == 0) {
      throw UsageError("--center", "expected NAME:LAT:LON, got '" + text + "'");
    }
    try {
      std::size_t used_lat = 0, used_lon = 0;
      const auto lat_s = text.substr(a + 1, b - a - 1), lon_s = text.substr(b + 1);
      const double lat = std::stod(lat_s, &used_lat);
      const double lon = std::stod(lon_s, &used_lon);
      if (used_lat != lat_s.size() || used_lon != lon_s.size()) throw std::invalid_argument(text);
      return {text.substr(0, a), GeoPoint(lat, lon)};
    } catch (const std::logic_error&) {
      throw UsageError("--center", "bad coordinates in '" + text + "'");
    } catch (const Error& e) {
      throw UsageError("--center", e.what());
    }
  }
};

struct RatioCmd {
  std::string in, out, group_by = "country";

  void add(CLI::App* app) {
    app->add_option("--in", in, "classified posts JSONL")->required();
    app->add_option("--group-by", group_by, "country|region|none")
        ->check(CLI::IsMember({"country", "region", "none"}));
    app->add_option("--out", out, "write rows here instead of standard output");
  }

  void run(Context& ctx) {
    const auto group = parse_group_by(group_by);
    ctx.data_phase = true;
    const auto rows = offer_request_ratio(read_posts(in), group);
    std::ofstream file;
    if (!out.empty()) {
      file.open(out, std::ios::trunc);
      if (!file) throw Error(ErrorCode::kIo, "cannot write " + out);
    }
    std::ostream& os = out.empty() ? ctx.out : file;
    for (const auto& r : rows) os << ratio_to_json_line(r) << '\n';
    log_run(ctx, {{"groups", rows.size()}});
  }
};

// --- config file ----------------------------------------------------------

bool given_on_command_line(const CLI::Option& opt, const std::vector<std::string>& args) {
  for (const auto& a : args) {
    for (const auto& l : opt.get_lnames()) {
      if (a == "--" + l || a.rfind("--" + l + "=", 0) == 0) return true;
    }
    for (const auto& s : opt.get_snames()) {
      if (a == "-" + s) return true;
    }
  }
  return false;
}

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config", "--config needs a file");
      return args[i + 1];
    }
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

// Appends flat key=value settings as flags unless the same flag was given
// explicitly, so the command line wins over the file.
std::vector<std::string> merge_config(const CLI::App& app, std::vector<std::string> args) {
  const auto path = find_config_path(args);
  if (!path) return args;
  const CLI::App* sub = nullptr;
  for (std::size_t i = 1; i < args.size() && !sub; ++i) {
    for (const CLI::App* s : app.get_subcommands([](const CLI::App*) { return true; })) {
      if (s->get_name() == args[i]) sub = s;
    }
  }
  std::ifstream in(*path);
  if (!in) throw UsageError("--config", "cannot read config file " + *path);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> extra;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string where = *path + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw UsageError("--config", where + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "config") throw UsageError("--config", where + ": config files do not nest");
    const CLI::Option* opt = sub ? sub->get_option_no_throw("--" + key) : nullptr;
    if (!opt) opt = app.get_option_no_throw("--" + key);
    if (!opt) throw UsageError("--config", where + ": unknown key '" + key + "'");
    if (given_on_command_line(*opt, args)) continue;
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1" || value == "yes" || value == "on") {
        extra.push_back("--" + key);
      } else if (!(value == "false" || value == "0" || value == "no" || value == "off")) {
        throw UsageError("--config", where + ": '" + key + "' takes true or false");
      }
    } else {
      extra.push_back("--" + key + "=" + value);
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Crisis request/offer matching engine", kProgram};
  app.option_defaults()->always_capture_default();
  app.fallthrough();
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  Globals globals;
  app.add_option("--config", globals.config, "flat key=value file of flag defaults");
  app.add_option("--seed", globals.seed, "seed for index training and generation");
  app.add_option("--workers", globals.workers, "parallel workers for match");

  FilterCmd filter;
  ClassifyCmd classify_cmd;
  IndexCmd index;
  MatchCmd match;
  EvalCmd eval;
  BenchCmd bench;
  GenCmd gen;
  RatioCmd ratio;
  struct Entry {
    CLI::App* app;
    std::function<void(Context&)> run;
  };
  std::vector<Entry> entries;
  auto add = [&](const char* name, const char* help, auto& cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    cmd.add(sub);
    entries.push_back({sub, [&cmd](Context& ctx) { cmd.run(ctx); }});
  };
  add("filter", "preprocess posts and keep regex candidates", filter);
  add("classify", "label candidates as request, offer or other", classify_cmd);
  add("index", "build and save a vector index", index);
  add("match", "match requests to offers", match);
  add("eval", "Top-n accuracy of match results", eval);
  add("bench", "index/search timing and recall table", bench);
  add("gen", "generate a synthetic corpus with planted pairs", gen);
  add("ratio", "offers-to-requests ratio per group", ratio);

  if (args.size() <= 1) {
    err << app.help();
    return kUsage;
  }

  const CLI::App* active = nullptr;
  bool data_phase = false;
  try {
    const auto merged = merge_config(app, args);
    std::vector<const char*> argv;
    for (const auto& a : merged) argv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      const CLI::App* target = &app;
      for (const auto& e : entries) {
        if (e.app->parsed()) target = e.app;
      }
      out << target->help();
      return kOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kOk;
    } catch (const CLI::ParseError& e) {
      const CLI::App* target = &app;
      for (const auto& en : entries) {
        if (en.app->parsed()) target = en.app;
      }
      const std::string where =
          target == &app ? std::string(kProgram) : std::string(kProgram) + " " + target->get_name();
      err << "error: " << e.what() << " (run '" << where << " --help' for usage)\n";
      return kUsage;
    }
    for (auto& e : entries) {
      if (!e.app->parsed()) continue;
      active = e.app;
      Context ctx{out, err, globals, *e.app};
      try {
        e.run(ctx);
      } catch (...) {
        data_phase = ctx.data_phase;
        throw;
      }
    }
    return kOk;
  } catch (const UsageError& e) {
    const std::string where =
        active ? std::string(kProgram) + " " + active->get_name() : std::string(kProgram);
    err << "error: " << e.flag << ": " << e.what() << " (run '" << where
        << " --help' for usage)\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return data_phase ? kData : kUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace reliefmatch::cli
