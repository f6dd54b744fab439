#include "reliefmatch/io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "binary_io.hpp"
#include "file_io.hpp"
#include "reliefmatch/error.hpp"

namespace reliefmatch {

namespace {

using ordered_json = nlohmann::ordered_json;

std::optional<std::string> optional_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<std::string>();
}

using detail::open_in;
using detail::open_out;

}  // namespace

Post post_from_json_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kFormat, std::string("malformed JSON: ") + e.what());
  }
  try {
    Post post;
    post.id = j.at("id").get<std::string>();
    post.text = j.at("text").get<std::string>();
    post.lang = optional_string(j, "lang").value_or("und");
    if (j.contains("ts") && !j["ts"].is_null()) {
      if (!j["ts"].is_number_integer()) {
        throw Error(ErrorCode::kFormat, "post '" + post.id + "': ts must be an integer");
      }
      post.timestamp = j["ts"].get<std::int64_t>();
    }
    const bool has_lat = j.contains("lat") && !j["lat"].is_null();
    const bool has_lon = j.contains("lon") && !j["lon"].is_null();
    if (has_lat != has_lon) {
      throw Error(ErrorCode::kFormat, "post '" + post.id + "': lat and lon must both be set");
    }
    if (has_lat) post.geo = GeoPoint(j["lat"].get<double>(), j["lon"].get<double>());
    if (auto kind = optional_string(j, "kind")) post.kind = parse_post_kind(*kind);
    if (auto resource = optional_string(j, "resource")) post.resource = parse_resource(*resource);
    post.country = optional_string(j, "country");
    post.region = optional_string(j, "region");
    return post;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("bad post record: ") + e.what());
  }
}

std::string post_to_json_line(const Post& post) {
  ordered_json j;
  j["id"] = post.id;
  j["text"] = post.text;
  j["lang"] = post.lang;
  j["ts"] = post.timestamp ? ordered_json(*post.timestamp) : ordered_json(nullptr);
  j["lat"] = post.geo ? ordered_json(post.geo->lat()) : ordered_json(nullptr);
  j["lon"] = post.geo ? ordered_json(post.geo->lon()) : ordered_json(nullptr);
  j["kind"] = std::string(to_string(post.kind));
  j["resource"] =
      post.resource ? ordered_json(std::string(to_string(*post.resource))) : ordered_json(nullptr);
  if (post.country) j["country"] = *post.country;
  if (post.region) j["region"] = *post.region;
  return j.dump();
}

std::vector<Post> read_posts(const std::filesystem::path& path) {
  std::vector<Post> posts;
  detail::for_each_jsonl_line(path, [&](const std::string& line) {
    posts.push_back(post_from_json_line(line));
  });
  return posts;
}

void write_posts(const std::filesystem::path& path, const std::vector<Post>& posts) {
  auto out = open_out(path);
  for (const auto& post : posts) out << post_to_json_line(post) << '\n';
}

void write_embeddings(std::ostream& out, const EmbeddingMatrix& m) {
  binary::write_magic(out, kEmbeddingMagic);
  binary::write_le<std::uint32_t>(out, kEmbeddingVersion);
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.dim()));
  binary::write_f32_array(out, m.values());
}

EmbeddingMatrix read_embeddings(std::istream& in) {
  binary::expect_magic(in, kEmbeddingMagic);
  const auto version = binary::read_le<std::uint32_t>(in);
  if (version != kEmbeddingVersion) {
    throw Error(ErrorCode::kFormat, "unsupported embedding file version " + std::to_string(version));
  }
  const auto count = binary::read_le<std::uint32_t>(in);
  const auto dim = binary::read_le<std::uint32_t>(in);
  if (dim == 0 && count > 0) throw Error(ErrorCode::kFormat, "embedding dim is zero");
  std::vector<float> values(static_cast<std::size_t>(count) * dim);
  binary::read_f32_array(in, values);
  return EmbeddingMatrix(count, dim, std::move(values));
}

void write_embedding_file(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  auto out = open_out(path, std::ios::binary);
  write_embeddings(out, m);
}

EmbeddingMatrix read_embedding_file(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  try {
    return read_embeddings(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::string> read_id_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ids.push_back(line);
  }
  return ids;
}

void write_id_file(const std::filesystem::path& path, const std::vector<std::string>& ids) {
  auto out = open_out(path);
  for (const auto& id : ids) out << id << '\n';
}

EmbeddingStore::EmbeddingStore(std::vector<std::string> ids, EmbeddingMatrix matrix,
                               bool normalize_rows_on_load)
    : ids_(std::move(ids)), matrix_(std::move(matrix)) {
  if (ids_.size() != matrix_.rows()) {
    throw Error(ErrorCode::kCorpusMismatch, std::to_string(ids_.size()) + " ids for " +
                                                std::to_string(matrix_.rows()) + " embedding rows");
  }
  if (normalize_rows_on_load) normalize_rows(matrix_);
  row_of_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!row_of_.emplace(ids_[i], i).second) {
      throw Error(ErrorCode::kFormat, "duplicate id '" + ids_[i] + "' in id file");
    }
  }
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& embeddings,
                                    const std::filesystem::path& ids) {
  return EmbeddingStore(read_id_file(ids), read_embedding_file(embeddings));
}

std::optional<EmbeddingView> EmbeddingStore::find(const std::string& id) const {
  auto it = row_of_.find(id);
  if (it == row_of_.end()) return std::nullopt;
  return matrix_.row(it->second);
}

EmbeddingMatrix EmbeddingStore::gather(const std::vector<Post>& posts) const {
  std::vector<std::size_t> rows;
  std::vector<std::string> missing;
  rows.reserve(posts.size());
  for (const auto& post : posts) {
    auto it = row_of_.find(post.id);
    if (it == row_of_.end()) {
      missing.push_back(post.id);
    } else {
      rows.push_back(it->second);
    }
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << missing.size() << " post(s) without embeddings:";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg << ' ' << missing[i];
    if (missing.size() > 20) msg << " ...";
    throw Error(ErrorCode::kEmbeddingMissing, msg.str());
  }
  if (rows.empty()) return EmbeddingMatrix(0, matrix_.dim());
  return matrix_.select(rows);
}

}  // namespace reliefmatch
