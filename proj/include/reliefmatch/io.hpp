#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "reliefmatch/core.hpp"

namespace reliefmatch {

inline constexpr std::string_view kEmbeddingMagic = "CREMAEMB";
inline constexpr std::uint32_t kEmbeddingVersion = 1;

// --- Post corpus (JSON lines) ---------------------------------------------
// {"id","text","lang","ts","lat","lon","kind","resource"} plus optional
// "country"/"region" grouping keys. Unknown keys are ignored on read.

Post post_from_json_line(std::string_view line);
std::string post_to_json_line(const Post& post);

std::vector<Post> read_posts(const std::filesystem::path& path);
void write_posts(const std::filesystem::path& path, const std::vector<Post>& posts);

// --- Embedding file -------------------------------------------------------
// "CREMAEMB", u32 version (=1), u32 count, u32 dim, count*dim f32 row-major,
// all little-endian. Row i belongs to line i of the companion id file.

void write_embedding_file(const std::filesystem::path& path, const EmbeddingMatrix& m);
EmbeddingMatrix read_embedding_file(const std::filesystem::path& path);
void write_embeddings(std::ostream& out, const EmbeddingMatrix& m);
EmbeddingMatrix read_embeddings(std::istream& in);

std::vector<std::string> read_id_file(const std::filesystem::path& path);
void write_id_file(const std::filesystem::path& path, const std::vector<std::string>& ids);

// Embeddings joined by post id. Rows are unit-normalized on load.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(std::vector<std::string> ids, EmbeddingMatrix matrix, bool normalize_rows = true);

  static EmbeddingStore load(const std::filesystem::path& embeddings,
                             const std::filesystem::path& ids);

  std::optional<EmbeddingView> find(const std::string& id) const;
  std::size_t dim() const noexcept { return matrix_.dim(); }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const EmbeddingMatrix& matrix() const noexcept { return matrix_; }

  // Gathers the rows for `posts` in order. Throws kEmbeddingMissing listing
  // every id without a row.
  EmbeddingMatrix gather(const std::vector<Post>& posts) const;

 private:
  std::vector<std::string> ids_;
  EmbeddingMatrix matrix_;
  std::unordered_map<std::string, std::size_t> row_of_;
};

}  // namespace reliefmatch
