#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "reliefmatch/core.hpp"

namespace reliefmatch {

struct ClassifierVerdict {
  bool is_request = false;
  bool is_offer = false;
  std::optional<Resource> resource;
  double confidence = 0.0;
};

struct BinaryDecision {
  bool positive = false;
  double confidence = 0.0;
};

struct ResourceDecision {
  std::optional<Resource> resource;
  double confidence = 0.0;
};

// Backend for the three classification tasks. classify() drives the cascade:
// request-vs-rest, then offer-vs-other for non-requests, then resource for
// whichever of the two fired.
class ClassifierPlugin {
 public:
  virtual ~ClassifierPlugin() = default;
  virtual BinaryDecision request_vs_rest(const Post& post) const = 0;
  virtual BinaryDecision offer_vs_other(const Post& post) const = 0;
  virtual ResourceDecision resource(const Post& post) const = 0;
};

// Keyword and cue-phrase rules. Offer phrasing such as "if you need" is
// consumed before request cues are counted, so "reach out if you need help"
// reads as an offer.
class HeuristicClassifier final : public ClassifierPlugin {
 public:
  BinaryDecision request_vs_rest(const Post& post) const override;
  BinaryDecision offer_vs_other(const Post& post) const override;
  ResourceDecision resource(const Post& post) const override;

  struct CueCounts {
    int request = 0;
    int offer = 0;
  };
  static CueCounts count_cues(std::string_view text);
};

// Replays verdicts produced offline (e.g. by a transformer classifier) from a
// JSON-lines file of {id, kind, resource?, confidence?}.
class ExternalClassifier final : public ClassifierPlugin {
 public:
  struct Entry {
    PostKind kind = PostKind::kOther;
    std::optional<Resource> resource;
    double confidence = 1.0;
  };

  explicit ExternalClassifier(std::unordered_map<std::string, Entry> verdicts);
  static ExternalClassifier from_file(const std::filesystem::path& path);

  BinaryDecision request_vs_rest(const Post& post) const override;
  BinaryDecision offer_vs_other(const Post& post) const override;
  ResourceDecision resource(const Post& post) const override;

 private:
  const Entry& lookup(const Post& post) const;
  std::unordered_map<std::string, Entry> verdicts_;
};

// Runs the cascade and records the outcome on the post (kind and resource).
// Any backend failure is rethrown as Error(kPluginFailure) naming the post.
ClassifierVerdict classify(Post& post, const ClassifierPlugin& plugin);

class PluginRegistry {
 public:
  // Registry pre-populated with the "heuristic" plugin.
  static PluginRegistry with_defaults();

  // Throws kDuplicateName if the name is taken.
  void register_plugin(const std::string& name, std::shared_ptr<const ClassifierPlugin> plugin);

  // Throws kUnknownPlugin.
  const ClassifierPlugin& get(const std::string& name) const;
  bool contains(const std::string& name) const { return plugins_.count(name) != 0; }
  std::vector<std::string> names() const;

 private:
  std::map<std::string, std::shared_ptr<const ClassifierPlugin>> plugins_;
};

}  // namespace reliefmatch
