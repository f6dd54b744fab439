#include "reliefmatch/classify.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>

#include "reliefmatch/error.hpp"

namespace reliefmatch {

namespace {

// Lower-cased ASCII words separated by single spaces and padded with a space
// on both ends, so a cue " foo bar " only matches whole words.
std::string cue_text(std::string_view text) {
  std::string out = " ";
  bool in_word = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto c = static_cast<unsigned char>(text[i]);
    // Typographic apostrophe U+2019 -> '
    if (c == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        static_cast<unsigned char>(text[i + 2]) == 0x99) {
      c = '\'';
      i += 2;
    }
    if (std::isalnum(c) || c == '\'') {
      out.push_back(static_cast<char>(std::tolower(c)));
      in_word = true;
    } else if (in_word) {
      out.push_back(' ');
      in_word = false;
    }
  }
  if (out.back() != ' ') out.push_back(' ');
  return out;
}

int count_and_erase(std::string& text, std::string_view cue) {
  const std::string needle = " " + std::string(cue) + " ";
  int count = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos)) {
    // Keep the separating spaces so adjacent cues still match.
    std::fill(text.begin() + static_cast<long>(pos) + 1,
              text.begin() + static_cast<long>(pos + needle.size()) - 1, '#');
    ++count;
  }
  return count;
}

int count_only(const std::string& text, std::string_view cue) {
  const std::string needle = " " + std::string(cue) + " ";
  int count = 0;
  for (auto pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size() - 1)) {
    ++count;
  }
  return count;
}

constexpr std::string_view kOfferCues[] = {
    "if you need", "if anyone needs", "if you're in need", "those in need", "anyone in need",
    "in need of help", "i'm prepared to", "i am prepared to", "prepared to provide",
    "ready to provide", "ready to assist", "ready to help", "i'm ready", "i am ready",
    "i can provide", "we can provide", "can provide", "will provide", "we provide",
    "i have", "we have", "i've got", "offering", "offer", "donating", "giving away",
    "available", "reach out", "contact us", "happy to", "willing to", "i'll be bringing",
    "bringing", "spare", "here to help", "let me know", "dm me", "i can", "we can",
    "volunteering", "to those", "for those", "free", "hand out"};

constexpr std::string_view kRequestCues[] = {
    "need", "needs", "needed", "needing", "urgently", "urgent", "seeking", "looking for",
    "in search of", "please help", "help us", "help me", "require", "required", "requires",
    "any help", "can anyone", "can someone", "anyone", "shortage", "running out", "ran out",
    "dire need", "desperately", "appeal", "sos", "is there anyone", "we are in need",
    "please donate", "struggling", "stranded", "trapped"};

struct ResourceCues {
  Resource resource;
  std::vector<std::string_view> cues;
};

// Ordered by tie-break priority.
const std::vector<ResourceCues>& resource_cues() {
  static const std::vector<ResourceCues> cues = {
      {Resource::kMedical,
       {"medical", "medicine", "medicines", "medication", "medications", "first aid", "hospital",
        "blood", "vaccine", "vaccines", "vaccination", "doctor", "doctors", "nurse", "nurses",
        "ppe", "mask", "masks", "sanitizer", "sanitizers", "testing", "insulin", "ambulance",
        "health", "covid", "oxygen", "quarantine"}},
      {Resource::kFood,
       {"food", "water", "groceries", "grocery", "meal", "meals", "bread", "milk", "formula",
        "drinking", "bottled", "hungry", "canned", "eat", "feed", "nutrition"}},
      {Resource::kShelter,
       {"shelter", "accommodation", "housing", "home", "homes", "room", "rooms", "evacuation",
        "evacuated", "roof", "tent", "tents", "bed", "beds", "lodging", "place to stay",
        "temporary"}},
      {Resource::kCloth,
       {"cloth", "clothes", "clothing", "blanket", "blankets", "jacket", "jackets", "sweater",
        "sweaters", "jeans", "gloves", "shoes", "socks", "coat", "coats", "jersey", "vest"}},
      {Resource::kVolunteer,
       {"volunteer", "volunteers", "volunteering", "helpers", "hands", "cleanup", "clean up",
        "manpower", "sandbag", "sandbags", "labour", "labor", "rescue"}},
      {Resource::kMoney,
       {"money", "cash", "fund", "funds", "funding", "fundraiser", "fundraising", "donate",
        "donation", "donations", "donating", "dollars", "financial", "bills", "rent", "payment"}},
  };
  return cues;
}

}  // namespace

HeuristicClassifier::CueCounts HeuristicClassifier::count_cues(std::string_view text) {
  std::string t = cue_text(text);
  CueCounts counts;
  // Offer phrases are consumed first; "if you need" must not count as a request cue.
  for (auto cue : kOfferCues) counts.offer += count_and_erase(t, cue);
  for (auto cue : kRequestCues) counts.request += count_and_erase(t, cue);
  return counts;
}

BinaryDecision HeuristicClassifier::request_vs_rest(const Post& post) const {
  const auto c = count_cues(post.text);
  const int total = c.request + c.offer;
  if (c.request == 0 || c.request <= c.offer) {
    return {false, total == 0 ? 0.5 : static_cast<double>(c.offer + 1) / (total + 2)};
  }
  return {true, static_cast<double>(c.request + 1) / (total + 2)};
}

BinaryDecision HeuristicClassifier::offer_vs_other(const Post& post) const {
  const auto c = count_cues(post.text);
  const int total = c.request + c.offer;
  if (c.offer == 0 || c.offer < c.request) {
    return {false, total == 0 ? 0.5 : static_cast<double>(c.request + 1) / (total + 2)};
  }
  return {true, static_cast<double>(c.offer + 1) / (total + 2)};
}

ResourceDecision HeuristicClassifier::resource(const Post& post) const {
  const std::string t = cue_text(post.text);
  int best = 0;
  int total = 0;
  std::optional<Resource> chosen;
  for (const auto& group : resource_cues()) {
    int n = 0;
    for (auto cue : group.cues) n += count_only(t, cue);
    total += n;
    if (n > best) {
      best = n;
      chosen = group.resource;
    }
  }
  return {chosen, total == 0 ? 0.0 : static_cast<double>(best) / total};
}

ExternalClassifier::ExternalClassifier(std::unordered_map<std::string, Entry> verdicts)
    : verdicts_(std::move(verdicts)) {}

ExternalClassifier ExternalClassifier::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open verdict file " + path.string());
  std::unordered_map<std::string, Entry> verdicts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Entry e;
      e.kind = parse_post_kind(j.at("kind").get<std::string>());
      if (j.contains("resource") && !j["resource"].is_null()) {
        e.resource = parse_resource(j["resource"].get<std::string>());
      }
      if (j.contains("confidence") && !j["confidence"].is_null()) {
        e.confidence = j["confidence"].get<double>();
      }
      verdicts[j.at("id").get<std::string>()] = e;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat,
                  path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return ExternalClassifier(std::move(verdicts));
}

const ExternalClassifier::Entry& ExternalClassifier::lookup(const Post& post) const {
  auto it = verdicts_.find(post.id);
  if (it == verdicts_.end()) {
    throw Error(ErrorCode::kPluginFailure, "no external verdict for post '" + post.id + "'");
  }
  return it->second;
}

BinaryDecision ExternalClassifier::request_vs_rest(const Post& post) const {
  const auto& e = lookup(post);
  return {e.kind == PostKind::kRequest, e.confidence};
}

BinaryDecision ExternalClassifier::offer_vs_other(const Post& post) const {
  const auto& e = lookup(post);
  return {e.kind == PostKind::kOffer, e.confidence};
}

ResourceDecision ExternalClassifier::resource(const Post& post) const {
  const auto& e = lookup(post);
  return {e.resource, e.confidence};
}

ClassifierVerdict classify(Post& post, const ClassifierPlugin& plugin) {
  if (post.kind != PostKind::kPotentialCandidate) {
    throw Error(ErrorCode::kInvalidArgument,
                "post '" + post.id + "' is not a potential candidate");
  }
  ClassifierVerdict verdict;
  try {
    const auto request = plugin.request_vs_rest(post);
    verdict.confidence = request.confidence;
    if (request.positive) {
      verdict.is_request = true;
    } else {
      const auto offer = plugin.offer_vs_other(post);
      verdict.confidence = offer.confidence;
      verdict.is_offer = offer.positive;
    }
    if (verdict.is_request || verdict.is_offer) verdict.resource = plugin.resource(post).resource;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kPluginFailure, "post '" + post.id + "': " + e.what());
  }

  post.kind = verdict.is_request ? PostKind::kRequest
              : verdict.is_offer ? PostKind::kOffer
                                 : PostKind::kOther;
  post.resource = verdict.resource;
  return verdict;
}

PluginRegistry PluginRegistry::with_defaults() {
  PluginRegistry registry;
  registry.register_plugin("heuristic", std::make_shared<HeuristicClassifier>());
  return registry;
}

void PluginRegistry::register_plugin(const std::string& name,
                                     std::shared_ptr<const ClassifierPlugin> plugin) {
  if (!plugins_.emplace(name, std::move(plugin)).second) {
    throw Error(ErrorCode::kDuplicateName, "plugin '" + name + "' already registered");
  }
}

const ClassifierPlugin& PluginRegistry::get(const std::string& name) const {
  auto it = plugins_.find(name);
  if (it == plugins_.end()) throw Error(ErrorCode::kUnknownPlugin, "no plugin named '" + name + "'");
  return *it->second;
}

std::vector<std::string> PluginRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, plugin] : plugins_) out.push_back(name);
  return out;
}

}  // namespace reliefmatch
