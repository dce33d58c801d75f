#include "bhns/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "bhns/rng.hpp"

namespace bhns {
namespace {

std::string normalize_category_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    if (c == ' ' || c == '-') c = '_';
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string pair_key(const std::string& query_id, const std::string& product_id) {
  return query_id + '\x1f' + product_id;
}

}  // namespace

double map_category(RelevanceCategory category, LabelMode mode) {
  if (mode == LabelMode::kTrain) {
    switch (category) {
      case RelevanceCategory::kStronglyRelevant: return 1.0;
      case RelevanceCategory::kRelevant: return 0.5;
      case RelevanceCategory::kSomewhatRelevant: return 0.2;
      case RelevanceCategory::kNotRelevant: return 0.1;
      case RelevanceCategory::kOffensive: return 0.1;
    }
  } else {
    switch (category) {
      case RelevanceCategory::kStronglyRelevant: return 1.0;
      case RelevanceCategory::kRelevant: return 1.0;
      case RelevanceCategory::kSomewhatRelevant: return 0.1;
      case RelevanceCategory::kNotRelevant: return 0.1;
      case RelevanceCategory::kOffensive: return 0.1;
    }
  }
  throw std::invalid_argument("map_category: invalid category");
}

RelevanceCategory parse_category(std::string_view name) {
  const std::string n = normalize_category_name(name);
  if (n == "strongly_relevant") return RelevanceCategory::kStronglyRelevant;
  if (n == "relevant") return RelevanceCategory::kRelevant;
  if (n == "somewhat_relevant") return RelevanceCategory::kSomewhatRelevant;
  if (n == "not_relevant") return RelevanceCategory::kNotRelevant;
  if (n == "offensive") return RelevanceCategory::kOffensive;
  throw ValidationError("unknown relevance category '" + std::string(name) + "'");
}

double average_annotations(const std::vector<double>& scores) {
  if (scores.empty()) throw std::domain_error("average_annotations: empty score list");
  double sum = 0.0;
  for (double s : scores) {
    if (s < 0.0 || s > 1.0) {
      throw std::domain_error("average_annotations: score outside [0, 1]");
    }
    sum += s;
  }
  return sum / static_cast<double>(scores.size());
}

Corpus::Corpus(std::vector<AnnotatedPair> pairs, const EmbeddingStore& store)
    : pairs_(std::move(pairs)) {
  std::unordered_set<std::string> keys;
  keys.reserve(pairs_.size());
  for (const auto& p : pairs_) {
    if (!store.has_query(p.query_id)) {
      throw ValidationError("corpus references unknown query id '" + p.query_id + "'");
    }
    if (!store.has_product(p.product_id)) {
      throw ValidationError("corpus references unknown product id '" + p.product_id + "'");
    }
    if (p.label < 0.0 || p.label > 1.0) {
      throw ValidationError("corpus label outside [0, 1] for (" + p.query_id + ", " +
                            p.product_id + ")");
    }
    if (!keys.insert(pair_key(p.query_id, p.product_id)).second) {
      throw ValidationError("duplicate corpus key (" + p.query_id + ", " + p.product_id + ")");
    }
  }
}

Corpus Corpus::load(const std::string& path, const EmbeddingStore& store, LabelMode mode) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open annotation file: " + path);

  struct Accum {
    std::string query_id;
    std::string product_id;
    std::vector<double> scores;
  };
  std::vector<Accum> order;
  std::unordered_map<std::string, std::size_t> index;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("query_id") || !obj.contains("product_id") ||
        !obj["query_id"].is_string() || !obj["product_id"].is_string()) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": expected object with string query_id and product_id");
    }

    double score = 0.0;
    if (obj.contains("label")) {
      if (!obj["label"].is_number()) {
        throw ValidationError(path + ":" + std::to_string(line_no) + ": label must be a number");
      }
      score = obj["label"].get<double>();
      if (score < 0.0 || score > 1.0) {
        throw ValidationError(path + ":" + std::to_string(line_no) + ": label outside [0, 1]");
      }
    } else if (obj.contains("category")) {
      if (!obj["category"].is_string()) {
        throw ValidationError(path + ":" + std::to_string(line_no) + ": category must be a string");
      }
      try {
        score = map_category(parse_category(obj["category"].get<std::string>()), mode);
      } catch (const ValidationError& e) {
        throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
      }
    } else {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": record needs either a label or a category");
    }

    const std::string key =
        pair_key(obj["query_id"].get<std::string>(), obj["product_id"].get<std::string>());
    const auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, order.size());
      order.push_back(Accum{obj["query_id"].get<std::string>(),
                            obj["product_id"].get<std::string>(),
                            {score}});
    } else {
      order[it->second].scores.push_back(score);
    }
  }

  std::vector<AnnotatedPair> pairs;
  pairs.reserve(order.size());
  for (auto& acc : order) {
    pairs.push_back(AnnotatedPair{std::move(acc.query_id), std::move(acc.product_id),
                                  average_annotations(acc.scores), Provenance::kAnnotated});
  }
  return Corpus(std::move(pairs), store);
}

Corpus augment_random_pairs(const Corpus& corpus, const EmbeddingStore& store,
                            double fraction, std::uint64_t seed) {
  if (fraction < 0.0) throw ValidationError("augment fraction must be non-negative");
  if (store.n_queries() == 0 || store.n_products() == 0) {
    throw ValidationError("augmentation requires a non-empty store in both namespaces");
  }

  const auto count =
      static_cast<std::size_t>(fraction * static_cast<double>(corpus.size()));
  std::vector<AnnotatedPair> pairs = corpus.pairs();
  if (count == 0) return Corpus(std::move(pairs), store);

  std::unordered_set<std::string> keys;
  keys.reserve(pairs.size() + count);
  for (const auto& p : pairs) keys.insert(pair_key(p.query_id, p.product_id));

  CounterRng rng(seed, fnv1a64("augment_random_pairs"));
  std::size_t placed = 0;
  const std::size_t max_attempts = 100 * count;
  for (std::size_t attempt = 0; placed < count && attempt < max_attempts; ++attempt) {
    const auto q = static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(store.n_queries())));
    const auto p = static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(store.n_products())));
    const std::string& query_id = store.query_id(q);
    const std::string& product_id = store.product_id(p);
    if (!keys.insert(pair_key(query_id, product_id)).second) continue;
    pairs.push_back(AnnotatedPair{query_id, product_id, 0.0, Provenance::kRandomAugmented});
    ++placed;
  }
  if (placed < count) {
    throw ValidationError("augmentation could not place " + std::to_string(count) +
                          " collision-free pairs within " + std::to_string(max_attempts) +
                          " attempts");
  }
  return Corpus(std::move(pairs), store);
}

}  // namespace bhns
