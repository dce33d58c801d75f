#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bhns/embedding_store.hpp"
#include "bhns/types.hpp"

namespace bhns {

enum class RelevanceCategory {
  kStronglyRelevant,
  kRelevant,
  kSomewhatRelevant,
  kNotRelevant,
  kOffensive,
};

enum class LabelMode { kTrain, kEval };

enum class Provenance { kAnnotated, kRandomAugmented };

// Annotation class -> soft label. Train mode keeps the fine granularity;
// eval mode folds the top two classes together.
double map_category(RelevanceCategory category, LabelMode mode);

// Accepts "strongly_relevant", "Somewhat Relevant", etc. (case and
// space/underscore insensitive). Throws ValidationError on unknown names.
RelevanceCategory parse_category(std::string_view name);

// Arithmetic mean of per-annotator scores for one (query, product) key.
double average_annotations(const std::vector<double>& scores);

struct AnnotatedPair {
  std::string query_id;
  std::string product_id;
  double label = 0.0;
  Provenance provenance = Provenance::kAnnotated;
};

// Labeled (query, product) records, unique per key, every id resolvable in
// the store the corpus was built against. Immutable after construction.
class Corpus {
 public:
  Corpus(std::vector<AnnotatedPair> pairs, const EmbeddingStore& store);

  // JSON-lines, one object per line:
  //   {"query_id": str, "product_id": str, "label": number}
  // or
  //   {"query_id": str, "product_id": str, "category": str, ...}
  // Repeated keys are averaged; categories are mapped first.
  static Corpus load(const std::string& path, const EmbeddingStore& store,
                     LabelMode mode);

  const std::vector<AnnotatedPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }

 private:
  std::vector<AnnotatedPair> pairs_;
};

// Appends floor(fraction * |pairs|) random (query, product) pairs with label
// 0 and provenance kRandomAugmented; query and product are drawn
// independently and uniformly from the store. Colliding keys are re-drawn;
// the attempt budget is 100 per requested pair.
Corpus augment_random_pairs(const Corpus& corpus, const EmbeddingStore& store,
                            double fraction, std::uint64_t seed);

}  // namespace bhns
