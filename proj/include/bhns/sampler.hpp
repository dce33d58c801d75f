#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "bhns/corpus.hpp"
#include "bhns/embedding_store.hpp"
#include "bhns/rng.hpp"
#include "bhns/types.hpp"

namespace bhns {

enum class SamplerKind { kVns, kHns, kBhns };

std::string_view to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(std::string_view name);

struct SamplerConfig {
  SamplerKind kind = SamplerKind::kBhns;
  int k = 4;                          // negatives per query
  double tau = 2.0;                   // regularization temperature
  std::uint64_t seed = 0;
  double positivity_threshold = 0.5;  // label >= threshold counts as positive
  void validate() const;
};

struct SampledNegative {
  std::string query_id;
  std::string product_id;
  double assigned_label = 0.0;
  double theta = 0.0;
  double regularized_score = 0.0;
  int rank = 0;  // 1-based; draw order for vns, descending score otherwise
  SamplerKind source = SamplerKind::kVns;
};

struct BatchPair {
  Index query_row;
  Index product_row;
  double label;
};

// An in-batch query with label >= threshold for some product; the evidence
// false-negative estimation averages over.
struct Anchor {
  Index query_row;
  double label;
};

// Immutable per-batch view: the batch's labeled pairs, the per-query positive
// sets, the per-product anchor lists, and the in-batch product universe.
class TrainBatchContext {
 public:
  TrainBatchContext(const EmbeddingStore& store, std::span<const AnnotatedPair> pairs,
                    double positivity_threshold);

  const EmbeddingStore& store() const { return *store_; }
  double positivity_threshold() const { return threshold_; }
  const std::vector<BatchPair>& pairs() const { return pairs_; }

  // Distinct query rows, in order of first appearance in the batch.
  const std::vector<Index>& queries() const { return queries_; }
  // In-batch product rows, ascending by product id.
  const std::vector<Index>& products() const { return products_; }

  // In-batch products minus the query's positives, ascending by product id.
  std::vector<Index> candidate_pool(Index query_row) const;

  // (anchor query, label) records for a product, in batch order; empty when
  // the product has no positively labeled in-batch query.
  std::span<const Anchor> anchors(Index product_row) const;

  bool is_positive(Index query_row, Index product_row) const;

 private:
  const EmbeddingStore* store_;
  double threshold_;
  std::vector<BatchPair> pairs_;
  std::vector<Index> queries_;
  std::vector<Index> products_;
  std::unordered_map<Index, std::vector<Anchor>> anchors_;
  std::unordered_map<Index, std::unordered_set<Index>> positives_;
};

// (1 - theta)^tau * cosine(query, product): hard-negative affinity damped by
// the estimated false-negative probability. tau = 0 recovers the raw cosine
// ordering, including for theta = 1 (x^0 == 1).
double regularized_score(const EmbeddingStore& store, Index query_row, Index product_row,
                         double theta, double tau);

// Uniform draw of min(k, |pool|) distinct candidates, label 0.
std::vector<SampledNegative> sample_vns(Index query_row, const TrainBatchContext& ctx,
                                        const SamplerConfig& cfg, CounterRng& rng);

// Top-k candidates by cosine, ties broken by ascending product id, label 0.
std::vector<SampledNegative> sample_hns(Index query_row, const TrainBatchContext& ctx,
                                        const SamplerConfig& cfg);

// Top-k candidates by regularized score; each selected product keeps its
// false-negative estimate as the assigned pseudo label.
std::vector<SampledNegative> sample_bhns(Index query_row, const TrainBatchContext& ctx,
                                         const SamplerConfig& cfg);

struct TrainBatch {
  int index = 0;
  std::vector<AnnotatedPair> positives;  // the batch's given rows, shuffled order
  std::vector<SampledNegative> negatives;
  std::vector<std::string> warnings;
};

// Seeded shuffle of the corpus, split into consecutive chunks; the final
// partial chunk is kept.
std::vector<std::vector<AnnotatedPair>> partition_batches(const Corpus& corpus,
                                                          std::uint64_t seed,
                                                          int batch_size);

// Partitions, builds a context per batch, and runs the configured sampler for
// every distinct query. Queries whose candidate pool is empty or smaller than
// k produce fewer negatives plus a warning record instead of failing.
std::vector<TrainBatch> build_batches(const Corpus& corpus, const EmbeddingStore& store,
                                      const SamplerConfig& cfg, int batch_size);

// One JSON object per line:
//   {"query_id","product_id","label","source","theta","reg_score","rank"}
// where source is "positive" for given rows (theta/reg_score/rank null) and
// the sampler name for generated negatives.
void write_batch_jsonl(const TrainBatch& batch, std::ostream& out);

struct BatchRow {
  std::string query_id;
  std::string product_id;
  double label = 0.0;
  std::string source;
};

std::vector<BatchRow> read_batch_jsonl(const std::string& path);

// Inspection record for one (query, candidate) pair of a batch: its
// false-negative estimate and whether the configured sampler selected it.
struct CandidateTrace {
  int batch_index = 0;
  std::string query_id;
  std::string product_id;
  double theta = 0.0;
  int anchor_count = 0;
  bool selected = false;
};

// Replays the exact batching and sampling of build_batches, recording every
// candidate of every query.
std::vector<CandidateTrace> trace_candidates(const Corpus& corpus, const EmbeddingStore& store,
                                             const SamplerConfig& cfg, int batch_size);

}  // namespace bhns
