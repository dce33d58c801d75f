#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bhns/corpus.hpp"
#include "bhns/embedding_store.hpp"
#include "bhns/sampler.hpp"
#include "bhns/scorer.hpp"
#include "bhns/types.hpp"

namespace bhns {

// Geometry and labeling of a synthetic corpus with planted paraphrase-query
// clusters. Members of a cluster share a relevant product set, but only one
// (query, product) pair per query is annotated; every other same-cluster pair
// is a known false negative.
struct SynthSpec {
  int n_clusters = 4;
  int queries_per_cluster = 4;
  int products_per_cluster = 8;
  int dim = 16;
  double intra_cluster_cos = 0.9;      // pairwise cosine within a cluster >= this
  double inter_cluster_cos_max = 0.2;  // pairwise cosine across clusters <= this
  double label_noise = 0.0;            // positives get label 1 - label_noise * U[0,1)
  std::uint64_t seed = 0;
  void validate() const;
};

using PairKey = std::pair<std::string, std::string>;  // (query_id, product_id)

struct GeneratedBench {
  EmbeddingStore store;
  Corpus corpus;
  std::set<PairKey> planted_false_negatives;
};

// Deterministic in spec.seed. Each cluster lives on its own axis plus noise
// confined to a shared residual subspace, which guarantees the two cosine
// bounds by construction.
GeneratedBench generate(const SynthSpec& spec);

// Cluster assignment by store row, matching the generated layout.
int query_cluster(const SynthSpec& spec, Index query_row);
int product_cluster(const SynthSpec& spec, Index product_row);

// The trainer defaults run the stand-in scorer to convergence; contaminated
// labels only show up in held-out ranking once the model has actually fit
// its training set.
struct BenchHyper {
  TrainHyper trainer{/*lr=*/5.0, /*epochs=*/200000, /*seed=*/0, /*l2=*/0.0};
  int batch_size = 16;
};

struct SamplerBenchResult {
  SamplerConfig config;
  // Means over seeds.
  double false_negative_selection_rate = 0.0;
  std::optional<double> mean_pseudo_label_on_planted_fn;  // bhns only
  double auroc_after_training = 0.0;
  // Per-seed detail, aligned with BenchReport::seeds.
  std::vector<double> rate_per_seed;
  std::vector<double> auroc_per_seed;
};

struct BenchReport {
  SynthSpec spec;
  std::vector<std::uint64_t> seeds;
  std::vector<SamplerBenchResult> samplers;
};

// For each of n_seeds consecutive seeds starting at spec.seed: regenerate the
// corpus, run every sampler, measure the fraction of emitted negatives that
// are planted false negatives, train the scorer on each sampler's batches
// with identical hyperparameters, and evaluate AUROC on the full
// query-product grid with planted false negatives labeled positive.
BenchReport run_bench(const SynthSpec& spec, std::span<const SamplerConfig> sampler_cfgs,
                      const BenchHyper& hyper, int n_seeds);

}  // namespace bhns
