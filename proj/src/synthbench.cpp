#include "bhns/synthbench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bhns/metrics.hpp"
#include "bhns/rng.hpp"

namespace bhns {
namespace {

std::string member_id(char prefix, int cluster, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%03d_%03d", prefix, cluster, index);
  return std::string(buf);
}

// Unit vector: sqrt(1-s2) on the cluster axis, noise of squared norm s2 in
// the shared residual subspace (coordinates n_clusters..dim-1).
Vector cluster_member(const SynthSpec& spec, int cluster, double s2, CounterRng& rng) {
  Vector v = Vector::Zero(spec.dim);
  v(cluster) = std::sqrt(1.0 - s2);
  const Index noise_dim = spec.dim - spec.n_clusters;
  if (s2 > 0.0 && noise_dim > 0) {
    Vector noise(noise_dim);
    for (Index i = 0; i < noise_dim; ++i) noise(i) = rng.next_gaussian();
    const double norm = noise.norm();
    if (norm > 0.0) {
      v.tail(noise_dim) = noise * (std::sqrt(s2) / norm);
    }
  }
  return v;
}

}  // namespace

void SynthSpec::validate() const {
  if (n_clusters < 1 || queries_per_cluster < 1 || products_per_cluster < 1) {
    throw ValidationError("synth spec: cluster counts must be >= 1");
  }
  if (dim < 1) throw ValidationError("synth spec: dim must be >= 1");
  if (!(intra_cluster_cos > 0.0 && intra_cluster_cos <= 1.0)) {
    throw ValidationError("synth spec: intra_cluster_cos must lie in (0, 1]");
  }
  if (!(inter_cluster_cos_max >= 0.0 && inter_cluster_cos_max < intra_cluster_cos)) {
    throw ValidationError("synth spec: inter_cluster_cos_max must lie in [0, intra_cluster_cos)");
  }
  if (!(label_noise >= 0.0 && label_noise < 1.0)) {
    throw ValidationError("synth spec: label_noise must lie in [0, 1)");
  }
  if (dim < n_clusters) {
    throw ValidationError("synth spec: need dim >= n_clusters for orthogonal cluster axes; "
                          "increase dim");
  }
  const double s2 = std::min((1.0 - intra_cluster_cos) / 2.0, inter_cluster_cos_max);
  if (s2 > 0.0 && dim < n_clusters + 1) {
    throw ValidationError("synth spec: no residual coordinates left for noise; increase dim");
  }
}

GeneratedBench generate(const SynthSpec& spec) {
  spec.validate();
  // Pairwise intra cosine is at least (1-s2) - s2 and cross-cluster cosine at
  // most s2, so this choice meets both bounds.
  const double s2 = std::min((1.0 - spec.intra_cluster_cos) / 2.0, spec.inter_cluster_cos_max);

  CounterRng rng(spec.seed, fnv1a64("synthbench"));

  std::vector<std::string> query_ids;
  std::vector<std::string> product_ids;
  Matrix query_vectors(spec.n_clusters * spec.queries_per_cluster, spec.dim);
  Matrix product_vectors(spec.n_clusters * spec.products_per_cluster, spec.dim);

  Index qr = 0;
  for (int c = 0; c < spec.n_clusters; ++c) {
    for (int i = 0; i < spec.queries_per_cluster; ++i, ++qr) {
      query_ids.push_back(member_id('q', c, i));
      query_vectors.row(qr) = cluster_member(spec, c, s2, rng).transpose();
    }
  }
  Index pr = 0;
  for (int c = 0; c < spec.n_clusters; ++c) {
    for (int j = 0; j < spec.products_per_cluster; ++j, ++pr) {
      product_ids.push_back(member_id('p', c, j));
      product_vectors.row(pr) = cluster_member(spec, c, s2, rng).transpose();
    }
  }

  EmbeddingStore store(std::move(query_ids), std::move(query_vectors),
                       std::move(product_ids), std::move(product_vectors));

  // One annotated positive per query, assigned round-robin over the cluster's
  // products; every remaining same-cluster pair is a planted false negative.
  std::vector<AnnotatedPair> pairs;
  std::set<PairKey> annotated;
  for (int c = 0; c < spec.n_clusters; ++c) {
    for (int i = 0; i < spec.queries_per_cluster; ++i) {
      const std::string qid = member_id('q', c, i);
      const std::string pid = member_id('p', c, i % spec.products_per_cluster);
      const double label = 1.0 - spec.label_noise * rng.next_double();
      pairs.push_back(AnnotatedPair{qid, pid, label, Provenance::kAnnotated});
      annotated.insert({qid, pid});
    }
  }

  std::set<PairKey> planted;
  for (int c = 0; c < spec.n_clusters; ++c) {
    for (int i = 0; i < spec.queries_per_cluster; ++i) {
      for (int j = 0; j < spec.products_per_cluster; ++j) {
        PairKey key{member_id('q', c, i), member_id('p', c, j)};
        if (annotated.count(key) == 0) planted.insert(std::move(key));
      }
    }
  }

  Corpus corpus(std::move(pairs), store);
  return GeneratedBench{std::move(store), std::move(corpus), std::move(planted)};
}

int query_cluster(const SynthSpec& spec, Index query_row) {
  return static_cast<int>(query_row) / spec.queries_per_cluster;
}

int product_cluster(const SynthSpec& spec, Index product_row) {
  return static_cast<int>(product_row) / spec.products_per_cluster;
}

BenchReport run_bench(const SynthSpec& spec, std::span<const SamplerConfig> sampler_cfgs,
                      const BenchHyper& hyper, int n_seeds) {
  spec.validate();
  if (n_seeds < 1) throw ValidationError("bench: need at least one seed");
  if (sampler_cfgs.empty()) throw ValidationError("bench: no sampler configurations");

  BenchReport report;
  report.spec = spec;
  report.samplers.resize(sampler_cfgs.size());
  for (std::size_t s = 0; s < sampler_cfgs.size(); ++s) {
    report.samplers[s].config = sampler_cfgs[s];
  }

  std::vector<double> pseudo_sum(sampler_cfgs.size(), 0.0);
  std::vector<std::size_t> pseudo_count(sampler_cfgs.size(), 0);

  for (int run = 0; run < n_seeds; ++run) {
    const std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(run);
    report.seeds.push_back(seed);

    SynthSpec seeded = spec;
    seeded.seed = seed;
    const GeneratedBench bench = generate(seeded);

    for (std::size_t s = 0; s < sampler_cfgs.size(); ++s) {
      SamplerConfig cfg = sampler_cfgs[s];
      cfg.seed = seed;
      const auto batches = build_batches(bench.corpus, bench.store, cfg, hyper.batch_size);

      std::size_t emitted = 0, planted_hits = 0;
      for (const TrainBatch& batch : batches) {
        for (const SampledNegative& neg : batch.negatives) {
          ++emitted;
          if (bench.planted_false_negatives.count({neg.query_id, neg.product_id}) > 0) {
            ++planted_hits;
            if (cfg.kind == SamplerKind::kBhns) {
              pseudo_sum[s] += neg.assigned_label;
              ++pseudo_count[s];
            }
          }
        }
      }
      const double rate =
          emitted == 0 ? 0.0
                       : static_cast<double>(planted_hits) / static_cast<double>(emitted);
      report.samplers[s].rate_per_seed.push_back(rate);

      TrainHyper trainer = hyper.trainer;
      trainer.seed = seed;
      const auto rows = rows_from_batches(batches, bench.store);
      const auto [params, train_report] = train(rows, trainer);

      // Held-out grid: every (query, product) pair, same-cluster relevance as
      // ground truth. This relabels planted false negatives as positive.
      std::vector<double> predicted;
      std::vector<int> truth;
      predicted.reserve(static_cast<std::size_t>(bench.store.n_queries() * bench.store.n_products()));
      truth.reserve(predicted.capacity());
      for (Index q = 0; q < bench.store.n_queries(); ++q) {
        for (Index p = 0; p < bench.store.n_products(); ++p) {
          predicted.push_back(score(params, bench.store.query_vec(q), bench.store.product_vec(p)));
          truth.push_back(query_cluster(seeded, q) == product_cluster(seeded, p) ? 1 : 0);
        }
      }
      report.samplers[s].auroc_per_seed.push_back(auroc(predicted, truth));
    }
  }

  for (std::size_t s = 0; s < sampler_cfgs.size(); ++s) {
    auto& result = report.samplers[s];
    const double n = static_cast<double>(n_seeds);
    double rate_sum = 0.0, auroc_sum = 0.0;
    for (double r : result.rate_per_seed) rate_sum += r;
    for (double a : result.auroc_per_seed) auroc_sum += a;
    result.false_negative_selection_rate = rate_sum / n;
    result.auroc_after_training = auroc_sum / n;
    if (sampler_cfgs[s].kind == SamplerKind::kBhns && pseudo_count[s] > 0) {
      result.mean_pseudo_label_on_planted_fn =
          pseudo_sum[s] / static_cast<double>(pseudo_count[s]);
    }
  }
  return report;
}

}  // namespace bhns
