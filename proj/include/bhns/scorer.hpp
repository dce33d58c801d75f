#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bhns/embedding_store.hpp"
#include "bhns/sampler.hpp"
#include "bhns/similarity.hpp"
#include "bhns/types.hpp"

namespace bhns {

// Identifier of the feature map baked into checkpoints; a checkpoint trained
// with a different map must not be loaded silently.
inline constexpr const char* kFeatureMapId = "hadamard_absdiff_cos_v1";

// [q .* p, |q - p|, cos(q, p)]: 2d+1 joint features over a frozen pair of
// embeddings.
template <typename DerivedQ, typename DerivedP>
Vector cross_features(const Eigen::MatrixBase<DerivedQ>& q,
                      const Eigen::MatrixBase<DerivedP>& p) {
  if (q.size() != p.size()) {
    throw std::invalid_argument("cross_features: dimension mismatch");
  }
  const Index d = q.size();
  const Vector qv = q.derived().template cast<double>().reshaped();
  const Vector pv = p.derived().template cast<double>().reshaped();
  Vector f(2 * d + 1);
  f.head(d) = qv.cwiseProduct(pv);
  f.segment(d, d) = (qv - pv).cwiseAbs();
  f(2 * d) = cosine(qv, pv);
  return f;
}

struct ScorerParams {
  Vector w;  // dimension 2d+1
  double b = 0.0;
};

// Logistic of the affine form; strictly inside (0, 1).
double score_features(const ScorerParams& params, const Vector& features);

template <typename DerivedQ, typename DerivedP>
double score(const ScorerParams& params, const Eigen::MatrixBase<DerivedQ>& q,
             const Eigen::MatrixBase<DerivedP>& p) {
  return score_features(params, cross_features(q, p));
}

struct TrainingRow {
  Vector features;
  double label = 0.0;
};

struct TrainHyper {
  double lr = 0.5;
  int epochs = 400;
  std::uint64_t seed = 0;
  double l2 = 1e-4;
};

struct TrainReport {
  int epochs = 0;
  double final_loss = 0.0;
  std::vector<double> loss_curve;  // loss after each epoch's update
  std::uint64_t seed = 0;
  TrainHyper hyper;
};

// Mean squared error against soft labels plus an l2 penalty on the weights
// (bias excluded).
double loss(const ScorerParams& params, std::span<const TrainingRow> rows, double l2);

// Analytic gradient of loss() in the same parameter order: (w, b).
void gradient(const ScorerParams& params, std::span<const TrainingRow> rows, double l2,
              Vector& grad_w, double& grad_b);

// Flattens batches into feature/label rows: given rows keep their corpus
// label, sampled negatives their assigned (possibly pseudo) label. Row order
// is batch order: positives first, then negatives.
std::vector<TrainingRow> rows_from_batches(std::span<const TrainBatch> batches,
                                           const EmbeddingStore& store);
std::vector<TrainingRow> rows_from_batch_rows(std::span<const BatchRow> rows,
                                              const EmbeddingStore& store);

// Full-batch gradient descent, deterministic given (rows, hyper). Weights are
// initialized uniformly in [-0.01, 0.01) from the seed; the bias starts at 0.
std::pair<ScorerParams, TrainReport> train(std::span<const TrainingRow> rows,
                                           const TrainHyper& hyper);

// Max relative mismatch between the analytic gradient and central finite
// differences; relative error uses denominator max(1, |analytic|, |numeric|).
// epsilon must lie in [1e-7, 1e-3].
double grad_check(const ScorerParams& params, std::span<const TrainingRow> rows,
                  double epsilon, double l2 = 0.0);

// Checkpoint JSON: {"d": int, "w": [...], "b": float, "feature_map": "..."}.
void save_checkpoint(const ScorerParams& params, const std::string& path);
ScorerParams load_checkpoint(const std::string& path);

}  // namespace bhns
