#include "bhns/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "bhns/rng.hpp"

namespace bhns {
namespace {

double sigmoid(double z) {
  double s;
  if (z >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    s = e / (1.0 + e);
  }
  // Keep the output strictly inside (0, 1) even where exp underflows.
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  return std::clamp(s, lo, hi);
}

void check_rows(std::span<const TrainingRow> rows) {
  if (rows.empty()) throw ValidationError("scorer: no training rows");
  const Index d = rows.front().features.size();
  for (const TrainingRow& r : rows) {
    if (r.features.size() != d) {
      throw ValidationError("scorer: inconsistent feature dimension across rows");
    }
  }
}

}  // namespace

double score_features(const ScorerParams& params, const Vector& features) {
  if (params.w.size() != features.size()) {
    throw std::invalid_argument("score: parameter/feature dimension mismatch");
  }
  return sigmoid(params.w.dot(features) + params.b);
}

double loss(const ScorerParams& params, std::span<const TrainingRow> rows, double l2) {
  check_rows(rows);
  double sum = 0.0;
  for (const TrainingRow& r : rows) {
    const double e = score_features(params, r.features) - r.label;
    sum += e * e;
  }
  return sum / static_cast<double>(rows.size()) + l2 * params.w.squaredNorm();
}

void gradient(const ScorerParams& params, std::span<const TrainingRow> rows, double l2,
              Vector& grad_w, double& grad_b) {
  check_rows(rows);
  grad_w = Vector::Zero(params.w.size());
  grad_b = 0.0;
  const double n = static_cast<double>(rows.size());
  for (const TrainingRow& r : rows) {
    const double s = score_features(params, r.features);
    const double dz = 2.0 * (s - r.label) * s * (1.0 - s) / n;
    grad_w += dz * r.features;
    grad_b += dz;
  }
  grad_w += 2.0 * l2 * params.w;
}

std::vector<TrainingRow> rows_from_batches(std::span<const TrainBatch> batches,
                                           const EmbeddingStore& store) {
  std::vector<TrainingRow> rows;
  for (const TrainBatch& batch : batches) {
    for (const AnnotatedPair& p : batch.positives) {
      rows.push_back(TrainingRow{cross_features(store.query_vec(store.query_row(p.query_id)),
                                                store.product_vec(store.product_row(p.product_id))),
                                 p.label});
    }
    for (const SampledNegative& neg : batch.negatives) {
      rows.push_back(TrainingRow{cross_features(store.query_vec(store.query_row(neg.query_id)),
                                                store.product_vec(store.product_row(neg.product_id))),
                                 neg.assigned_label});
    }
  }
  return rows;
}

std::vector<TrainingRow> rows_from_batch_rows(std::span<const BatchRow> rows,
                                              const EmbeddingStore& store) {
  std::vector<TrainingRow> out;
  out.reserve(rows.size());
  for (const BatchRow& r : rows) {
    out.push_back(TrainingRow{cross_features(store.query_vec(store.query_row(r.query_id)),
                                             store.product_vec(store.product_row(r.product_id))),
                              r.label});
  }
  return out;
}

std::pair<ScorerParams, TrainReport> train(std::span<const TrainingRow> rows,
                                           const TrainHyper& hyper) {
  if (!(hyper.lr > 0.0)) throw ValidationError("trainer: lr must be positive");
  if (hyper.epochs < 1) throw ValidationError("trainer: epochs must be >= 1");
  if (hyper.l2 < 0.0) throw ValidationError("trainer: l2 must be non-negative");
  check_rows(rows);

  const Index dim = rows.front().features.size();
  ScorerParams params;
  params.w = Vector(dim);
  params.b = 0.0;
  CounterRng rng(hyper.seed, fnv1a64("scorer_init"));
  for (Index i = 0; i < dim; ++i) params.w(i) = 0.02 * rng.next_double() - 0.01;

  TrainReport report;
  report.epochs = hyper.epochs;
  report.seed = hyper.seed;
  report.hyper = hyper;
  report.loss_curve.reserve(static_cast<std::size_t>(hyper.epochs));

  Vector grad_w;
  double grad_b = 0.0;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    gradient(params, rows, hyper.l2, grad_w, grad_b);
    params.w -= hyper.lr * grad_w;
    params.b -= hyper.lr * grad_b;
    const double l = loss(params, rows, hyper.l2);
    if (!std::isfinite(l) || !params.w.allFinite() || !std::isfinite(params.b)) {
      throw std::runtime_error("training diverged: non-finite loss or parameters at epoch " +
                               std::to_string(epoch) + " (reduce lr)");
    }
    report.loss_curve.push_back(l);
  }
  report.final_loss = report.loss_curve.back();
  return {std::move(params), std::move(report)};
}

double grad_check(const ScorerParams& params, std::span<const TrainingRow> rows,
                  double epsilon, double l2) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) {
    throw std::invalid_argument("grad_check: epsilon must lie in [1e-7, 1e-3]");
  }
  check_rows(rows);
  if (params.w.size() != rows.front().features.size()) {
    throw std::invalid_argument("grad_check: parameter/feature dimension mismatch");
  }

  Vector analytic_w;
  double analytic_b = 0.0;
  gradient(params, rows, l2, analytic_w, analytic_b);

  const auto relative = [](double a, double n) {
    return std::abs(a - n) / std::max({1.0, std::abs(a), std::abs(n)});
  };

  double worst = 0.0;
  ScorerParams probe = params;
  for (Index i = 0; i < params.w.size(); ++i) {
    probe.w(i) = params.w(i) + epsilon;
    const double up = loss(probe, rows, l2);
    probe.w(i) = params.w(i) - epsilon;
    const double down = loss(probe, rows, l2);
    probe.w(i) = params.w(i);
    worst = std::max(worst, relative(analytic_w(i), (up - down) / (2.0 * epsilon)));
  }
  probe.b = params.b + epsilon;
  const double up = loss(probe, rows, l2);
  probe.b = params.b - epsilon;
  const double down = loss(probe, rows, l2);
  worst = std::max(worst, relative(analytic_b, (up - down) / (2.0 * epsilon)));
  return worst;
}

void save_checkpoint(const ScorerParams& params, const std::string& path) {
  if (params.w.size() < 1 || (params.w.size() - 1) % 2 != 0) {
    throw ValidationError("checkpoint: weight vector must have dimension 2d+1");
  }
  nlohmann::ordered_json doc;
  doc["d"] = (params.w.size() - 1) / 2;
  doc["w"] = std::vector<double>(params.w.data(), params.w.data() + params.w.size());
  doc["b"] = params.b;
  doc["feature_map"] = kFeatureMapId;
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write checkpoint: " + path);
  out << doc.dump(2) << '\n';
}

ScorerParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open checkpoint: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
  if (!doc.contains("d") || !doc.contains("w") || !doc.contains("b") ||
      !doc.contains("feature_map")) {
    throw ValidationError(path + ": incomplete checkpoint");
  }
  if (doc["feature_map"].get<std::string>() != kFeatureMapId) {
    throw ValidationError(path + ": unsupported feature map '" +
                          doc["feature_map"].get<std::string>() + "'");
  }
  const auto weights = doc["w"].get<std::vector<double>>();
  const auto d = doc["d"].get<Index>();
  if (static_cast<Index>(weights.size()) != 2 * d + 1) {
    throw ValidationError(path + ": weight count does not match dimension");
  }
  ScorerParams params;
  params.w = Eigen::Map<const Vector>(weights.data(), static_cast<Index>(weights.size()));
  params.b = doc["b"].get<double>();
  if (!params.w.allFinite() || !std::isfinite(params.b)) {
    throw ValidationError(path + ": non-finite parameters");
  }
  return params;
}

}  // namespace bhns
