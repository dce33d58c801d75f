#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bhns/fne.hpp"
#include "bhns/sampler.hpp"
#include "bhns/similarity.hpp"
#include "test_util.hpp"

using namespace bhns;

namespace {

// Queries at chosen cosines from q0 = (1, 0); unit circle embeddings.
EmbeddingStore angle_store(const std::vector<double>& query_cosines, int n_products) {
  std::vector<std::string> qids, pids;
  Matrix qv(static_cast<Index>(query_cosines.size()) + 1, 2);
  qv(0, 0) = 1.0;
  qv(0, 1) = 0.0;
  qids.push_back("q0");
  for (std::size_t i = 0; i < query_cosines.size(); ++i) {
    const double c = query_cosines[i];
    qv(static_cast<Index>(i) + 1, 0) = c;
    qv(static_cast<Index>(i) + 1, 1) = std::sqrt(std::max(0.0, 1.0 - c * c));
    qids.push_back("q" + std::to_string(i + 1));
  }
  Matrix pv(n_products, 2);
  for (int j = 0; j < n_products; ++j) {
    pids.push_back("p" + std::to_string(j));
    pv(j, 0) = 1.0;
    pv(j, 1) = static_cast<double>(j);
  }
  return EmbeddingStore(qids, qv, pids, pv);
}

}  // namespace

TEST_CASE("single-anchor limits: equivalence and independence") {
  // q1 identical to q0, q2 orthogonal to q0.
  const auto store = angle_store({1.0, 0.0}, 1);

  SUBCASE("identical anchor query, full label") {
    const std::vector<AnnotatedPair> batch{{"q1", "p0", 1.0, Provenance::kAnnotated}};
    const TrainBatchContext ctx(store, batch, 0.5);
    const auto est = estimate_false_negative("q0", "p0", ctx, store);
    CHECK(est.anchor_count == 1);
    CHECK(est.theta == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("orthogonal anchor query") {
    const std::vector<AnnotatedPair> batch{{"q2", "p0", 1.0, Provenance::kAnnotated}};
    const TrainBatchContext ctx(store, batch, 0.5);
    const auto est = estimate_false_negative("q0", "p0", ctx, store);
    CHECK(est.anchor_count == 1);
    CHECK(est.theta == 0.0);
  }

  SUBCASE("single anchor is exactly label times similarity") {
    const auto s = angle_store({0.8}, 1);
    for (double label : {1.0, 0.5, 0.7}) {
      const std::vector<AnnotatedPair> batch{{"q1", "p0", label, Provenance::kAnnotated}};
      const TrainBatchContext ctx(s, batch, 0.5);
      const auto est = estimate_false_negative("q0", "p0", ctx, s);
      const double sim = clamped_sim(s.query_vec(0), s.query_vec(1));
      CHECK(est.theta == label * sim);  // T = 1: no averaging error at all
      CHECK(est.theta == doctest::Approx(label * 0.8).epsilon(1e-12));
    }
  }
}

TEST_CASE("two anchors average their evidence") {
  // Anchors at cosine 0.8 (label 1.0) and 0.4 (label 0.5).
  const auto store = angle_store({0.8, 0.4}, 1);
  const std::vector<AnnotatedPair> batch{{"q1", "p0", 1.0, Provenance::kAnnotated},
                                         {"q2", "p0", 0.5, Provenance::kAnnotated}};
  const TrainBatchContext ctx(store, batch, 0.5);
  const auto est = estimate_false_negative("q0", "p0", ctx, store);
  CHECK(est.anchor_count == 2);
  CHECK(est.theta == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("no positively labeled in-batch query means theta 0") {
  const auto store = angle_store({0.9}, 2);
  const std::vector<AnnotatedPair> batch{{"q1", "p0", 0.2, Provenance::kAnnotated}};
  const TrainBatchContext ctx(store, batch, 0.5);
  const auto est = estimate_false_negative("q0", "p0", ctx, store);
  CHECK(est.anchor_count == 0);
  CHECK(est.theta == 0.0);

  const auto other = estimate_false_negative("q0", "p1", ctx, store);
  CHECK(other.anchor_count == 0);
  CHECK(other.theta == 0.0);
}

TEST_CASE("below-threshold anchors are excluded, threshold is inclusive") {
  const auto store = angle_store({1.0, 1.0}, 1);
  const std::vector<AnnotatedPair> batch{{"q1", "p0", 0.5, Provenance::kAnnotated},
                                         {"q2", "p0", 0.49, Provenance::kAnnotated}};
  const TrainBatchContext ctx(store, batch, 0.5);
  const auto est = estimate_false_negative("q0", "p0", ctx, store);
  CHECK(est.anchor_count == 1);
  CHECK(est.theta == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("theta is invariant under positive rescaling of query embeddings") {
  const auto store = angle_store({0.8, 0.4}, 1);
  // Same geometry with q0 scaled by 37.
  Matrix qv(3, 2);
  qv.row(0) << 37.0, 0.0;
  qv.row(1) << 0.8, 0.6;
  qv.row(2) << 0.4, std::sqrt(1.0 - 0.16);
  const EmbeddingStore scaled({"q0", "q1", "q2"}, qv, {"p0"}, Matrix::Ones(1, 2));

  const std::vector<AnnotatedPair> batch{{"q1", "p0", 1.0, Provenance::kAnnotated},
                                         {"q2", "p0", 0.5, Provenance::kAnnotated}};
  const TrainBatchContext ctx_a(store, batch, 0.5);
  const TrainBatchContext ctx_b(scaled, batch, 0.5);
  const auto a = estimate_false_negative("q0", "p0", ctx_a, store);
  const auto b = estimate_false_negative("q0", "p0", ctx_b, scaled);
  CHECK(a.theta == doctest::Approx(b.theta).epsilon(1e-9));
}

TEST_CASE("anchor order does not change theta beyond roundoff") {
  const auto store = angle_store({0.8, 0.4, 0.3, 0.9}, 1);
  std::vector<AnnotatedPair> batch{{"q1", "p0", 1.0, Provenance::kAnnotated},
                                   {"q2", "p0", 0.5, Provenance::kAnnotated},
                                   {"q3", "p0", 0.7, Provenance::kAnnotated},
                                   {"q4", "p0", 0.9, Provenance::kAnnotated}};
  const TrainBatchContext forward(store, batch, 0.5);
  const double t1 = estimate_false_negative("q0", "p0", forward, store).theta;
  std::reverse(batch.begin(), batch.end());
  const TrainBatchContext backward(store, batch, 0.5);
  const double t2 = estimate_false_negative("q0", "p0", backward, store).theta;
  CHECK(t1 == doctest::Approx(t2).epsilon(1e-12));
}

TEST_CASE("unresolvable ids raise lookup errors") {
  const auto store = angle_store({1.0}, 1);
  const std::vector<AnnotatedPair> batch{{"q1", "p0", 1.0, Provenance::kAnnotated}};
  const TrainBatchContext ctx(store, batch, 0.5);
  CHECK_THROWS_AS(estimate_false_negative("nope", "p0", ctx, store), std::out_of_range);
  CHECK_THROWS_AS(estimate_false_negative("q0", "nope", ctx, store), std::out_of_range);
}

TEST_CASE("theta never exceeds the largest anchor label") {
  CounterRng rng(20);
  for (int trial = 0; trial < 100; ++trial) {
    const int n_anchors = 1 + static_cast<int>(rng.uniform_below(5));
    std::vector<double> cosines;
    double max_label = 0.0;
    std::vector<AnnotatedPair> batch;
    for (int i = 0; i < n_anchors; ++i) {
      cosines.push_back(2.0 * rng.next_double() - 1.0);
      const double label = 0.5 + 0.5 * rng.next_double();
      max_label = std::max(max_label, label);
      batch.push_back({"q" + std::to_string(i + 1), "p0", label, Provenance::kAnnotated});
    }
    const auto store = angle_store(cosines, 1);
    const TrainBatchContext ctx(store, batch, 0.5);
    const auto est = estimate_false_negative("q0", "p0", ctx, store);
    CHECK(est.theta >= 0.0);
    CHECK(est.theta <= max_label + 1e-12);
  }
}
