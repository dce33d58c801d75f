#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bhns/metrics.hpp"
#include "bhns/rng.hpp"

using namespace bhns;

namespace {

// O(n^2) concordant-pair AUROC, the oracle for the rank-based implementation.
double brute_auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double num = 0.0;
  int n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 1) {
      ++n_pos;
      for (std::size_t j = 0; j < scores.size(); ++j) {
        if (labels[j] == 0) {
          if (scores[i] > scores[j]) {
            num += 1.0;
          } else if (scores[i] == scores[j]) {
            num += 0.5;
          }
        }
      }
    } else {
      ++n_neg;
    }
  }
  return num / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Independent fractional ranks: rank = |smaller| + (|equal| + 1) / 2.
std::vector<double> brute_ranks(const std::vector<double>& v) {
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0.0, equal = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) ++less;
      if (v[j] == v[i]) ++equal;
    }
    ranks[i] = less + (equal + 1.0) / 2.0;
  }
  return ranks;
}

}  // namespace

TEST_CASE("pearson hand values and contracts") {
  const std::vector<double> x{1, 2, 3};
  CHECK(pearson(x, x) == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<double> rev{3, 2, 1};
  CHECK(pearson(x, rev) == doctest::Approx(-1.0).epsilon(1e-12));

  const std::vector<double> a{1, 2, 3, 4};
  const std::vector<double> b{2, 1, 4, 3};
  CHECK(pearson(a, b) == doctest::Approx(0.6).epsilon(1e-12));

  CHECK_THROWS_AS(pearson(std::vector<double>{1.0, 1.0}, x), std::invalid_argument);
  CHECK_THROWS_AS(pearson(std::vector<double>{1.0}, std::vector<double>{1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(pearson(std::vector<double>{2.0, 2.0}, std::vector<double>{1.0, 3.0}),
                  std::domain_error);
}

TEST_CASE("spearman hand values") {
  const std::vector<double> x{1, 2, 3};
  std::vector<double> monotone{10, 200, 3000};  // strictly increasing transform of x
  CHECK(spearman(x, monotone) == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<double> rev{3, 2, 1};
  CHECK(spearman(x, rev) == doctest::Approx(-1.0).epsilon(1e-12));
  const std::vector<double> y{1, 3, 2};
  CHECK(spearman(x, y) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("spearman equals pearson of independently computed ranks") {
  CounterRng rng(404);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 3 + rng.uniform_below(20);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse grid so ties actually occur.
      x[i] = static_cast<double>(rng.uniform_below(6));
      y[i] = static_cast<double>(rng.uniform_below(6));
    }
    const auto rx = brute_ranks(x);
    const auto ry = brute_ranks(y);
    double expected = 0.0;
    bool defined = true;
    try {
      expected = pearson(rx, ry);
    } catch (const std::domain_error&) {
      defined = false;  // a constant side; spearman must refuse identically
    }
    if (defined) {
      CHECK(spearman(x, y) == doctest::Approx(expected).epsilon(1e-12));
    } else {
      CHECK_THROWS_AS(spearman(x, y), std::domain_error);
    }
  }
}

TEST_CASE("auroc hand values") {
  CHECK(auroc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, std::vector<int>{1, 1, 0, 0}) == 1.0);
  CHECK(auroc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, std::vector<int>{1, 0, 1, 0}) == 0.5);
  CHECK(auroc(std::vector<double>{0.9, 0.8, 0.7, 0.6}, std::vector<int>{1, 0, 1, 0}) ==
        doctest::Approx(0.75).epsilon(1e-12));
  CHECK_THROWS_AS(auroc(std::vector<double>{0.9, 0.8}, std::vector<int>{1, 1}),
                  std::domain_error);
  CHECK_THROWS_AS(auroc(std::vector<double>{0.9, 0.8}, std::vector<int>{1, 2}),
                  std::invalid_argument);
}

TEST_CASE("auroc equals exhaustive pair counting for every label pattern up to length 12") {
  CounterRng rng(505);
  for (std::size_t n = 2; n <= 12; ++n) {
    for (std::uint64_t mask = 1; mask + 1 < (1ULL << n); ++mask) {
      std::vector<int> labels(n);
      for (std::size_t i = 0; i < n; ++i) labels[i] = (mask >> i) & 1 ? 1 : 0;

      std::vector<double> continuous(n), tied(n);
      for (std::size_t i = 0; i < n; ++i) {
        continuous[i] = rng.next_double();
        tied[i] = static_cast<double>(rng.uniform_below(3));  // heavy ties
      }
      CHECK(auroc(continuous, labels) ==
            doctest::Approx(brute_auroc(continuous, labels)).epsilon(1e-12));
      CHECK(auroc(tied, labels) == doctest::Approx(brute_auroc(tied, labels)).epsilon(1e-12));
    }
  }
}

TEST_CASE("auroc antisymmetry under score negation on tie-free inputs") {
  CounterRng rng(606);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.uniform_below(30);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = rng.next_double();
      labels[i] = static_cast<int>(rng.uniform_below(2));
    }
    labels[0] = 1;
    labels[n - 1] = 0;
    std::vector<double> negated(n);
    for (std::size_t i = 0; i < n; ++i) negated[i] = -scores[i];
    CHECK(auroc(scores, labels) + auroc(negated, labels) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("ndcg hand values") {
  SUBCASE("ideal ordering scores 1") {
    const RankedList list("q", {{"a", 0.9, 1.0}, {"b", 0.5, 0.5}, {"c", 0.1, 0.1}});
    CHECK(ndcg_at(list, 3) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("all-zero gains score 0") {
    const RankedList list("q", {{"a", 0.9, 0.0}, {"b", 0.5, 0.0}});
    CHECK(ndcg_at(list, 2) == 0.0);
  }
  SUBCASE("relevant item at rank 2 of 2") {
    // Predicted order puts the zero-gain item first.
    const RankedList list("q", {{"a", 0.9, 0.0}, {"b", 0.5, 1.0}});
    CHECK(ndcg_at(list, 2) == doctest::Approx(0.6309297535714574).epsilon(1e-12));
  }
  SUBCASE("cutoff below list length truncates both sums") {
    const RankedList list("q", {{"a", 0.9, 0.0}, {"b", 0.5, 1.0}});
    CHECK(ndcg_at(list, 1) == 0.0);
  }
  SUBCASE("cutoff contract") {
    const RankedList list("q", {{"a", 0.9, 1.0}});
    CHECK_THROWS_AS(ndcg_at(list, 0), std::invalid_argument);
  }
}

TEST_CASE("ndcg is invariant under strictly increasing score transforms") {
  CounterRng rng(707);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.uniform_below(12);
    std::vector<RankedItem> items, transformed;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = rng.next_double();
      const double label = static_cast<double>(rng.uniform_below(3)) / 2.0;
      items.push_back({"p" + std::to_string(i), s, label});
      transformed.push_back({"p" + std::to_string(i), std::exp(3.0 * s) + 7.0, label});
    }
    const RankedList a("q", items);
    const RankedList b("q", transformed);
    for (int m : {1, 3, 5, 20}) {
      CHECK(ndcg_at(a, m) == doctest::Approx(ndcg_at(b, m)).epsilon(1e-12));
    }
  }
}

TEST_CASE("ranked lists apply the (score desc, id asc) tie-break before evaluation") {
  const RankedList list("q", {{"b", 0.5, 0.0}, {"a", 0.5, 1.0}, {"c", 0.9, 0.0}});
  CHECK(list.items()[0].product_id == "c");
  CHECK(list.items()[1].product_id == "a");
  CHECK(list.items()[2].product_id == "b");
  CHECK_THROWS_AS(RankedList("q", {}), std::invalid_argument);
}

TEST_CASE("mrr hand values") {
  const RankedList first_hit("q1", {{"a", 0.9, 1.0}, {"b", 0.5, 0.0}});
  const RankedList fourth_hit("q2", {{"a", 0.9, 0.0},
                                     {"b", 0.8, 0.0},
                                     {"c", 0.7, 0.0},
                                     {"d", 0.6, 1.0}});
  const RankedList second_hit("q3", {{"a", 0.9, 0.0}, {"b", 0.8, 1.0}});
  const RankedList no_hit("q4", {{"a", 0.9, 0.0}});

  CHECK(mrr(std::vector<RankedList>{first_hit, first_hit}, 0.5) == 1.0);
  CHECK(mrr(std::vector<RankedList>{fourth_hit}, 0.5) == 0.25);
  CHECK(mrr(std::vector<RankedList>{first_hit, second_hit}, 0.5) ==
        doctest::Approx(0.75).epsilon(1e-12));
  CHECK(mrr(std::vector<RankedList>{no_hit}, 0.5) == 0.0);
  CHECK_THROWS_AS(mrr(std::vector<RankedList>{}, 0.5), std::invalid_argument);
}

TEST_CASE("evaluate assembles the full report and isolates metric failures") {
  std::vector<EvalPair> pairs{
      {"q1", "a", 0.9, 1.0}, {"q1", "b", 0.7, 0.1}, {"q1", "c", 0.2, 0.1},
      {"q2", "d", 0.8, 1.0}, {"q2", "e", 0.9, 0.1},
  };
  MetricsOptions options;
  options.ndcg_cutoffs = {5, 10};
  const auto report = evaluate(pairs, options);
  CHECK(report.n_queries == 2);
  CHECK(report.n_pairs == 5);
  REQUIRE(report.auroc.has_value());
  REQUIRE(report.pearson.has_value());
  REQUIRE(report.spearman.has_value());
  CHECK(report.errors.empty());
  CHECK(report.ndcg.count(5) == 1);
  CHECK(report.ndcg.count(10) == 1);
  CHECK(report.mrr == doctest::Approx(0.75).epsilon(1e-12));  // ranks 1 and 2

  SUBCASE("single-class labels break AUROC but nothing else") {
    for (auto& p : pairs) p.label = 1.0;
    const auto partial = evaluate(pairs, options);
    CHECK(!partial.auroc.has_value());
    CHECK(partial.errors.count("auroc") == 1);
    CHECK(partial.ndcg.count(5) == 1);
    CHECK(partial.mrr == 1.0);
  }
}
