#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bhns/types.hpp"

namespace bhns {

// Sample Pearson correlation. Inputs must have equal length >= 2 and be
// nonconstant.
double pearson(std::span<const double> x, std::span<const double> y);

// Pearson over fractional ranks; ties receive the average rank.
double spearman(std::span<const double> x, std::span<const double> y);

// Mann-Whitney AUROC with ties counted 0.5. Labels must be 0/1 with at least
// one of each class.
double auroc(std::span<const double> scores, std::span<const int> labels);

struct RankedItem {
  std::string product_id;
  double score = 0.0;   // predicted
  double label = 0.0;   // true soft label in [0, 1]
};

// One query's evaluation list, ordered (score desc, product id asc) at
// construction.
class RankedList {
 public:
  RankedList(std::string query_id, std::vector<RankedItem> items);
  const std::string& query_id() const { return query_id_; }
  const std::vector<RankedItem>& items() const { return items_; }

 private:
  std::string query_id_;
  std::vector<RankedItem> items_;
};

// DCG@m with linear gain (the soft label) and 1/log2(rank+1) discount,
// normalized by the ideal ordering; all-zero-gain lists score 0.
double ndcg_at(const RankedList& list, int m);

// Mean over queries of 1/rank of the first item with label >= threshold;
// queries without such an item contribute 0.
double mrr(std::span<const RankedList> lists, double positive_threshold);

struct EvalPair {
  std::string query_id;
  std::string product_id;
  double predicted = 0.0;
  double label = 0.0;
};

struct MetricsOptions {
  std::vector<int> ndcg_cutoffs{5, 10, 20};
  // Binary positive iff label >= this; the default captures only labels that
  // round to 1.
  double positive_threshold = 1.0 - 1e-9;
};

struct MetricsReport {
  std::optional<double> auroc;
  std::optional<double> pearson;
  std::optional<double> spearman;
  double mrr = 0.0;
  std::map<int, double> ndcg;  // cutoff -> mean over queries
  int n_queries = 0;
  int n_pairs = 0;
  std::map<std::string, std::string> errors;  // metric name -> failure message
};

// Runs the full metric family over per-pair predictions. Domain failures of
// individual metrics (e.g. single-class AUROC) are recorded in `errors`
// instead of aborting the report.
MetricsReport evaluate(std::span<const EvalPair> pairs, const MetricsOptions& options);

}  // namespace bhns
