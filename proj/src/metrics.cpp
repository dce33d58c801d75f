#include "bhns/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace bhns {
namespace {

// 1-based fractional ranks; tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&values](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("pearson: need at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw std::domain_error("pearson: constant input");
  return sxy / std::sqrt(sxx * syy);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  return pearson(rx, ry);
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auroc: length mismatch");
  std::size_t n_pos = 0, n_neg = 0;
  for (int l : labels) {
    if (l == 1) {
      ++n_pos;
    } else if (l == 0) {
      ++n_neg;
    } else {
      throw std::invalid_argument("auroc: labels must be 0 or 1");
    }
  }
  if (n_pos == 0 || n_neg == 0) throw std::domain_error("auroc: single-class input");

  const std::vector<double> ranks = average_ranks(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) rank_sum += ranks[i];
  }
  const double np = static_cast<double>(n_pos);
  const double u = rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

RankedList::RankedList(std::string query_id, std::vector<RankedItem> items)
    : query_id_(std::move(query_id)), items_(std::move(items)) {
  if (items_.empty()) throw std::invalid_argument("ranked list must be non-empty");
  std::sort(items_.begin(), items_.end(), [](const RankedItem& a, const RankedItem& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.product_id < b.product_id;
  });
}

double ndcg_at(const RankedList& list, int m) {
  if (m < 1) throw std::invalid_argument("ndcg: cutoff must be >= 1");
  const auto& items = list.items();
  const std::size_t depth = std::min<std::size_t>(static_cast<std::size_t>(m), items.size());

  double dcg = 0.0;
  for (std::size_t i = 0; i < depth; ++i) {
    dcg += items[i].label / std::log2(static_cast<double>(i) + 2.0);
  }

  std::vector<double> gains(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) gains[i] = items[i].label;
  std::sort(gains.begin(), gains.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t i = 0; i < depth; ++i) {
    idcg += gains[i] / std::log2(static_cast<double>(i) + 2.0);
  }
  if (idcg == 0.0) return 0.0;
  return dcg / idcg;
}

double mrr(std::span<const RankedList> lists, double positive_threshold) {
  if (lists.empty()) throw std::invalid_argument("mrr: no ranked lists");
  double sum = 0.0;
  for (const RankedList& list : lists) {
    const auto& items = list.items();
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (items[i].label >= positive_threshold) {
        sum += 1.0 / static_cast<double>(i + 1);
        break;
      }
    }
  }
  return sum / static_cast<double>(lists.size());
}

MetricsReport evaluate(std::span<const EvalPair> pairs, const MetricsOptions& options) {
  if (pairs.empty()) throw ValidationError("metrics: no evaluation pairs");

  MetricsReport report;
  report.n_pairs = static_cast<int>(pairs.size());

  std::vector<double> predicted(pairs.size());
  std::vector<double> labels(pairs.size());
  std::vector<int> binary(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    predicted[i] = pairs[i].predicted;
    labels[i] = pairs[i].label;
    binary[i] = pairs[i].label >= options.positive_threshold ? 1 : 0;
  }

  try {
    report.pearson = pearson(predicted, labels);
  } catch (const std::domain_error& e) {
    report.errors["pearson"] = e.what();
  }
  try {
    report.spearman = spearman(predicted, labels);
  } catch (const std::domain_error& e) {
    report.errors["spearman"] = e.what();
  }
  try {
    report.auroc = auroc(predicted, binary);
  } catch (const std::domain_error& e) {
    report.errors["auroc"] = e.what();
  }

  // Group by query, preserving first-appearance order.
  std::vector<RankedList> lists;
  {
    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::pair<std::string, std::vector<RankedItem>>> groups;
    for (const EvalPair& p : pairs) {
      const auto it = index.find(p.query_id);
      if (it == index.end()) {
        index.emplace(p.query_id, groups.size());
        groups.push_back({p.query_id, {RankedItem{p.product_id, p.predicted, p.label}}});
      } else {
        groups[it->second].second.push_back(RankedItem{p.product_id, p.predicted, p.label});
      }
    }
    lists.reserve(groups.size());
    for (auto& [qid, items] : groups) lists.emplace_back(qid, std::move(items));
  }
  report.n_queries = static_cast<int>(lists.size());

  report.mrr = mrr(lists, options.positive_threshold);
  for (int cutoff : options.ndcg_cutoffs) {
    double sum = 0.0;
    for (const RankedList& list : lists) sum += ndcg_at(list, cutoff);
    report.ndcg[cutoff] = sum / static_cast<double>(lists.size());
  }
  return report;
}

}  // namespace bhns
