#include "bhns/fne.hpp"

#include "bhns/sampler.hpp"
#include "bhns/similarity.hpp"

namespace bhns {

std::pair<double, int> estimate_theta(const TrainBatchContext& batch, Index query_row,
                                      Index product_row) {
  const auto anchors = batch.anchors(product_row);
  if (anchors.empty()) return {0.0, 0};
  const auto& store = batch.store();
  double sum = 0.0;
  for (const Anchor& a : anchors) {
    sum += a.label * clamped_sim(store.query_vec(query_row), store.query_vec(a.query_row));
  }
  return {sum / static_cast<double>(anchors.size()), static_cast<int>(anchors.size())};
}

FneEstimate estimate_false_negative(const std::string& query_id,
                                    const std::string& product_id,
                                    const TrainBatchContext& batch,
                                    const EmbeddingStore& store) {
  const Index query_row = store.query_row(query_id);
  const Index product_row = store.product_row(product_id);
  const auto [theta, anchor_count] = estimate_theta(batch, query_row, product_row);
  return FneEstimate{query_id, product_id, theta, anchor_count};
}

}  // namespace bhns
