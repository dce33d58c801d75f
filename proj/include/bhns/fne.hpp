#pragma once

#include <string>
#include <utility>

#include "bhns/embedding_store.hpp"
#include "bhns/types.hpp"

namespace bhns {

class TrainBatchContext;

// False-negative estimate for one (query, product) pair: the average, over
// the product's in-batch anchor queries, of anchor label times the rectified
// query-query cosine. No anchors means no evidence: theta = 0.
struct FneEstimate {
  std::string query_id;
  std::string product_id;
  double theta = 0.0;
  int anchor_count = 0;
};

FneEstimate estimate_false_negative(const std::string& query_id,
                                    const std::string& product_id,
                                    const TrainBatchContext& batch,
                                    const EmbeddingStore& store);

// Row-level core used by the sampler: (theta, anchor_count). Anchors are
// summed in batch order.
std::pair<double, int> estimate_theta(const TrainBatchContext& batch, Index query_row,
                                      Index product_row);

}  // namespace bhns
