#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bhns/types.hpp"

namespace bhns {

// Frozen query and product embeddings with id lookup. Immutable after
// construction; concurrent reads are safe.
//
// Invariants enforced at construction: one id per row, ids unique within
// each namespace, no all-zero vector, queries and products share the same
// dimension whenever both sides are non-empty.
class EmbeddingStore {
 public:
  EmbeddingStore(std::vector<std::string> query_ids, Matrix query_vectors,
                 std::vector<std::string> product_ids, Matrix product_vectors);

  // Reads one embedding file per namespace. Format: UTF-8 text, one record
  // per line, `id<TAB>v1,v2,...,vd` with decimal floats; lines starting with
  // '#' and blank lines are ignored; the dimension is inferred from the
  // first record.
  static EmbeddingStore load(const std::string& query_path,
                             const std::string& product_path);

  Index dim() const { return dim_; }
  Index n_queries() const { return query_vectors_.rows(); }
  Index n_products() const { return product_vectors_.rows(); }

  const std::vector<std::string>& query_ids() const { return query_ids_; }
  const std::vector<std::string>& product_ids() const { return product_ids_; }
  const std::string& query_id(Index row) const { return query_ids_.at(static_cast<std::size_t>(row)); }
  const std::string& product_id(Index row) const { return product_ids_.at(static_cast<std::size_t>(row)); }

  auto query_vec(Index row) const { return query_vectors_.row(row); }
  auto product_vec(Index row) const { return product_vectors_.row(row); }

  // Throw std::out_of_range for unknown ids.
  Index query_row(const std::string& id) const;
  Index product_row(const std::string& id) const;
  bool has_query(const std::string& id) const { return query_lookup_.count(id) > 0; }
  bool has_product(const std::string& id) const { return product_lookup_.count(id) > 0; }

 private:
  std::vector<std::string> query_ids_;
  std::vector<std::string> product_ids_;
  Matrix query_vectors_;
  Matrix product_vectors_;
  std::unordered_map<std::string, Index> query_lookup_;
  std::unordered_map<std::string, Index> product_lookup_;
  Index dim_ = 0;
};

// Parses a single embedding file into (ids, row matrix). Errors carry the
// offending path and 1-based line number.
std::pair<std::vector<std::string>, Matrix> load_embedding_file(
    const std::string& path);

}  // namespace bhns
