#pragma once

// Reference implementations shared by the unit and acceptance suites: plain
// loops and plain sorts, no code shared with the library paths they check.

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bhns/corpus.hpp"
#include "bhns/embedding_store.hpp"
#include "bhns/rng.hpp"

namespace oracle {

using RawVec = std::vector<double>;

inline double ref_cosine(const RawVec& a, const RawVec& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  double c = dot / (std::sqrt(na) * std::sqrt(nb));
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return c;
}

inline double ref_clamped(const RawVec& a, const RawVec& b) {
  return std::max(0.0, ref_cosine(a, b));
}

struct RawInstance {
  std::vector<std::string> query_ids, product_ids;
  std::vector<RawVec> query_vecs, product_vecs;
  std::vector<bhns::AnnotatedPair> batch;

  const RawVec& query(const std::string& id) const {
    for (std::size_t i = 0; i < query_ids.size(); ++i) {
      if (query_ids[i] == id) return query_vecs[i];
    }
    throw std::runtime_error("ref: unknown query " + id);
  }
  const RawVec& product(const std::string& id) const {
    for (std::size_t i = 0; i < product_ids.size(); ++i) {
      if (product_ids[i] == id) return product_vecs[i];
    }
    throw std::runtime_error("ref: unknown product " + id);
  }
};

inline double ref_theta(const RawInstance& inst, const std::string& query_id,
                        const std::string& product_id, double threshold) {
  double sum = 0.0;
  int count = 0;
  for (const auto& pair : inst.batch) {
    if (pair.product_id == product_id && pair.label >= threshold) {
      sum += pair.label * ref_clamped(inst.query(query_id), inst.query(pair.query_id));
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / count;
}

inline std::vector<std::string> ref_pool(const RawInstance& inst, const std::string& query_id,
                                         double threshold) {
  std::set<std::string> products, positives;
  for (const auto& pair : inst.batch) {
    products.insert(pair.product_id);
    if (pair.query_id == query_id && pair.label >= threshold) positives.insert(pair.product_id);
  }
  std::vector<std::string> pool;
  for (const auto& p : products) {
    if (positives.count(p) == 0) pool.push_back(p);
  }
  std::sort(pool.begin(), pool.end());
  return pool;
}

// Full sort of the candidate pool by (score desc, id asc), truncated to k.
inline std::vector<std::string> ref_topk(const RawInstance& inst, const std::string& query_id,
                                         double threshold, int k, bool regularize, double tau) {
  struct Entry {
    std::string id;
    double score;
  };
  std::vector<Entry> entries;
  for (const auto& pid : ref_pool(inst, query_id, threshold)) {
    double score = ref_cosine(inst.query(query_id), inst.product(pid));
    if (regularize) {
      score *= std::pow(1.0 - ref_theta(inst, query_id, pid, threshold), tau);
    }
    entries.push_back({pid, score});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < entries.size() && i < static_cast<std::size_t>(k); ++i) {
    out.push_back(entries[i].id);
  }
  return out;
}

inline bhns::EmbeddingStore store_from_raw(const RawInstance& inst) {
  bhns::Matrix qv(static_cast<bhns::Index>(inst.query_vecs.size()),
                  static_cast<bhns::Index>(inst.query_vecs.front().size()));
  for (bhns::Index r = 0; r < qv.rows(); ++r) {
    for (bhns::Index c = 0; c < qv.cols(); ++c) {
      qv(r, c) = inst.query_vecs[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
  }
  bhns::Matrix pv(static_cast<bhns::Index>(inst.product_vecs.size()),
                  static_cast<bhns::Index>(inst.product_vecs.front().size()));
  for (bhns::Index r = 0; r < pv.rows(); ++r) {
    for (bhns::Index c = 0; c < pv.cols(); ++c) {
      pv(r, c) = inst.product_vecs[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
  }
  return bhns::EmbeddingStore(inst.query_ids, qv, inst.product_ids, pv);
}

// Random batch over a random store: d in [2, 16], pool size bounded by
// max_pool, every product labeled at least once, labels from the mapped
// soft-label alphabet.
inline RawInstance random_instance(bhns::CounterRng& rng, int max_pool = 64) {
  RawInstance inst;
  const int d = 2 + static_cast<int>(rng.uniform_below(15));
  const int nq = 2 + static_cast<int>(rng.uniform_below(7));
  const int np =
      2 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(max_pool - 1)));

  for (int i = 0; i < nq; ++i) {
    inst.query_ids.push_back("q" + std::to_string(i));
    RawVec v(static_cast<std::size_t>(d));
    for (auto& x : v) x = rng.next_gaussian();
    inst.query_vecs.push_back(std::move(v));
  }
  for (int j = 0; j < np; ++j) {
    inst.product_ids.push_back("p" + std::to_string(j));
    RawVec v(static_cast<std::size_t>(d));
    for (auto& x : v) x = rng.next_gaussian();
    inst.product_vecs.push_back(std::move(v));
  }

  const double labels[] = {0.1, 0.2, 0.5, 1.0};
  std::set<std::pair<int, int>> used;
  for (int j = 0; j < np; ++j) {
    const int q = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(nq)));
    used.insert({q, j});
    inst.batch.push_back({"q" + std::to_string(q), "p" + std::to_string(j),
                          labels[rng.uniform_below(4)], bhns::Provenance::kAnnotated});
  }
  const int extra = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(nq * 2)));
  for (int e = 0; e < extra; ++e) {
    const int q = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(nq)));
    const int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(np)));
    if (!used.insert({q, j}).second) continue;
    inst.batch.push_back({"q" + std::to_string(q), "p" + std::to_string(j),
                          labels[rng.uniform_below(4)], bhns::Provenance::kAnnotated});
  }
  return inst;
}

}  // namespace oracle
