#include "bhns/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "bhns/fne.hpp"
#include "bhns/similarity.hpp"

namespace bhns {
namespace {

// Per-query substream for vanilla draws; independent of the order in which
// queries are processed, so batch output is deterministic under parallelism.
std::uint64_t query_stream(int batch_index, const std::string& query_id) {
  return mix64(static_cast<std::uint64_t>(batch_index) + 0x51ed270b0a1c2f3dULL) ^
         fnv1a64(query_id);
}

struct ScoredCandidate {
  Index product_row;
  double score;
  double theta;
};

// (score desc, product id asc); the id tie-break keeps golden files stable.
void sort_candidates(std::vector<ScoredCandidate>& candidates, const EmbeddingStore& store) {
  std::sort(candidates.begin(), candidates.end(),
            [&store](const ScoredCandidate& a, const ScoredCandidate& b) {
              if (a.score != b.score) return a.score > b.score;
              return store.product_id(a.product_row) < store.product_id(b.product_row);
            });
}

}  // namespace

std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kVns: return "vns";
    case SamplerKind::kHns: return "hns";
    case SamplerKind::kBhns: return "bhns";
  }
  return "?";
}

SamplerKind sampler_kind_from_string(std::string_view name) {
  if (name == "vns") return SamplerKind::kVns;
  if (name == "hns") return SamplerKind::kHns;
  if (name == "bhns") return SamplerKind::kBhns;
  throw ValidationError("unknown sampler kind '" + std::string(name) + "'");
}

void SamplerConfig::validate() const {
  if (k < 1) throw ValidationError("sampler k must be >= 1");
  if (!(tau >= 0.0)) throw ValidationError("sampler tau must be >= 0");
  if (!(positivity_threshold >= 0.0 && positivity_threshold <= 1.0)) {
    throw ValidationError("positivity threshold must lie in [0, 1]");
  }
}

TrainBatchContext::TrainBatchContext(const EmbeddingStore& store,
                                     std::span<const AnnotatedPair> pairs,
                                     double positivity_threshold)
    : store_(&store), threshold_(positivity_threshold) {
  pairs_.reserve(pairs.size());
  std::unordered_set<Index> seen_query;
  std::unordered_set<Index> seen_product;
  for (const AnnotatedPair& p : pairs) {
    const Index q = store.query_row(p.query_id);
    const Index j = store.product_row(p.product_id);
    pairs_.push_back(BatchPair{q, j, p.label});
    if (seen_query.insert(q).second) queries_.push_back(q);
    if (seen_product.insert(j).second) products_.push_back(j);
    if (p.label >= threshold_) {
      anchors_[j].push_back(Anchor{q, p.label});
      positives_[q].insert(j);
    }
  }
  std::sort(products_.begin(), products_.end(), [&store](Index a, Index b) {
    return store.product_id(a) < store.product_id(b);
  });
}

std::vector<Index> TrainBatchContext::candidate_pool(Index query_row) const {
  std::vector<Index> pool;
  pool.reserve(products_.size());
  const auto it = positives_.find(query_row);
  for (Index j : products_) {
    if (it != positives_.end() && it->second.count(j) > 0) continue;
    pool.push_back(j);
  }
  return pool;
}

std::span<const Anchor> TrainBatchContext::anchors(Index product_row) const {
  const auto it = anchors_.find(product_row);
  if (it == anchors_.end()) return {};
  return it->second;
}

bool TrainBatchContext::is_positive(Index query_row, Index product_row) const {
  const auto it = positives_.find(query_row);
  return it != positives_.end() && it->second.count(product_row) > 0;
}

double regularized_score(const EmbeddingStore& store, Index query_row, Index product_row,
                         double theta, double tau) {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw std::invalid_argument("regularized_score: theta outside [0, 1]");
  }
  if (!(tau >= 0.0)) throw std::invalid_argument("regularized_score: tau must be >= 0");
  const double sim = cosine(store.query_vec(query_row), store.product_vec(product_row));
  return std::pow(1.0 - theta, tau) * sim;
}

std::vector<SampledNegative> sample_vns(Index query_row, const TrainBatchContext& ctx,
                                        const SamplerConfig& cfg, CounterRng& rng) {
  cfg.validate();
  const EmbeddingStore& store = ctx.store();
  const std::vector<Index> pool = ctx.candidate_pool(query_row);
  if (pool.empty()) {
    throw SamplingError("no negative candidates for query '" + store.query_id(query_row) + "'");
  }
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(cfg.k), pool.size());
  const std::vector<std::size_t> picks = rng.sample_indices(pool.size(), take);

  std::vector<SampledNegative> out;
  out.reserve(take);
  for (std::size_t i = 0; i < picks.size(); ++i) {
    const Index j = pool[picks[i]];
    out.push_back(SampledNegative{store.query_id(query_row), store.product_id(j),
                                  /*assigned_label=*/0.0, /*theta=*/0.0,
                                  /*regularized_score=*/0.0, static_cast<int>(i + 1),
                                  SamplerKind::kVns});
  }
  return out;
}

std::vector<SampledNegative> sample_hns(Index query_row, const TrainBatchContext& ctx,
                                        const SamplerConfig& cfg) {
  cfg.validate();
  const EmbeddingStore& store = ctx.store();
  const std::vector<Index> pool = ctx.candidate_pool(query_row);
  if (pool.empty()) {
    throw SamplingError("no negative candidates for query '" + store.query_id(query_row) + "'");
  }

  std::vector<ScoredCandidate> candidates;
  candidates.reserve(pool.size());
  for (Index j : pool) {
    candidates.push_back(
        ScoredCandidate{j, cosine(store.query_vec(query_row), store.product_vec(j)), 0.0});
  }
  sort_candidates(candidates, store);

  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(cfg.k), pool.size());
  std::vector<SampledNegative> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back(SampledNegative{store.query_id(query_row),
                                  store.product_id(candidates[i].product_row),
                                  /*assigned_label=*/0.0, /*theta=*/0.0,
                                  /*regularized_score=*/candidates[i].score,
                                  static_cast<int>(i + 1), SamplerKind::kHns});
  }
  return out;
}

std::vector<SampledNegative> sample_bhns(Index query_row, const TrainBatchContext& ctx,
                                         const SamplerConfig& cfg) {
  cfg.validate();
  const EmbeddingStore& store = ctx.store();
  const std::vector<Index> pool = ctx.candidate_pool(query_row);
  if (pool.empty()) {
    throw SamplingError("no negative candidates for query '" + store.query_id(query_row) + "'");
  }

  std::vector<ScoredCandidate> candidates;
  candidates.reserve(pool.size());
  for (Index j : pool) {
    const double theta = estimate_theta(ctx, query_row, j).first;
    candidates.push_back(
        ScoredCandidate{j, regularized_score(store, query_row, j, theta, cfg.tau), theta});
  }
  sort_candidates(candidates, store);

  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(cfg.k), pool.size());
  std::vector<SampledNegative> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back(SampledNegative{store.query_id(query_row),
                                  store.product_id(candidates[i].product_row),
                                  /*assigned_label=*/candidates[i].theta,
                                  /*theta=*/candidates[i].theta,
                                  /*regularized_score=*/candidates[i].score,
                                  static_cast<int>(i + 1), SamplerKind::kBhns});
  }
  return out;
}

std::vector<std::vector<AnnotatedPair>> partition_batches(const Corpus& corpus,
                                                          std::uint64_t seed,
                                                          int batch_size) {
  if (batch_size < 2) throw ValidationError("batch size must be >= 2");
  if (corpus.size() == 0) throw ValidationError("cannot batch an empty corpus");

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng rng(seed, fnv1a64("batch_shuffle"));
  rng.shuffle(order);

  std::vector<std::vector<AnnotatedPair>> batches;
  const auto bs = static_cast<std::size_t>(batch_size);
  for (std::size_t start = 0; start < order.size(); start += bs) {
    const std::size_t end = std::min(order.size(), start + bs);
    std::vector<AnnotatedPair> batch;
    batch.reserve(end - start);
    for (std::size_t i = start; i < end; ++i) batch.push_back(corpus.pairs()[order[i]]);
    batches.push_back(std::move(batch));
  }
  return batches;
}

std::vector<TrainBatch> build_batches(const Corpus& corpus, const EmbeddingStore& store,
                                      const SamplerConfig& cfg, int batch_size) {
  cfg.validate();
  const auto partitions = partition_batches(corpus, cfg.seed, batch_size);

  std::vector<TrainBatch> batches;
  batches.reserve(partitions.size());
  for (std::size_t b = 0; b < partitions.size(); ++b) {
    TrainBatch batch;
    batch.index = static_cast<int>(b);
    batch.positives = partitions[b];

    const TrainBatchContext ctx(store, partitions[b], cfg.positivity_threshold);
    for (Index q : ctx.queries()) {
      const std::string& query_id = store.query_id(q);
      std::vector<SampledNegative> negs;
      try {
        switch (cfg.kind) {
          case SamplerKind::kVns: {
            CounterRng rng(cfg.seed, query_stream(batch.index, query_id));
            negs = sample_vns(q, ctx, cfg, rng);
            break;
          }
          case SamplerKind::kHns:
            negs = sample_hns(q, ctx, cfg);
            break;
          case SamplerKind::kBhns:
            negs = sample_bhns(q, ctx, cfg);
            break;
        }
      } catch (const SamplingError&) {
        batch.warnings.push_back("batch " + std::to_string(batch.index) + ": query '" +
                                 query_id + "': no negative candidates");
        continue;
      }
      if (negs.size() < static_cast<std::size_t>(cfg.k)) {
        batch.warnings.push_back("batch " + std::to_string(batch.index) + ": query '" +
                                 query_id + "': only " + std::to_string(negs.size()) + " of " +
                                 std::to_string(cfg.k) + " negatives available");
      }
      batch.negatives.insert(batch.negatives.end(), negs.begin(), negs.end());
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

void write_batch_jsonl(const TrainBatch& batch, std::ostream& out) {
  for (const AnnotatedPair& p : batch.positives) {
    nlohmann::ordered_json row;
    row["query_id"] = p.query_id;
    row["product_id"] = p.product_id;
    row["label"] = p.label;
    row["source"] = "positive";
    row["theta"] = nullptr;
    row["reg_score"] = nullptr;
    row["rank"] = nullptr;
    out << row.dump() << '\n';
  }
  for (const SampledNegative& n : batch.negatives) {
    nlohmann::ordered_json row;
    row["query_id"] = n.query_id;
    row["product_id"] = n.product_id;
    row["label"] = n.assigned_label;
    row["source"] = std::string(to_string(n.source));
    row["theta"] = n.theta;
    row["reg_score"] = n.regularized_score;
    row["rank"] = n.rank;
    out << row.dump() << '\n';
  }
}

std::vector<CandidateTrace> trace_candidates(const Corpus& corpus, const EmbeddingStore& store,
                                             const SamplerConfig& cfg, int batch_size) {
  cfg.validate();
  const auto partitions = partition_batches(corpus, cfg.seed, batch_size);

  std::vector<CandidateTrace> traces;
  for (std::size_t b = 0; b < partitions.size(); ++b) {
    const TrainBatchContext ctx(store, partitions[b], cfg.positivity_threshold);
    const int batch_index = static_cast<int>(b);
    for (Index q : ctx.queries()) {
      const std::string& query_id = store.query_id(q);
      std::unordered_set<std::string> selected;
      try {
        std::vector<SampledNegative> negs;
        switch (cfg.kind) {
          case SamplerKind::kVns: {
            CounterRng rng(cfg.seed, query_stream(batch_index, query_id));
            negs = sample_vns(q, ctx, cfg, rng);
            break;
          }
          case SamplerKind::kHns:
            negs = sample_hns(q, ctx, cfg);
            break;
          case SamplerKind::kBhns:
            negs = sample_bhns(q, ctx, cfg);
            break;
        }
        for (const SampledNegative& n : negs) selected.insert(n.product_id);
      } catch (const SamplingError&) {
        // Empty pool: nothing to trace for this query.
      }
      for (Index j : ctx.candidate_pool(q)) {
        const auto [theta, anchor_count] = estimate_theta(ctx, q, j);
        const std::string& product_id = store.product_id(j);
        traces.push_back(CandidateTrace{batch_index, query_id, product_id, theta, anchor_count,
                                        selected.count(product_id) > 0});
      }
    }
  }
  return traces;
}

std::vector<BatchRow> read_batch_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open batch file: " + path);
  std::vector<BatchRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.contains("query_id") || !obj.contains("product_id") || !obj.contains("label") ||
        !obj.contains("source")) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": incomplete batch row");
    }
    rows.push_back(BatchRow{obj["query_id"].get<std::string>(),
                            obj["product_id"].get<std::string>(), obj["label"].get<double>(),
                            obj["source"].get<std::string>()});
  }
  return rows;
}

}  // namespace bhns
