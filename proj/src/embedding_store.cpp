#include "bhns/embedding_store.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace bhns {
namespace {

std::string location(const std::string& path, std::size_t line_no) {
  return path + ":" + std::to_string(line_no) + ": ";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view token, const std::string& path, std::size_t line_no) {
  const std::string_view t = trim(token);
  double value = 0.0;
  const auto* begin = t.data();
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || t.empty()) {
    throw ValidationError(location(path, line_no) + "malformed value '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

std::pair<std::vector<std::string>, Matrix> load_embedding_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open embedding file: " + path);

  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  std::unordered_set<std::string> seen;
  Index dim = -1;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ValidationError(location(path, line_no) + "expected `id<TAB>v1,v2,...`");
    }
    std::string id = line.substr(0, tab);
    if (!seen.insert(id).second) {
      throw ValidationError(location(path, line_no) + "duplicate id '" + id + "'");
    }

    std::vector<double> values;
    std::string_view rest(line);
    rest.remove_prefix(tab + 1);
    while (true) {
      const auto comma = rest.find(',');
      values.push_back(parse_double(rest.substr(0, comma), path, line_no));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }

    if (dim < 0) {
      dim = static_cast<Index>(values.size());
    } else if (static_cast<Index>(values.size()) != dim) {
      throw ValidationError(location(path, line_no) + "dimension mismatch: expected " +
                            std::to_string(dim) + ", got " + std::to_string(values.size()));
    }

    bool all_zero = true;
    for (double v : values) {
      if (v != 0.0) {
        all_zero = false;
        break;
      }
    }
    if (all_zero) {
      throw ValidationError(location(path, line_no) + "zero vector for id '" + id + "'");
    }

    ids.push_back(std::move(id));
    rows.push_back(std::move(values));
  }

  Matrix m(static_cast<Index>(rows.size()), dim < 0 ? 0 : dim);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
  }
  return {std::move(ids), std::move(m)};
}

EmbeddingStore::EmbeddingStore(std::vector<std::string> query_ids, Matrix query_vectors,
                               std::vector<std::string> product_ids, Matrix product_vectors)
    : query_ids_(std::move(query_ids)),
      product_ids_(std::move(product_ids)),
      query_vectors_(std::move(query_vectors)),
      product_vectors_(std::move(product_vectors)) {
  if (static_cast<Index>(query_ids_.size()) != query_vectors_.rows() ||
      static_cast<Index>(product_ids_.size()) != product_vectors_.rows()) {
    throw ValidationError("embedding store: id count does not match vector rows");
  }
  if (query_vectors_.rows() > 0 && product_vectors_.rows() > 0 &&
      query_vectors_.cols() != product_vectors_.cols()) {
    throw ValidationError("embedding store: query/product dimension mismatch (" +
                          std::to_string(query_vectors_.cols()) + " vs " +
                          std::to_string(product_vectors_.cols()) + ")");
  }
  dim_ = query_vectors_.rows() > 0 ? query_vectors_.cols() : product_vectors_.cols();
  if ((query_vectors_.rows() > 0 || product_vectors_.rows() > 0) && dim_ < 1) {
    throw ValidationError("embedding store: dimension must be at least 1");
  }

  auto index_ids = [](const std::vector<std::string>& ids, const Matrix& vectors,
                      const char* ns, std::unordered_map<std::string, Index>& lookup) {
    lookup.reserve(ids.size());
    for (Index r = 0; r < static_cast<Index>(ids.size()); ++r) {
      if (!lookup.emplace(ids[static_cast<std::size_t>(r)], r).second) {
        throw ValidationError(std::string("embedding store: duplicate ") + ns + " id '" +
                              ids[static_cast<std::size_t>(r)] + "'");
      }
      if (vectors.row(r).isZero(0.0)) {
        throw ValidationError(std::string("embedding store: zero vector for ") + ns + " id '" +
                              ids[static_cast<std::size_t>(r)] + "'");
      }
    }
  };
  index_ids(query_ids_, query_vectors_, "query", query_lookup_);
  index_ids(product_ids_, product_vectors_, "product", product_lookup_);
}

EmbeddingStore EmbeddingStore::load(const std::string& query_path,
                                    const std::string& product_path) {
  auto [query_ids, query_vectors] = load_embedding_file(query_path);
  auto [product_ids, product_vectors] = load_embedding_file(product_path);
  if (query_vectors.rows() > 0 && product_vectors.rows() > 0 &&
      query_vectors.cols() != product_vectors.cols()) {
    throw ValidationError("dimension mismatch between " + query_path + " (d=" +
                          std::to_string(query_vectors.cols()) + ") and " + product_path +
                          " (d=" + std::to_string(product_vectors.cols()) + ")");
  }
  return EmbeddingStore(std::move(query_ids), std::move(query_vectors),
                        std::move(product_ids), std::move(product_vectors));
}

Index EmbeddingStore::query_row(const std::string& id) const {
  const auto it = query_lookup_.find(id);
  if (it == query_lookup_.end()) throw std::out_of_range("unknown query id '" + id + "'");
  return it->second;
}

Index EmbeddingStore::product_row(const std::string& id) const {
  const auto it = product_lookup_.find(id);
  if (it == product_lookup_.end()) throw std::out_of_range("unknown product id '" + id + "'");
  return it->second;
}

}  // namespace bhns
