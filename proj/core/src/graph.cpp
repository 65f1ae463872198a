#include "sensegraph/graph.hpp"

#include "sensegraph/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace sensegraph {

ModalityTag ModalityTag::parse(std::string_view text) {
  ModalityTag tag;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('+', start), text.size());
    const std::string_view token = text.substr(start, end - start);
    if (token == "CNN") {
      tag.cnn_ = true;
    } else if (token == "O") {
      tag.objects_ = true;
    } else if (token == "C") {
      tag.captions_ = true;
    } else {
      throw InputError(fmt::format(
          "unknown modality component '{}' in '{}' (expected CNN, O or C joined by '+')",
          token, text));
    }
    start = end + 1;
  }
  return tag;
}

ModalityTag ModalityTag::compose(const ModalityTag& a, const ModalityTag& b) {
  ModalityTag tag;
  tag.cnn_ = a.cnn_ || b.cnn_;
  tag.objects_ = a.objects_ || b.objects_;
  tag.captions_ = a.captions_ || b.captions_;
  return tag;
}

std::string ModalityTag::str() const {
  std::string out;
  auto append = [&out](const char* part) {
    if (!out.empty()) out += '+';
    out += part;
  };
  if (cnn_) append("CNN");
  if (objects_) append("O");
  if (captions_) append("C");
  return out;
}

EmbeddingSet::EmbeddingSet(std::vector<NodeId> node_ids, Matrix vectors, ModalityTag tag)
    : node_ids_(std::move(node_ids)), vectors_(std::move(vectors)), tag_(tag) {
  if (static_cast<std::size_t>(vectors_.rows()) != node_ids_.size()) {
    throw DimensionError(fmt::format("embedding has {} ids but {} rows", node_ids_.size(),
                                     vectors_.rows()));
  }
  if (vectors_.cols() == 0) throw InputError("embedding dimension must be positive");
  if (tag_.empty()) throw InputError("embedding requires a modality tag");

  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < node_ids_.size(); ++i) {
    if (!seen.insert(node_ids_[i]).second) {
      throw InputError(fmt::format("duplicate node id '{}' at row {}", node_ids_[i], i));
    }
    const auto row = vectors_.row(static_cast<Eigen::Index>(i));
    if (!row.allFinite()) {
      throw InputError(fmt::format("non-finite value in row {} (node '{}')", i, node_ids_[i]));
    }
    const double norm = row.norm();
    if (std::abs(norm - 1.0) > kNormTolerance) {
      throw InputError(fmt::format("row {} (node '{}') has norm {} (expected 1 within {})", i,
                                   node_ids_[i], norm, kNormTolerance));
    }
  }
}

EmbeddingSet EmbeddingSet::select(std::span<const std::size_t> rows) const {
  std::vector<NodeId> ids;
  ids.reserve(rows.size());
  Matrix picked(static_cast<Eigen::Index>(rows.size()), vectors_.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= size()) {
      throw InputError(fmt::format("row index {} out of range ({} rows)", rows[k], size()));
    }
    ids.push_back(node_ids_[rows[k]]);
    picked.row(static_cast<Eigen::Index>(k)) = vectors_.row(static_cast<Eigen::Index>(rows[k]));
  }
  return EmbeddingSet(std::move(ids), std::move(picked), tag_);
}

SimilarityGraph::SimilarityGraph(Matrix weights) : weights_(std::move(weights)) {
  if (weights_.rows() != weights_.cols()) {
    throw DimensionError(
        fmt::format("weight matrix must be square, got {}x{}", weights_.rows(), weights_.cols()));
  }
  const Eigen::Index n = weights_.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (weights_(j, j) != 0.0) {
      throw InputError(fmt::format("weight diagonal entry {} is {}, expected 0", j, weights_(j, j)));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = weights_(i, j);
      if (!std::isfinite(w) || w < 0.0) {
        throw InputError(fmt::format("weight ({}, {}) = {} is not a finite nonnegative value", i,
                                     j, w));
      }
      if (i < j && std::abs(w - weights_(j, i)) > kSymmetryTolerance) {
        throw InputError(fmt::format("weights not symmetric at ({}, {}): {} vs {}", i, j, w,
                                     weights_(j, i)));
      }
    }
  }
}

SimilarityGraph build_similarity(const EmbeddingSet& embeddings) {
  const Matrix& f = embeddings.vectors();
  // EmbeddingSet guarantees unit rows, so the Gram matrix holds cosines.
  Matrix w = f * f.transpose();
  const Eigen::Index n = w.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      // Mirror the upper triangle so symmetry is exact.
      const double c = std::max(0.0, w(i, j));
      w(i, j) = c;
      w(j, i) = c;
    }
    w(j, j) = 0.0;
  }
  return SimilarityGraph(std::move(w));
}

SimilarityGraph sparsify_top_k(const SimilarityGraph& graph, std::size_t k) {
  const std::size_t n = graph.size();
  if (k == 0 || k + 1 >= n) return graph;
  const Matrix& w = graph.weights();
  Mask keep = Mask::Constant(w.rows(), w.cols(), false);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto row = static_cast<Eigen::Index>(i);
    order.erase(order.begin() + static_cast<std::ptrdiff_t>(i));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double wa = w(row, static_cast<Eigen::Index>(a));
                        const double wb = w(row, static_cast<Eigen::Index>(b));
                        return wa > wb || (wa == wb && a < b);
                      });
    for (std::size_t r = 0; r < k; ++r) {
      const auto j = static_cast<Eigen::Index>(order[r]);
      keep(row, j) = true;
      keep(j, row) = true;
    }
    order.resize(n);
  }
  Matrix out = keep.select(w, 0.0);
  return SimilarityGraph(std::move(out));
}

EmbeddingSet fuse_concat(std::span<const EmbeddingSet> parts) {
  if (parts.empty()) throw InputError("nothing to fuse");
  const EmbeddingSet& first = parts.front();
  Eigen::Index width = 0;
  ModalityTag tag;
  for (const EmbeddingSet& p : parts) {
    if (p.size() != first.size()) {
      throw InputError(fmt::format("cannot fuse {} ({} nodes) with {} ({} nodes)",
                                   first.modality().str(), first.size(), p.modality().str(),
                                   p.size()));
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p.node_ids()[i] != first.node_ids()[i]) {
        throw InputError(fmt::format("node ids diverge at row {}: '{}' vs '{}'", i,
                                     first.node_ids()[i], p.node_ids()[i]));
      }
    }
    width += p.vectors().cols();
    tag = ModalityTag::compose(tag, p.modality());
  }
  Matrix joined(first.vectors().rows(), width);
  Eigen::Index col = 0;
  for (const EmbeddingSet& p : parts) {
    joined.middleCols(col, p.vectors().cols()) = p.vectors();
    col += p.vectors().cols();
  }
  joined.rowwise().normalize();
  return EmbeddingSet(first.node_ids(), std::move(joined), tag);
}

EmbeddingSet fuse_concat(const EmbeddingSet& a, const EmbeddingSet& b) {
  const EmbeddingSet parts[] = {a, b};
  return fuse_concat(parts);
}

Vector mean_pool_unit(std::span<const Vector> vectors) {
  if (vectors.empty()) throw InputError("cannot pool an empty list of vectors");
  const Eigen::Index d = vectors.front().size();
  Vector sum = Vector::Zero(d);
  for (const Vector& v : vectors) {
    if (v.size() != d) {
      throw DimensionError(fmt::format("pooled vectors differ in dimension: {} vs {}", d, v.size()));
    }
    sum += v;
  }
  Vector mean = sum / static_cast<double>(vectors.size());
  const double norm = mean.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw InputError("mean of pooled vectors has zero or non-finite norm");
  }
  return mean / norm;
}

}  // namespace sensegraph
