#pragma once

#include "sensegraph/types.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sensegraph {

/// Feature source of an embedding: visual (CNN), object labels (O),
/// captions (C), or any concatenation of them.
class ModalityTag {
 public:
  ModalityTag() = default;

  /// Parses "CNN", "O", "C", "O+C", "CNN+O", ... Component order in the
  /// input is free; "C+O" and "O+C" denote the same tag.
  static ModalityTag parse(std::string_view text);

  /// Union of the components of both tags.
  static ModalityTag compose(const ModalityTag& a, const ModalityTag& b);

  bool cnn() const { return cnn_; }
  bool objects() const { return objects_; }
  bool captions() const { return captions_; }
  bool empty() const { return !cnn_ && !objects_ && !captions_; }

  /// Canonical spelling: components in CNN, O, C order joined by '+'.
  std::string str() const;

  friend bool operator==(const ModalityTag&, const ModalityTag&) = default;

 private:
  bool cnn_ = false;
  bool objects_ = false;
  bool captions_ = false;
};

/// Node identifiers paired with unit-norm feature rows.
class EmbeddingSet {
 public:
  static constexpr double kNormTolerance = 1e-6;

  /// Validates: unique ids, one row per id, finite values, unit rows
  /// within kNormTolerance.
  EmbeddingSet(std::vector<NodeId> node_ids, Matrix vectors, ModalityTag tag);

  std::size_t size() const { return node_ids_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }
  const std::vector<NodeId>& node_ids() const { return node_ids_; }
  const Matrix& vectors() const { return vectors_; }
  const ModalityTag& modality() const { return tag_; }

  /// Rows at the given indices, in the given order.
  EmbeddingSet select(std::span<const std::size_t> rows) const;

 private:
  std::vector<NodeId> node_ids_;
  Matrix vectors_;
  ModalityTag tag_;
};

/// Symmetric nonnegative weight matrix with an exactly zero diagonal.
class SimilarityGraph {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;

  explicit SimilarityGraph(Matrix weights);

  std::size_t size() const { return static_cast<std::size_t>(weights_.rows()); }
  const Matrix& weights() const { return weights_; }

 private:
  Matrix weights_;
};

/// Cosine similarity graph: w_ij = max(0, <f_i, f_j>) for i != j, zero
/// diagonal. Negative cosines are clamped so payoffs stay nonnegative.
SimilarityGraph build_similarity(const EmbeddingSet& embeddings);

/// Keeps, for every node, its k strongest edges; an edge survives if either
/// endpoint selects it. k == 0 returns the graph unchanged.
SimilarityGraph sparsify_top_k(const SimilarityGraph& graph, std::size_t k);

/// Row-wise concatenation of two embeddings over the same nodes, each row
/// re-normalized to unit length. Tags are composed.
EmbeddingSet fuse_concat(const EmbeddingSet& a, const EmbeddingSet& b);
/// Same for any number of parts; each part carries equal weight.
EmbeddingSet fuse_concat(std::span<const EmbeddingSet> parts);

/// Mean of the vectors scaled to unit L2 norm.
Vector mean_pool_unit(std::span<const Vector> vectors);

}  // namespace sensegraph
