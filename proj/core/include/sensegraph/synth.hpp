#pragma once

#include "sensegraph/eval.hpp"
#include "sensegraph/graph.hpp"
#include "sensegraph/sense_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sensegraph {

struct SynthParams {
  int clusters = 3;
  int points = 300;
  int dim = 16;
  /// Per-coordinate standard deviation of the Gaussian around each
  /// (unit) cluster center, before the point is re-normalized.
  double noise = 0.10;
  std::uint64_t seed = 0;
  /// One embedding per tag, each an independent noisy view of the same
  /// cluster structure.
  std::vector<std::string> modalities{"CNN"};

  void validate() const;
};

/// Gaussian-cluster instance: a single verb whose senses are the clusters.
/// Points are assigned round-robin so cluster sizes differ by at most one.
struct SynthDataset {
  SenseInventory inventory;
  NodeLabeling truth;
  std::vector<EmbeddingSet> embeddings;  // one per requested modality
  SenseEmbeddingSet sense_embeddings;    // cluster centers of the first modality
};

SynthDataset make_synthetic(const SynthParams& params);

}  // namespace sensegraph
