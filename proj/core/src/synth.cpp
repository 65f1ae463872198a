#include "sensegraph/synth.hpp"

#include "sensegraph/error.hpp"
#include "sensegraph/rng.hpp"

#include <fmt/format.h>

namespace sensegraph {

void SynthParams::validate() const {
  if (clusters < 2) throw InputError(fmt::format("need at least 2 clusters, got {}", clusters));
  if (points < clusters) {
    throw InputError(fmt::format("need at least one point per cluster ({} points, {} clusters)",
                                 points, clusters));
  }
  if (dim < 1) throw InputError(fmt::format("dimension must be positive, got {}", dim));
  if (!(noise >= 0.0)) throw InputError(fmt::format("noise must be >= 0, got {}", noise));
  if (modalities.empty()) throw InputError("at least one modality is required");
}

namespace {

Vector random_unit(Rng& rng, int dim) {
  Vector v(dim);
  do {
    for (int k = 0; k < dim; ++k) v(k) = rng.normal();
  } while (v.norm() == 0.0);
  return v.normalized();
}

}  // namespace

SynthDataset make_synthetic(const SynthParams& params) {
  params.validate();
  const std::string verb = "synth";
  VerbEntry entry{verb, {}, MotionClass::unspecified};
  for (int c = 0; c < params.clusters; ++c) entry.senses.push_back(fmt::format("{}#{}", verb, c + 1));

  std::vector<NodeRecord> records;
  std::vector<NodeId> ids;
  for (int i = 0; i < params.points; ++i) {
    ids.push_back(fmt::format("n{:05d}", i));
    records.push_back(NodeRecord{ids.back(), verb, entry.senses[static_cast<std::size_t>(i % params.clusters)]});
  }

  Rng rng(params.seed);
  std::vector<EmbeddingSet> embeddings;
  SenseEmbeddingSet centers_out(static_cast<std::size_t>(params.dim));
  for (std::size_t mod = 0; mod < params.modalities.size(); ++mod) {
    const ModalityTag tag = ModalityTag::parse(params.modalities[mod]);
    std::vector<Vector> centers;
    for (int c = 0; c < params.clusters; ++c) centers.push_back(random_unit(rng, params.dim));
    Matrix points(params.points, params.dim);
    for (int i = 0; i < params.points; ++i) {
      Vector p = centers[static_cast<std::size_t>(i % params.clusters)];
      for (int k = 0; k < params.dim; ++k) p(k) += params.noise * rng.normal();
      if (p.norm() == 0.0) p = centers[static_cast<std::size_t>(i % params.clusters)];
      points.row(i) = p.normalized().transpose();
    }
    embeddings.emplace_back(ids, std::move(points), tag);
    if (mod == 0) {
      for (int c = 0; c < params.clusters; ++c) {
        centers_out.add(verb, entry.senses[static_cast<std::size_t>(c)],
                        centers[static_cast<std::size_t>(c)]);
      }
    }
  }

  return SynthDataset{SenseInventory({std::move(entry)}), NodeLabeling(std::move(records)),
                      std::move(embeddings), std::move(centers_out)};
}

}  // namespace sensegraph
