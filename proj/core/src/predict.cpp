#include "sensegraph/predict.hpp"

#include "sensegraph/error.hpp"

#include <fmt/format.h>

namespace sensegraph {

Predictions predict(const AssignmentMatrix& x, const SenseInventory& inventory,
                    const NodeLabeling& labeling) {
  if (x.rows() != labeling.size()) {
    throw DimensionError(fmt::format("assignment has {} rows but labeling has {} nodes", x.rows(),
                                     labeling.size()));
  }
  if (x.cols() != inventory.sense_count()) {
    throw DimensionError(fmt::format("assignment has {} columns but inventory has {} senses",
                                     x.cols(), inventory.sense_count()));
  }
  Predictions out;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const NodeRecord& r = labeling[i];
    if (r.id != x.node_ids()[i]) {
      throw InputError(fmt::format("row {} is node '{}' in the assignment but '{}' in the labeling",
                                   i, x.node_ids()[i], r.id));
    }
    const VerbEntry& verb = inventory.verb(r.verb);
    const auto columns = inventory.candidate_columns(r.verb);
    std::size_t best = 0;
    double best_value = x(i, columns[0]);
    for (std::size_t k = 1; k < columns.size(); ++k) {
      // Strict comparison keeps the earliest sense on ties.
      if (x(i, columns[k]) > best_value) {
        best_value = x(i, columns[k]);
        best = k;
      }
    }
    if (!(best_value > 0.0)) {
      throw InputError(fmt::format("node '{}' has no mass on any candidate sense of '{}'", r.id,
                                   r.verb));
    }
    out.emplace(r.id, verb.senses[best]);
  }
  return out;
}

}  // namespace sensegraph
