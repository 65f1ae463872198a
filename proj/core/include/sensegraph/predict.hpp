#pragma once

#include "sensegraph/dynamics.hpp"
#include "sensegraph/sense_model.hpp"

#include <map>

namespace sensegraph {

using Predictions = std::map<NodeId, SenseId>;

/// Argmax over each node's candidate senses. Ties go to the sense listed
/// first for the node's verb. `labeling` supplies the verb of each row and
/// must follow the assignment's node order.
Predictions predict(const AssignmentMatrix& x, const SenseInventory& inventory,
                    const NodeLabeling& labeling);

}  // namespace sensegraph
