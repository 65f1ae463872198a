#include "sensegraph/sense_model.hpp"

#include "sensegraph/error.hpp"
#include "sensegraph/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <unordered_set>

namespace sensegraph {

std::string_view to_string(MotionClass c) {
  switch (c) {
    case MotionClass::motion: return "motion";
    case MotionClass::non_motion: return "non-motion";
    case MotionClass::unspecified: break;
  }
  return "-";
}

MotionClass parse_motion_class(std::string_view text) {
  if (text == "motion") return MotionClass::motion;
  if (text == "non-motion") return MotionClass::non_motion;
  if (text == "-" || text.empty()) return MotionClass::unspecified;
  throw InputError(
      fmt::format("unknown verb class '{}' (expected motion, non-motion or -)", text));
}

SenseInventory::SenseInventory(std::vector<VerbEntry> verbs) : verbs_(std::move(verbs)) {
  verb_columns_.reserve(verbs_.size());
  for (std::size_t v = 0; v < verbs_.size(); ++v) {
    const VerbEntry& entry = verbs_[v];
    if (entry.id.empty()) throw InputError(fmt::format("verb #{} has an empty id", v));
    if (!verb_index_.emplace(entry.id, v).second) {
      throw InputError(fmt::format("duplicate verb '{}'", entry.id));
    }
    if (entry.senses.empty()) {
      throw InputError(fmt::format("verb '{}' has no senses", entry.id));
    }
    std::vector<std::size_t> columns;
    columns.reserve(entry.senses.size());
    std::unordered_set<std::string_view> seen;
    for (const SenseId& sense : entry.senses) {
      if (sense.empty()) throw InputError(fmt::format("verb '{}' has an empty sense id", entry.id));
      if (!seen.insert(sense).second) {
        throw InputError(fmt::format("verb '{}' lists sense '{}' twice", entry.id, sense));
      }
      auto [it, inserted] = column_index_.emplace(sense, sense_ids_.size());
      if (inserted) sense_ids_.push_back(sense);
      columns.push_back(it->second);
    }
    verb_columns_.push_back(std::move(columns));
  }
}

const VerbEntry* SenseInventory::find_verb(std::string_view verb) const {
  const auto it = verb_index_.find(std::string(verb));
  return it == verb_index_.end() ? nullptr : &verbs_[it->second];
}

const VerbEntry& SenseInventory::verb(std::string_view verb) const {
  const VerbEntry* entry = find_verb(verb);
  if (entry == nullptr) throw InputError(fmt::format("unknown verb '{}'", verb));
  return *entry;
}

std::optional<std::size_t> SenseInventory::find_column(std::string_view sense) const {
  const auto it = column_index_.find(std::string(sense));
  if (it == column_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t SenseInventory::column_of(std::string_view sense) const {
  const auto column = find_column(sense);
  if (!column) throw InputError(fmt::format("unknown sense '{}'", sense));
  return *column;
}

std::span<const std::size_t> SenseInventory::candidate_columns(std::string_view verb) const {
  const auto it = verb_index_.find(std::string(verb));
  if (it == verb_index_.end()) throw InputError(fmt::format("unknown verb '{}'", verb));
  return verb_columns_[it->second];
}

bool SenseInventory::has_sense(std::string_view verb, std::string_view sense) const {
  const VerbEntry* entry = find_verb(verb);
  if (entry == nullptr) return false;
  return std::find(entry->senses.begin(), entry->senses.end(), sense) != entry->senses.end();
}

bool SenseInventory::has_motion_flags() const {
  return std::all_of(verbs_.begin(), verbs_.end(), [](const VerbEntry& v) {
    return v.motion != MotionClass::unspecified;
  });
}

SenseInventory SenseInventory::subset(MotionClass c) const {
  std::vector<VerbEntry> kept;
  std::copy_if(verbs_.begin(), verbs_.end(), std::back_inserter(kept),
               [c](const VerbEntry& v) { return v.motion == c; });
  if (kept.empty()) {
    throw InputError(fmt::format("inventory has no verbs of class {}", to_string(c)));
  }
  return SenseInventory(std::move(kept));
}

NodeLabeling::NodeLabeling(std::vector<NodeRecord> records) : records_(std::move(records)) {
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (!index_.emplace(records_[i].id, i).second) {
      throw InputError(fmt::format("duplicate node id '{}'", records_[i].id));
    }
  }
}

std::optional<std::size_t> NodeLabeling::index_of(std::string_view node) const {
  const auto it = index_.find(std::string(node));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<NodeId> NodeLabeling::node_ids() const {
  std::vector<NodeId> ids;
  ids.reserve(records_.size());
  for (const NodeRecord& r : records_) ids.push_back(r.id);
  return ids;
}

void NodeLabeling::validate_against(const SenseInventory& inventory) const {
  for (const NodeRecord& r : records_) {
    if (inventory.find_verb(r.verb) == nullptr) {
      throw InputError(fmt::format("node '{}' references unknown verb '{}'", r.id, r.verb));
    }
    if (r.sense && !inventory.has_sense(r.verb, *r.sense)) {
      throw InputError(fmt::format("node '{}' has sense '{}' which is not a candidate of verb '{}'",
                                   r.id, *r.sense, r.verb));
    }
  }
}

NodeLabeling NodeLabeling::keep_senses(std::span<const std::size_t> labeled) const {
  std::vector<bool> keep(records_.size(), false);
  for (std::size_t i : labeled) {
    if (i >= records_.size()) throw InputError(fmt::format("node index {} out of range", i));
    keep[i] = true;
  }
  std::vector<NodeRecord> out = records_;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!keep[i]) out[i].sense.reset();
  }
  return NodeLabeling(std::move(out));
}

NodeLabeling NodeLabeling::aligned_to(std::span<const NodeId> order) const {
  std::vector<NodeRecord> out;
  out.reserve(order.size());
  for (const NodeId& id : order) {
    const auto i = index_of(id);
    if (!i) throw InputError(fmt::format("node '{}' has no label record", id));
    out.push_back(records_[*i]);
  }
  return NodeLabeling(std::move(out));
}

NodeLabeling NodeLabeling::select(std::span<const std::size_t> rows) const {
  std::vector<NodeRecord> out;
  out.reserve(rows.size());
  for (std::size_t i : rows) out.push_back(records_.at(i));
  return NodeLabeling(std::move(out));
}

std::string_view to_string(SamplingProtocol p) {
  return p == SamplingProtocol::per_sense ? "per_sense" : "per_verb";
}

SamplingProtocol parse_protocol(std::string_view text) {
  if (text == "per_sense") return SamplingProtocol::per_sense;
  if (text == "per_verb") return SamplingProtocol::per_verb;
  throw InputError(fmt::format("unknown sampling protocol '{}' (expected per_sense or per_verb)",
                               text));
}

AssignmentMatrix init_assignment(const NodeLabeling& labeling, const SenseInventory& inventory) {
  const auto n = static_cast<Eigen::Index>(labeling.size());
  const auto m = static_cast<Eigen::Index>(inventory.sense_count());
  Matrix x = Matrix::Zero(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const NodeRecord& r = labeling[static_cast<std::size_t>(i)];
    const auto candidates = inventory.candidate_columns(r.verb);
    if (r.sense) {
      if (!inventory.has_sense(r.verb, *r.sense)) {
        throw InputError(fmt::format("node '{}' is labeled '{}', not a sense of verb '{}'", r.id,
                                     *r.sense, r.verb));
      }
      x(i, static_cast<Eigen::Index>(inventory.column_of(*r.sense))) = 1.0;
    } else {
      const double share = 1.0 / static_cast<double>(candidates.size());
      for (std::size_t h : candidates) x(i, static_cast<Eigen::Index>(h)) = share;
    }
  }
  return AssignmentMatrix(labeling.node_ids(), std::move(x));
}

Mask candidate_mask(const NodeLabeling& labeling, const SenseInventory& inventory) {
  const auto n = static_cast<Eigen::Index>(labeling.size());
  const auto m = static_cast<Eigen::Index>(inventory.sense_count());
  Mask mask = Mask::Constant(n, m, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    const NodeRecord& r = labeling[static_cast<std::size_t>(i)];
    if (r.sense) {
      mask(i, static_cast<Eigen::Index>(inventory.column_of(*r.sense))) = true;
    } else {
      for (std::size_t h : inventory.candidate_columns(r.verb)) {
        mask(i, static_cast<Eigen::Index>(h)) = true;
      }
    }
  }
  return mask;
}

LabeledSplit sample_labeled_set(const NodeLabeling& truth, const SenseInventory& inventory,
                                const SamplingPlan& plan) {
  if (plan.labels_per_class < 1) {
    throw InputError(fmt::format("labels_per_class must be >= 1, got {}", plan.labels_per_class));
  }
  if (truth.size() == 0) throw InputError("cannot sample from an empty labeling");

  // Groups in column order (per_sense) or inventory verb order (per_verb);
  // members in node order.
  const bool per_sense = plan.protocol == SamplingProtocol::per_sense;
  const std::size_t group_count = per_sense ? inventory.sense_count() : inventory.verbs().size();
  std::vector<std::vector<std::size_t>> groups(group_count);
  std::unordered_map<std::string_view, std::size_t> verb_group;
  for (std::size_t v = 0; v < inventory.verbs().size(); ++v) {
    verb_group.emplace(inventory.verbs()[v].id, v);
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const NodeRecord& r = truth[i];
    if (!r.sense) {
      throw InputError(fmt::format("node '{}' has no ground-truth sense", r.id));
    }
    if (!inventory.has_sense(r.verb, *r.sense)) {
      throw InputError(fmt::format("node '{}' is labeled '{}', not a sense of verb '{}'", r.id,
                                   *r.sense, r.verb));
    }
    const std::size_t g = per_sense ? inventory.column_of(*r.sense) : verb_group.at(r.verb);
    groups[g].push_back(i);
  }

  std::size_t largest = 0;
  for (const auto& g : groups) largest = std::max(largest, g.size());
  const auto lpc = static_cast<std::size_t>(plan.labels_per_class);
  if (lpc > largest) {
    throw InputError(fmt::format("labels_per_class {} exceeds the size of every class (largest {})",
                                 lpc, largest));
  }

  Rng rng(plan.seed);
  LabeledSplit split;
  std::vector<bool> labeled(truth.size(), false);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::vector<std::size_t>& members = groups[g];
    if (members.empty()) continue;
    if (members.size() == 1) {
      const std::string_view name =
          per_sense ? inventory.sense_ids()[g] : std::string_view(inventory.verbs()[g].id);
      split.warnings.push_back(fmt::format(
          "class '{}' has a single member; it stays unlabeled", name));
      continue;
    }
    const std::size_t take = std::min(lpc, members.size() - 1);
    // Partial Fisher-Yates: the first `take` slots become the sample.
    for (std::size_t k = 0; k < take; ++k) {
      const std::size_t pick = k + rng.uniform_index(members.size() - k);
      std::swap(members[k], members[pick]);
      labeled[members[k]] = true;
    }
  }

  for (std::size_t i = 0; i < truth.size(); ++i) {
    (labeled[i] ? split.labeled : split.unlabeled).push_back(i);
  }
  if (split.unlabeled.empty()) throw InputError("sampling left no unlabeled nodes to evaluate");
  return split;
}

}  // namespace sensegraph
