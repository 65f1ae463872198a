#pragma once

#include "sensegraph/dynamics.hpp"
#include "sensegraph/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sensegraph {

enum class MotionClass { unspecified, motion, non_motion };

std::string_view to_string(MotionClass c);
MotionClass parse_motion_class(std::string_view text);

struct VerbEntry {
  VerbId id;
  /// Dictionary order; index 0 is the first sense.
  std::vector<SenseId> senses;
  MotionClass motion = MotionClass::unspecified;
};

/// Verb -> ordered candidate senses. Sense ids are mapped to assignment
/// columns in order of first appearance across the verb list; a sense id
/// shared by two verbs shares a column.
class SenseInventory {
 public:
  explicit SenseInventory(std::vector<VerbEntry> verbs);

  const std::vector<VerbEntry>& verbs() const { return verbs_; }
  std::size_t sense_count() const { return sense_ids_.size(); }
  const std::vector<SenseId>& sense_ids() const { return sense_ids_; }

  const VerbEntry* find_verb(std::string_view verb) const;
  const VerbEntry& verb(std::string_view verb) const;

  /// Column of a global sense id; throws InputError if unknown.
  std::size_t column_of(std::string_view sense) const;
  std::optional<std::size_t> find_column(std::string_view sense) const;

  /// Candidate columns of a verb in the verb's sense order.
  std::span<const std::size_t> candidate_columns(std::string_view verb) const;

  bool has_sense(std::string_view verb, std::string_view sense) const;

  /// True when every verb carries a motion/non-motion flag.
  bool has_motion_flags() const;

  /// Verbs of the given class, in inventory order.
  SenseInventory subset(MotionClass c) const;

 private:
  std::vector<VerbEntry> verbs_;
  std::vector<SenseId> sense_ids_;
  std::unordered_map<std::string, std::size_t> verb_index_;
  std::unordered_map<std::string, std::size_t> column_index_;
  std::vector<std::vector<std::size_t>> verb_columns_;
};

struct NodeRecord {
  NodeId id;
  VerbId verb;
  std::optional<SenseId> sense;
};

/// Per-node verb and optional sense, in node order.
class NodeLabeling {
 public:
  NodeLabeling() = default;
  /// Throws InputError on duplicate node ids.
  explicit NodeLabeling(std::vector<NodeRecord> records);

  std::size_t size() const { return records_.size(); }
  const std::vector<NodeRecord>& records() const { return records_; }
  const NodeRecord& operator[](std::size_t i) const { return records_[i]; }
  std::optional<std::size_t> index_of(std::string_view node) const;
  std::vector<NodeId> node_ids() const;

  /// Every verb must exist and every present sense must be a candidate of
  /// the node's verb.
  void validate_against(const SenseInventory& inventory) const;

  /// Copy in which only the listed nodes keep their sense.
  NodeLabeling keep_senses(std::span<const std::size_t> labeled) const;

  /// Records reordered to follow `order`; throws InputError on a node id
  /// missing from this labeling.
  NodeLabeling aligned_to(std::span<const NodeId> order) const;

  NodeLabeling select(std::span<const std::size_t> rows) const;

 private:
  std::vector<NodeRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class SamplingProtocol { per_sense, per_verb };

std::string_view to_string(SamplingProtocol p);
SamplingProtocol parse_protocol(std::string_view text);

struct SamplingPlan {
  SamplingProtocol protocol = SamplingProtocol::per_sense;
  int labels_per_class = 1;
  std::uint64_t seed = 0;
};

/// Node indices (into the labeling) of both partitions, each ascending.
struct LabeledSplit {
  std::vector<std::size_t> labeled;
  std::vector<std::size_t> unlabeled;
  std::vector<std::string> warnings;
};

/// Labeled rows one-hot on their sense, unlabeled rows uniform over the
/// verb's candidates.
AssignmentMatrix init_assignment(const NodeLabeling& labeling,
                                 const SenseInventory& inventory);

/// Strategy sets matching init_assignment: {sense} for labeled nodes and
/// the verb's candidates otherwise.
Mask candidate_mask(const NodeLabeling& labeling, const SenseInventory& inventory);

/// Draws the labeled subset from a fully annotated labeling.
///
/// per_sense groups nodes by sense column, per_verb by verb. Each group
/// contributes min(labels_per_class, size - 1) labeled nodes so that at
/// least one node per group remains for scoring; singleton groups stay
/// unlabeled and produce a warning. The draw depends only on the inputs
/// and plan.seed.
LabeledSplit sample_labeled_set(const NodeLabeling& truth,
                                const SenseInventory& inventory,
                                const SamplingPlan& plan);

}  // namespace sensegraph
