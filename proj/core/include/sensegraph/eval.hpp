#pragma once

#include "sensegraph/dynamics.hpp"
#include "sensegraph/graph.hpp"
#include "sensegraph/predict.hpp"
#include "sensegraph/sense_model.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sensegraph {

/// Unit-norm vector per (verb, sense), e.g. encoded dictionary glosses.
class SenseEmbeddingSet {
 public:
  explicit SenseEmbeddingSet(std::size_t dim) : dim_(dim) {}

  /// Throws InputError on duplicates, wrong dimension or non-unit norm.
  void add(const VerbId& verb, const SenseId& sense, Vector v);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  const Vector* find(const VerbId& verb, const SenseId& sense) const;
  const std::map<std::pair<VerbId, SenseId>, Vector>& entries() const { return vectors_; }

 private:
  std::size_t dim_;
  std::map<std::pair<VerbId, SenseId>, Vector> vectors_;
};

/// Fraction of `unlabeled` nodes whose prediction equals the true sense.
double accuracy(const Predictions& predictions, const NodeLabeling& truth,
                std::span<const std::size_t> unlabeled);

/// First dictionary sense of each node's verb.
Predictions baseline_fs(const SenseInventory& inventory, const NodeLabeling& labeling,
                        std::span<const std::size_t> unlabeled);

/// Most frequent sense of each verb over the full annotation; frequency
/// ties go to the earlier sense in inventory order.
Predictions baseline_mfs(const SenseInventory& inventory, const NodeLabeling& truth,
                         std::span<const std::size_t> unlabeled);

/// Candidate sense whose embedding has the highest cosine with the node's
/// embedding. `emb` must follow the labeling's node order.
Predictions baseline_unsupervised(const EmbeddingSet& emb,
                                  const SenseEmbeddingSet& senses,
                                  const SenseInventory& inventory,
                                  const NodeLabeling& labeling,
                                  std::span<const std::size_t> unlabeled);

struct Summary {
  double mean = 0.0;
  /// Sample standard deviation (n - 1 divisor); 0 for a single value.
  double std = 0.0;
};

Summary summarize(std::span<const double> values);

/// Which verb subsets to evaluate as independent sub-experiments.
enum class ClassFilter {
  automatic,   // motion and non-motion separately if flagged, else all
  all,
  motion,
  non_motion,
  split,       // motion and non-motion separately; requires flags
};

std::string_view to_string(ClassFilter f);
ClassFilter parse_class_filter(std::string_view text);

struct ExperimentGrid {
  SamplingProtocol protocol = SamplingProtocol::per_sense;
  std::vector<int> labels_per_class{1};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14};
  ClassFilter classes = ClassFilter::automatic;
  /// Worker threads over (lpc, seed) cells; 0 picks hardware concurrency.
  unsigned threads = 1;
  /// Optional top-k graph sparsification; 0 keeps the full graph.
  std::size_t top_k = 0;
};

struct SeedRun {
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  std::size_t labeled = 0;
  std::size_t unlabeled = 0;
  DynamicsTrace trace;
  std::vector<std::string> warnings;
};

struct ExperimentResult {
  std::string modality;
  std::string class_label;  // "all", "motion" or "non-motion"
  SamplingProtocol protocol = SamplingProtocol::per_sense;
  int labels_per_class = 0;
  std::vector<SeedRun> runs;  // in grid seed order
  double mean = 0.0;
  double std = 0.0;

  std::vector<double> accuracies() const;
};

/// Full transductive pipeline for every (lpc, seed) cell of the grid:
/// sample a split, initialize, run the dynamics on the similarity graph,
/// predict and score the unlabeled nodes. One result per (class, lpc), in
/// grid order. `truth` must annotate every node of `emb`.
std::vector<ExperimentResult> run_experiment(const EmbeddingSet& emb,
                                             const SenseInventory& inventory,
                                             const NodeLabeling& truth,
                                             const ExperimentGrid& grid,
                                             const DynamicsConfig& cfg = {});

enum class Baseline { first_sense, most_frequent_sense, unsupervised };

std::string_view to_string(Baseline b);

/// Scores baselines on the same splits run_experiment would draw.
/// `unsupervised` requires both `emb` and `senses`; it is skipped when
/// either is null.
std::vector<ExperimentResult> run_baselines(const SenseInventory& inventory,
                                            const NodeLabeling& truth,
                                            const ExperimentGrid& grid,
                                            const EmbeddingSet* emb = nullptr,
                                            const SenseEmbeddingSet* senses = nullptr);

}  // namespace sensegraph
