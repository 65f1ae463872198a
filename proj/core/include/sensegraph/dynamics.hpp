#pragma once

#include "sensegraph/graph.hpp"
#include "sensegraph/types.hpp"

#include <cstddef>
#include <vector>

namespace sensegraph {

/// n x m row-stochastic matrix: row i is node i's probability vector over
/// the m senses.
class AssignmentMatrix {
 public:
  static constexpr double kRowSumTolerance = 1e-9;

  /// Throws InputError unless every entry is in [0, 1] and every row sums
  /// to 1 within kRowSumTolerance.
  AssignmentMatrix(std::vector<NodeId> node_ids, Matrix values);

  std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values_.cols()); }
  const Matrix& values() const { return values_; }
  const std::vector<NodeId>& node_ids() const { return node_ids_; }
  double operator()(std::size_t i, std::size_t h) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(h));
  }

 private:
  std::vector<NodeId> node_ids_;
  Matrix values_;
};

struct DynamicsConfig {
  int max_iterations = 100;
  /// Stop once the largest absolute per-entry change drops below this and
  /// no supported sense out-earns its row's average payoff by more than
  /// this (see support_gap).
  double tolerance = 1e-6;
  bool renormalize_each_step = true;

  void validate() const;
};

struct DynamicsTrace {
  int iterations_run = 0;
  /// Max absolute per-entry change of the last step.
  double final_residual = 0.0;
  /// support_gap of the final iterate.
  double final_support_gap = 0.0;
  /// P(X_t) = sum_ij w_ij <x_i, x_j>, one entry per iterate including X_0.
  std::vector<double> potential_history;
  bool converged = false;
  /// Nodes that received zero total support at some step and were left
  /// unchanged (sorted, unique).
  std::vector<std::size_t> stalled_nodes;
};

struct StepResult {
  AssignmentMatrix next;
  std::vector<std::size_t> stalled_nodes;
};

/// U = W X, i.e. u_ih = sum_j w_ij x_jh.
Matrix support_payoff(const SimilarityGraph& graph, const AssignmentMatrix& x);

/// Sum of x_ih * u_ih over all entries; equals sum_ij w_ij <x_i, x_j>.
double potential(const AssignmentMatrix& x, const Matrix& payoff);

/// max over entries with x_ih > 0 of u_ih - <x_i, u_i>. A near-extinct
/// sense that now earns more than average regrows, however slowly; a small
/// per-entry change alone does not mean the dynamics have settled.
double support_gap(const AssignmentMatrix& x, const Matrix& payoff);

/// One replicator update given precomputed payoffs:
///   x'_ih = x_ih u_ih / sum_h' x_ih' u_ih'.
/// Rows with zero denominator are copied and reported as stalled.
StepResult replicator_update(const AssignmentMatrix& x, const Matrix& payoff,
                             bool renormalize = true);

StepResult rd_step(const SimilarityGraph& graph, const AssignmentMatrix& x,
                   bool renormalize = true);

struct DynamicsResult {
  AssignmentMatrix assignment;
  DynamicsTrace trace;
};

/// Iterates rd_step until both the max per-entry change and the support
/// gap are below cfg.tolerance, or cfg.max_iterations steps have run.
/// Hitting the cap is reported through trace.converged, not thrown.
DynamicsResult run_dynamics(const SimilarityGraph& graph,
                            const AssignmentMatrix& initial,
                            const DynamicsConfig& cfg = {});

/// Support pattern of an assignment (entries > 0).
Mask support_mask(const AssignmentMatrix& x);

struct NodeConsistency {
  bool consistent = true;
  /// max over candidate h of u_ih - <x_i, u_i>; <= 0 means no pure
  /// strategy does better than the current mixed one.
  double worst_violation = 0.0;
  std::size_t worst_sense = 0;
};

struct ConsistencyReport {
  std::vector<NodeConsistency> nodes;

  bool all_consistent() const;
  std::size_t failures() const;
};

/// Checks <x_i, u_i> >= u_ih - tol for every node i and every sense h
/// allowed by `candidates` (n x m). Payoffs are linear in x_i, so the
/// pure strategies are the only ones that need checking.
ConsistencyReport check_consistency(const SimilarityGraph& graph,
                                    const AssignmentMatrix& x,
                                    const Mask& candidates, double tol);

/// Every sense is a candidate for every node.
ConsistencyReport check_consistency(const SimilarityGraph& graph,
                                    const AssignmentMatrix& x, double tol);

}  // namespace sensegraph
