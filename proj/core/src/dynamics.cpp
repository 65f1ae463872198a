#include "sensegraph/dynamics.hpp"

#include "sensegraph/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace sensegraph {

AssignmentMatrix::AssignmentMatrix(std::vector<NodeId> node_ids, Matrix values)
    : node_ids_(std::move(node_ids)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.rows()) != node_ids_.size()) {
    throw DimensionError(
        fmt::format("assignment has {} node ids but {} rows", node_ids_.size(), values_.rows()));
  }
  if (values_.cols() == 0) throw InputError("assignment needs at least one sense column");
  for (Eigen::Index i = 0; i < values_.rows(); ++i) {
    const auto row = values_.row(i);
    for (Eigen::Index h = 0; h < values_.cols(); ++h) {
      const double v = row(h);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InputError(fmt::format("assignment entry ({}, {}) = {} outside [0, 1]", i, h, v));
      }
    }
    const double sum = row.sum();
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw InputError(fmt::format("assignment row {} sums to {}", i, sum));
    }
  }
}

void DynamicsConfig::validate() const {
  if (max_iterations < 1) {
    throw InputError(fmt::format("max_iterations must be >= 1, got {}", max_iterations));
  }
  if (!(tolerance > 0.0)) {
    throw InputError(fmt::format("tolerance must be > 0, got {}", tolerance));
  }
}

namespace {

void require_same_nodes(const SimilarityGraph& graph, const AssignmentMatrix& x) {
  if (graph.size() != x.rows()) {
    throw DimensionError(fmt::format("graph is {}x{} but assignment is {}x{}", graph.size(),
                                     graph.size(), x.rows(), x.cols()));
  }
}

}  // namespace

Matrix support_payoff(const SimilarityGraph& graph, const AssignmentMatrix& x) {
  require_same_nodes(graph, x);
  Matrix u(x.values().rows(), x.values().cols());
  u.noalias() = graph.weights() * x.values();
  return u;
}

double potential(const AssignmentMatrix& x, const Matrix& payoff) {
  return x.values().cwiseProduct(payoff).sum();
}

double support_gap(const AssignmentMatrix& x, const Matrix& payoff) {
  const Matrix& xv = x.values();
  double gap = 0.0;
  for (Eigen::Index i = 0; i < xv.rows(); ++i) {
    const double avg = xv.row(i).dot(payoff.row(i));
    for (Eigen::Index h = 0; h < xv.cols(); ++h) {
      if (xv(i, h) > 0.0) gap = std::max(gap, payoff(i, h) - avg);
    }
  }
  return gap;
}

StepResult replicator_update(const AssignmentMatrix& x, const Matrix& payoff,
                             bool renormalize) {
  const Matrix& cur = x.values();
  if (payoff.rows() != cur.rows() || payoff.cols() != cur.cols()) {
    throw DimensionError(fmt::format("payoff is {}x{} but assignment is {}x{}", payoff.rows(),
                                     payoff.cols(), cur.rows(), cur.cols()));
  }
  Matrix next = cur.cwiseProduct(payoff);
  Vector average = next.rowwise().sum();
  std::vector<std::size_t> stalled;
  for (Eigen::Index i = 0; i < next.rows(); ++i) {
    const double avg = average(i);
    if (!std::isfinite(avg)) {
      throw NumericalError(fmt::format("non-finite average payoff at node {}", i),
                           static_cast<std::size_t>(i));
    }
    if (avg == 0.0) {
      // No support from anyone: leave the row as it is.
      next.row(i) = cur.row(i);
      stalled.push_back(static_cast<std::size_t>(i));
      continue;
    }
    next.row(i) /= avg;
    if (renormalize) next.row(i) /= next.row(i).sum();
    if (!next.row(i).allFinite()) {
      throw NumericalError(fmt::format("non-finite assignment at node {}", i),
                           static_cast<std::size_t>(i));
    }
  }
  return StepResult{AssignmentMatrix(x.node_ids(), std::move(next)), std::move(stalled)};
}

StepResult rd_step(const SimilarityGraph& graph, const AssignmentMatrix& x, bool renormalize) {
  return replicator_update(x, support_payoff(graph, x), renormalize);
}

DynamicsResult run_dynamics(const SimilarityGraph& graph, const AssignmentMatrix& initial,
                            const DynamicsConfig& cfg) {
  cfg.validate();
  require_same_nodes(graph, initial);

  DynamicsTrace trace;
  trace.potential_history.reserve(static_cast<std::size_t>(cfg.max_iterations) + 1);
  AssignmentMatrix x = initial;
  Matrix u = support_payoff(graph, x);
  trace.potential_history.push_back(potential(x, u));

  for (int t = 0; t < cfg.max_iterations; ++t) {
    StepResult step = replicator_update(x, u, cfg.renormalize_each_step);
    trace.final_residual = (step.next.values() - x.values()).cwiseAbs().maxCoeff();
    trace.stalled_nodes.insert(trace.stalled_nodes.end(), step.stalled_nodes.begin(),
                               step.stalled_nodes.end());
    x = std::move(step.next);
    u = support_payoff(graph, x);
    trace.potential_history.push_back(potential(x, u));
    trace.iterations_run = t + 1;
    if (trace.final_residual >= cfg.tolerance) continue;
    trace.final_support_gap = support_gap(x, u);
    if (trace.final_support_gap < cfg.tolerance) {
      trace.converged = true;
      break;
    }
  }

  if (!trace.converged) trace.final_support_gap = support_gap(x, u);
  std::sort(trace.stalled_nodes.begin(), trace.stalled_nodes.end());
  trace.stalled_nodes.erase(std::unique(trace.stalled_nodes.begin(), trace.stalled_nodes.end()),
                            trace.stalled_nodes.end());
  return DynamicsResult{std::move(x), std::move(trace)};
}

Mask support_mask(const AssignmentMatrix& x) { return x.values().array() > 0.0; }

bool ConsistencyReport::all_consistent() const {
  return std::all_of(nodes.begin(), nodes.end(),
                     [](const NodeConsistency& c) { return c.consistent; });
}

std::size_t ConsistencyReport::failures() const {
  return static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](const NodeConsistency& c) { return !c.consistent; }));
}

ConsistencyReport check_consistency(const SimilarityGraph& graph, const AssignmentMatrix& x,
                                    const Mask& candidates, double tol) {
  require_same_nodes(graph, x);
  if (static_cast<std::size_t>(candidates.rows()) != x.rows() ||
      static_cast<std::size_t>(candidates.cols()) != x.cols()) {
    throw DimensionError(fmt::format("candidate mask is {}x{} but assignment is {}x{}",
                                     candidates.rows(), candidates.cols(), x.rows(), x.cols()));
  }
  const Matrix u = support_payoff(graph, x);
  const Matrix& xv = x.values();
  ConsistencyReport report;
  report.nodes.resize(x.rows());
  for (Eigen::Index i = 0; i < xv.rows(); ++i) {
    const double current = xv.row(i).dot(u.row(i));
    NodeConsistency& node = report.nodes[static_cast<std::size_t>(i)];
    bool first = true;
    for (Eigen::Index h = 0; h < xv.cols(); ++h) {
      if (!candidates(i, h)) continue;
      const double violation = u(i, h) - current;
      if (first || violation > node.worst_violation) {
        node.worst_violation = violation;
        node.worst_sense = static_cast<std::size_t>(h);
        first = false;
      }
    }
    node.consistent = first || node.worst_violation <= tol;
  }
  return report;
}

ConsistencyReport check_consistency(const SimilarityGraph& graph, const AssignmentMatrix& x,
                                    double tol) {
  const Mask all = Mask::Constant(static_cast<Eigen::Index>(x.rows()),
                                  static_cast<Eigen::Index>(x.cols()), true);
  return check_consistency(graph, x, all, tol);
}

}  // namespace sensegraph
