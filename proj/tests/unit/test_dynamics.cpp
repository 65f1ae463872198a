#include "sensegraph/dynamics.hpp"
#include "sensegraph/error.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace sensegraph;
using sensegraph::testing::naive_payoff;
using sensegraph::testing::naive_potential;
using sensegraph::testing::naive_replicator;
using sensegraph::testing::random_instance;
using sensegraph::testing::to_grid;

namespace {

std::vector<NodeId> ids(std::size_t n) {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("v" + std::to_string(i));
  return out;
}

SimilarityGraph single_edge(double w = 1.0) {
  Matrix m(2, 2);
  m << 0, w, w, 0;
  return SimilarityGraph(m);
}

AssignmentMatrix assignment(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(rows.begin()->size());
  Matrix x(n, m);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index h = 0;
    for (double v : r) x(i, h++) = v;
    ++i;
  }
  return AssignmentMatrix(ids(static_cast<std::size_t>(n)), x);
}

}  // namespace

TEST(AssignmentMatrix, RejectsRowsOffTheSimplex) {
  Matrix bad(1, 2);
  bad << 0.6, 0.6;
  EXPECT_THROW(AssignmentMatrix(ids(1), bad), InputError);
  bad << -0.1, 1.1;
  EXPECT_THROW(AssignmentMatrix(ids(1), bad), InputError);
  EXPECT_THROW(AssignmentMatrix(ids(2), Matrix::Constant(1, 2, 0.5)), DimensionError);
}

TEST(SupportPayoff, SingleEdgeByHand) {
  const Matrix u = support_payoff(single_edge(), assignment({{1, 0}, {0.5, 0.5}}));
  Matrix expected(2, 2);
  expected << 0.5, 0.5, 1, 0;
  EXPECT_EQ(u, expected);
}

TEST(SupportPayoff, EmptyGraphGivesZeroSupport) {
  const Matrix u = support_payoff(SimilarityGraph(Matrix::Zero(3, 3)),
                                  assignment({{1, 0}, {0.5, 0.5}, {0, 1}}));
  EXPECT_TRUE(u.isZero(0.0));
}

TEST(SupportPayoff, MatchesNaiveLoops) {
  sensegraph::Rng rng(11);
  Matrix w = Matrix::Zero(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) w(i, j) = w(j, i) = rng.uniform01();
  Matrix x(5, 3);
  for (int i = 0; i < 5; ++i) {
    for (int h = 0; h < 3; ++h) x(i, h) = rng.uniform01();
    x.row(i) /= x.row(i).sum();
  }
  const SimilarityGraph g(w);
  const AssignmentMatrix a(ids(5), x);
  const Matrix u = support_payoff(g, a);
  const auto oracle = naive_payoff(to_grid(w), to_grid(x));
  for (int i = 0; i < 5; ++i)
    for (int h = 0; h < 3; ++h) EXPECT_NEAR(u(i, h), oracle[i][h], 1e-14);
}

TEST(SupportPayoff, DimensionMismatchNamesShapes) {
  try {
    support_payoff(SimilarityGraph(Matrix::Zero(3, 3)), assignment({{1, 0}, {0, 1}}));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("3x3"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("2x2"), std::string::npos);
  }
}

TEST(RdStep, OneHotRowIsFixed) {
  Matrix w = Matrix::Constant(3, 3, 0.7);
  w.diagonal().setZero();
  const auto step = rd_step(SimilarityGraph(w), assignment({{0, 1, 0}, {0.2, 0.3, 0.5}, {1, 0, 0}}));
  EXPECT_EQ(step.next.values().row(0), (Eigen::RowVector3d() << 0, 1, 0).finished());
  EXPECT_EQ(step.next.values().row(2), (Eigen::RowVector3d() << 1, 0, 0).finished());
}

TEST(RdStep, DirectSubstitution) {
  Matrix u(1, 2);
  u << 2, 1;
  const auto step = replicator_update(assignment({{0.5, 0.5}}), u);
  EXPECT_NEAR(step.next(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(step.next(0, 1), 1.0 / 3.0, 1e-15);
}

TEST(RdStep, IsolatedNodeIsLeftAloneAndFlagged) {
  Matrix w = Matrix::Zero(3, 3);
  w(0, 1) = w(1, 0) = 1.0;
  const auto x = assignment({{1, 0}, {0.5, 0.5}, {0.25, 0.75}});
  const auto step = rd_step(SimilarityGraph(w), x);
  EXPECT_EQ(step.next.values().row(2), x.values().row(2));
  ASSERT_EQ(step.stalled_nodes.size(), 1u);
  EXPECT_EQ(step.stalled_nodes[0], 2u);
}

TEST(RdStep, NonFiniteUpdateReportsNode) {
  Matrix u(2, 2);
  u << 1, 1, std::numeric_limits<double>::infinity(), 1;
  try {
    replicator_update(assignment({{0.5, 0.5}, {0.5, 0.5}}), u);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.node(), 1u);
    EXPECT_EQ(e.kind(), ErrorKind::numerical);
  }
}

TEST(RdStep, MatchesScalarLoopOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    sensegraph::Rng rng(seed);
    Matrix w = Matrix::Zero(6, 6);
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j) w(i, j) = w(j, i) = rng.uniform01();
    Matrix x(6, 4);
    for (int i = 0; i < 6; ++i) {
      for (int h = 0; h < 4; ++h) x(i, h) = rng.uniform01() < 0.3 ? 0.0 : rng.uniform01();
      if (x.row(i).sum() == 0) x(i, 0) = 1;
      x.row(i) /= x.row(i).sum();
    }
    const auto step = rd_step(SimilarityGraph(w), AssignmentMatrix(ids(6), x), false);
    const auto oracle = naive_replicator(to_grid(w), to_grid(x));
    for (int i = 0; i < 6; ++i)
      for (int h = 0; h < 4; ++h) EXPECT_NEAR(step.next(i, h), oracle[i][h], 1e-12);
  }
}

TEST(RunDynamics, LabeledNeighborDominates) {
  const auto result = run_dynamics(single_edge(), assignment({{1, 0}, {0.5, 0.5}}));
  EXPECT_TRUE(result.trace.converged);
  EXPECT_NEAR(result.assignment(1, 0), 1.0, 1e-6);
  EXPECT_NEAR(result.assignment(1, 1), 0.0, 1e-6);
  EXPECT_EQ(result.trace.potential_history.size(),
            static_cast<std::size_t>(result.trace.iterations_run) + 1);
}

TEST(RunDynamics, CapIsNotAnError) {
  Matrix w = Matrix::Zero(3, 3);
  w(0, 2) = w(2, 0) = 1.0;
  w(1, 2) = w(2, 1) = 0.5;
  DynamicsConfig cfg;
  cfg.max_iterations = 2;
  const auto result =
      run_dynamics(SimilarityGraph(w), assignment({{1, 0}, {0, 1}, {0.5, 0.5}}), cfg);
  EXPECT_FALSE(result.trace.converged);
  EXPECT_EQ(result.trace.iterations_run, 2);
  EXPECT_EQ(result.trace.potential_history.size(), 3u);
}

TEST(RunDynamics, DecayingRivalConvergesToLabel) {
  Matrix w = Matrix::Zero(3, 3);
  w(0, 2) = w(2, 0) = 1.0;
  w(1, 2) = w(2, 1) = 0.5;
  const auto result = run_dynamics(SimilarityGraph(w), assignment({{1, 0}, {0, 1}, {0.5, 0.5}}));
  EXPECT_TRUE(result.trace.converged);
  EXPECT_LT(result.trace.final_residual, 1e-6);
  EXPECT_LT(result.trace.final_support_gap, 1e-6);
  EXPECT_NEAR(result.assignment(2, 0), 1.0, 1e-6);
}

TEST(RunDynamics, RegrowingSenseIsNotConverged) {
  // Node 2 has almost dropped sense A although A now earns more than B.
  // The per-step change is tiny, but the dynamics have not settled.
  Matrix w = Matrix::Zero(3, 3);
  w(0, 2) = w(2, 0) = 1.0;
  w(1, 2) = w(2, 1) = 0.5;
  const auto x0 = assignment({{1, 0}, {0, 1}, {1e-30, 1 - 1e-30}});
  DynamicsConfig cfg;
  cfg.max_iterations = 5;
  const auto stuck = run_dynamics(SimilarityGraph(w), x0, cfg);
  EXPECT_FALSE(stuck.trace.converged);
  EXPECT_GT(stuck.trace.final_support_gap, 0.4);

  cfg.max_iterations = 1000;
  const auto settled = run_dynamics(SimilarityGraph(w), x0, cfg);
  EXPECT_TRUE(settled.trace.converged);
  EXPECT_NEAR(settled.assignment(2, 0), 1.0, 1e-6);
}

TEST(RunDynamics, RejectsInvalidConfig) {
  DynamicsConfig cfg;
  cfg.max_iterations = 0;
  EXPECT_THROW(run_dynamics(single_edge(), assignment({{1, 0}, {0, 1}}), cfg), InputError);
  cfg.max_iterations = 10;
  cfg.tolerance = 0;
  EXPECT_THROW(run_dynamics(single_edge(), assignment({{1, 0}, {0, 1}}), cfg), InputError);
}

TEST(RunDynamics, RingSymmetryIsPreserved) {
  // Triangle with equal weights, node 0 labeled A; nodes 1 and 2 are
  // interchangeable and must end up with identical rows.
  Matrix w = Matrix::Constant(3, 3, 0.5);
  w.diagonal().setZero();
  const SimilarityGraph g(w);
  const auto x0 = assignment({{1, 0}, {0.5, 0.5}, {0.5, 0.5}});
  const auto r = run_dynamics(g, x0);
  EXPECT_EQ(r.assignment.values().row(1), r.assignment.values().row(2));

  // Swapping nodes 1 and 2 in the input swaps them in the output.
  const auto x1 = assignment({{1, 0}, {0.3, 0.7}, {0.6, 0.4}});
  const auto x1_swapped = assignment({{1, 0}, {0.6, 0.4}, {0.3, 0.7}});
  const auto a = run_dynamics(g, x1);
  const auto b = run_dynamics(g, x1_swapped);
  EXPECT_EQ(a.assignment.values().row(1), b.assignment.values().row(2));
  EXPECT_EQ(a.assignment.values().row(2), b.assignment.values().row(1));
}

TEST(RunDynamics, PermutationEquivariance) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = random_instance(seed, 20, 5);
    const std::size_t n = inst.graph.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    sensegraph::Rng rng(seed + 1000);
    for (std::size_t k = n - 1; k > 0; --k) std::swap(perm[k], perm[rng.uniform_index(k + 1)]);

    Eigen::PermutationMatrix<Eigen::Dynamic> p(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) p.indices()(static_cast<Eigen::Index>(k)) = static_cast<int>(perm[k]);
    const Matrix wp = p * inst.graph.weights() * p.transpose();
    const Matrix xp = p * inst.initial.values();

    DynamicsConfig cfg;
    cfg.max_iterations = 50;
    const auto a = run_dynamics(inst.graph, inst.initial, cfg);
    const auto b = run_dynamics(SimilarityGraph(wp), AssignmentMatrix(ids(n), xp), cfg);
    const Matrix ap = p * a.assignment.values();
    EXPECT_LT((ap - b.assignment.values()).cwiseAbs().maxCoeff(), 1e-12) << "seed " << seed;
  }
}

TEST(RunDynamics, PotentialHistoryMatchesNaivePotential) {
  const auto inst = random_instance(3, 15, 4);
  const auto r = run_dynamics(inst.graph, inst.initial);
  EXPECT_NEAR(r.trace.potential_history.front(),
              naive_potential(to_grid(inst.graph.weights()), to_grid(inst.initial.values())),
              1e-10);
  EXPECT_NEAR(r.trace.potential_history.back(),
              naive_potential(to_grid(inst.graph.weights()), to_grid(r.assignment.values())),
              1e-10);
}

TEST(Consistency, PassesAtConvergedFixedPoints) {
  int converged = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = random_instance(seed);
    DynamicsConfig cfg;
    cfg.max_iterations = 10000;
    const auto r = run_dynamics(inst.graph, inst.initial, cfg);
    if (!r.trace.converged) continue;
    ++converged;
    const auto report = check_consistency(inst.graph, r.assignment, inst.candidates, 1e-6);
    EXPECT_TRUE(report.all_consistent()) << "seed " << seed << ": " << report.failures() << " failures";
  }
  EXPECT_GT(converged, 40);
}

TEST(Consistency, UniformAgainstLabeledNeighborFails) {
  const auto report = check_consistency(single_edge(), assignment({{0.5, 0.5}, {1, 0}}), 1e-6);
  EXPECT_FALSE(report.nodes[0].consistent);
  EXPECT_NEAR(report.nodes[0].worst_violation, 0.5, 1e-15);
  EXPECT_EQ(report.nodes[0].worst_sense, 0u);
  EXPECT_FALSE(report.all_consistent());
}

TEST(Consistency, EmptyGraphPassesEverywhere) {
  const auto report = check_consistency(SimilarityGraph(Matrix::Zero(2, 2)),
                                        assignment({{0.5, 0.5}, {0.1, 0.9}}), 1e-6);
  EXPECT_TRUE(report.all_consistent());
  EXPECT_EQ(report.failures(), 0u);
}

TEST(Consistency, MaskShapeIsChecked) {
  EXPECT_THROW(check_consistency(single_edge(), assignment({{1, 0}, {0, 1}}),
                                 Mask::Constant(2, 3, true), 1e-6),
               DimensionError);
}
