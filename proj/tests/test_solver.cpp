#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "auvfleet/errors.hpp"
#include "auvfleet/solver.hpp"
#include "support/test_problems.hpp"

using namespace auvfleet;
using auvfleet::testing::DiskProblem;
using auvfleet::testing::QuadraticProgram;
using auvfleet::testing::Rosenbrock;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

VectorXd vec(std::initializer_list<double> values) {
  VectorXd v(static_cast<int>(values.size()));
  int i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

}  // namespace

TEST_CASE("unconstrained quadratic converges to its centre") {
  const int n = 3;
  const VectorXd c = vec({1.0, -2.0, 3.0});
  // min ||x - c||^2 = x'Ix - 2c'x + const
  QuadraticProgram qp(2.0 * MatrixXd::Identity(n, n), -2.0 * c);
  const SolverResult res = solve(qp, VectorXd::Zero(n));
  CHECK(res.status == SolverStatus::kConverged);
  CHECK((res.solution - c).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(res.kkt.max() < 1e-6);
}

TEST_CASE("equality constrained quadratic hits the closed-form KKT point") {
  // min ||x||^2 s.t. x1 + x2 = 1 -> x = (0.5, 0.5), lambda = -1.
  QuadraticProgram qp(2.0 * MatrixXd::Identity(2, 2), VectorXd::Zero(2));
  MatrixXd a(1, 2);
  a << 1.0, 1.0;
  qp.with_equalities(a, vec({1.0}));
  const SolverResult res = solve(qp, vec({5.0, -7.0}));
  CHECK(res.status == SolverStatus::kConverged);
  CHECK((res.solution - vec({0.5, 0.5})).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(res.multipliers.equality(0) == doctest::Approx(-1.0).epsilon(1e-5));
  CHECK(res.kkt.max() < 1e-6);
}

TEST_CASE("single active inequality with hand-derived multiplier") {
  // min (x - 2)^2 s.t. x <= 1 -> x = 1, mu = 2.
  QuadraticProgram qp(2.0 * MatrixXd::Identity(1, 1), vec({-4.0}));
  MatrixXd g(1, 1);
  g << 1.0;
  qp.with_inequalities(g, vec({1.0}));
  const SolverResult res = solve(qp, vec({0.0}));
  CHECK(res.status == SolverStatus::kConverged);
  CHECK(res.solution(0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(res.multipliers.inequality(0) == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(res.kkt.max() < 1e-6);
}

TEST_CASE("halfspace-constrained quadratic") {
  // min x1^2 + 2 x2^2 s.t. x1 + x2 >= 2 -> x = (4/3, 2/3), mu = 8/3.
  MatrixXd q(2, 2);
  q << 2.0, 0.0, 0.0, 4.0;
  QuadraticProgram qp(q, VectorXd::Zero(2));
  MatrixXd g(1, 2);
  g << -1.0, -1.0;
  qp.with_inequalities(g, vec({-2.0}));
  const SolverResult res = solve(qp, VectorXd::Zero(2));
  CHECK(res.status == SolverStatus::kConverged);
  CHECK((res.solution - vec({4.0 / 3.0, 2.0 / 3.0})).cwiseAbs().maxCoeff() < 1e-5);
  CHECK(res.multipliers.inequality(0) == doctest::Approx(8.0 / 3.0).epsilon(1e-4));
}

TEST_CASE("active upper bound carries the dual") {
  // min (x - 3)^2 s.t. 0 <= x <= 1 -> x = 1, z_up = 4.
  QuadraticProgram qp(2.0 * MatrixXd::Identity(1, 1), vec({-6.0}));
  qp.with_bounds(vec({0.0}), vec({1.0}));
  const SolverResult res = solve(qp, vec({0.5}));
  CHECK(res.status == SolverStatus::kConverged);
  CHECK(res.solution(0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(res.multipliers.bound_upper(0) == doctest::Approx(4.0).epsilon(1e-4));
}

TEST_CASE("four-dimensional equality QP against a dense KKT solve") {
  MatrixXd q = MatrixXd::Zero(4, 4);
  q.diagonal() << 1.0, 2.0, 3.0, 4.0;
  const VectorXd c = vec({1.0, 1.0, 1.0, 1.0});
  MatrixXd a(2, 4);
  a << 1, 1, 1, 1,
       1, -1, 0, 0;
  const VectorXd b = vec({4.0, 0.0});

  // Independent route: solve the KKT linear system directly.
  MatrixXd kkt = MatrixXd::Zero(6, 6);
  kkt.topLeftCorner(4, 4) = q;
  kkt.topRightCorner(4, 2) = a.transpose();
  kkt.bottomLeftCorner(2, 4) = a;
  VectorXd rhs(6);
  rhs << -c, b;
  const VectorXd expected = kkt.fullPivLu().solve(rhs);

  QuadraticProgram qp(q, c);
  qp.with_equalities(a, b);
  const SolverResult res = solve(qp, VectorXd::Zero(4));
  CHECK(res.status == SolverStatus::kConverged);
  CHECK((res.solution - expected.head(4)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((res.multipliers.equality - expected.tail(2)).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("interior solution leaves bounds inactive") {
  QuadraticProgram qp(2.0 * MatrixXd::Identity(2, 2), vec({-1.0, 1.0}));
  qp.with_bounds(vec({-10.0, -10.0}), vec({10.0, 10.0}));
  const SolverResult res = solve(qp, vec({9.0, -9.0}));
  CHECK(res.status == SolverStatus::kConverged);
  CHECK((res.solution - vec({0.5, -0.5})).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(res.multipliers.bound_lower.cwiseAbs().maxCoeff() < 1e-4);
  CHECK(res.multipliers.bound_upper.cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("linear program solved at a vertex") {
  // min x1 + x2 s.t. x1 + 2 x2 >= 1, x >= 0 -> (0, 0.5).
  QuadraticProgram qp(MatrixXd::Zero(2, 2), vec({1.0, 1.0}));
  MatrixXd g(1, 2);
  g << -1.0, -2.0;
  qp.with_inequalities(g, vec({-1.0}));
  qp.with_bounds(vec({0.0, 0.0}), vec({kInf, kInf}));
  const SolverResult res = solve(qp, vec({1.0, 1.0}));
  CHECK(res.status == SolverStatus::kConverged);
  CHECK((res.solution - vec({0.0, 0.5})).cwiseAbs().maxCoeff() < 1e-5);
  CHECK(qp.objective(res.solution) == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("two inequalities with one active") {
  // min (x1-1)^2 + (x2-2)^2 s.t. x2 <= 1, x1 <= 5 -> (1, 1), mu = (2, 0).
  QuadraticProgram qp(2.0 * MatrixXd::Identity(2, 2), vec({-2.0, -4.0}));
  MatrixXd g(2, 2);
  g << 0.0, 1.0,
       1.0, 0.0;
  qp.with_inequalities(g, vec({1.0, 5.0}));
  const SolverResult res = solve(qp, VectorXd::Zero(2));
  CHECK(res.status == SolverStatus::kConverged);
  CHECK((res.solution - vec({1.0, 1.0})).cwiseAbs().maxCoeff() < 1e-5);
  CHECK(res.multipliers.inequality(0) == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(std::abs(res.multipliers.inequality(1)) < 1e-4);
}

TEST_CASE("mixed equality and active inequality") {
  // min ||x||^2 s.t. x1+x2+x3 = 3, x3 <= 0.5 -> (1.25, 1.25, 0.5),
  // lambda = -2.5, mu = 1.5.
  QuadraticProgram qp(2.0 * MatrixXd::Identity(3, 3), VectorXd::Zero(3));
  MatrixXd a(1, 3);
  a << 1.0, 1.0, 1.0;
  qp.with_equalities(a, vec({3.0}));
  MatrixXd g(1, 3);
  g << 0.0, 0.0, 1.0;
  qp.with_inequalities(g, vec({0.5}));
  const SolverResult res = solve(qp, VectorXd::Zero(3));
  CHECK(res.status == SolverStatus::kConverged);
  CHECK((res.solution - vec({1.25, 1.25, 0.5})).cwiseAbs().maxCoeff() < 1e-5);
  CHECK(res.multipliers.equality(0) == doctest::Approx(-2.5).epsilon(1e-4));
  CHECK(res.multipliers.inequality(0) == doctest::Approx(1.5).epsilon(1e-4));
}

TEST_CASE("nonlinear disk constraint") {
  DiskProblem disk;
  const SolverResult res = solve(disk, VectorXd::Zero(2));
  CHECK(res.status == SolverStatus::kConverged);
  const double root_half = std::sqrt(0.5);
  CHECK((res.solution - vec({root_half, root_half})).cwiseAbs().maxCoeff() < 1e-5);
  CHECK(res.multipliers.inequality(0) == doctest::Approx(root_half).epsilon(1e-4));
}

TEST_CASE("rosenbrock needs and survives inertia correction") {
  Rosenbrock problem;
  const SolverResult res = solve(problem, vec({-1.2, 1.0}));
  CHECK(res.status == SolverStatus::kConverged);
  CHECK((res.solution - vec({1.0, 1.0})).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("solver is deterministic") {
  DiskProblem disk;
  const SolverResult a = solve(disk, vec({0.1, -0.3}));
  const SolverResult b = solve(disk, vec({0.1, -0.3}));
  CHECK(a.iterations == b.iterations);
  CHECK(a.status == b.status);
  CHECK((a.solution - b.solution).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("interior-point iterates keep strictly inside the bounds") {
  QuadraticProgram qp(2.0 * MatrixXd::Identity(1, 1), vec({-6.0}));
  qp.with_bounds(vec({0.0}), vec({1.0}));
  const SolverResult res = solve(qp, vec({0.5}));
  CHECK(res.solution(0) > 0.0);
  CHECK(res.solution(0) < 1.0);
}

TEST_CASE("trace stream receives one line per iteration") {
  std::ostringstream trace;
  SolverConfig cfg;
  cfg.trace = &trace;
  QuadraticProgram qp(2.0 * MatrixXd::Identity(2, 2), vec({-2.0, -2.0}));
  const SolverResult res = solve(qp, VectorXd::Zero(2), cfg);
  CHECK(res.status == SolverStatus::kConverged);
  int lines = 0;
  std::string line;
  std::istringstream in(trace.str());
  while (std::getline(in, line)) ++lines;
  CHECK(lines >= res.iterations - 1);
}

TEST_CASE("kkt residuals at analytic points") {
  SUBCASE("unconstrained minimizer with empty multipliers") {
    const VectorXd c = vec({1.0, -2.0, 3.0});
    QuadraticProgram qp(2.0 * MatrixXd::Identity(3, 3), -2.0 * c);
    const KktResiduals r = kkt_residuals(qp, c, Multipliers{});
    CHECK(r.stationarity < 1e-10);
    CHECK(r.primal_feasibility < 1e-10);
    CHECK(r.complementarity < 1e-10);
  }
  SUBCASE("equality QP at its KKT pair") {
    QuadraticProgram qp(2.0 * MatrixXd::Identity(2, 2), VectorXd::Zero(2));
    MatrixXd a(1, 2);
    a << 1.0, 1.0;
    qp.with_equalities(a, vec({1.0}));
    Multipliers m;
    m.equality = vec({-1.0});
    const KktResiduals r = kkt_residuals(qp, vec({0.5, 0.5}), m);
    CHECK(r.stationarity < 1e-8);
    CHECK(r.primal_feasibility < 1e-8);
  }
  SUBCASE("primal residual equals brute-force max violation") {
    QuadraticProgram qp(MatrixXd::Identity(2, 2), VectorXd::Zero(2));
    MatrixXd a(1, 2);
    a << 1.0, 0.0;
    qp.with_equalities(a, vec({2.0}));
    MatrixXd g(1, 2);
    g << 0.0, 1.0;
    qp.with_inequalities(g, vec({-1.0}));
    std::mt19937 rng(89);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int trial = 0; trial < 25; ++trial) {
      const VectorXd x = vec({u(rng), u(rng)});
      const double expected =
          std::max({std::abs(x(0) - 2.0), x(1) + 1.0, 0.0});
      const KktResiduals r = kkt_residuals(qp, x, Multipliers{});
      CHECK(r.primal_feasibility == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("dimension mismatch is rejected") {
    QuadraticProgram qp(MatrixXd::Identity(2, 2), VectorXd::Zero(2));
    Multipliers m;
    m.equality = vec({1.0});
    CHECK_THROWS_AS(kkt_residuals(qp, VectorXd::Zero(2), m), DimensionError);
  }
}

TEST_CASE("derivative checker flags a corrupted jacobian") {
  class Corrupted : public QuadraticProgram {
   public:
    Corrupted()
        : QuadraticProgram(2.0 * MatrixXd::Identity(2, 2), VectorXd::Zero(2)) {
      MatrixXd g(1, 2);
      g << 1.0, 1.0;
      with_inequalities(g, VectorXd::Constant(1, 1.0));
    }
    MatrixXd inequality_jacobian(const VectorXd& x) const override {
      MatrixXd j = QuadraticProgram::inequality_jacobian(x);
      j(0, 0) += 0.5;  // injected fault
      return j;
    }
  };

  Corrupted bad;
  const DerivativeReport report = check_derivatives(bad, vec({0.2, 0.3}));
  CHECK(report.inequality_jacobian_error > 1e-2);
  CHECK(report.objective_gradient_error < 1e-9);

  QuadraticProgram good(2.0 * MatrixXd::Identity(2, 2), VectorXd::Zero(2));
  const DerivativeReport clean = check_derivatives(good, vec({0.2, 0.3}));
  CHECK(clean.max() < 1e-9);
}
