#include <doctest.h>

#include <random>

#include "auvfleet/errors.hpp"
#include "auvfleet/ocp.hpp"
#include "auvfleet/solver.hpp"
#include "support/oracles.hpp"

using namespace auvfleet;

namespace {

ReferenceWindow constant_window(const RigidBodyState& state, int horizon) {
  ReferenceWindow w;
  w.states.assign(horizon + 1, state);
  return w;
}

/// Interior decision vector with in-bound states/inputs and strictly
/// positive slacks.
VectorXd random_interior_point(const TrackingNlp& nlp, std::mt19937& rng) {
  const DecisionLayout& layout = nlp.layout();
  std::uniform_real_distribution<double> pos(-8.0, 8.0);
  std::uniform_real_distribution<double> ang(-1.1, 1.1);
  std::uniform_real_distribution<double> vel(-1.2, 1.2);
  std::uniform_real_distribution<double> rate(-1.0, 1.0);
  std::uniform_real_distribution<double> force(-30.0, 30.0);
  std::uniform_real_distribution<double> torque(-8.0, 8.0);
  std::uniform_real_distribution<double> sv(0.1, 2.0);
  std::uniform_real_distribution<double> sh(0.3, 1.6);

  VectorXd x(layout.size());
  for (int m = 0; m <= layout.horizon; ++m) {
    const int at = layout.state_offset(m);
    for (int i = 0; i < 3; ++i) x(at + i) = pos(rng);
    for (int i = 3; i < 6; ++i) x(at + i) = ang(rng);
    for (int i = 6; i < 9; ++i) x(at + i) = vel(rng);
    for (int i = 9; i < 12; ++i) x(at + i) = rate(rng);
  }
  for (int m = 0; m < layout.horizon; ++m) {
    const int at = layout.input_offset(m);
    for (int i = 0; i < 3; ++i) x(at + i) = force(rng);
    for (int i = 3; i < 6; ++i) x(at + i) = torque(rng);
    x(layout.slack_decrease_offset(m)) = sv(rng);
    x(layout.slack_decay_offset(m)) = sh(rng);
  }
  return x;
}

}  // namespace

TEST_CASE("stage cost examples") {
  OcpWeights w;
  w.state_weight = Mat12::Identity();
  w.input_weight = Mat6::Identity();

  RigidBodyState target;
  target.pose.position = Vec3(1.0, 2.0, 3.0);
  CHECK(stage_cost(target, ControlInput{}, target, w) == doctest::Approx(0.0));

  RigidBodyState unit = target;
  unit.pose.position.x() += 1.0;
  ControlInput tau;
  tau.force = Vec3(1.0, 0.0, 0.0);
  CHECK(stage_cost(unit, tau, target, w) == doctest::Approx(2.0));
}

TEST_CASE("stage cost matches an elementwise quadratic oracle") {
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> wdist(0.1, 5.0);
  for (int trial = 0; trial < 30; ++trial) {
    Vec12 e, wx;
    Vec6 tau, wu;
    for (int i = 0; i < 12; ++i) {
      e(i) = u(rng);
      wx(i) = wdist(rng);
    }
    for (int i = 0; i < 6; ++i) {
      tau(i) = u(rng);
      wu(i) = wdist(rng);
    }
    OcpWeights w;
    w.state_weight = wx.asDiagonal();
    w.input_weight = wu.asDiagonal();
    double expected = 0.0;
    for (int i = 0; i < 12; ++i) expected += wx(i) * e(i) * e(i);
    for (int i = 0; i < 6; ++i) expected += wu(i) * tau(i) * tau(i);
    CHECK(stage_cost(RigidBodyState::unflatten(e), ControlInput::unflatten(tau),
                     RigidBodyState{}, w) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("slack cost examples") {
  CHECK(slack_cost(0.0, 1.0, 1000.0, 100.0) == doctest::Approx(0.0));
  CHECK(slack_cost(0.1, 1.0, 100.0, 100.0) == doctest::Approx(1.0));
  CHECK(slack_cost(0.0, 0.5, 1000.0, 40.0) == doctest::Approx(10.0));
}

TEST_CASE("follower target composes leader pose with the formation offset") {
  RigidBodyState leader;
  SUBCASE("zero offset") {
    const RigidBodyState t = follower_target(leader, FormationVector{});
    CHECK((t.flatten() - leader.flatten()).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }
  SUBCASE("first interval offset") {
    FormationVector a;
    a.offset << 0, 1, 4, 0, 0, 0;
    const RigidBodyState t = follower_target(leader, a);
    CHECK((t.pose.position - Vec3(0, 1, 4)).norm() < 1e-12);
  }
  SUBCASE("mid-run linear offset at t = 80") {
    leader.pose.position = Vec3(46.0, -3.0, 2.0);
    FormationVector a;
    a.offset << -0.56 * 80 + 39.7, 0.07 * 80 - 5.0, 0, 0, 0, -0.08 * 80 + 5.5;
    const RigidBodyState t = follower_target(leader, a);
    CHECK(t.pose.position.x() == doctest::Approx(40.9));
    CHECK(t.pose.position.y() == doctest::Approx(-2.4));
    CHECK(t.pose.position.z() == doctest::Approx(2.0));
  }
}

TEST_CASE("comm distance") {
  CHECK(comm_distance(Vec3::Zero(), Vec3::Zero()) == doctest::Approx(0.0));
  CHECK(comm_distance(Vec3::Zero(), Vec3(3, 4, 0)) == doctest::Approx(5.0));
  std::mt19937 rng(67);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng));
    CHECK(comm_distance(a, b) == doctest::Approx((a - b).norm()).epsilon(1e-12));
  }
}

TEST_CASE("decision layout and constraint counts") {
  const VehicleParams vehicle = testing::neutral_params();
  const OcpWeights weights = OcpWeights::defaults();
  const RateParams rates;

  ParamVector params;
  params.feedback = RigidBodyState{};
  params.target = constant_window(RigidBodyState{}, 2);
  params.obstacles = {SphereObstacle{Vec3(5, 0, 0), 1.0, Vec3::Zero()}};

  const auto leader = build_leader_nlp(weights, rates, params, 2, 0.1, vehicle);
  CHECK(leader->num_vars() == 52);
  CHECK(leader->num_equalities() == 36);
  CHECK(leader->num_inequalities() == 4);

  params.obstacles.clear();
  const auto bare = build_leader_nlp(weights, rates, params, 2, 0.1, vehicle);
  CHECK(bare->num_inequalities() == 2);  // one Lyapunov row per stage

  ParamVector fparams;
  fparams.feedback = RigidBodyState{};
  fparams.target = LeaderSnapshot{RigidBodyState{}, FormationVector{}, 10.0};
  fparams.obstacles = {SphereObstacle{Vec3(5, 0, 0), 1.0, Vec3::Zero()}};
  const auto follower = build_follower_nlp(weights, rates, fparams, 2, 0.1, vehicle);
  CHECK(follower->num_vars() == 52);
  CHECK(follower->num_equalities() == 36);
  CHECK(follower->num_inequalities() == 6);
}

TEST_CASE("building with the wrong parameter variant fails") {
  const VehicleParams vehicle = testing::neutral_params();
  const OcpWeights weights = OcpWeights::defaults();
  const RateParams rates;

  ParamVector params;
  params.target = LeaderSnapshot{RigidBodyState{}, FormationVector{}, 10.0};
  CHECK_THROWS_AS(build_leader_nlp(weights, rates, params, 2, 0.1, vehicle),
                  DimensionError);

  ParamVector fparams;
  fparams.target = constant_window(RigidBodyState{}, 2);
  CHECK_THROWS_AS(build_follower_nlp(weights, rates, fparams, 2, 0.1, vehicle),
                  MissingMessageError);

  ParamVector short_window;
  short_window.target = constant_window(RigidBodyState{}, 1);
  CHECK_THROWS_AS(build_leader_nlp(weights, rates, short_window, 2, 0.1, vehicle),
                  DimensionError);
}

TEST_CASE("equalities vanish on an integrated rollout") {
  const VehicleParams vehicle;
  const int horizon = 5;
  std::mt19937 rng(71);

  RigidBodyState feedback = testing::random_state(rng);
  ParamVector params;
  params.feedback = feedback;
  params.target = constant_window(RigidBodyState{}, horizon);
  const auto nlp = build_leader_nlp(OcpWeights::defaults(), RateParams{}, params, horizon,
                                    0.1, vehicle);

  const DecisionLayout& layout = nlp->layout();
  VectorXd x = VectorXd::Zero(layout.size());
  RigidBodyState state = feedback;
  x.segment<12>(layout.state_offset(0)) = state.flatten();
  for (int m = 0; m < horizon; ++m) {
    const ControlInput u = testing::random_input(rng);
    x.segment<6>(layout.input_offset(m)) = u.flatten();
    state = rk4_step(state, u, vehicle, 0.1);
    x.segment<12>(layout.state_offset(m + 1)) = state.flatten();
    x(layout.slack_decay_offset(m)) = 1.0;
  }
  CHECK(nlp->equalities(x).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("objective is nonnegative and zero only at the unrelaxed target") {
  const VehicleParams vehicle = testing::neutral_params();
  const int horizon = 3;
  RigidBodyState target;
  target.pose.position = Vec3(1.0, -2.0, 0.5);

  ParamVector params;
  params.feedback = target;
  params.target = constant_window(target, horizon);
  const auto nlp = build_leader_nlp(OcpWeights::defaults(), RateParams{}, params, horizon,
                                    0.1, vehicle);
  const DecisionLayout& layout = nlp->layout();

  VectorXd x = VectorXd::Zero(layout.size());
  for (int m = 0; m <= horizon; ++m)
    x.segment<12>(layout.state_offset(m)) = target.flatten();
  for (int m = 0; m < horizon; ++m) x(layout.slack_decay_offset(m)) = 1.0;
  CHECK(nlp->objective(x) == doctest::Approx(0.0));

  std::mt19937 rng(73);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd y = x;
    y(layout.state_offset(1) + trial % 12) += u(rng) + 2.0;
    CHECK(nlp->objective(y) > 0.0);
  }
}

TEST_CASE("comm-range row is positive when the predicted follower is out of range") {
  const VehicleParams vehicle = testing::neutral_params();
  const int horizon = 2;
  ParamVector params;
  params.feedback = RigidBodyState{};
  params.target = LeaderSnapshot{RigidBodyState{}, FormationVector{}, 10.0};
  const auto nlp = build_follower_nlp(OcpWeights::defaults(), RateParams{}, params,
                                      horizon, 0.1, vehicle);
  const DecisionLayout& layout = nlp->layout();

  VectorXd x = nlp->cold_start();
  x.segment<3>(layout.state_offset(1)) = Vec3(11.0, 0.0, 0.0);
  const VectorXd g = nlp->inequalities(x);
  // Row order per stage: [clf, comm] with no obstacles; stage-0 comm row
  // constrains the first free state.
  CHECK(g(1) == doctest::Approx(1.0));
  x.segment<3>(layout.state_offset(1)) = Vec3(3.0, 0.0, 0.0);
  CHECK(nlp->inequalities(x)(1) == doctest::Approx(-7.0));
}

TEST_CASE("shift_warm_start moves blocks left and resets slacks") {
  DecisionLayout layout{2};
  VectorXd prev(layout.size());
  prev.setZero();
  for (int m = 0; m <= 2; ++m)
    prev.segment<12>(layout.state_offset(m)).setConstant(double(m + 1));  // a, b, c
  prev.segment<6>(layout.input_offset(0)).setConstant(10.0);              // p
  prev.segment<6>(layout.input_offset(1)).setConstant(20.0);              // q
  prev(layout.slack_decrease_offset(0)) = 0.7;
  prev(layout.slack_decay_offset(0)) = 0.2;

  const VectorXd shifted = shift_warm_start(prev, layout);
  CHECK(shifted.segment<12>(layout.state_offset(0))(0) == doctest::Approx(2.0));
  CHECK(shifted.segment<12>(layout.state_offset(1))(0) == doctest::Approx(3.0));
  CHECK(shifted.segment<12>(layout.state_offset(2))(0) == doctest::Approx(3.0));
  CHECK(shifted.segment<6>(layout.input_offset(0))(0) == doctest::Approx(20.0));
  CHECK(shifted.segment<6>(layout.input_offset(1))(0) == doctest::Approx(20.0));
  for (int m = 0; m < 2; ++m) {
    CHECK(shifted(layout.slack_decrease_offset(m)) == doctest::Approx(0.0));
    CHECK(shifted(layout.slack_decay_offset(m)) == doctest::Approx(1.0));
  }

  CHECK_THROWS_AS(shift_warm_start(VectorXd::Zero(10), layout), DimensionError);
}

TEST_CASE("layout pack/unpack round-trips") {
  DecisionLayout layout{4};
  std::mt19937 rng(79);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  VectorXd x(layout.size());
  for (int i = 0; i < x.size(); ++i) x(i) = u(rng);

  VectorXd rebuilt(layout.size());
  for (int m = 0; m <= 4; ++m)
    rebuilt.segment<12>(layout.state_offset(m)) = x.segment<12>(layout.state_offset(m));
  for (int m = 0; m < 4; ++m) {
    rebuilt.segment<6>(layout.input_offset(m)) = x.segment<6>(layout.input_offset(m));
    rebuilt(layout.slack_decrease_offset(m)) = x(layout.slack_decrease_offset(m));
    rebuilt(layout.slack_decay_offset(m)) = x(layout.slack_decay_offset(m));
  }
  CHECK((rebuilt - x).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("analytic derivatives of both problem flavours pass the FD check") {
  const VehicleParams vehicle;
  const int horizon = 4;
  std::mt19937 rng(83);

  ParamVector params;
  params.feedback = testing::random_state(rng);
  ReferenceWindow window;
  for (int m = 0; m <= horizon; ++m) window.states.push_back(testing::random_state(rng));
  params.target = window;
  params.obstacles = {SphereObstacle{Vec3(4, 1, 0), 1.0, Vec3::Zero()},
                      SphereObstacle{Vec3(-2, 3, 1), 0.5, Vec3(-0.3, 0, 0)}};

  const auto leader = build_leader_nlp(OcpWeights::defaults(), RateParams{}, params,
                                       horizon, 0.1, vehicle);
  const VectorXd x = random_interior_point(*leader, rng);
  const DerivativeReport report = check_derivatives(*leader, x);
  CHECK(report.max() < 1e-5);

  ParamVector fparams = params;
  fparams.target = LeaderSnapshot{testing::random_state(rng), FormationVector{}, 25.0};
  const auto follower = build_follower_nlp(OcpWeights::defaults(), RateParams{}, fparams,
                                           horizon, 0.1, vehicle);
  const DerivativeReport freport = check_derivatives(*follower, random_interior_point(*follower, rng));
  CHECK(freport.max() < 1e-5);
}

TEST_CASE("obstacle extrapolation moves the constraint centre per stage") {
  const VehicleParams vehicle = testing::neutral_params();
  const int horizon = 2;
  SphereObstacle ob;
  ob.center = Vec3(10.0, 0.0, 0.0);
  ob.velocity = Vec3(-1.0, 0.0, 0.0);

  ParamVector params;
  params.target = constant_window(RigidBodyState{}, horizon);
  params.obstacles = {ob};

  const auto frozen = build_leader_nlp(OcpWeights::defaults(), RateParams{}, params,
                                       horizon, 0.1, vehicle);
  params.extrapolate_obstacles = true;
  const auto moving = build_leader_nlp(OcpWeights::defaults(), RateParams{}, params,
                                       horizon, 0.1, vehicle);

  const VectorXd x = frozen->cold_start();
  // With the vehicle at the origin and the obstacle approaching, the
  // extrapolated barrier at later stages is smaller, which tightens the row.
  const VectorXd g_frozen = frozen->inequalities(x);
  const VectorXd g_moving = moving->inequalities(x);
  CHECK(g_moving(1) > g_frozen(1));
}
