#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "emla_sens/dynamics.hpp"
#include "emla_sens/errors.hpp"
#include "support/models.hpp"
#include "support/oracles.hpp"

using namespace emla;
using emla::testing::energy_rate;
using emla::testing::planar_crane;
using emla::testing::two_link_arm;
using emla::testing::vertical_lift;

namespace {

std::mt19937 rng(90210);

Eigen::VectorXd random_vec(int n, double scale) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) {
    v[i] = std::uniform_real_distribution<double>(-scale, scale)(rng);
  }
  return v;
}

Eigen::VectorXd scalar1(double v) {
  Eigen::VectorXd out(1);
  out << v;
  return out;
}

}  // namespace

TEST_CASE("vertical lift force is mass times (g + a)") {
  const RobotModel m = vertical_lift(10.0);
  auto effort = [&](double a) {
    return rnea(m, scalar1(0.3), scalar1(0.5), scalar1(a)).joint_effort[0];
  };
  CHECK(effort(2.0) == doctest::Approx(118.1).epsilon(1e-12));
  CHECK(effort(0.0) == doctest::Approx(98.1).epsilon(1e-12));

  const RobotModel free_fall = vertical_lift(10.0, 0.0);
  const double f =
      rnea(free_fall, scalar1(0.0), scalar1(0.0), scalar1(2.0)).joint_effort[0];
  CHECK(f == doctest::Approx(20.0).epsilon(1e-12));

  // A payload adds to the translating mass.
  const RobotModel loaded = update_payload(m, 5.0);
  const double fl = rnea(loaded, scalar1(0.0), scalar1(0.0), scalar1(2.0)).joint_effort[0];
  CHECK(fl == doctest::Approx(15.0 * 11.81).epsilon(1e-12));
}

TEST_CASE("prismatic effort does not depend on where the mass sits") {
  RobotModel m = vertical_lift(10.0);
  m.link_inertias[0] = SpatialInertia::from_com(10.0, Vector3d(0.3, -0.1, 0.2),
                                                Vector3d(1.0, 2.0, 3.0).asDiagonal());
  const double f = rnea(m, scalar1(0.1), scalar1(-0.4), scalar1(2.0)).joint_effort[0];
  CHECK(f == doctest::Approx(10.0 * 11.81).epsilon(1e-12));
}

TEST_CASE("holding torque of a horizontal pendulum") {
  RobotModel m = two_link_arm();
  m.joints.resize(1);
  m.parent_transforms.resize(1);
  m.link_inertias.resize(1);
  m.link_inertias[0] = SpatialInertia::from_com(10.0, Vector3d(0.5, 0.0, 0.0),
                                                0.2 * Matrix3d::Identity());
  m.initial_q = Eigen::VectorXd::Zero(1);

  const RneaResult r = rnea(m, scalar1(0.0), scalar1(0.0), scalar1(0.0));
  CHECK(r.joint_effort[0] == doctest::Approx(10.0 * 9.81 * 0.5).epsilon(1e-12));

  // Hanging straight down there is nothing to hold.
  const RneaResult down = rnea(m, scalar1(-M_PI_2), scalar1(0.0), scalar1(0.0));
  CHECK(down.joint_effort[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("two-link efforts match the closed-form Lagrangian dynamics") {
  const RobotModel m = two_link_arm();
  const emla::testing::TwoLinkParams params;  // mirrors two_link_arm()

  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Vector2d q = random_vec(2, 2.5);
    const Eigen::Vector2d qdot = random_vec(2, 2.0);
    const Eigen::Vector2d qddot = random_vec(2, 3.0);

    const Eigen::VectorXd ours = rnea(m, q, qdot, qddot).joint_effort;
    const Eigen::Vector2d reference =
        emla::testing::two_link_effort(params, q, qdot, qddot);
    CHECK((ours - reference).norm() <= 1e-10 * std::max(1.0, reference.norm()));
  }
}

TEST_CASE("joint power equals the rate of change of mechanical energy") {
  for (double payload : {0.0, 75.0}) {
    const RobotModel m = update_payload(planar_crane(), payload);
    for (int trial = 0; trial < 40; ++trial) {
      Eigen::VectorXd q = random_vec(3, 1.0);
      q[2] = std::abs(q[2]);  // telescope stays in range
      const Eigen::VectorXd qdot = random_vec(3, 2.0);
      const Eigen::VectorXd qddot = random_vec(3, 3.0);

      const double joint_power = rnea(m, q, qdot, qddot).joint_effort.dot(qdot);
      const double edot = energy_rate(m, q, qdot, qddot);
      CHECK(joint_power == doctest::Approx(edot).epsilon(1e-9));
    }
  }
}

TEST_CASE("efforts are affine in the payload mass") {
  const RobotModel m = planar_crane();
  Eigen::VectorXd q(3), qdot(3), qddot(3);
  q << 0.5, -1.0, 0.4;
  qdot << 0.3, -0.2, 0.1;
  qddot << -0.5, 0.4, 0.2;

  const Eigen::VectorXd t0 = rnea(update_payload(m, 0.0), q, qdot, qddot).joint_effort;
  const Eigen::VectorXd t50 = rnea(update_payload(m, 50.0), q, qdot, qddot).joint_effort;
  const Eigen::VectorXd t100 = rnea(update_payload(m, 100.0), q, qdot, qddot).joint_effort;
  CHECK((t0 + t100 - 2.0 * t50).norm() <= 1e-10 * std::max(1.0, t100.norm()));
}

TEST_CASE("state vectors of the wrong size are rejected") {
  const RobotModel m = two_link_arm();
  const Eigen::VectorXd good = Eigen::VectorXd::Zero(2);
  const Eigen::VectorXd bad = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS((void)rnea(m, bad, good, good), ValidationError);
  CHECK_THROWS_AS((void)rnea(m, good, bad, good), ValidationError);
  CHECK_THROWS_AS((void)rnea(m, good, good, bad), ValidationError);
}

TEST_CASE("link states are reported for every body") {
  const RobotModel m = planar_crane();
  const RneaResult r = rnea(m, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3),
                            Eigen::VectorXd::Zero(3));
  REQUIRE(r.link_velocity.size() == 3);
  REQUIRE(r.link_acceleration.size() == 3);
  REQUIRE(r.link_wrench.size() == 3);
  for (const Twist& v : r.link_velocity) CHECK(v.norm() == 0.0);
}
