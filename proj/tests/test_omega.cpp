#include <cmath>
#include <random>

#include "doctest.h"
#include "omega_limit/invariance.hpp"
#include "omega_limit/omega.hpp"
#include "support/expect.hpp"
#include "support/oracles.hpp"

using namespace omega_limit;

namespace {

PointCloud cloud_of(std::vector<StateVec> pts) {
  PointCloud c;
  c.source_ic = pts.front();
  c.points = std::move(pts);
  return c;
}

const PointCloud& lorenz_cloud() {
  static const PointCloud cloud = estimate_omega_set(builtin("lorenz"), StateVec{5, 5, 5}, 50.0, 500.0, 0.01, {});
  return cloud;
}

}  // namespace

TEST_CASE("estimate_omega_set sample count and stable limits") {
  const PointCloud quintic = estimate_omega_set(builtin("quintic1d"), StateVec{0.5}, 50.0, 10.0, 0.1, {});
  CHECK(quintic.points.size() == 100);
  for (const auto& p : quintic.points) CHECK(std::abs(p[0] - 1.0) <= 1e-6);

  const PointCloud r10 = estimate_omega_set(builtin("lorenz", {{"r", 10.0}}), StateVec{5, 5, 5}, 50.0, 50.0, 0.1, {});
  const auto eq = lorenz_equilibria(LorenzParams::with_r(10.0));
  const auto prox = equilibria_on_set(r10, eq, 1e-3);
  CHECK(!prox[0].on_set);
  CHECK(prox[1].on_set != prox[2].on_set);
  for (const auto& p : r10.points) CHECK(distance(p, eq[2].location) <= 1e-6);

  CHECK(error_kind([] { estimate_omega_set(builtin("quintic1d"), StateVec{0.5}, 1.0, 1.0, 2.0, {}); }) ==
        ErrorKind::invalid_input);
}

TEST_CASE("stable regime for r in (1, 24): ICs near B collapse to B") {
  for (double r : {2.0, 8.0, 15.0, 20.0}) {
    const auto eq = lorenz_equilibria(LorenzParams::with_r(r));
    const StateVec start = eq[2].location + StateVec{0.5, -0.3, 0.4};
    const PointCloud c = estimate_omega_set(builtin("lorenz", {{"r", r}}), start, 150.0, 10.0, 0.5, {});
    INFO("r = " << r);
    for (const auto& p : c.points) CHECK(distance(p, eq[2].location) <= 1e-6);
  }
}

TEST_CASE("lorenz r = 28 cloud structure") {
  const PointCloud& cloud = lorenz_cloud();
  CHECK(cloud.points.size() == 50000);
  const auto box = bounding_box(cloud);
  CHECK(box[0].min >= -25.0);
  CHECK(box[0].max <= 25.0);
  CHECK(box[2].min > 0.0);
  CHECK(box[2].max < 50.0);
  CHECK(std::abs(box[0].min + box[0].max) < 2.0);
  CHECK(std::abs(box[1].min + box[1].max) < 2.0);

  // Two lobes: substantial time on either side of x = 0.
  std::size_t left = 0;
  for (const auto& p : cloud.points) left += p[0] < 0.0 ? 1 : 0;
  CHECK(left > cloud.points.size() / 4);
  CHECK(left < 3 * cloud.points.size() / 4);

  for (const auto& p : cloud.points) CHECK(lyap_value(p, LorenzParams{}) <= 45.0 * 45.0);

  const auto eq = lorenz_equilibria(LorenzParams{});
  for (const auto& prox : equilibria_on_set(cloud, eq, 0.5)) {
    CHECK(!prox.on_set);
    CHECK(prox.distance > 1.0);
  }
}

TEST_CASE("sampling interval robustness") {
  const PointCloud& fine = lorenz_cloud();
  const PointCloud coarse = estimate_omega_set(builtin("lorenz"), StateVec{5, 5, 5}, 50.0, 500.0, 0.02, {});
  const PointCloud finer = estimate_omega_set(builtin("lorenz"), StateVec{5, 5, 5}, 50.0, 500.0, 0.005, {});
  const PointCloud other = estimate_omega_set(builtin("lorenz"), StateVec{-3, 7, 20}, 50.0, 500.0, 0.01, {});
  const double d1 = cloud_distance(fine, other).sym_avg;
  const double d2 = cloud_distance(finer, other).sym_avg;
  const double d3 = cloud_distance(coarse, other).sym_avg;
  CHECK(std::abs(d1 - d2) < 0.1);
  CHECK(std::abs(d1 - d3) < 0.1);
}

TEST_CASE("cloud_distance against brute force") {
  std::mt19937_64 rng(5);
  std::vector<StateVec> a, b;
  for (int i = 0; i < 600; ++i) a.push_back(oracles::random_state(rng, 3, 10.0));
  for (int i = 0; i < 400; ++i) b.push_back(oracles::random_state(rng, 3, 12.0));
  double sum_ab = 0, sum_ba = 0, max_d = 0;
  for (const auto& p : a) {
    const double d = oracles::brute_nearest(b, p);
    sum_ab += d;
    max_d = std::max(max_d, d);
  }
  for (const auto& p : b) {
    const double d = oracles::brute_nearest(a, p);
    sum_ba += d;
    max_d = std::max(max_d, d);
  }
  const CloudDistance got = cloud_distance(cloud_of(a), cloud_of(b));
  CHECK(got.sym_avg == doctest::Approx(0.5 * (sum_ab / 600 + sum_ba / 400)).epsilon(1e-12));
  CHECK(got.sym_hausdorff == doctest::Approx(max_d).epsilon(1e-12));
}

TEST_CASE("cloud_distance trivial cases") {
  std::vector<StateVec> pts;
  for (int i = 0; i < 200; ++i) pts.push_back(StateVec{std::cos(0.1 * i), std::sin(0.1 * i), 0.01 * i});
  const CloudDistance same = cloud_distance(cloud_of(pts), cloud_of(pts));
  CHECK(same.sym_avg == 0.0);
  CHECK(same.sym_hausdorff == 0.0);

  // Shift by eps along x, smaller than the point spacing.
  const double eps = 1e-3;
  std::vector<StateVec> shifted;
  for (const auto& p : pts) shifted.push_back(p + StateVec{eps, 0, 0});
  const CloudDistance d = cloud_distance(cloud_of(pts), cloud_of(shifted));
  CHECK(d.sym_avg == doctest::Approx(eps).epsilon(1e-9));
  CHECK(d.sym_hausdorff == doctest::Approx(eps).epsilon(1e-9));
}

TEST_CASE("point index handles far queries, 1-D and 2-D clouds") {
  std::vector<StateVec> line;
  for (int i = 0; i < 100; ++i) line.push_back(StateVec{static_cast<double>(i)});
  const PointIndex idx(line, 1e-3);
  CHECK(idx.nearest(StateVec{1000.0}).index == 99);
  CHECK(idx.nearest(StateVec{41.4}).distance == doctest::Approx(0.4));

  std::mt19937_64 rng(8);
  std::vector<StateVec> plane;
  for (int i = 0; i < 500; ++i) plane.push_back(oracles::random_state(rng, 2, 5.0));
  const PointIndex idx2(plane, 0.3);
  for (int i = 0; i < 200; ++i) {
    const StateVec q = oracles::random_state(rng, 2, 8.0);
    CHECK(idx2.nearest(q).distance == doctest::Approx(oracles::brute_nearest(plane, q)).epsilon(1e-14));
  }
}

TEST_CASE("equilibria_on_set") {
  std::vector<StateVec> pts{StateVec{1, 2, 3}, StateVec{4, 5, 6}};
  EquilibriumReport rep;
  rep.location = StateVec{4, 5, 6};
  const auto prox = equilibria_on_set(cloud_of(pts), std::vector<EquilibriumReport>{rep}, 0.5);
  CHECK(prox[0].distance == 0.0);
  CHECK(prox[0].on_set);
  CHECK(error_kind([&] { equilibria_on_set(cloud_of(pts), std::vector<EquilibriumReport>{rep}, 0.0); }) ==
        ErrorKind::invalid_input);
}

TEST_CASE("euler advisor") {
  const TopologyAdvice none = euler_advisor(0);
  REQUIRE(none.consistent_surfaces.size() == 1);
  CHECK(none.consistent_surfaces[0].genus == 1);
  CHECK(none.consistent_surfaces[0].euler_number == 0);
  bool sphere_excluded = false, double_excluded = false;
  for (const auto& s : none.excluded_surfaces) {
    sphere_excluded |= s.euler_number == 2;
    double_excluded |= s.euler_number == -2;
  }
  CHECK(sphere_excluded);
  CHECK(double_excluded);

  const TopologyAdvice two = euler_advisor(2);
  bool sphere_ok = false;
  for (const auto& s : two.consistent_surfaces) sphere_ok |= s.euler_number == 2;
  CHECK(sphere_ok);

  CHECK(euler_characteristic(0) == 2);
  CHECK(euler_characteristic(1) == 0);
  CHECK(euler_characteristic(2) == -2);
  for (int g = 0; g <= 8; ++g) {
    for (int count : {0, 1, 3}) {
      const TopologyAdvice a = euler_advisor(count, 8);
      for (const auto& s : a.consistent_surfaces) {
        CHECK(s.euler_number == 2 - 2 * s.genus);
        if (count == 0) CHECK(s.euler_number == 0);
      }
    }
  }
  CHECK(error_kind([] { euler_advisor(-1); }) == ErrorKind::invalid_input);
}

TEST_CASE("bounding box and CSV exports") {
  const PointCloud single = cloud_of({StateVec{1, 2, 3}});
  const auto box = bounding_box(single);
  CHECK(box[0].min == 1.0);
  CHECK(box[0].max == 1.0);
  CHECK(box[2].max == 3.0);
  CHECK(cloud_csv(single) == "x,y,z\n1,2,3\n");
  CHECK(projection_csv(single, 0, 2) == "x,z\n1,3\n");
  CHECK(cloud_csv(cloud_of({StateVec{0.5}})) == "y\n0.5\n");
  CHECK(cloud_csv(cloud_of({StateVec{0.5, 0.25}})) == "x,y\n0.5,0.25\n");
}
