#include "walltopo/schemes.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "walltopo/errors.hpp"

using namespace walltopo;

namespace {

struct Instance {
  std::vector<double> energy;
  std::vector<double> lengths;
  std::vector<double> t;
};

Instance random_instance(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> e_dist(0.1, 3.0);
  std::uniform_real_distribution<double> l_dist(0.5, 2.5);
  std::uniform_real_distribution<double> t_dist(0.3, 2.0);
  Instance inst;
  for (int j = 0; j < n; ++j) {
    inst.energy.push_back(e_dist(rng));
    inst.lengths.push_back(l_dist(rng));
    inst.t.push_back(t_dist(rng));
  }
  return inst;
}

std::vector<double> fd_gradient(UpdateScheme scheme, const Instance& inst, double h) {
  std::vector<double> g(inst.t.size());
  for (size_t j = 0; j < inst.t.size(); ++j) {
    std::vector<double> tp = inst.t;
    std::vector<double> tm = inst.t;
    tp[j] += h;
    tm[j] -= h;
    g[j] = (scheme_objective(scheme, inst.energy, inst.lengths, tp) -
            scheme_objective(scheme, inst.energy, inst.lengths, tm)) /
           (2.0 * h);
  }
  return g;
}

}  // namespace

TEST_SUITE("schemes") {

TEST_CASE("scheme 1 objective on a two-wall example") {
  const std::vector<double> e{1.0, 1.0};
  const std::vector<double> len{1.0, 1.0};
  const std::vector<double> t{1.0, 2.0};
  // Densities 1 and 0.5, population std 0.25.
  CHECK(scheme1_objective(e, len, t) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("scheme 1 vanishes for proportional thickness") {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> t_dist(0.5, 4.0);
  std::uniform_real_distribution<double> l_dist(0.5, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 7;
    std::vector<double> e(n), len(n), t(n);
    for (int j = 0; j < n; ++j) {
      t[j] = t_dist(rng);
      len[j] = l_dist(rng);
      e[j] = len[j] * t[j];  // density exactly 1 everywhere
    }
    CHECK(scheme1_objective(e, len, t) == doctest::Approx(0.0).epsilon(1e-12));
    for (double gj : scheme1_gradient(e, len, t)) CHECK(gj == 0.0);
  }
}

TEST_CASE("scheme 2 objective on hand-checked examples") {
  CHECK(scheme2_objective(std::vector<double>{3.0, 1.0}, std::vector<double>{1.0, 1.0},
                          std::vector<double>{1.0, 1.0}) == doctest::Approx(0.25).epsilon(1e-12));
  // Zero total energy falls back to uniform shares.
  CHECK(scheme2_objective(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 1.0},
                          std::vector<double>{1.0, 3.0}) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("scheme 2 is invariant to uniform thickness scaling") {
  std::mt19937 rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = random_instance(rng, 3 + trial % 6);
    const double f = scheme2_objective(inst.energy, inst.lengths, inst.t);
    std::vector<double> scaled = inst.t;
    for (double& v : scaled) v *= 1.7;
    CHECK(scheme2_objective(inst.energy, inst.lengths, scaled) ==
          doctest::Approx(f).epsilon(1e-12));
    // Scale invariance makes the radial directional derivative vanish.
    const std::vector<double> g = scheme2_gradient(inst.energy, inst.lengths, inst.t);
    double radial = 0.0;
    for (size_t j = 0; j < g.size(); ++j) radial += g[j] * inst.t[j];
    CHECK(radial == doctest::Approx(0.0).epsilon(1e-10));
  }
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937 rng(56);
  for (UpdateScheme scheme : {UpdateScheme::energy_density, UpdateScheme::beso_transfer}) {
    for (int trial = 0; trial < 40; ++trial) {
      const Instance inst = random_instance(rng, 2 + trial % 8);
      const std::vector<double> g = scheme_gradient(scheme, inst.energy, inst.lengths, inst.t);
      const std::vector<double> fd = fd_gradient(scheme, inst, 1e-6);
      double num = 0.0, den = 0.0;
      for (size_t j = 0; j < g.size(); ++j) {
        num += (g[j] - fd[j]) * (g[j] - fd[j]);
        den += fd[j] * fd[j];
      }
      REQUIRE(den > 0.0);
      CHECK(std::sqrt(num / den) < 1e-5);
    }
  }
}

TEST_CASE("gradient is zero where the objective is flat") {
  const std::vector<double> e{2.0, 2.0, 2.0};
  const std::vector<double> len{1.0, 1.0, 1.0};
  const std::vector<double> t{1.5, 1.5, 1.5};
  for (UpdateScheme scheme : {UpdateScheme::energy_density, UpdateScheme::beso_transfer})
    for (double gj : scheme_gradient(scheme, e, len, t)) CHECK(gj == 0.0);
}

TEST_CASE("domain errors") {
  const std::vector<double> e{1.0, 1.0};
  const std::vector<double> len{1.0, 1.0};
  CHECK_THROWS_AS(scheme1_objective(e, len, std::vector<double>{1.0, -0.1}), std::domain_error);
  CHECK_THROWS_AS(scheme2_objective(e, len, std::vector<double>{1.0, -0.1}), std::domain_error);
  CHECK_THROWS_AS(scheme2_objective(e, len, std::vector<double>{0.0, 0.0}), std::domain_error);
  // Zero thickness is floored for scheme 1, not rejected.
  const double f = scheme1_objective(e, len, std::vector<double>{1.0, 0.0});
  CHECK(std::isfinite(f));
}

TEST_CASE("size mismatches are rejected") {
  const std::vector<double> e{1.0, 1.0};
  const std::vector<double> len{1.0};
  const std::vector<double> t{1.0, 1.0};
  CHECK_THROWS_AS(scheme1_objective(e, len, t), ValidationError);
  CHECK_THROWS_AS(scheme2_gradient(e, len, t), ValidationError);
}

TEST_CASE("moving bounds") {
  const std::vector<double> t{0.1, 1.0, 2.9};
  const Bounds b = build_bounds(t, 0.25, 3.0);
  CHECK(b.lower_mm[0] == doctest::Approx(0.0));
  CHECK(b.upper_mm[0] == doctest::Approx(0.35));
  CHECK(b.lower_mm[1] == doctest::Approx(0.75));
  CHECK(b.upper_mm[1] == doctest::Approx(1.25));
  CHECK(b.lower_mm[2] == doctest::Approx(2.65));
  CHECK(b.upper_mm[2] == doctest::Approx(3.0));
  CHECK_THROWS_AS(build_bounds(t, 0.0, 3.0), ValidationError);
  CHECK_THROWS_AS(build_bounds(t, 0.25, 0.0), ValidationError);
}

TEST_CASE("volume residual") {
  const std::vector<double> t{1.0, 2.0};
  const std::vector<double> len{10.0, 5.0};
  // H * (10 + 10) = 80 at H = 4.
  CHECK(volume_residual(t, len, 4.0, 80.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(volume_residual(t, len, 4.0, 70.0) == doctest::Approx(10.0));
}

TEST_CASE("update problem validation") {
  UpdateProblem p;
  p.scheme = UpdateScheme::energy_density;
  p.energy_prev_j = {1.0, 1.0};
  p.lengths_mm = {1.0, 1.0};
  p.height_mm = 2.0;
  p.target_volume_mm3 = 4.0;
  p.lower_mm = {0.5, 0.5};
  p.upper_mm = {1.5, 1.5};
  p.t_start_mm = {1.0, 1.0};
  CHECK_NOTHROW(p.validate());

  UpdateProblem bad = p;
  bad.lower_mm = {1.6, 0.5};
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  bad = p;
  bad.target_volume_mm3 = 100.0;  // above H * sum(L * upper) = 6
  CHECK_THROWS_AS(bad.validate(), InfeasibleError);

  bad = p;
  bad.target_volume_mm3 = 1.0;  // below H * sum(L * lower) = 2
  CHECK_THROWS_AS(bad.validate(), InfeasibleError);

  bad = p;
  bad.energy_prev_j = {1.0};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

}  // TEST_SUITE
