#include <cmath>
#include <numbers>
#include <thread>

#include "softbody/integrators.hpp"
#include "support.hpp"

namespace softbody {
namespace {

ForceEvaluator constant(Vec3 a) {
  return [a](std::span<const ParticleState> s) { return std::vector<Vec3>(s.size(), a); };
}

// x'' = -w^2 x along the x axis.
ForceEvaluator oscillator(double omega) {
  return [omega](std::span<const ParticleState> s) {
    std::vector<Vec3> out;
    for (const ParticleState& p : s) out.push_back(-omega * omega * p.position);
    return out;
  };
}

StateVector one(Vec3 x, Vec3 v, bool pinned = false) { return {ParticleState{x, v, pinned}}; }

using Method = StateVector (*)(std::span<const ParticleState>, double, const ForceEvaluator&);

struct Named {
  const char* name;
  Method step;
};

const Named kMethods[] = {{"semiImplicitEuler", step_semi_implicit_euler},
                          {"explicitEuler", step_explicit_euler},
                          {"midpoint", step_midpoint},
                          {"rk4", step_rk4}};

double oscillator_error(Method step, double dt, double t_end) {
  const double omega = 2.0 * std::numbers::pi;
  StateVector s = one({1, 0, 0}, {});
  const int n = static_cast<int>(std::lround(t_end / dt));
  const auto eval = oscillator(omega);
  for (int i = 0; i < n; ++i) s = step(s, dt, eval);
  const double t = n * dt;
  const double ex = s[0].position.x - std::cos(omega * t);
  const double ev = (s[0].velocity.x + omega * std::sin(omega * t)) / omega;
  return std::hypot(ex, ev);
}

TEST(SemiImplicitEuler, OneStepFormula) {
  const StateVector s = step_semi_implicit_euler(one({0, 2, 0}, {}), 0.1, constant({0, -10, 0}));
  EXPECT_EQ(s[0].velocity.y, -1.0);
  EXPECT_EQ(s[0].position.y, 1.9);
}

TEST(ExplicitEuler, OneStepFormula) {
  const StateVector s = step_explicit_euler(one({0, 2, 0}, {}), 0.1, constant({0, -10, 0}));
  EXPECT_EQ(s[0].velocity.y, -1.0);
  EXPECT_EQ(s[0].position.y, 2.0);
}

TEST(Midpoint, ConstantAccelerationExact) {
  const StateVector s = step_midpoint(one({}, {}), 0.1, constant({-10, 0, 0}));
  EXPECT_NEAR(s[0].velocity.x, -1.0, 1e-12);
  EXPECT_NEAR(s[0].position.x, -0.05, 1e-12);
}

TEST(Rk4, ConstantAccelerationExact) {
  const StateVector s = step_rk4(one({}, {}), 0.1, constant({0, -9.81, 0}));
  EXPECT_NEAR(s[0].velocity.y, -0.981, 1e-12);
  EXPECT_NEAR(s[0].position.y, -0.04905, 1e-12);
}

TEST(Rk4, OnePeriodOscillator) {
  EXPECT_LT(oscillator_error(step_rk4, 1e-3, 1.0), 1e-8);
}

TEST(AllMethods, ExactForZeroAcceleration) {
  for (const Named& m : kMethods) {
    StateVector s = one({1, 2, 3}, {1, 0, -0.5});
    for (int i = 0; i < 4; ++i) s = m.step(s, 0.5, constant({}));
    EXPECT_EQ(s[0].position, (Vec3{3, 2, 2})) << m.name;
    EXPECT_EQ(s[0].velocity, (Vec3{1, 0, -0.5})) << m.name;
  }
}

TEST(AllMethods, PinnedUnchanged) {
  for (const Named& m : kMethods) {
    const StateVector before = one({0.25, 1.5, -2}, {}, true);
    const StateVector after = m.step(before, 0.01, constant({0, -9.81, 0}));
    EXPECT_EQ(after[0].position, before[0].position) << m.name;
    EXPECT_EQ(after[0].velocity, Vec3{}) << m.name;
  }
}

TEST(AllMethods, PinnedNeighbourStillMoves) {
  for (const Named& m : kMethods) {
    StateVector s{{{0, 0, 0}, {}, true}, {{1, 0, 0}, {}, false}};
    s = m.step(s, 0.01, constant({0, -9.81, 0}));
    EXPECT_EQ(s[0].position, Vec3{}) << m.name;
    EXPECT_LT(s[1].velocity.y, 0.0) << m.name;
  }
}

TEST(AllMethods, ConvergenceOrder) {
  const double expected[] = {0.9, 0.9, 1.9, 3.9};
  for (std::size_t i = 0; i < 4; ++i) {
    const double e1 = oscillator_error(kMethods[i].step, 1e-2, 1.0);
    const double e2 = oscillator_error(kMethods[i].step, 5e-3, 1.0);
    const double e3 = oscillator_error(kMethods[i].step, 2.5e-3, 1.0);
    EXPECT_GE(std::log2(e1 / e2), expected[i]) << kMethods[i].name;
    EXPECT_GE(std::log2(e2 / e3), expected[i]) << kMethods[i].name;
  }
}

TEST(ExplicitEuler, EnergyGrowsMonotonically) {
  const double omega = 2.0 * std::numbers::pi;
  StateVector s = one({1, 0, 0}, {});
  const auto eval = oscillator(omega);
  double previous = 0.5 * omega * omega;
  for (int i = 0; i < 10000; ++i) {
    s = step_explicit_euler(s, 0.02, eval);
    const double e = 0.5 * dot(s[0].velocity, s[0].velocity) + 0.5 * omega * omega * dot(s[0].position, s[0].position);
    ASSERT_GT(e, previous) << "step " << i;
    previous = e;
    if (!std::isfinite(e) || e > 1e200) break;
  }
}

TEST(SemiImplicitEuler, EnergyBoundedOnOscillator) {
  const double omega = 2.0 * std::numbers::pi;
  StateVector s = one({1, 0, 0}, {});
  const auto eval = oscillator(omega);
  const double e0 = 0.5 * omega * omega;
  for (int i = 0; i < 10000; ++i) {
    s = step_semi_implicit_euler(s, 1e-3, eval);
    const double e = 0.5 * dot(s[0].velocity, s[0].velocity) + 0.5 * omega * omega * dot(s[0].position, s[0].position);
    ASSERT_LT(std::abs(e - e0) / e0, 0.02);
  }
}

TEST(RequireFinite, RejectsNaN) {
  StateVector s = one({std::nan(""), 0, 0}, {});
  EXPECT_ERROR_CODE(require_finite(s), ErrorCode::NonfiniteState);
  s = one({}, {0, INFINITY, 0});
  EXPECT_ERROR_CODE(require_finite(s), ErrorCode::NonfiniteState);
}

TEST(AllMethods, NonfiniteOutputRejected) {
  const ForceEvaluator blowup = [](std::span<const ParticleState> s) {
    return std::vector<Vec3>(s.size(), Vec3{INFINITY, 0, 0});
  };
  for (const Named& m : kMethods) {
    EXPECT_ERROR_CODE(m.step(one({}, {}), 0.01, blowup), ErrorCode::NonfiniteState);
  }
}

TEST(Registry, Builtins) {
  IntegratorRegistry r;
  r.add_builtins();
  const auto cat = r.catalog();
  ASSERT_EQ(cat.size(), 4u);
  EXPECT_EQ(r.get("semiImplicitEuler").spec.time_step, 0.005);
  EXPECT_EQ(r.get("explicitEuler").spec.time_step, 0.002);
  EXPECT_EQ(r.get("midpoint").spec.time_step, 0.005);
  EXPECT_EQ(r.get("rk4").spec.time_step, 0.01);
}

TEST(Registry, AddAndDuplicate) {
  IntegratorRegistry r;
  r.add_builtins();
  r.add({"verlet", 0.004}, step_midpoint);
  EXPECT_TRUE(r.contains("verlet"));
  EXPECT_EQ(r.catalog().size(), 5u);
  EXPECT_ERROR_CODE(r.add({"rk4", 0.01}, step_rk4), ErrorCode::DuplicateName);
  EXPECT_ERROR_CODE(r.add({"bad", 0.0}, step_rk4), ErrorCode::InvalidParams);
  EXPECT_ERROR_CODE(r.get("foo"), ErrorCode::UnknownAlgorithm);
}

TEST(Registry, ConcurrentReadsDuringRegistration) {
  IntegratorRegistry r;
  r.add_builtins();
  std::thread writer([&] {
    for (int i = 0; i < 100; ++i) r.add({"custom" + std::to_string(i), 0.01}, step_rk4);
  });
  for (int i = 0; i < 1000; ++i) EXPECT_TRUE(r.contains("rk4"));
  writer.join();
  for (const IntegratorSpec& spec : r.catalog()) EXPECT_NO_THROW(r.get(spec.name).step);
  EXPECT_EQ(r.catalog().size(), 104u);
}

}  // namespace
}  // namespace softbody
