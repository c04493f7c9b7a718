#include <gtest/gtest.h>

#include <random>

#include "incstab/lti.hpp"
#include "incstab/operator.hpp"
#include "incstab/probes.hpp"
#include "oracles.hpp"

namespace incstab {
namespace {

Signal Constant(Scalar v, Index n, Scalar dt) { return Signal(Matrix::Constant(n, 1, v), dt); }

std::vector<SignalPair> SinePairs(Scalar amplitude, std::vector<Scalar> omegas) {
  std::vector<SignalPair> pairs;
  for (Scalar w : omegas) {
    const Signal s = Signal::FromFunction(4000, 0.01, [&](Scalar t) {
      return amplitude * std::sin(w * t) * ProbeTaper(t, 40);
    });
    pairs.emplace_back(s, Signal::Zero(4000, 1, 0.01));
  }
  return pairs;
}

TEST(Lti, ValidationMessagesNameTheMatrix) {
  StateSpace s{Matrix::Identity(2, 3), Matrix::Ones(2, 1), Matrix::Ones(1, 2), Matrix::Zero(1, 1)};
  try {
    ValidateStateSpace(s);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_EQ(std::string(e.what()).rfind("A must be square", 0), 0u);
  }
  EXPECT_THROW(MakeLti(StateSpace{Matrix::Identity(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                                  Matrix::Zero(1, 1)}),
               std::invalid_argument);
}

TEST(Lti, HurwitzTolerance) {
  EXPECT_TRUE(IsHurwitz(Matrix::Constant(1, 1, -1e-8)));
  EXPECT_FALSE(IsHurwitz(Matrix::Constant(1, 1, -1e-10)));
  EXPECT_FALSE(IsHurwitz(Matrix::Zero(1, 1)));
}

TEST(Lti, ZohMatchesScalarClosedForm) {
  const StateSpace s{Matrix::Constant(1, 1, -2), Matrix::Constant(1, 1, 3), Matrix::Ones(1, 1),
                     Matrix::Zero(1, 1)};
  const auto d = DiscretizeZoh(s, 0.1);
  EXPECT_NEAR(d.Ad(0, 0), std::exp(-0.2), 1e-14);
  EXPECT_NEAR(d.Bd(0, 0), 3.0 / 2.0 * (1 - std::exp(-0.2)), 1e-14);
}

TEST(Apply, ExamplesFromClosedForms) {
  const Signal step = Constant(1, 10000, 1e-3);
  const Signal y = Apply(FirstOrderLag(1, 1), step);
  Scalar worst = 0;
  for (Index k = 0; k < y.length(); ++k) {
    // ZOH is exact at the sample instants for a step input; y_k is the
    // response at t_k.
    worst = std::max(worst, std::abs(y.samples()(k, 0) - oracle::LagStep(y.time(k))));
  }
  EXPECT_LE(worst, 1e-3);
  EXPECT_EQ(Apply(Identity(), step).samples(), step.samples());
  const Signal phi = Apply(NegArctan(), Constant(1, 5, 0.1));
  for (Index k = 0; k < 5; ++k) EXPECT_NEAR(phi.samples()(k, 0), -kPi / 4, 1e-15);
}

TEST(Apply, LtiSuperposition) {
  StateSpace s{Matrix(2, 2), Matrix(2, 1), Matrix(1, 2), Matrix::Constant(1, 1, 0.3)};
  s.A << -1, 2, -3, -4;
  s.B << 1, 0.5;
  s.C << 0.2, -1;
  const OperatorSpec h = MakeLti(s);
  std::mt19937_64 rng(2);
  std::normal_distribution<Scalar> g;
  for (int trial = 0; trial < 10; ++trial) {
    Matrix a(300, 1), b(300, 1);
    for (Index k = 0; k < 300; ++k) {
      a(k, 0) = g(rng);
      b(k, 0) = g(rng);
    }
    const Signal u1(a, 0.01), u2(b, 0.01);
    const Signal lhs = Apply(h, 2.0 * u1 + (-0.7) * u2);
    const Signal rhs = 2.0 * Apply(h, u1) + (-0.7) * Apply(h, u2);
    EXPECT_LE(Norm(lhs - rhs), 1e-9 * Norm(rhs));
  }
}

TEST(Gain, ScaleIsExact) {
  const auto pairs = ProbePairs(ProbeOptions{});
  const GainEstimate g = EstimateIncrementalGain(MakeScale(2, Identity()), pairs);
  EXPECT_NEAR(g.gamma, 2, 1e-9);
  EXPECT_TRUE(g.incremental);
  EXPECT_TRUE(g.empirical);
  EXPECT_EQ(g.sample_count, static_cast<long>(pairs.size()));
  const GainEstimate tanh_g = EstimateIncrementalGain(MakeStatic(NonlinearityKind::kTanh), pairs);
  const GainEstimate scaled = EstimateIncrementalGain(MakeScale(-3, MakeStatic(NonlinearityKind::kTanh)), pairs);
  EXPECT_NEAR(scaled.gamma, 3 * tanh_g.gamma, 1e-12);
  EXPECT_THROW(EstimateIncrementalGain(Identity(), {}), std::invalid_argument);
}

TEST(Gain, ArctanApproachesOneFromBelow) {
  Scalar previous = 0;
  for (Scalar amp : {1.0, 0.1, 0.01}) {
    const GainEstimate g = EstimateIncrementalGain(NegArctan(), SinePairs(amp, {0.5, 1, 2}));
    EXPECT_LE(g.gamma, 1.0);
    EXPECT_GT(g.gamma, previous);
    previous = g.gamma;
  }
  EXPECT_GT(previous, 0.99);
}

TEST(Gain, LagApproachesDcGain) {
  const GainEstimate g = EstimateIncrementalGain(FirstOrderLag(1, 1), SinePairs(1, {0.02, 0.05}));
  EXPECT_LT(g.gamma, 1.0);
  EXPECT_GT(g.gamma, 0.95);
}

TEST(Gain, DeclarationViolationIsFlagged) {
  const auto pairs = ProbePairs(ProbeOptions{});
  EXPECT_FALSE(EstimateIncrementalGain(MakeScale(2, Identity()).WithDeclaredGain(2), pairs).declaration_violated);
  EXPECT_TRUE(EstimateIncrementalGain(MakeScale(2, Identity()).WithDeclaredGain(1.5), pairs).declaration_violated);
}

TEST(Static, LipschitzDominatesDifferenceQuotients) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<Scalar> x(-5, 5);
  for (auto [kind, param] : std::vector<std::pair<NonlinearityKind, Scalar>>{
           {NonlinearityKind::kIdentity, 0}, {NonlinearityKind::kGain, -2.5},
           {NonlinearityKind::kSaturation, 0.7}, {NonlinearityKind::kDeadzone, 0.4},
           {NonlinearityKind::kNegArctan, 0}, {NonlinearityKind::kTanh, 0}}) {
    const StaticNonlinearity f{kind, param};
    const auto [lo, hi] = f.SlopeBounds();
    for (int i = 0; i < 2000; ++i) {
      const Scalar a = x(rng), b = x(rng);
      if (a == b) continue;
      const Scalar q = (f(a) - f(b)) / (a - b);
      // Rounding in the quotient is about 1e-16 |f| / |a - b|.
      const Scalar tol = 1e-13 * (1 + std::abs(f(a)) + std::abs(f(b))) / std::abs(a - b);
      EXPECT_LE(std::abs(q), f.Lipschitz() + tol) << f.Name();
      EXPECT_GE(q, lo - tol) << f.Name();
      EXPECT_LE(q, hi + tol) << f.Name();
    }
  }
  EXPECT_THROW(ParseNonlinearityKind("cubic"), std::invalid_argument);
}

TEST(Causality, StaticLtiPassAntiCausalFails) {
  const Signal step = Constant(1, 500, 0.01);
  const std::vector<Scalar> horizons = {1, 2.5, 4};
  const auto s = CausalityCheck(MakeStatic(NonlinearityKind::kTanh), step, horizons);
  EXPECT_TRUE(s.causal);
  EXPECT_EQ(s.max_violation, 0);
  const auto l = CausalityCheck(FirstOrderLag(1, 1), step, horizons);
  EXPECT_TRUE(l.causal);
  EXPECT_LE(l.max_violation, 1e-9);
  const OperatorSpec reverse = MakeMapped("time reversal", [](const Signal& u) {
    return Signal(u.samples().colwise().reverse(), u.dt());
  });
  Matrix ramp(500, 1);
  for (Index k = 0; k < 500; ++k) ramp(k, 0) = k < 250 ? 1 : 0.5;
  const auto r = CausalityCheck(reverse, Signal(ramp, 0.01), horizons);
  EXPECT_FALSE(r.causal);
  EXPECT_GT(r.max_violation, 0.1);
}

TEST(Inverse, Examples) {
  const Signal y = Signal::FromFunction(50, 0.1, [](Scalar t) { return std::sin(t); });
  EXPECT_LE(Norm(RelationalInverseApply(Identity(), y) - y), 1e-12);
  const Signal target = Constant(-kPi / 4, 10, 0.1);
  const Signal e = RelationalInverseApply(NegArctan(), target);
  for (Index k = 0; k < 10; ++k) EXPECT_NEAR(e.samples()(k, 0), 1.0, 1e-9);
  EXPECT_LE(Norm(RelationalInverseApply(MakeScale(2, Identity()), y) - 0.5 * y), 1e-15);
  EXPECT_THROW(RelationalInverseApply(MakeStatic(NonlinearityKind::kSaturation, 1), y),
               std::invalid_argument);
  EXPECT_THROW(RelationalInverseApply(NegArctan(), Constant(2, 3, 0.1)), std::domain_error);
}

TEST(Inverse, ComposesWithApply) {
  const Signal u = Signal::FromFunction(400, 0.01, [](Scalar t) { return std::cos(3 * t) * 0.8; });
  for (const OperatorSpec& op :
       {MakeStatic(NonlinearityKind::kTanh), NegArctan(), MakeScale(-1.5, MakeStatic(NonlinearityKind::kTanh))}) {
    EXPECT_LE(Norm(RelationalInverseApply(op, Apply(op, u)) - u), 1e-9) << Describe(op);
  }
  StateSpace s{Matrix::Constant(1, 1, -1), Matrix::Ones(1, 1), Matrix::Ones(1, 1),
               Matrix::Constant(1, 1, 2)};
  const OperatorSpec lti = MakeLti(s);
  EXPECT_LE(Norm(RelationalInverseApply(lti, Apply(lti, u)) - u), 1e-9);
  EXPECT_THROW(RelationalInverseApply(FirstOrderLag(1, 1), u), std::invalid_argument);
}

TEST(Inverse, ContinuousRealizationFormula) {
  StateSpace s{Matrix::Constant(1, 1, -1), Matrix::Constant(1, 1, 2), Matrix::Constant(1, 1, 3),
               Matrix::Constant(1, 1, 4)};
  const StateSpace inv = InverseRealization(s);
  EXPECT_DOUBLE_EQ(inv.A(0, 0), -1 - 2.0 * 3.0 / 4.0);
  EXPECT_DOUBLE_EQ(inv.B(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(inv.C(0, 0), -0.75);
  EXPECT_DOUBLE_EQ(inv.D(0, 0), 0.25);
}

}  // namespace
}  // namespace incstab
