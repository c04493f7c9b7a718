#include <gtest/gtest.h>

#include <random>

#include "incstab/iqc.hpp"
#include "incstab/probes.hpp"
#include "oracles.hpp"

namespace incstab {
namespace {

ComplexMatrix Diag(Complex a, Complex b) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

StateSpace SysOf(const OperatorSpec& op) { return std::get<LtiNode>(op.node().value).sys; }

OperatorSpec Lti(Scalar a, Scalar b, Scalar c, Scalar d) {
  return MakeLti(StateSpace{Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b),
                            Matrix::Constant(1, 1, c), Matrix::Constant(1, 1, d)});
}

TEST(Multiplier, BuiltInForms) {
  EXPECT_EQ(EvalMultiplier(SmallGainMultiplier(1.5), 3.0), Diag(2.25, -1));
  const ComplexMatrix p = EvalMultiplier(PassivityMultiplier(), -2.0);
  EXPECT_EQ(p(0, 1), Complex(1));
  EXPECT_EQ(p(1, 0), Complex(1));
  EXPECT_EQ(p(0, 0), Complex(0));
  EXPECT_EQ(SmallGainMultiplier(1, 2, 3).size(), 5);
  EXPECT_THROW(SmallGainMultiplier(0), std::invalid_argument);
  EXPECT_THROW(PassivityMultiplier(0), std::invalid_argument);
}

TEST(Multiplier, ConstantValidation) {
  ComplexMatrix m = Diag(1, -1);
  m(0, 1) = Complex(0, 1);
  m(1, 0) = Complex(0, -1);
  EXPECT_EQ(EvalMultiplier(ConstantMultiplier(m, 1, 1), 0), m);
  ComplexMatrix bad = m;
  bad(1, 0) = Complex(0, 1);
  EXPECT_THROW(ConstantMultiplier(bad, 1, 1), std::invalid_argument);
  EXPECT_THROW(ConstantMultiplier(m, 2, 1), std::invalid_argument);
}

TEST(Multiplier, TableInterpolatesMirrorsAndClamps) {
  ComplexMatrix a = Diag(1, -1);
  a(0, 1) = Complex(0, 1);
  a(1, 0) = Complex(0, -1);
  const Multiplier t = TableMultiplier({{0, a}, {2, Diag(3, -1)}}, 1, 1);
  const ComplexMatrix mid = EvalMultiplier(t, 1);
  EXPECT_NEAR(std::abs(mid(0, 0) - 2.0), 0, 1e-15);
  EXPECT_NEAR(std::abs(mid(0, 1) - Complex(0, 0.5)), 0, 1e-15);
  EXPECT_NEAR(std::abs(EvalMultiplier(t, -1)(0, 1) - Complex(0, -0.5)), 0, 1e-15);
  EXPECT_THROW(EvalMultiplier(t, 3), std::out_of_range);
  std::vector<std::string> warnings;
  EXPECT_EQ(EvalMultiplierClamped(t, 3, &warnings), Diag(3, -1));
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_THROW(TableMultiplier({{1, a}, {0, a}}, 1, 1), std::invalid_argument);
  EXPECT_DOUBLE_EQ(FormBound(t), 3);
}

TEST(Multiplier, FormBoundAndContinuityConstant) {
  EXPECT_DOUBLE_EQ(FormBound(SmallGainMultiplier(1.5)), 2.25);
  EXPECT_DOUBLE_EQ(FormBound(SmallGainMultiplier(0.5)), 1);
  EXPECT_DOUBLE_EQ(FormBound(PassivityMultiplier()), 1);
  EXPECT_DOUBLE_EQ(QuadraticContinuityConstant(2.25, 0.5), 12.375);
}

TEST(Multiplier, SigmaFormReducesToEnergies) {
  // For a constant multiplier the frequency-domain form equals the
  // time-domain quadratic form by Parseval.
  std::mt19937_64 rng(41);
  std::normal_distribution<Scalar> n(0, 1);
  const Scalar dt = 0.02;
  Matrix x(300, 2);
  for (Index k = 0; k < x.rows(); ++k) x.row(k) << n(rng), n(rng);
  const Signal s(x, dt);
  const Scalar ey = x.col(0).squaredNorm() * dt;
  const Scalar ew = x.col(1).squaredNorm() * dt;
  const Scalar cross = x.col(0).dot(x.col(1)) * dt;
  EXPECT_NEAR(SigmaForm(SmallGainMultiplier(1.5), s), 2.25 * ey - ew, 1e-9 * (ey + ew));
  EXPECT_NEAR(SigmaForm(PassivityMultiplier(), s), 2 * cross, 1e-9 * (ey + ew));
}

TEST(LtiCondition, SmallGainOnLag) {
  const OperatorSpec h1 = FirstOrderLag(0.5, 1);
  const auto grid = DefaultFrequencyGrid(SysOf(h1), 512);
  const LtiConditionResult r = CheckLtiCondition(h1, SmallGainMultiplier(1.5), grid);
  // 2.25 |G|^2 - 1 peaks at w = 0 with value 2.25 / 4 - 1.
  EXPECT_NEAR(r.eps, 0.4375, 1e-12);
  EXPECT_NEAR(r.worst_omega, 0, 1e-12);
  EXPECT_NEAR(r.limit_value, -1, 1e-12);
  EXPECT_GE(r.slack, 0);
  EXPECT_TRUE(r.passed);
  EXPECT_FALSE(CheckLtiCondition(h1, SmallGainMultiplier(2.5), grid).passed);
}

TEST(LtiCondition, PassivityRequiresNegativeRealPart) {
  for (Scalar k : {1.0, -1.0}) {
    const OperatorSpec h1 = FirstOrderLag(k, 1);
    const auto r = CheckLtiCondition(h1, PassivityMultiplier(), DefaultFrequencyGrid(SysOf(h1), 256));
    EXPECT_FALSE(r.passed) << k;
    EXPECT_LE(r.eps, 0) << k;
  }
  // G = -1 - 1/(s+1): 2 Re G <= -2 everywhere, with the supremum at infinity.
  const OperatorSpec g = Lti(-1, 1, -1, -1);
  const auto r = CheckLtiCondition(g, PassivityMultiplier(), DefaultFrequencyGrid(SysOf(g), 256));
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.eps, 2, 1e-12);
  EXPECT_NEAR(r.limit_value, -2, 1e-12);
}

TEST(LtiCondition, RejectsBadInput) {
  const OperatorSpec h1 = FirstOrderLag(0.5, 1);
  EXPECT_THROW(CheckLtiCondition(NegArctan(), SmallGainMultiplier(1), {0, 1}), std::invalid_argument);
  EXPECT_THROW(CheckLtiCondition(h1, SmallGainMultiplier(1), {1, 2}), std::invalid_argument);
  EXPECT_THROW(CheckLtiCondition(h1, SmallGainMultiplier(1, 2, 1), {0, 1}), std::invalid_argument);
}

TEST(Empirical, PassesWithinGainAndFalsifiesBeyond) {
  const auto pairs = ProbePairs(ProbeOptions{});
  const std::vector<Scalar> taus = {0, 0.25, 0.5, 0.75, 1};
  const auto ok = CheckIncIqcEmpirical(MakeStatic(NonlinearityKind::kTanh), SmallGainMultiplier(1.5), pairs, taus);
  EXPECT_TRUE(ok.passed);
  EXPECT_EQ(ok.samples, static_cast<long>(pairs.size() * taus.size()));

  const auto bad = CheckIncIqcEmpirical(MakeStatic(NonlinearityKind::kGain, 2), SmallGainMultiplier(1.5), pairs, taus);
  EXPECT_FALSE(bad.passed);
  EXPECT_DOUBLE_EQ(bad.worst_tau, 1);
  // sigma = (2.25 - 4) ||dy||^2 against ||x||^2 = 5 ||dy||^2.
  EXPECT_NEAR(bad.minimum / bad.worst_scale, -0.35, 1e-9);
}

TEST(GainBound, MatchesIndependentChain) {
  const IqcReport r = IqcGainBound(0.4375, SmallGainMultiplier(1.5), 0.5, 0.5);
  EXPECT_NEAR(r.eps_bar, 0.4375 / 3, 1e-15);
  EXPECT_DOUBLE_EQ(r.M, 2.25);
  EXPECT_NEAR(r.bound, oracle::IqcBound(0.4375, 2.25, 0.5), 1e-12);
  EXPECT_NEAR(r.bound, 7.11996, 1e-5);
  // Above 1 the squared conversion dominates.
  const IqcReport big = IqcGainBound(1, SmallGainMultiplier(1.5), 3, 3);
  EXPECT_NEAR(big.eps_bar, 1.0 / 20, 1e-15);
}

TEST(Certify, SaturatingLoopAndFalsifiedLoop) {
  const OperatorSpec h1 = FirstOrderLag(0.5, 1).WithDeclaredGain(0.5);
  const auto grid = DefaultFrequencyGrid(SysOf(h1), 512);
  const auto pairs = ProbePairs(ProbeOptions{});
  const OperatorSpec h2 = MakeScale(1.5, MakeStatic(NonlinearityKind::kTanh)).WithDeclaredGain(1.5);
  const Verdict v = CertifyIqc(h1, h2, SmallGainMultiplier(1.5), grid, pairs);
  ASSERT_TRUE(IsCertified(v));
  const auto& c = std::get<Certificate>(v);
  EXPECT_EQ(c.route, Route::kIqc);
  EXPECT_NEAR(c.gamma, oracle::IqcBound(0.4375, 2.25, 0.5), 1e-9);
  EXPECT_NEAR(c.r_min * c.gamma, 1, 1e-12);
  EXPECT_EQ(c.schedule.steps, oracle::MinimalSteps(c.schedule.nu, c.schedule.tau_step));

  const OperatorSpec too_big = MakeStatic(NonlinearityKind::kGain, 2).WithDeclaredGain(2);
  const Verdict f = CertifyIqc(h1, too_big, SmallGainMultiplier(1.5), grid, pairs);
  ASSERT_FALSE(IsCertified(f));
  EXPECT_NE(std::get<Refusal>(f).reason.find("falsified"), std::string::npos);

  const Verdict lti = CertifyIqc(h1, h2, SmallGainMultiplier(2.5), grid, pairs);
  ASSERT_FALSE(IsCertified(lti));
  EXPECT_NE(std::get<Refusal>(lti).reason.find("eps"), std::string::npos);
}

}  // namespace
}  // namespace incstab
