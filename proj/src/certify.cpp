#include "incstab/certify.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "incstab/probes.hpp"
#include "incstab/srg.hpp"

namespace incstab {

namespace {

constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

std::string Num(Scalar v) {
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

HomotopySchedule TrivialSchedule(Scalar gamma1, Scalar gamma2, Scalar gamma) {
  return HomotopySchedule{1, 1, 0, gamma1, gamma2, gamma};
}

HomotopySchedule ScheduleOrTrivial(Scalar gamma1, Scalar gamma2, Scalar gamma) {
  if (gamma1 > 0 && gamma2 > 0 && gamma > 0) return BuildSchedule(gamma1, gamma2, gamma);
  return TrivialSchedule(gamma1, gamma2, gamma);
}

std::string DescribeRegion(const Region& r) {
  std::ostringstream s;
  const std::size_t shown = std::min<std::size_t>(r.size(), 4);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i > 0) s << " u ";
    s << Describe(r.primitives()[i]);
  }
  if (r.size() > shown) s << " u ... (" << r.size() << " primitives)";
  return s.str();
}

std::vector<std::string> ClosestPrimitives(const Region& a, const Region& b) {
  Scalar best = kInf;
  std::vector<std::string> witness;
  for (const auto& p : a.primitives()) {
    for (const auto& q : b.primitives()) {
      const Scalar d = PrimitiveDistance(p, q);
      if (d < best) {
        best = d;
        witness = {Describe(p), Describe(q)};
      }
    }
  }
  return witness;
}

void RequireDeclarations(const OperatorSpec& op, const char* name) {
  if (!op.declared_inc_gain()) {
    throw std::invalid_argument(std::string(name) + " has no declared incremental gain");
  }
  if (!op.declared_srg()) throw std::invalid_argument(std::string(name) + " has no declared SRG");
}

}  // namespace

std::string ToString(Route route) {
  switch (route) {
    case Route::kSrg:
      return "SRG";
    case Route::kIqc:
      return "IQC";
    case Route::kSmallGain:
      return "SmallGain";
  }
  return "unknown";
}

std::string ToString(Mode mode) { return mode == Mode::kRelaxed ? "relaxed" : "standard"; }

HomotopySchedule BuildSchedule(Scalar gamma1, Scalar gamma2, Scalar gamma) {
  for (Scalar g : {gamma1, gamma2, gamma}) {
    if (!(g > 0) || !std::isfinite(g)) {
      throw std::invalid_argument("schedule gains must be positive and finite");
    }
  }
  HomotopySchedule s;
  s.gamma1 = gamma1;
  s.gamma2 = gamma2;
  s.gamma = gamma;
  s.nu = std::min<Scalar>(1, kScheduleSafety / (gamma1 * gamma2));
  s.tau_step = kScheduleSafety / (gamma * gamma2);
  const Scalar remaining = std::max<Scalar>(0, 1 - s.nu);
  // Round away representation noise before taking the ceiling, then restore
  // the covering property nu + steps * tau_step >= 1 if rounding broke it.
  s.steps = static_cast<long>(std::ceil(remaining / s.tau_step - 1e-9));
  while (s.nu + static_cast<Scalar>(s.steps) * s.tau_step < 1 - 1e-12) ++s.steps;
  return s;
}

Verdict CheckSmallGain(Scalar gamma1, Scalar gamma2) {
  if (!(gamma1 >= 0) || !(gamma2 >= 0) || !std::isfinite(gamma1) || !std::isfinite(gamma2)) {
    throw std::invalid_argument("small-gain inputs must be finite and >= 0");
  }
  const Scalar loop_gain = gamma1 * gamma2;
  const Details details{{"gamma1", gamma1}, {"gamma2", gamma2}, {"loop_gain", loop_gain}};
  if (!(loop_gain < 1)) {
    Refusal r;
    r.route = Route::kSmallGain;
    r.reason = "loop gain gamma1*gamma2 = " + Num(loop_gain) + " is not < 1";
    r.details = details;
    return r;
  }
  Certificate c;
  c.route = Route::kSmallGain;
  c.gamma = gamma1 / (1 - loop_gain);
  c.r_min = c.gamma > 0 ? 1 / c.gamma : kInf;
  c.schedule = ScheduleOrTrivial(gamma1, gamma2, c.gamma);
  c.details = details;
  c.premises = {
      "incremental gain bounds gamma1 = " + Num(gamma1) + ", gamma2 = " + Num(gamma2) + " (declared)",
      "loop map e -> u - H2(H1(e)) is a contraction with factor gamma1*gamma2 < 1, so the loop "
      "is solvable on all of L2",
      "closed-loop bound gamma1/(1 - gamma1*gamma2) derived from contraction",
  };
  return c;
}

Verdict CrossCheck(Certificate certificate, const OperatorSpec& h1, const OperatorSpec& h2,
                   const std::vector<SignalPair>& probes, const SolveOptions& options) {
  if (probes.empty()) return certificate;
  GainEstimate est;
  try {
    est = ClosedLoopGainEstimate(h1, h2, 1, probes, options);
  } catch (const DivergenceError& e) {
    certificate.premises.push_back(
        std::string("empirical cross-check skipped: Picard iteration on the full loop does not "
                    "contract (") + e.what() + ")");
    return certificate;
  }
  certificate.empirical = EmpiricalSummary{true, est.gamma, est.sample_count};
  if (est.gamma > certificate.gamma * (1 + 1e-9) + 1e-12) {
    Refusal r;
    r.route = certificate.route;
    r.mode = certificate.mode;
    r.reason = "empirical closed-loop incremental gain " + Num(est.gamma) +
               " exceeds the certified bound " + Num(certificate.gamma) +
               "; the declared premises are inconsistent";
    r.premises = certificate.premises;
    r.details = certificate.details;
    r.details.emplace_back("empirical_max_ratio", est.gamma);
    return r;
  }
  return certificate;
}

Verdict CertifySrg(const OperatorSpec& h1, const OperatorSpec& h2, const CertifyOptions& options) {
  RequireDeclarations(h1, "h1");
  RequireDeclarations(h2, "h2");
  const Scalar gamma1 = *h1.declared_inc_gain();
  const Scalar gamma2 = *h2.declared_inc_gain();
  const Region srg1 = SymmetrizeRegion(*h1.declared_srg());
  const Region srg2 = SymmetrizeRegion(*h2.declared_srg());
  const Region s1_inv = InvertRegion(srg1);
  const Region s2 = ChordClosure(srg2);
  if (!s2.IsBounded()) throw RegionError("chord-closed SRG of h2 is unbounded");

  const SeparationResult sep = SeparationMargin(s1_inv, s2, options.tau_lo, 1, options.separation);

  std::vector<std::string> premises = {
      "h1 = " + Describe(h1) + ": declared incremental gain " + Num(gamma1) + ", declared SRG " +
          DescribeRegion(srg1),
      "h2 = " + Describe(h2) + ": declared incremental gain " + Num(gamma2) + ", declared SRG " +
          DescribeRegion(srg2),
      "separation measured between inverse SRG of h1 and -tau times the chord closure of the "
      "SRG of h2 (chord closure applied before negation and scaling)",
      "strict separation certified for tau in [" + Num(options.tau_lo) +
          ", 1] by a Lipschitz-slack grid (residual slack " + Num(sep.slack) + ")",
  };
  for (const auto* op : {&h1, &h2}) {
    for (const auto& note : op->declaration_notes()) premises.push_back(note);
  }
  Details details{{"margin", sep.margin},
                  {"tau_star", sep.tau_star},
                  {"min_sampled_distance", sep.min_sampled_distance},
                  {"sweep_slack", sep.slack},
                  {"sweep_evaluations", static_cast<Scalar>(sep.evaluations)},
                  {"gamma1", gamma1},
                  {"gamma2", gamma2}};

  if (!(sep.margin > 0)) {
    Refusal r;
    r.route = Route::kSrg;
    r.reason = "SRGs are not strictly separated: certified margin is 0";
    r.tau_star = sep.tau_star;
    r.witness = ClosestPrimitives(s1_inv, ScaleRegion(s2, -sep.tau_star));
    r.premises = std::move(premises);
    r.details = std::move(details);
    return r;
  }

  Certificate c;
  c.route = Route::kSrg;
  c.r_min = sep.margin;
  c.gamma = 1 / sep.margin;
  c.schedule = ScheduleOrTrivial(gamma1, gamma2, c.gamma);
  c.premises = std::move(premises);
  c.premises.push_back(c.gamma >= gamma1
                           ? "check gamma >= gamma1 at tau = 0: passed"
                           : "check gamma >= gamma1 at tau = 0: failed (declared gamma1 = " +
                                 Num(gamma1) + " exceeds 1/r_min; the declaration is conservative)");
  c.details = std::move(details);
  return CrossCheck(std::move(c), h1, h2, options.probes, options.solve);
}

Verdict CertifyRelaxed(const OperatorSpec& h1, const OperatorSpec& h2, bool well_posedness_assumed,
                       const CertifyOptions& options) {
  if (!well_posedness_assumed) {
    Refusal r;
    r.route = Route::kSrg;
    r.mode = Mode::kRelaxed;
    r.reason =
        "relaxed mode needs well-posedness and causality of [H1, tau H2] on the extended space for "
        "all tau in (0, 1]; this cannot be verified numerically and was not assumed";
    return r;
  }
  ProbeOptions probe;
  probe.dim = h1.input_dim() == 0 ? 1 : h1.input_dim();
  probe.sinusoids = 2;
  probe.noise = 1;
  const std::vector<Scalar> horizons = {0.25 * probe.horizon, 0.5 * probe.horizon,
                                        0.75 * probe.horizon};
  Scalar worst = 0;
  for (const auto& u : ProbeSignals(probe)) {
    const auto r1 = CausalityCheck(h1, u, horizons);
    if (!r1.causal) {
      throw std::runtime_error("causality probe failed for h1 (violation " + Num(r1.max_violation) +
                               " at T = " + Num(r1.worst_horizon) + ")");
    }
    const Signal y = Apply(h1, u);
    const auto r2 = CausalityCheck(h2, y, horizons);
    if (!r2.causal) {
      throw std::runtime_error("causality probe failed for h2 (violation " + Num(r2.max_violation) +
                               " at T = " + Num(r2.worst_horizon) + ")");
    }
    worst = std::max({worst, r1.max_violation, r2.max_violation});
  }

  Verdict v = CertifySrg(h1, h2, options);
  const std::vector<std::string> extra = {
      "finite gain with zero offset declared: h1 gain " + Num(h1.declared_inc_gain().value_or(0)) +
          ", h2 gain " + Num(h2.declared_inc_gain().value_or(0)) + ", offsets 0",
      "well-posedness and causality of [H1, tau H2] on the extended space for all tau in (0, 1] "
      "assumed externally, not verified",
      "causality probes passed (max violation " + Num(worst) + ")",
  };
  std::visit(
      [&](auto& result) {
        result.mode = Mode::kRelaxed;
        result.premises.insert(result.premises.end(), extra.begin(), extra.end());
      },
      v);
  return v;
}

IdentityCheck VerifyFeedbackIdentity(const OperatorSpec& h1, const OperatorSpec& h2, Scalar tau,
                                     Scalar nu, const std::vector<Signal>& inputs,
                                     const SolveOptions& options) {
  if (!(tau >= 0) || !(nu >= 0) || !(tau + nu <= 1)) {
    throw std::invalid_argument("feedback identity needs tau, nu >= 0 and tau + nu <= 1");
  }
  const OperatorSpec inner = MakeFeedback(h1, h2, tau);
  IdentityCheck check;
  for (const auto& u : inputs) {
    const auto direct = SolveFeedback(u, h1, h2, tau + nu, options);
    const auto nested = SolveFeedback(u, inner, h2, nu, options);
    check.max_discrepancy = std::max(check.max_discrepancy, Norm(direct.y - nested.y));
    check.tolerance = std::max(check.tolerance, direct.trace.absolute_tolerance);
  }
  return check;
}

}  // namespace incstab
