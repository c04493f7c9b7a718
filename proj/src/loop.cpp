#include "incstab/loop.hpp"

#include <cmath>
#include <sstream>

namespace incstab {

Scalar ContractionEstimate(const std::vector<Scalar>& residuals, int burn_in) {
  const auto n = static_cast<int>(residuals.size());
  if (n < 2) return 0;
  const int first = std::min(std::max(burn_in, 0), n - 2);
  const Scalar start = residuals[static_cast<std::size_t>(first)];
  const Scalar end = residuals.back();
  if (start == 0) return 0;
  return std::pow(end / start, 1.0 / static_cast<Scalar>(n - 1 - first));
}

FeedbackSolution SolveFeedback(const Signal& u, const OperatorSpec& h1, const OperatorSpec& h2,
                               Scalar tau, const SolveOptions& options) {
  if (!(tau >= 0 && tau <= 1)) throw std::invalid_argument("feedback tau must lie in [0, 1]");
  SolveTrace trace;
  trace.absolute_tolerance = options.tolerance * (1 + Norm(u));

  const auto loop_map = [&](const Signal& e) {
    if (tau == 0) return u;
    return u - tau * Apply(h2, Apply(h1, e));
  };

  Signal e = u;
  while (true) {
    const Signal next = loop_map(e);
    const Scalar residual = Norm(next - e);
    trace.residuals.push_back(residual);
    trace.iterates += 1;
    e = next;
    if (residual <= trace.absolute_tolerance) {
      trace.converged = true;
      break;
    }
    std::string reason;
    if (!std::isfinite(residual) || residual > 1e100) {
      reason = "residual blew up";
    } else if (trace.iterates >= options.max_iterations) {
      reason = "iteration budget exhausted";
    } else if (trace.iterates > options.divergence_window) {
      const auto& r = trace.residuals;
      bool non_decreasing = true;
      for (std::size_t k = r.size() - static_cast<std::size_t>(options.divergence_window);
           k < r.size(); ++k) {
        if (r[k] < r[k - 1]) {
          non_decreasing = false;
          break;
        }
      }
      if (non_decreasing) reason = "residuals non-decreasing over the divergence window";
    }
    if (!reason.empty()) {
      trace.contraction_estimate = ContractionEstimate(trace.residuals, options.burn_in);
      std::ostringstream msg;
      msg << "feedback solve diverged after " << trace.iterates << " iterations (" << reason
          << "), last residual " << residual;
      throw DivergenceError(msg.str(), std::move(trace));
    }
  }
  trace.contraction_estimate = ContractionEstimate(trace.residuals, options.burn_in);
  Signal y = Apply(h1, e);
  const Signal h2y = tau == 0 ? Signal::Zero(u.length(), u.dim(), u.dt()) : Apply(h2, y);
  trace.equation_residual = Norm(e + tau * h2y - u);
  return FeedbackSolution{std::move(e), std::move(y), std::move(trace)};
}

GainEstimate ClosedLoopGainEstimate(const OperatorSpec& h1, const OperatorSpec& h2, Scalar tau,
                                    const std::vector<SignalPair>& pairs,
                                    const SolveOptions& options) {
  if (pairs.empty()) throw std::invalid_argument("closed-loop gain estimate needs pairs");
  GainEstimate est;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Scalar du = Norm(pairs[i].first - pairs[i].second);
    if (!(du > kDistinctPairTolerance)) {
      throw std::invalid_argument("degenerate probe pair " + std::to_string(i));
    }
    const auto s1 = SolveFeedback(pairs[i].first, h1, h2, tau, options);
    const auto s2 = SolveFeedback(pairs[i].second, h1, h2, tau, options);
    const Scalar ratio = Norm(s1.y - s2.y) / du;
    if (i == 0 || ratio > est.gamma) {
      est.gamma = ratio;
      est.worst_pair = i;
    }
  }
  est.sample_count = static_cast<long>(pairs.size());
  return est;
}

Scalar Psi(Scalar x) {
  // x - tan(x) cancels to -x^3/3 near 0; the Taylor series keeps full
  // relative precision there (the first omitted term is below 1e-16 relative).
  if (std::abs(x) < 0.1) {
    const Scalar x2 = x * x;
    const Scalar series =
        1.0 / 3 +
        x2 * (2.0 / 15 +
              x2 * (17.0 / 315 +
                    x2 * (62.0 / 2835 + x2 * (1382.0 / 155925 + x2 * (21844.0 / 6081075)))));
    return -x * x2 * series;
  }
  return x - std::tan(x);
}

Scalar InversePsi(Scalar u) {
  constexpr Scalar kEdge = kPi / 2 - 1e-6;
  constexpr Scalar kResidual = 1e-12;
  // Bisect to the resolution of double: psi is flat at 0, so a residual
  // stopping rule alone would leave errors of order sqrt(kResidual) in y.
  const Scalar y = BisectMonotone(Psi, u, -kEdge, kEdge, 0, 2000);
  if (!(std::abs(Psi(y) - u) <= kResidual)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "psi inversion residual above 1e-12 at u = " << u;
    throw std::domain_error(msg.str());
  }
  return y;
}

std::vector<ArctanRow> ArctanExperiment(const std::vector<Scalar>& amplitudes,
                                        const ArctanOptions& options) {
  const auto n = static_cast<Index>(std::llround(options.horizon / options.dt));
  if (n < 2) throw std::invalid_argument("arctan experiment horizon too short");
  std::vector<ArctanRow> rows;
  rows.reserve(amplitudes.size());
  for (Scalar a : amplitudes) {
    if (!(a > 0 && a <= 0.1)) {
      throw std::invalid_argument("arctan experiment amplitudes must lie in (0, 0.1]");
    }
    const Signal u1 = Signal::FromFunction(n, options.dt, [&](Scalar t) { return t < 1 ? a : 0.0; });
    const Signal u2 = Signal::Zero(n, 1, options.dt);
    const Scalar level = InversePsi(a);
    const Signal y1(u1.samples().unaryExpr([&](Scalar v) { return v == a ? level : InversePsi(v); }),
                    options.dt);
    const Signal y2(u2.samples().unaryExpr([](Scalar v) { return InversePsi(v); }), options.dt);
    const Scalar du = Norm(u1 - u2);
    const OperatorSpec phi = NegArctan();
    ArctanRow row;
    row.amplitude = a;
    row.ratio = Norm(y1 - y2) / du;
    row.output_level = level;
    row.srg_radius = Norm(Apply(phi, u1) - Apply(phi, u2)) / du;
    rows.push_back(row);
  }
  return rows;
}

Scalar LogLogSlope(const std::vector<ArctanRow>& rows) {
  if (rows.size() < 2) throw std::invalid_argument("slope needs at least two rows");
  Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : rows) {
    const Scalar x = std::log(r.amplitude);
    const Scalar y = std::log(r.ratio);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const auto n = static_cast<Scalar>(rows.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace incstab
