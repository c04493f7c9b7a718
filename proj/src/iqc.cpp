#include "incstab/iqc.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace incstab {

namespace {

constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

Scalar SpectralNorm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0;
  return Eigen::JacobiSVD<ComplexMatrix>(m).singularValues()(0);
}

Scalar MaxEigenvalue(const ComplexMatrix& m) {
  const ComplexMatrix h = (m + m.adjoint()) / 2;
  return Eigen::SelfAdjointEigenSolver<ComplexMatrix>(h, Eigen::EigenvaluesOnly)
      .eigenvalues()
      .maxCoeff();
}

void RequireHermitian(const ComplexMatrix& pi, Index size, const std::string& what) {
  if (pi.rows() != size || pi.cols() != size) {
    throw std::invalid_argument(what + " must be " + std::to_string(size) + "x" +
                                std::to_string(size));
  }
  if (!pi.allFinite()) throw std::invalid_argument(what + " has non-finite entries");
  const Scalar scale = std::max<Scalar>(1, pi.cwiseAbs().maxCoeff());
  if ((pi - pi.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw std::invalid_argument(what + " is not Hermitian");
  }
}

std::string Num(Scalar v) {
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

bool MirrorsTable(const Multiplier& m) { return !m.table.empty() && m.table.front().first >= 0; }

ComplexMatrix Interpolate(const Multiplier& m, Scalar omega) {
  const auto& t = m.table;
  if (omega <= t.front().first) return t.front().second;
  if (omega >= t.back().first) return t.back().second;
  const auto hi = std::upper_bound(t.begin(), t.end(), omega,
                                   [](Scalar w, const auto& entry) { return w < entry.first; });
  const auto lo = hi - 1;
  const Scalar s = (omega - lo->first) / (hi->first - lo->first);
  return (1 - s) * lo->second + s * hi->second;
}

ComplexMatrix Symmetrize(const ComplexMatrix& pi) { return (pi + pi.adjoint()) / 2; }

ComplexMatrix EvalImpl(const Multiplier& m, Scalar omega, bool clamp,
                       std::vector<std::string>* warnings) {
  if (!std::isfinite(omega)) throw std::invalid_argument("multiplier frequency must be finite");
  const Index n = m.size();
  switch (m.kind) {
    case MultiplierKind::kSmallGain: {
      ComplexMatrix pi = ComplexMatrix::Zero(n, n);
      pi.topLeftCorner(m.ny, m.ny).diagonal().setConstant(m.gamma * m.gamma);
      pi.bottomRightCorner(m.nw, m.nw).diagonal().setConstant(-1);
      return pi;
    }
    case MultiplierKind::kPassivity: {
      ComplexMatrix pi = ComplexMatrix::Zero(n, n);
      pi.topRightCorner(m.ny, m.nw).setIdentity();
      pi.bottomLeftCorner(m.nw, m.ny).setIdentity();
      return pi;
    }
    case MultiplierKind::kConstant:
      return Symmetrize(m.constant);
    case MultiplierKind::kTable: {
      const bool mirror = MirrorsTable(m) && omega < 0;
      const Scalar w = mirror ? -omega : omega;
      const Scalar lo = m.table.front().first;
      const Scalar hi = m.table.back().first;
      if (w < lo || w > hi) {
        if (!clamp) {
          throw std::out_of_range("frequency " + Num(omega) + " outside multiplier table [" +
                                  Num(lo) + ", " + Num(hi) + "]");
        }
        if (warnings != nullptr) {
          warnings->push_back("multiplier table clamped at w = " + Num(omega));
        }
      }
      const ComplexMatrix pi = Symmetrize(Interpolate(m, w));
      return mirror ? ComplexMatrix(pi.conjugate()) : pi;
    }
  }
  throw std::logic_error("unknown multiplier kind");
}

/// Upper bound on ||Pi(w) - Pi(w')|| / |w - w'|.
Scalar MultiplierLipschitz(const Multiplier& m) {
  if (m.kind != MultiplierKind::kTable) return 0;
  Scalar l = 0;
  for (std::size_t i = 0; i + 1 < m.table.size(); ++i) {
    const Scalar h = m.table[i + 1].first - m.table[i].first;
    l = std::max(l, SpectralNorm(m.table[i + 1].second - m.table[i].second) / h);
  }
  return l;
}

ComplexMatrix StackWithIdentity(const ComplexMatrix& h) {
  ComplexMatrix g(h.rows() + h.cols(), h.cols());
  g.topRows(h.rows()) = h;
  g.bottomRows(h.cols()).setIdentity();
  return g;
}

Signal StackChannels(const Signal& a, const Signal& b) {
  Matrix x(a.length(), a.dim() + b.dim());
  x.leftCols(a.dim()) = a.samples();
  x.rightCols(b.dim()) = b.samples();
  return Signal(std::move(x), a.dt());
}

}  // namespace

Multiplier SmallGainMultiplier(Scalar gamma, Index ny, Index nw) {
  if (!(gamma > 0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("small-gain multiplier needs a positive finite gamma");
  }
  if (ny < 1 || nw < 1) throw std::invalid_argument("multiplier blocks must be nonempty");
  Multiplier m;
  m.kind = MultiplierKind::kSmallGain;
  m.gamma = gamma;
  m.ny = ny;
  m.nw = nw;
  return m;
}

Multiplier PassivityMultiplier(Index n) {
  if (n < 1) throw std::invalid_argument("multiplier blocks must be nonempty");
  Multiplier m;
  m.kind = MultiplierKind::kPassivity;
  m.ny = n;
  m.nw = n;
  return m;
}

Multiplier ConstantMultiplier(ComplexMatrix pi, Index ny, Index nw) {
  if (ny < 1 || nw < 1) throw std::invalid_argument("multiplier blocks must be nonempty");
  RequireHermitian(pi, ny + nw, "constant multiplier");
  Multiplier m;
  m.kind = MultiplierKind::kConstant;
  m.ny = ny;
  m.nw = nw;
  m.constant = std::move(pi);
  return m;
}

Multiplier TableMultiplier(std::vector<std::pair<Scalar, ComplexMatrix>> table, Index ny, Index nw) {
  if (ny < 1 || nw < 1) throw std::invalid_argument("multiplier blocks must be nonempty");
  if (table.empty()) throw std::invalid_argument("multiplier table is empty");
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!std::isfinite(table[i].first)) {
      throw std::invalid_argument("multiplier table frequency must be finite");
    }
    if (i > 0 && !(table[i].first > table[i - 1].first)) {
      throw std::invalid_argument("multiplier table frequencies must increase strictly");
    }
    RequireHermitian(table[i].second, ny + nw, "multiplier table entry " + std::to_string(i));
  }
  Multiplier m;
  m.kind = MultiplierKind::kTable;
  m.ny = ny;
  m.nw = nw;
  m.table = std::move(table);
  return m;
}

std::string Describe(const Multiplier& m) {
  switch (m.kind) {
    case MultiplierKind::kSmallGain:
      return "SmallGain(" + Num(m.gamma) + ")";
    case MultiplierKind::kPassivity:
      return "Passivity";
    case MultiplierKind::kConstant:
      return "Constant(" + std::to_string(m.size()) + "x" + std::to_string(m.size()) + ")";
    case MultiplierKind::kTable:
      return "Table(" + std::to_string(m.table.size()) + " entries on [" +
             Num(m.table.front().first) + ", " + Num(m.table.back().first) + "])";
  }
  return "unknown";
}

ComplexMatrix EvalMultiplier(const Multiplier& m, Scalar omega) {
  return EvalImpl(m, omega, false, nullptr);
}

ComplexMatrix EvalMultiplierClamped(const Multiplier& m, Scalar omega,
                                    std::vector<std::string>* warnings) {
  return EvalImpl(m, omega, true, warnings);
}

Scalar FormBound(const Multiplier& m) {
  switch (m.kind) {
    case MultiplierKind::kSmallGain:
      return std::max<Scalar>(m.gamma * m.gamma, 1);
    case MultiplierKind::kPassivity:
      return 1;
    case MultiplierKind::kConstant:
      return SpectralNorm(Symmetrize(m.constant));
    case MultiplierKind::kTable: {
      // The norm is convex, so linear interpolation peaks at a table entry.
      Scalar bound = 0;
      for (const auto& [w, pi] : m.table) bound = std::max(bound, SpectralNorm(Symmetrize(pi)));
      return bound;
    }
  }
  return 0;
}

Scalar SigmaForm(const Multiplier& m, const Signal& x, std::vector<std::string>* warnings) {
  if (x.dim() != m.size()) {
    throw std::invalid_argument("stacked signal has " + std::to_string(x.dim()) +
                                " channels, multiplier expects " + std::to_string(m.size()));
  }
  const Spectrum spec = Dft(x);
  const bool constant = m.kind != MultiplierKind::kTable;
  const ComplexMatrix fixed = constant ? EvalMultiplier(m, 0) : ComplexMatrix();
  std::vector<std::string> local;
  Scalar total = 0;
  for (Index k = 0; k < spec.bins.rows(); ++k) {
    const ComplexVector v = spec.bins.row(k).transpose();
    const ComplexMatrix pi =
        constant ? fixed : EvalMultiplierClamped(m, spec.frequencies(k), &local);
    total += (v.adjoint() * pi * v)(0, 0).real();
  }
  if (warnings != nullptr && !local.empty()) {
    warnings->push_back(std::to_string(local.size()) +
                        " spectral bins outside the multiplier table were clamped");
  }
  return total * spec.d_omega / (2 * kPi);
}

Scalar QuadraticContinuityConstant(Scalar form_bound, Scalar eps) {
  if (!(eps > 0)) throw std::invalid_argument("quadratic-continuity epsilon must be > 0");
  return form_bound + form_bound * form_bound / eps;
}

LtiConditionResult CheckLtiCondition(const OperatorSpec& h1, const Multiplier& m,
                                     const std::vector<Scalar>& grid) {
  const auto* lti = std::get_if<LtiNode>(&h1.node().value);
  if (lti == nullptr) throw std::invalid_argument("LTI condition needs an LTI h1");
  const StateSpace& sys = lti->sys;
  if (sys.outputs() != m.ny || sys.inputs() != m.nw) {
    throw std::invalid_argument("multiplier blocks (" + std::to_string(m.ny) + ", " +
                                std::to_string(m.nw) + ") do not match h1 (" +
                                std::to_string(sys.outputs()) + " outputs, " +
                                std::to_string(sys.inputs()) + " inputs)");
  }
  if (grid.size() < 2 || grid.front() != 0) {
    throw std::invalid_argument("frequency grid needs >= 2 points starting at 0");
  }
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1]) || !std::isfinite(grid[k])) {
      throw std::invalid_argument("frequency grid must be finite and strictly increasing");
    }
  }

  LtiConditionResult out;
  const ResolventBound rb = ComputeResolventBound(sys);
  const Scalar cb = rb.output_norm * rb.input_norm;
  const Scalar pi_norm = FormBound(m);
  const Scalar pi_lip = MultiplierLipschitz(m);

  auto form_at = [&](Scalar w) {
    const ComplexMatrix g = StackWithIdentity(FrequencyResponse(sys, w));
    return MaxEigenvalue(g.adjoint() * EvalMultiplierClamped(m, w, &out.warnings) * g);
  };

  Scalar sampled = -kInf;
  Scalar certified = -kInf;
  for (const Scalar sign : {1.0, -1.0}) {
    std::vector<Scalar> values(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      values[k] = form_at(sign * grid[k]);
      if (values[k] > sampled) {
        sampled = values[k];
        out.worst_omega = sign * grid[k];
      }
    }
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      const Scalar a = std::min(sign * grid[k], sign * grid[k + 1]);
      const Scalar b = std::max(sign * grid[k], sign * grid[k + 1]);
      const Scalar r = rb.ResolventOnInterval(a, b);
      const Scalar g = std::sqrt(1 + std::pow(rb.feedthrough_norm + cb * r, 2));
      const Scalar lip = 2 * pi_norm * g * cb * r * r + g * g * pi_lip;
      const Scalar upper = (values[k] + values[k + 1] + lip * (b - a)) / 2;
      certified = std::max({certified, upper, values[k], values[k + 1]});
    }
  }

  // Beyond the grid, H1(jw) is within delta of D.
  const ComplexMatrix gd = StackWithIdentity(sys.D.cast<Complex>());
  const Scalar w_max = grid.back();
  Scalar pole_modulus = 0;
  for (const Complex& p : rb.poles) pole_modulus = std::max(pole_modulus, std::abs(p));
  const Scalar delta =
      rb.poles.empty() ? 0 : (w_max > pole_modulus ? rb.condition * cb / (w_max - pole_modulus) : kInf);
  std::vector<Scalar> tail_points = {w_max, -w_max};
  for (const auto& [w, pi] : m.table) {
    if (std::abs(w) > w_max) tail_points.push_back(w);
    if (MirrorsTable(m) && w > w_max) tail_points.push_back(-w);
  }
  Scalar tail_form = -kInf;
  for (Scalar w : tail_points) {
    tail_form =
        std::max(tail_form, MaxEigenvalue(gd.adjoint() * EvalMultiplierClamped(m, w, &out.warnings) * gd));
  }
  const Scalar far = m.kind == MultiplierKind::kTable ? m.table.back().first + 1 : 0;
  out.limit_value = std::max(
      MaxEigenvalue(gd.adjoint() * EvalMultiplierClamped(m, std::max(far, w_max), nullptr) * gd),
      MaxEigenvalue(gd.adjoint() * EvalMultiplierClamped(m, -std::max(far, w_max), nullptr) * gd));
  out.tail_bound = tail_form + pi_norm * (2 * SpectralNorm(gd) * delta + delta * delta);

  const Scalar worst_sampled = std::max(sampled, out.limit_value);
  if (out.limit_value >= sampled) out.worst_omega = std::numeric_limits<Scalar>::infinity();
  certified = std::max(certified, out.tail_bound);
  out.eps = -worst_sampled;
  out.slack = std::isfinite(certified) ? certified - worst_sampled : kInf;
  out.passed = out.eps > 0 && out.eps > out.slack;
  std::sort(out.warnings.begin(), out.warnings.end());
  out.warnings.erase(std::unique(out.warnings.begin(), out.warnings.end()), out.warnings.end());
  return out;
}

EmpiricalIqcResult CheckIncIqcEmpirical(const OperatorSpec& h2, const Multiplier& m,
                                        const std::vector<SignalPair>& y_pairs,
                                        const std::vector<Scalar>& tau_grid) {
  if (y_pairs.empty()) throw std::invalid_argument("empirical IQC check needs at least one pair");
  if (tau_grid.empty()) throw std::invalid_argument("empirical IQC check needs a tau grid");
  for (Scalar tau : tau_grid) {
    if (!(tau >= 0 && tau <= 1)) throw std::invalid_argument("tau must lie in [0, 1]");
  }
  EmpiricalIqcResult out;
  out.minimum = kInf;
  for (std::size_t i = 0; i < y_pairs.size(); ++i) {
    const auto& [y1, y2] = y_pairs[i];
    RequireSameShape(y1, y2);
    const Signal dy = y1 - y2;
    if (Norm(dy) <= kDistinctPairTolerance) {
      throw std::invalid_argument("pair " + std::to_string(i) + " is not distinct");
    }
    const Signal dw = Apply(h2, y1) - Apply(h2, y2);
    if (dy.dim() != m.ny || dw.dim() != m.nw) {
      throw std::invalid_argument("pair " + std::to_string(i) + " stacks (" +
                                  std::to_string(dy.dim()) + ", " + std::to_string(dw.dim()) +
                                  ") channels, multiplier expects (" + std::to_string(m.ny) +
                                  ", " + std::to_string(m.nw) + ")");
    }
    for (Scalar tau : tau_grid) {
      const Signal x = StackChannels(dy, tau * dw);
      const Scalar value = SigmaForm(m, x, &out.warnings);
      const Scalar scale = Norm(x) * Norm(x);
      ++out.samples;
      if (value < out.minimum) {
        out.minimum = value;
        out.worst_tau = tau;
        out.worst_pair = i;
        out.worst_scale = scale;
      }
      if (value < -1e-9 * scale) out.passed = false;
    }
  }
  std::sort(out.warnings.begin(), out.warnings.end());
  out.warnings.erase(std::unique(out.warnings.begin(), out.warnings.end()), out.warnings.end());
  return out;
}

IqcReport IqcGainBound(Scalar eps, const Multiplier& m, Scalar lambda, Scalar alpha) {
  if (!(eps > 0) || !std::isfinite(eps)) throw std::invalid_argument("IQC margin eps must be > 0");
  if (!(lambda >= 0) || !(alpha >= 0) || !std::isfinite(lambda) || !std::isfinite(alpha)) {
    throw std::invalid_argument("gains must be finite and >= 0");
  }
  IqcReport r;
  r.eps = eps;
  r.lambda = lambda;
  r.alpha = alpha;
  // ||u||^2 + ||H1 u||^2 <= (1 + alpha^2) ||u||^2; the max keeps the stated
  // 1 + alpha factor whenever it is the larger one.
  r.eps_bar = eps / (2 * std::max(1 + alpha, 1 + alpha * alpha));
  r.M = FormBound(m);
  r.C = QuadraticContinuityConstant(r.M, r.eps_bar);
  r.bound = std::sqrt(r.C / r.eps_bar * lambda * lambda / (1 + lambda * lambda));
  return r;
}

Verdict CertifyIqc(const OperatorSpec& h1, const OperatorSpec& h2, const Multiplier& m,
                   const std::vector<Scalar>& grid, const std::vector<SignalPair>& y_pairs,
                   const IqcOptions& options) {
  const auto* lti = std::get_if<LtiNode>(&h1.node().value);
  if (lti == nullptr) throw std::invalid_argument("IQC route needs an LTI h1");
  if (!h2.declared_inc_gain()) {
    throw std::invalid_argument("h2 has no declared incremental gain");
  }
  const Scalar gamma2 = *h2.declared_inc_gain();

  std::vector<std::string> premises = {
      "h1 = " + Describe(h1) + " (LTI)",
      "h2 = " + Describe(h2) + ": declared incremental gain " + Num(gamma2),
      "multiplier " + Describe(m) + "; frequency-domain inner product normalized by 1/(2 pi)",
  };

  const LtiConditionResult lti_check = CheckLtiCondition(h1, m, grid);
  Details details{{"eps", lti_check.eps},
                  {"lti_grid_slack", lti_check.slack},
                  {"lti_worst_omega", lti_check.worst_omega},
                  {"lti_limit_value", lti_check.limit_value},
                  {"lti_tail_bound", lti_check.tail_bound}};
  for (const auto& w : lti_check.warnings) premises.push_back("warning: " + w);
  if (!lti_check.passed) {
    Refusal r;
    r.route = Route::kIqc;
    r.reason = lti_check.eps <= 0
                   ? "LTI frequency-domain condition fails: eps = " + Num(lti_check.eps) + " <= 0"
                   : "LTI frequency-domain condition not certified: eps = " + Num(lti_check.eps) +
                         " does not exceed the grid slack " + Num(lti_check.slack);
    r.premises = std::move(premises);
    r.details = std::move(details);
    return r;
  }
  premises.push_back("LTI condition proven on the frequency grid with Lipschitz slack " +
                     Num(lti_check.slack) + " and a tail bound beyond w = " + Num(grid.back()));

  const EmpiricalIqcResult emp = CheckIncIqcEmpirical(h2, m, y_pairs, options.tau_grid);
  details.emplace_back("iqc_empirical_minimum", emp.minimum);
  details.emplace_back("iqc_empirical_samples", static_cast<Scalar>(emp.samples));
  for (const auto& w : emp.warnings) premises.push_back("warning: " + w);
  if (!emp.passed) {
    Refusal r;
    r.route = Route::kIqc;
    r.reason = "trajectory IQC falsified: form value " + Num(emp.minimum) + " < 0 on pair " +
               std::to_string(emp.worst_pair) + " at tau = " + Num(emp.worst_tau);
    r.tau_star = emp.worst_tau;
    r.premises = std::move(premises);
    r.details = std::move(details);
    return r;
  }
  premises.push_back("trajectory IQC for h2 only sampled (" + std::to_string(emp.samples) +
                     " pair/tau samples, minimum " + Num(emp.minimum) + "), not proven");
  if (m.kind == MultiplierKind::kPassivity || m.kind == MultiplierKind::kConstant ||
      m.kind == MultiplierKind::kTable) {
    premises.push_back(
        "multiplier is not block diagonal; the sign convention of the trajectory condition under "
        "negative feedback is taken as stated");
  }

  Scalar lambda = 0;
  if (h1.declared_inc_gain()) {
    lambda = *h1.declared_inc_gain();
    premises.push_back("lambda = alpha = " + Num(lambda) + " (declared gain of h1)");
  } else {
    lambda = HinfNormOnGrid(lti->sys, grid);
    premises.push_back("lambda = alpha = " + Num(lambda) +
                       " (H-infinity norm of h1 on the frequency grid)");
  }
  const IqcReport rep = IqcGainBound(lti_check.eps, m, lambda, lambda);
  details.emplace_back("eps_bar", rep.eps_bar);
  details.emplace_back("form_bound_M", rep.M);
  details.emplace_back("continuity_constant_C", rep.C);
  details.emplace_back("lambda", rep.lambda);
  details.emplace_back("alpha", rep.alpha);

  Certificate c;
  c.route = Route::kIqc;
  c.gamma = rep.bound;
  c.r_min = rep.bound > 0 ? 1 / rep.bound : kInf;
  if (lambda > 0 && gamma2 > 0 && rep.bound > 0) {
    c.schedule = BuildSchedule(lambda, gamma2, rep.bound);
  } else {
    c.schedule = HomotopySchedule{1, 1, 0, lambda, gamma2, rep.bound};
  }
  c.premises = std::move(premises);
  c.details = std::move(details);
  return CrossCheck(std::move(c), h1, h2, options.closed_loop_probes, options.solve);
}

}  // namespace incstab
