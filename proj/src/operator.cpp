#include "incstab/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "incstab/loop.hpp"

namespace incstab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Merges two "0 = any" channel counts; throws when both are fixed and differ.
Index MergeDim(Index a, Index b, const char* what) {
  if (a == 0) return b;
  if (b == 0 || a == b) return a;
  throw std::invalid_argument(std::string("dimension mismatch in ") + what + ": " +
                              std::to_string(a) + " vs " + std::to_string(b));
}

std::pair<Index, Index> NodeDims(const OperatorNode& node) {
  return std::visit(
      Overloaded{
          [](const LtiNode& n) { return std::pair{n.sys.inputs(), n.sys.outputs()}; },
          [](const StaticNode&) { return std::pair<Index, Index>{0, 0}; },
          [](const ScaleNode& n) { return std::pair{n.inner.input_dim(), n.inner.output_dim()}; },
          [](const SumNode& n) {
            return std::pair{MergeDim(n.left.input_dim(), n.right.input_dim(), "sum input"),
                             MergeDim(n.left.output_dim(), n.right.output_dim(), "sum output")};
          },
          [](const FeedbackNode& n) {
            const Index e = MergeDim(n.forward.input_dim(), n.backward.output_dim(), "feedback error");
            const Index y = MergeDim(n.forward.output_dim(), n.backward.input_dim(), "feedback output");
            return std::pair{e, y};
          },
          [](const MappedNode& n) { return std::pair{n.input_dim, n.output_dim}; },
      },
      node.value);
}

void CheckInput(const OperatorSpec& op, const Signal& u) {
  if (op.input_dim() != 0 && op.input_dim() != u.dim()) {
    throw std::invalid_argument("operator expects " + std::to_string(op.input_dim()) +
                                " input channels, got " + std::to_string(u.dim()));
  }
}

}  // namespace

Scalar StaticNonlinearity::operator()(Scalar x) const {
  switch (kind) {
    case NonlinearityKind::kIdentity:
      return x;
    case NonlinearityKind::kGain:
      return param * x;
    case NonlinearityKind::kSaturation:
      return std::clamp(x, -param, param);
    case NonlinearityKind::kDeadzone:
      if (std::abs(x) <= param) return 0;
      return x > 0 ? x - param : x + param;
    case NonlinearityKind::kNegArctan:
      return -std::atan(x);
    case NonlinearityKind::kTanh:
      return std::tanh(x);
  }
  return x;
}

std::pair<Scalar, Scalar> StaticNonlinearity::SlopeBounds() const {
  switch (kind) {
    case NonlinearityKind::kIdentity:
      return {1, 1};
    case NonlinearityKind::kGain:
      return {param, param};
    case NonlinearityKind::kSaturation:
    case NonlinearityKind::kDeadzone:
    case NonlinearityKind::kTanh:
      return {0, 1};
    case NonlinearityKind::kNegArctan:
      return {-1, 0};
  }
  return {1, 1};
}

Scalar StaticNonlinearity::Lipschitz() const {
  const auto [lo, hi] = SlopeBounds();
  return std::max(std::abs(lo), std::abs(hi));
}

bool StaticNonlinearity::StrictlyMonotone() const {
  switch (kind) {
    case NonlinearityKind::kIdentity:
    case NonlinearityKind::kNegArctan:
    case NonlinearityKind::kTanh:
      return true;
    case NonlinearityKind::kGain:
      return param != 0;
    case NonlinearityKind::kSaturation:
    case NonlinearityKind::kDeadzone:
      return false;
  }
  return false;
}

std::pair<Scalar, Scalar> StaticNonlinearity::InvertibilityInterval() const {
  switch (kind) {
    case NonlinearityKind::kTanh:
      return {-20, 20};
    default:
      return {-1e12, 1e12};
  }
}

std::string StaticNonlinearity::Name() const {
  switch (kind) {
    case NonlinearityKind::kIdentity:
      return "identity";
    case NonlinearityKind::kGain:
      return "gain";
    case NonlinearityKind::kSaturation:
      return "saturation";
    case NonlinearityKind::kDeadzone:
      return "deadzone";
    case NonlinearityKind::kNegArctan:
      return "neg_arctan";
    case NonlinearityKind::kTanh:
      return "tanh";
  }
  return "unknown";
}

NonlinearityKind ParseNonlinearityKind(const std::string& name) {
  if (name == "identity") return NonlinearityKind::kIdentity;
  if (name == "gain") return NonlinearityKind::kGain;
  if (name == "saturation") return NonlinearityKind::kSaturation;
  if (name == "deadzone") return NonlinearityKind::kDeadzone;
  if (name == "neg_arctan") return NonlinearityKind::kNegArctan;
  if (name == "tanh") return NonlinearityKind::kTanh;
  throw std::invalid_argument("unknown nonlinearity '" + name + "'");
}

OperatorSpec::OperatorSpec(std::shared_ptr<const OperatorNode> node) : node_(std::move(node)) {
  if (!node_) throw std::invalid_argument("null operator node");
  std::tie(input_dim_, output_dim_) = NodeDims(*node_);
}

OperatorSpec OperatorSpec::WithDeclaredGain(Scalar gain) const {
  if (!(gain >= 0) || !std::isfinite(gain)) {
    throw std::invalid_argument("declared incremental gain must be finite and >= 0");
  }
  OperatorSpec copy = *this;
  copy.declared_inc_gain_ = gain;
  return copy;
}

OperatorSpec OperatorSpec::WithDeclaredSrg(Region region) const {
  OperatorSpec copy = *this;
  copy.declared_srg_ = std::move(region);
  return copy;
}

OperatorSpec OperatorSpec::WithNote(std::string note) const {
  OperatorSpec copy = *this;
  copy.notes_.push_back(std::move(note));
  return copy;
}

OperatorSpec MakeLti(StateSpace sys) {
  ValidateStateSpace(sys);
  if (!IsHurwitz(sys.A)) {
    throw std::invalid_argument("LTI operator needs Hurwitz A (max real part < -1e-9)");
  }
  return OperatorSpec(std::make_shared<OperatorNode>(OperatorNode{LtiNode{std::move(sys)}}));
}

OperatorSpec MakeStatic(StaticNonlinearity fn) {
  if (!std::isfinite(fn.param)) throw std::invalid_argument("nonlinearity parameter must be finite");
  if ((fn.kind == NonlinearityKind::kSaturation || fn.kind == NonlinearityKind::kDeadzone) &&
      !(fn.param >= 0)) {
    throw std::invalid_argument(fn.Name() + " parameter must be >= 0");
  }
  return OperatorSpec(std::make_shared<OperatorNode>(OperatorNode{StaticNode{fn}}));
}

OperatorSpec MakeStatic(NonlinearityKind kind, Scalar param) {
  return MakeStatic(StaticNonlinearity{kind, param});
}

OperatorSpec Identity() { return MakeStatic(NonlinearityKind::kIdentity); }
OperatorSpec NegArctan() { return MakeStatic(NonlinearityKind::kNegArctan); }

OperatorSpec MakeScale(Scalar c, OperatorSpec inner) {
  if (!std::isfinite(c)) throw std::invalid_argument("scale factor must be finite");
  return OperatorSpec(
      std::make_shared<OperatorNode>(OperatorNode{ScaleNode{c, std::move(inner)}}));
}

OperatorSpec MakeSum(OperatorSpec left, OperatorSpec right) {
  return OperatorSpec(
      std::make_shared<OperatorNode>(OperatorNode{SumNode{std::move(left), std::move(right)}}));
}

OperatorSpec MakeFeedback(OperatorSpec forward, OperatorSpec backward, Scalar tau) {
  if (!(tau >= 0 && tau <= 1)) throw std::invalid_argument("feedback tau must lie in [0, 1]");
  return OperatorSpec(std::make_shared<OperatorNode>(
      OperatorNode{FeedbackNode{std::move(forward), std::move(backward), tau}}));
}

OperatorSpec MakeMapped(std::string name, std::function<Signal(const Signal&)> fn,
                        Index input_dim, Index output_dim) {
  return OperatorSpec(std::make_shared<OperatorNode>(
      OperatorNode{MappedNode{std::move(name), std::move(fn), input_dim, output_dim}}));
}

OperatorSpec FirstOrderLag(Scalar k, Scalar a) {
  StateSpace sys{Matrix::Constant(1, 1, -a), Matrix::Constant(1, 1, 1),
                 Matrix::Constant(1, 1, k), Matrix::Zero(1, 1)};
  return MakeLti(std::move(sys));
}

std::string Describe(const OperatorSpec& op) {
  std::ostringstream s;
  s.precision(12);
  std::visit(Overloaded{
                 [&](const LtiNode& n) {
                   s << "lti(states=" << n.sys.states() << ", inputs=" << n.sys.inputs()
                     << ", outputs=" << n.sys.outputs() << ")";
                 },
                 [&](const StaticNode& n) {
                   s << n.fn.Name();
                   if (n.fn.kind == NonlinearityKind::kGain ||
                       n.fn.kind == NonlinearityKind::kSaturation ||
                       n.fn.kind == NonlinearityKind::kDeadzone) {
                     s << "(" << n.fn.param << ")";
                   }
                 },
                 [&](const ScaleNode& n) { s << n.c << "*" << Describe(n.inner); },
                 [&](const SumNode& n) {
                   s << "(" << Describe(n.left) << " + " << Describe(n.right) << ")";
                 },
                 [&](const FeedbackNode& n) {
                   s << "[" << Describe(n.forward) << ", " << n.tau << "*" << Describe(n.backward)
                     << "]";
                 },
                 [&](const MappedNode& n) { s << n.name; },
             },
             op.node().value);
  return s.str();
}

Signal Apply(const OperatorSpec& op, const Signal& u) {
  CheckInput(op, u);
  return std::visit(
      Overloaded{
          [&](const LtiNode& n) { return Signal(SimulateZoh(n.sys, u.samples(), u.dt()), u.dt()); },
          [&](const StaticNode& n) {
            return Signal(u.samples().unaryExpr([&](Scalar x) { return n.fn(x); }), u.dt());
          },
          [&](const ScaleNode& n) { return n.c * Apply(n.inner, u); },
          [&](const SumNode& n) { return Apply(n.left, u) + Apply(n.right, u); },
          [&](const FeedbackNode& n) { return SolveFeedback(u, n.forward, n.backward, n.tau).y; },
          [&](const MappedNode& n) { return n.fn(u); },
      },
      op.node().value);
}

GainEstimate EstimateIncrementalGain(const OperatorSpec& op, const std::vector<SignalPair>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("incremental gain estimate needs at least one pair");
  GainEstimate est;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [u1, u2] = pairs[i];
    const Scalar du = Norm(u1 - u2);
    if (!(du > kDistinctPairTolerance)) {
      throw std::invalid_argument("degenerate probe pair " + std::to_string(i));
    }
    const Scalar ratio = Norm(Apply(op, u1) - Apply(op, u2)) / du;
    if (ratio > est.gamma || i == 0) {
      est.gamma = ratio;
      est.worst_pair = i;
    }
  }
  est.sample_count = static_cast<long>(pairs.size());
  if (const auto& declared = op.declared_inc_gain()) {
    est.declaration_violated = est.gamma > *declared * (1 + 1e-6) + 1e-12;
  }
  return est;
}

CausalityReport CausalityCheck(const OperatorSpec& op, const Signal& u,
                               const std::vector<Scalar>& horizons) {
  CausalityReport report;
  const Signal full = Apply(op, u);
  const Scalar tol = 1e-6 * (1 + Norm(u));
  for (Scalar horizon : horizons) {
    const Signal lhs = Truncate(Apply(op, Truncate(u, horizon)), horizon);
    const Scalar violation = Norm(lhs - Truncate(full, horizon));
    if (violation > report.max_violation) {
      report.max_violation = violation;
      report.worst_horizon = horizon;
    }
  }
  report.causal = report.max_violation <= tol;
  return report;
}

Scalar BisectMonotone(const std::function<Scalar(Scalar)>& f, Scalar target, Scalar lo, Scalar hi,
                      Scalar residual_tol, int max_iterations) {
  Scalar f_lo = f(lo);
  Scalar f_hi = f(hi);
  const bool increasing = f_hi >= f_lo;
  if (!increasing) std::swap(f_lo, f_hi);
  if (!(target >= f_lo && target <= f_hi)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "bisection: target " << target << " outside [" << f_lo << ", " << f_hi << "]";
    throw std::domain_error(msg.str());
  }
  Scalar best = lo;
  Scalar best_residual = std::numeric_limits<Scalar>::infinity();
  for (int it = 0; it < max_iterations; ++it) {
    const Scalar mid = lo + 0.5 * (hi - lo);
    const Scalar value = f(mid);
    const Scalar residual = std::abs(value - target);
    if (residual < best_residual) {
      best_residual = residual;
      best = mid;
    }
    if (residual <= residual_tol || mid <= lo || mid >= hi) break;
    if ((value < target) == increasing) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return best;
}

Signal RelationalInverseApply(const OperatorSpec& op, const Signal& y) {
  return std::visit(
      Overloaded{
          [&](const StaticNode& n) {
            if (!n.fn.StrictlyMonotone()) {
              throw std::invalid_argument(n.fn.Name() + " is not strictly monotone");
            }
            const auto [lo, hi] = n.fn.InvertibilityInterval();
            const auto f = [&](Scalar x) { return n.fn(x); };
            Matrix e = y.samples().unaryExpr(
                [&](Scalar target) { return BisectMonotone(f, target, lo, hi, 0.0); });
            return Signal(std::move(e), y.dt());
          },
          [&](const ScaleNode& n) {
            if (n.c == 0) throw std::invalid_argument("zero scaling is not invertible");
            return RelationalInverseApply(n.inner, (1 / n.c) * y);
          },
          [&](const LtiNode& n) {
            if (n.sys.outputs() != y.dim()) {
              throw std::invalid_argument("inverse: output dimension mismatch");
            }
            // Invert the sampled system so that Apply(op, e) reproduces y exactly.
            const DiscreteStateSpace inv = InverseRealization(DiscretizeZoh(n.sys, y.dt()));
            return Signal(SimulateDiscrete(inv, y.samples()), y.dt());
          },
          [&](const auto&) -> Signal {
            throw std::invalid_argument("relational inverse not available for " + Describe(op));
          },
      },
      op.node().value);
}

}  // namespace incstab
