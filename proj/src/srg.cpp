#include "incstab/srg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace incstab {

SrgCloud SampleSrg(const OperatorSpec& op, const std::vector<SignalPair>& pairs) {
  SrgCloud cloud;
  cloud.points.reserve(2 * pairs.size());
  cloud.source_pairs.reserve(2 * pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Signal du = pairs[i].first - pairs[i].second;
    const Scalar du_norm = Norm(du);
    if (!(du_norm > kDistinctPairTolerance)) {
      throw std::invalid_argument("degenerate SRG pair " + std::to_string(i));
    }
    const Signal dy = Apply(op, pairs[i].first) - Apply(op, pairs[i].second);
    const Scalar modulus = Norm(dy) / du_norm;
    const Scalar angle = modulus > 0 ? Angle(du, dy) : 0;
    const Complex z = std::polar(modulus, angle);
    cloud.points.push_back(z);
    cloud.points.push_back(std::conj(z));
    cloud.source_pairs.push_back(i);
    cloud.source_pairs.push_back(i);
  }
  return cloud;
}

Scalar MaxRadius(const SrgCloud& cloud) {
  Scalar best = 0;
  for (const auto& z : cloud.points) best = std::max(best, std::abs(z));
  return best;
}

Region SectorDisc(Scalar lo, Scalar hi) {
  if (!(lo <= hi)) throw std::invalid_argument("sector disc needs lo <= hi");
  return Region{Disc{{0.5 * (lo + hi), 0}, 0.5 * (hi - lo)}};
}

Region NyquistCover(const StateSpace& sys, const std::vector<Scalar>& grid, Scalar padding) {
  if (sys.inputs() != 1 || sys.outputs() != 1) {
    throw std::invalid_argument("Nyquist cover needs a SISO system");
  }
  std::vector<Complex> curve;
  curve.reserve(grid.size() + 1);
  for (Scalar w : grid) curve.push_back(FrequencyResponse(sys, w)(0, 0));
  curve.emplace_back(sys.D(0, 0), 0);
  std::vector<Primitive> discs;
  for (std::size_t k = 0; k < curve.size(); ++k) {
    Scalar gap = 0;
    if (k > 0) gap = std::max(gap, std::abs(curve[k] - curve[k - 1]));
    if (k + 1 < curve.size()) gap = std::max(gap, std::abs(curve[k + 1] - curve[k]));
    discs.emplace_back(Disc{curve[k], gap + padding});
  }
  return SymmetrizeRegion(Region(std::move(discs)));
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

OperatorSpec WithDefaultDeclarations(const OperatorSpec& op) {
  std::optional<Scalar> gain;
  std::optional<Region> region;
  std::vector<std::string> notes;
  std::visit(
      Overloaded{
          [&](const StaticNode& n) {
            gain = n.fn.Lipschitz();
            const auto [lo, hi] = n.fn.SlopeBounds();
            region = SectorDisc(lo, hi);
          },
          [&](const LtiNode& n) {
            const auto grid = DefaultFrequencyGrid(n.sys, 128);
            gain = HinfNormOnGrid(n.sys, grid);
            if (!op.declared_inc_gain()) {
              notes.push_back("heuristic: incremental gain of " + Describe(op) +
                              " is an H-infinity norm sampled on a frequency grid");
            }
            if (n.sys.inputs() == 1 && n.sys.outputs() == 1) {
              region = NyquistCover(n.sys, grid);
              if (!op.declared_srg()) {
                notes.push_back("heuristic: SRG of " + Describe(op) +
                                " covered by discs along the sampled Nyquist curve");
              }
            } else {
              region = Region{Disc{{0, 0}, *gain}};
            }
          },
          [&](const ScaleNode& n) {
            const OperatorSpec inner = WithDefaultDeclarations(n.inner);
            if (inner.declared_inc_gain()) gain = std::abs(n.c) * *inner.declared_inc_gain();
            if (inner.declared_srg()) region = ScaleRegion(*inner.declared_srg(), n.c);
            notes = inner.declaration_notes();
          },
          [&](const SumNode& n) {
            const OperatorSpec left = WithDefaultDeclarations(n.left);
            const OperatorSpec right = WithDefaultDeclarations(n.right);
            if (left.declared_inc_gain() && right.declared_inc_gain()) {
              gain = *left.declared_inc_gain() + *right.declared_inc_gain();
            }
            if (left.declared_srg() && right.declared_srg()) {
              try {
                region = MinkowskiSum(ChordClosure(*left.declared_srg()), *right.declared_srg());
              } catch (const RegionError&) {
                region.reset();
              }
            }
            notes = left.declaration_notes();
            notes.insert(notes.end(), right.declaration_notes().begin(),
                         right.declaration_notes().end());
          },
          [](const auto&) {},
      },
      op.node().value);

  OperatorSpec out = op;
  const bool uses_defaults = (!op.declared_inc_gain() && gain) || (!op.declared_srg() && region);
  if (!out.declared_inc_gain() && gain) out = out.WithDeclaredGain(*gain);
  if (!out.declared_srg() && region) out = out.WithDeclaredSrg(*region);
  if (!uses_defaults) return out;
  for (auto& note : notes) {
    const auto& existing = out.declaration_notes();
    if (std::find(existing.begin(), existing.end(), note) == existing.end()) {
      out = out.WithNote(std::move(note));
    }
  }
  return out;
}

}  // namespace incstab
