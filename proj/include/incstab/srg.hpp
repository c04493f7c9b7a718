#pragma once

#include <vector>

#include "incstab/operator.hpp"
#include "incstab/region.hpp"

namespace incstab {

/// Sampled Scaled Relative Graph: for each input pair, the point
/// ||dy|| / ||du|| * exp(+-j angle(du, dy)) and its conjugate.
struct SrgCloud {
  std::vector<Complex> points;
  /// Index of the input pair each point came from (parallel to `points`).
  std::vector<std::size_t> source_pairs;
};

/// Throws std::invalid_argument on a pair with ||u1 - u2|| <= 1e-12.
SrgCloud SampleSrg(const OperatorSpec& op, const std::vector<SignalPair>& pairs);

Scalar MaxRadius(const SrgCloud& cloud);

/// Disc with the segment [lo, hi] of the real axis as diameter: the
/// incremental disc of a static map with difference quotients in [lo, hi].
Region SectorDisc(Scalar lo, Scalar hi);

/// Heuristic cover of a SISO Nyquist curve: discs at the sampled points (and
/// their mirror images) whose radius is the larger adjacent-sample gap plus
/// `padding`. Not a proven SRG bound.
Region NyquistCover(const StateSpace& sys, const std::vector<Scalar>& grid, Scalar padding = 1e-3);

/// Fills in missing gain/SRG declarations from the operator structure. Static
/// maps get their Lipschitz constant and sector disc; LTI blocks get a
/// gridded H-infinity norm and a Nyquist cover, both noted as heuristic.
OperatorSpec WithDefaultDeclarations(const OperatorSpec& op);

}  // namespace incstab
