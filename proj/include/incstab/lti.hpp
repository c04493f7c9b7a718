#pragma once

#include <vector>

#include "incstab/types.hpp"

namespace incstab {

/// Continuous-time state-space realization (A, B, C, D).
struct StateSpace {
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix D;

  Index states() const { return A.rows(); }
  Index inputs() const { return D.cols(); }
  Index outputs() const { return D.rows(); }
};

/// Throws std::invalid_argument naming the first inconsistent matrix.
void ValidateStateSpace(const StateSpace& sys);

/// Largest real part of the eigenvalues of A (-inf for a static gain).
Scalar SpectralAbscissa(const Matrix& A);
inline constexpr Scalar kHurwitzTolerance = 1e-9;
bool IsHurwitz(const Matrix& A);

/// Exact zero-order-hold discretization via the block matrix exponential.
struct DiscreteStateSpace {
  Matrix Ad;
  Matrix Bd;
  Matrix C;
  Matrix D;
};
DiscreteStateSpace DiscretizeZoh(const StateSpace& sys, Scalar dt);

/// Simulates x+ = Ad x + Bd u, y = C x + D u from x0 = 0. `input` rows are
/// time samples.
Matrix SimulateDiscrete(const DiscreteStateSpace& sys, const Matrix& input);
Matrix SimulateZoh(const StateSpace& sys, const Matrix& input, Scalar dt);

/// Exact inverse of a discrete realization with square, invertible D:
/// (Ad - Bd D^-1 C, Bd D^-1, -D^-1 C, D^-1).
DiscreteStateSpace InverseRealization(const DiscreteStateSpace& sys);

/// C (j w I - A)^-1 B + D.
ComplexMatrix FrequencyResponse(const StateSpace& sys, Scalar omega);

/// 0, then `points` log-spaced frequencies over [1e-3, 1e3] * scale where
/// scale is the spectral radius of A (1 for static gains).
std::vector<Scalar> DefaultFrequencyGrid(const StateSpace& sys, Index points = 512);

/// max over the grid (and the D limit) of the largest singular value.
Scalar HinfNormOnGrid(const StateSpace& sys, const std::vector<Scalar>& grid);

/// State-space realization of the relational inverse; needs square,
/// invertible D.
StateSpace InverseRealization(const StateSpace& sys);

/// Bounds used for frequency-gridding slack, from A = V diag(l) V^-1.
struct ResolventBound {
  Scalar condition = 1;          ///< cond(V)
  std::vector<Complex> poles;    ///< eigenvalues of A
  Scalar input_norm = 0;         ///< ||B||
  Scalar output_norm = 0;        ///< ||C||
  Scalar feedthrough_norm = 0;   ///< ||D||

  /// Upper bound on ||(j w I - A)^-1|| over w in [lo, hi].
  Scalar ResolventOnInterval(Scalar lo, Scalar hi) const;
};
ResolventBound ComputeResolventBound(const StateSpace& sys);

}  // namespace incstab
