#include "incstab/lti.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

namespace incstab {

namespace {

constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

std::string Dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Scalar SpectralNorm(const Matrix& m) {
  if (m.size() == 0) return 0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

}  // namespace

void ValidateStateSpace(const StateSpace& sys) {
  if (sys.A.rows() != sys.A.cols()) {
    throw std::invalid_argument("A must be square, got " + Dims(sys.A));
  }
  const Index n = sys.A.rows();
  if (sys.D.rows() < 1 || sys.D.cols() < 1) {
    throw std::invalid_argument("D must be non-empty, got " + Dims(sys.D));
  }
  if (sys.B.rows() != n || sys.B.cols() != sys.D.cols()) {
    throw std::invalid_argument("B must be " + std::to_string(n) + "x" +
                                std::to_string(sys.D.cols()) + ", got " + Dims(sys.B));
  }
  if (sys.C.rows() != sys.D.rows() || sys.C.cols() != n) {
    throw std::invalid_argument("C must be " + std::to_string(sys.D.rows()) + "x" +
                                std::to_string(n) + ", got " + Dims(sys.C));
  }
  if (!sys.A.allFinite() || !sys.B.allFinite() || !sys.C.allFinite() || !sys.D.allFinite()) {
    throw std::invalid_argument("state-space matrices must be finite");
  }
}

Scalar SpectralAbscissa(const Matrix& A) {
  if (A.rows() == 0) return -kInf;
  Eigen::EigenSolver<Matrix> solver(A, /*computeEigenvectors=*/false);
  return solver.eigenvalues().real().maxCoeff();
}

bool IsHurwitz(const Matrix& A) { return SpectralAbscissa(A) < -kHurwitzTolerance; }

DiscreteStateSpace DiscretizeZoh(const StateSpace& sys, Scalar dt) {
  const Index n = sys.states();
  const Index m = sys.inputs();
  DiscreteStateSpace out{Matrix(n, n), Matrix(n, m), sys.C, sys.D};
  if (n == 0) return out;
  // exp([[A, B], [0, 0]] dt) = [[Ad, Bd], [0, I]]
  Matrix block = Matrix::Zero(n + m, n + m);
  block.topLeftCorner(n, n) = sys.A * dt;
  block.topRightCorner(n, m) = sys.B * dt;
  const Matrix expm = block.exp();
  out.Ad = expm.topLeftCorner(n, n);
  out.Bd = expm.topRightCorner(n, m);
  return out;
}

Matrix SimulateDiscrete(const DiscreteStateSpace& sys, const Matrix& input) {
  if (input.cols() != sys.D.cols()) {
    throw std::invalid_argument("input has " + std::to_string(input.cols()) +
                                " channels, system expects " + std::to_string(sys.D.cols()));
  }
  Matrix out(input.rows(), sys.D.rows());
  const Index n = sys.Ad.rows();
  if (n == 0) {
    out.noalias() = input * sys.D.transpose();
    return out;
  }
  Vector x = Vector::Zero(n);
  Vector next(n);
  for (Index k = 0; k < input.rows(); ++k) {
    const auto u = input.row(k).transpose();
    out.row(k).noalias() = (sys.C * x + sys.D * u).transpose();
    next.noalias() = sys.Ad * x + sys.Bd * u;
    x.swap(next);
  }
  return out;
}

Matrix SimulateZoh(const StateSpace& sys, const Matrix& input, Scalar dt) {
  return SimulateDiscrete(DiscretizeZoh(sys, dt), input);
}

ComplexMatrix FrequencyResponse(const StateSpace& sys, Scalar omega) {
  ComplexMatrix h = sys.D.cast<Complex>();
  const Index n = sys.states();
  if (n == 0) return h;
  ComplexMatrix resolvent = Complex(0, omega) * ComplexMatrix::Identity(n, n) - sys.A.cast<Complex>();
  h += sys.C.cast<Complex>() * resolvent.partialPivLu().solve(sys.B.cast<Complex>());
  return h;
}

std::vector<Scalar> DefaultFrequencyGrid(const StateSpace& sys, Index points) {
  Scalar scale = 1;
  if (sys.states() > 0) {
    Eigen::EigenSolver<Matrix> solver(sys.A, false);
    scale = solver.eigenvalues().cwiseAbs().maxCoeff();
    if (!(scale > 0)) scale = 1;
  }
  std::vector<Scalar> grid;
  grid.reserve(static_cast<std::size_t>(points + 1));
  grid.push_back(0);
  const Scalar lo = std::log10(1e-3 * scale);
  const Scalar hi = std::log10(1e3 * scale);
  for (Index k = 0; k < points; ++k) {
    const Scalar frac = points == 1 ? 0 : static_cast<Scalar>(k) / static_cast<Scalar>(points - 1);
    grid.push_back(std::pow(10.0, lo + frac * (hi - lo)));
  }
  return grid;
}

Scalar HinfNormOnGrid(const StateSpace& sys, const std::vector<Scalar>& grid) {
  const auto sigma_max = [](const ComplexMatrix& h) {
    return Eigen::JacobiSVD<ComplexMatrix>(h).singularValues()(0);
  };
  Scalar best = SpectralNorm(sys.D);
  for (Scalar w : grid) best = std::max(best, sigma_max(FrequencyResponse(sys, w)));
  return best;
}

StateSpace InverseRealization(const StateSpace& sys) {
  if (sys.D.rows() != sys.D.cols()) {
    throw std::invalid_argument("inverse realization needs square D");
  }
  Eigen::FullPivLU<Matrix> lu(sys.D);
  if (!lu.isInvertible()) throw std::invalid_argument("inverse realization needs invertible D");
  const Matrix d_inv = lu.inverse();
  return StateSpace{sys.A - sys.B * d_inv * sys.C, sys.B * d_inv, -d_inv * sys.C, d_inv};
}

DiscreteStateSpace InverseRealization(const DiscreteStateSpace& sys) {
  if (sys.D.rows() != sys.D.cols()) {
    throw std::invalid_argument("inverse realization needs square D");
  }
  Eigen::FullPivLU<Matrix> lu(sys.D);
  if (!lu.isInvertible()) throw std::invalid_argument("inverse realization needs invertible D");
  const Matrix d_inv = lu.inverse();
  return DiscreteStateSpace{sys.Ad - sys.Bd * d_inv * sys.C, sys.Bd * d_inv, -d_inv * sys.C, d_inv};
}

Scalar ResolventBound::ResolventOnInterval(Scalar lo, Scalar hi) const {
  if (poles.empty()) return 0;
  Scalar gap = kInf;
  for (const Complex& p : poles) {
    const Scalar below = lo - p.imag();
    const Scalar above = p.imag() - hi;
    const Scalar vertical = std::max<Scalar>({0, below, above});
    gap = std::min(gap, std::hypot(p.real(), vertical));
  }
  if (!(gap > 0)) return kInf;
  return condition / gap;
}

ResolventBound ComputeResolventBound(const StateSpace& sys) {
  ResolventBound out;
  out.input_norm = SpectralNorm(sys.B);
  out.output_norm = SpectralNorm(sys.C);
  out.feedthrough_norm = SpectralNorm(sys.D);
  if (sys.states() == 0) return out;
  Eigen::EigenSolver<Matrix> solver(sys.A, true);
  const auto& values = solver.eigenvalues();
  out.poles.assign(values.data(), values.data() + values.size());
  const ComplexMatrix v = solver.eigenvectors();
  const auto sv = Eigen::JacobiSVD<ComplexMatrix>(v).singularValues();
  const Scalar smallest = sv(sv.size() - 1);
  out.condition = smallest > 0 ? sv(0) / smallest : kInf;
  if (!std::isfinite(out.condition) || out.condition > 1e12) out.condition = kInf;
  return out;
}

}  // namespace incstab
