#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "incstab/types.hpp"

namespace incstab {

/// Finite-horizon, uniformly sampled, real vector-valued trajectory.
///
/// Rows of `samples()` are time instants t_k = k * dt, columns are channels.
/// Values are immutable after construction.
class Signal {
 public:
  /// Throws std::invalid_argument unless N >= 1, n >= 1, dt > 0 and every
  /// sample is finite.
  Signal(Matrix samples, Scalar dt);

  static Signal Zero(Index length, Index dim, Scalar dt);
  /// Samples f(t_k) for a scalar function of time.
  template <typename F>
  static Signal FromFunction(Index length, Scalar dt, F&& f) {
    Matrix m(length, 1);
    for (Index k = 0; k < length; ++k) m(k, 0) = f(static_cast<Scalar>(k) * dt);
    return Signal(std::move(m), dt);
  }

  const Matrix& samples() const { return samples_; }
  Scalar dt() const { return dt_; }
  Index length() const { return samples_.rows(); }
  Index dim() const { return samples_.cols(); }
  /// Length of the sampled window, N * dt.
  Scalar horizon() const { return static_cast<Scalar>(length()) * dt_; }
  Scalar time(Index k) const { return static_cast<Scalar>(k) * dt_; }

  bool SameShape(const Signal& other) const;

 private:
  Matrix samples_;
  Scalar dt_;
};

using SignalPair = std::pair<Signal, Signal>;

Signal operator+(const Signal& a, const Signal& b);
Signal operator-(const Signal& a, const Signal& b);
Signal operator-(const Signal& a);
Signal operator*(Scalar c, const Signal& s);

/// Throws std::invalid_argument when N, n or dt differ.
void RequireSameShape(const Signal& a, const Signal& b);

/// Left-endpoint rectangle quadrature of the L2 norm.
Scalar Norm(const Signal& s);
Scalar Inner(const Signal& a, const Signal& b);
/// Angle in [0, pi] between two signals; throws on a zero-norm argument.
Scalar Angle(const Signal& u, const Signal& y);

/// Samples with t < horizon kept, the rest zeroed.
Signal Truncate(const Signal& s, Scalar horizon);

/// Two-sided spectrum, bins ordered by increasing frequency.
///
/// bins(m, i) approximates the continuous Fourier transform of channel i at
/// frequencies()[m]; (1/2pi) * sum |bin|^2 * d_omega equals Norm(s)^2.
struct Spectrum {
  ComplexMatrix bins;
  Scalar d_omega = 0;
  Vector frequencies;
  /// Sample spacing of the originating signal, needed by the inverse.
  Scalar dt = 0;
};

Spectrum Dft(const Signal& s);
/// Inverse of Dft; imaginary residue from rounding is dropped.
Signal Idft(const Spectrum& spectrum);
/// (1/2pi) * sum_m |bins(m, :)|^2 * d_omega.
Scalar SpectralEnergy(const Spectrum& spectrum);

/// Reads `t,x1,...,xn` CSV; throws on non-uniform time spacing.
Signal ReadSignalCsv(const std::filesystem::path& path);
std::string FormatSignalCsv(const Signal& s);

}  // namespace incstab
