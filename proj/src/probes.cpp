#include "incstab/probes.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace incstab {

Scalar ProbeTaper(Scalar t, Scalar horizon) {
  const Scalar start = 0.5 * horizon;
  const Scalar stop = 0.75 * horizon;
  if (t <= start) return 1;
  if (t >= stop) return 0;
  return 0.5 * (1 + std::cos(kPi * (t - start) / (stop - start)));
}

namespace {

Index ProbeLength(const ProbeOptions& o) {
  if (!(o.dt > 0) || !(o.horizon > 0)) throw std::invalid_argument("probe horizon and dt must be positive");
  if (o.dim < 1) throw std::invalid_argument("probe dimension must be >= 1");
  if (o.sinusoids < 0 || o.noise < 0) throw std::invalid_argument("probe counts must be >= 0");
  const auto n = static_cast<Index>(std::llround(o.horizon / o.dt));
  if (n < 4) throw std::invalid_argument("probe horizon must span at least 4 samples");
  return n;
}

}  // namespace

std::vector<Signal> ProbeSignals(const ProbeOptions& o) {
  const Index n = ProbeLength(o);
  std::vector<Signal> out;
  const auto time = [&](Index k) { return static_cast<Scalar>(k) * o.dt; };

  Matrix step = Matrix::Zero(n, o.dim);
  for (Index k = 0; k < n; ++k) {
    if (time(k) < 0.25 * o.horizon) step.row(k).setConstant(o.amplitude);
  }
  out.emplace_back(std::move(step), o.dt);

  for (int i = 0; i < o.sinusoids; ++i) {
    const Scalar frac = o.sinusoids == 1 ? 0 : static_cast<Scalar>(i) / (o.sinusoids - 1);
    const Scalar omega = o.omega_min * std::pow(o.omega_max / o.omega_min, frac);
    Matrix m(n, o.dim);
    for (Index k = 0; k < n; ++k) {
      for (Index c = 0; c < o.dim; ++c) {
        const Scalar phase = kPi * static_cast<Scalar>(c) / static_cast<Scalar>(o.dim);
        m(k, c) = o.amplitude * std::sin(omega * time(k) + phase) * ProbeTaper(time(k), o.horizon);
      }
    }
    out.emplace_back(std::move(m), o.dt);
  }

  std::mt19937_64 rng(o.seed);
  std::normal_distribution<Scalar> gauss(0, 1);
  const Scalar alpha = 1 - std::exp(-o.noise_cutoff * o.dt);
  for (int i = 0; i < o.noise; ++i) {
    Matrix m(n, o.dim);
    for (Index c = 0; c < o.dim; ++c) {
      Scalar state = 0;
      for (Index k = 0; k < n; ++k) {
        state += alpha * (gauss(rng) - state);
        m(k, c) = state;
      }
    }
    const Scalar peak = m.cwiseAbs().maxCoeff();
    if (peak > 0) m *= o.amplitude / peak;
    for (Index k = 0; k < n; ++k) m.row(k) *= ProbeTaper(time(k), o.horizon);
    out.emplace_back(std::move(m), o.dt);
  }
  return out;
}

std::vector<SignalPair> ProbePairs(const ProbeOptions& o) {
  const std::vector<Signal> base = ProbeSignals(o);
  const Index n = base.front().length();
  Matrix bias(n, o.dim);
  for (Index k = 0; k < n; ++k) {
    bias.row(k).setConstant(o.offset * o.amplitude * ProbeTaper(static_cast<Scalar>(k) * o.dt, o.horizon));
  }
  const Signal offset(std::move(bias), o.dt);
  const Signal zero = Signal::Zero(n, o.dim, o.dt);

  std::vector<SignalPair> pairs;
  for (const auto& b : base) pairs.emplace_back(b, zero);
  for (std::size_t i = 0; i + 1 < base.size(); ++i) pairs.emplace_back(base[i], base[i + 1]);
  if (o.offset != 0) {
    for (const auto& b : base) pairs.emplace_back(offset + b, offset);
  }
  return pairs;
}

}  // namespace incstab
