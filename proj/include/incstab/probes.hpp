#pragma once

#include <cstdint>
#include <vector>

#include "incstab/signal.hpp"

namespace incstab {

/// Fixed, seeded family of probe signals used for empirical gain, SRG and
/// IQC sampling.
///
/// Every probe is multiplied by a taper that is 1 on the first half of the
/// horizon, rolls off with a raised cosine and is exactly 0 from 3/4 of the
/// horizon on, so signals have decayed before the end of the window.
struct ProbeOptions {
  Index dim = 1;
  Scalar horizon = 10;
  Scalar dt = 1e-2;
  std::uint64_t seed = 0;
  Scalar amplitude = 1;
  int sinusoids = 6;
  int noise = 4;
  Scalar omega_min = 0.1;
  Scalar omega_max = 10;
  /// Operating-point bias, as a fraction of `amplitude`, for offset pairs.
  Scalar offset = 0.5;
  /// Cutoff (rad/s) of the first-order filter shaping the noise probes.
  Scalar noise_cutoff = 2;
};

Scalar ProbeTaper(Scalar t, Scalar horizon);

/// Step of height `amplitude` on [0, horizon/4), then the sinusoids at
/// log-spaced frequencies, then the filtered noise probes.
std::vector<Signal> ProbeSignals(const ProbeOptions& options);

/// For base probes b_i and bias c: (b_i, 0), (b_i, b_{i+1}) and (c + b_i, c).
std::vector<SignalPair> ProbePairs(const ProbeOptions& options);

}  // namespace incstab
