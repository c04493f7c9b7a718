#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "incstab/loop.hpp"
#include "incstab/operator.hpp"
#include "incstab/region.hpp"

namespace incstab {

enum class Route { kSrg, kIqc, kSmallGain };
enum class Mode { kStandard, kRelaxed };

std::string ToString(Route route);
std::string ToString(Mode mode);

/// Homotopy from the open loop to [H1, H2]: start at feedback fraction nu,
/// then add tau_step per step until the fraction reaches 1.
struct HomotopySchedule {
  Scalar nu = 1;
  Scalar tau_step = 1;
  long steps = 0;
  Scalar gamma1 = 0;
  Scalar gamma2 = 0;
  Scalar gamma = 0;
};

/// Safety factor applied to both strict inequalities of the schedule.
inline constexpr Scalar kScheduleSafety = 0.9;

/// nu = min(1, 0.9/(g1 g2)), tau_step = 0.9/(g g2),
/// steps = ceil(max(0, 1 - nu) / tau_step). Throws for nonpositive input.
HomotopySchedule BuildSchedule(Scalar gamma1, Scalar gamma2, Scalar gamma);

struct EmpiricalSummary {
  bool ran = false;
  Scalar max_ratio = 0;
  long pairs = 0;
};

using Details = std::vector<std::pair<std::string, Scalar>>;

struct Certificate {
  Route route = Route::kSrg;
  Mode mode = Mode::kStandard;
  /// 1 / gamma; for the SRG route, the certified separation margin.
  Scalar r_min = 0;
  /// Certified closed-loop incremental gain bound.
  Scalar gamma = 0;
  HomotopySchedule schedule;
  std::vector<std::string> premises;
  EmpiricalSummary empirical;
  /// Route-specific intermediate quantities, in insertion order.
  Details details;
};

struct Refusal {
  Route route = Route::kSrg;
  Mode mode = Mode::kStandard;
  std::string reason;
  std::optional<Scalar> tau_star;
  std::vector<std::string> witness;
  std::vector<std::string> premises;
  Details details;
};

using Verdict = std::variant<Certificate, Refusal>;

inline bool IsCertified(const Verdict& v) { return std::holds_alternative<Certificate>(v); }

/// Certifies when gamma1 * gamma2 < 1 with bound gamma1 / (1 - gamma1 gamma2).
/// Throws std::invalid_argument on negative input.
Verdict CheckSmallGain(Scalar gamma1, Scalar gamma2);

struct CertifyOptions {
  /// When non-empty, closed-loop gains on these pairs are compared against
  /// the certified bound; exceeding it turns the certificate into a refusal.
  std::vector<SignalPair> probes;
  SeparationOptions separation;
  SolveOptions solve;
  Scalar tau_lo = 1e-9;
};

/// SRG-separation route. Requires declared incremental gains and SRG regions
/// on both operators; throws std::invalid_argument when missing and
/// RegionError when the inversion or chord closure is unrepresentable.
Verdict CertifySrg(const OperatorSpec& h1, const OperatorSpec& h2, const CertifyOptions& options = {});

/// Same geometry as CertifySrg, labelled relaxed. Refuses unless
/// `well_posedness_assumed`; throws std::runtime_error when the causality
/// probes fail.
Verdict CertifyRelaxed(const OperatorSpec& h1, const OperatorSpec& h2, bool well_posedness_assumed,
                       const CertifyOptions& options = {});

struct IdentityCheck {
  Scalar max_discrepancy = 0;
  /// Largest absolute solver tolerance over the inputs.
  Scalar tolerance = 0;
};

/// Compares [H1, (tau+nu) H2] with [[H1, tau H2], nu H2] on each input.
IdentityCheck VerifyFeedbackIdentity(const OperatorSpec& h1, const OperatorSpec& h2, Scalar tau,
                                     Scalar nu, const std::vector<Signal>& inputs,
                                     const SolveOptions& options = {});

/// Runs the closed loop on the probes and appends the summary; returns a
/// refusal when the empirical gain exceeds the certified bound.
Verdict CrossCheck(Certificate certificate, const OperatorSpec& h1, const OperatorSpec& h2,
                   const std::vector<SignalPair>& probes, const SolveOptions& options = {});

}  // namespace incstab
