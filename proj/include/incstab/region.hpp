#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "incstab/types.hpp"

namespace incstab {

/// Closed disc {z : |z - center| <= radius}.
struct Disc {
  Complex center;
  Scalar radius = 0;
  bool operator==(const Disc&) const = default;
};

/// Closed half-plane {z : Re(conj(normal) * z) >= offset}, |normal| = 1.
struct HalfPlane {
  Complex normal{1, 0};
  Scalar offset = 0;
  bool operator==(const HalfPlane&) const = default;
};

/// Closed complement of an open disc, {z : |z - center| >= radius}.
struct DiscExterior {
  Complex center;
  Scalar radius = 0;
  bool operator==(const DiscExterior&) const = default;
};

using Primitive = std::variant<Disc, HalfPlane, DiscExterior>;

/// Raised when an operation has no sound closed-form image in the
/// Disc/HalfPlane/DiscExterior algebra.
class RegionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finite union of planar primitives over-approximating an SRG.
class Region {
 public:
  Region() = default;
  explicit Region(std::vector<Primitive> primitives);
  Region(std::initializer_list<Primitive> primitives);

  const std::vector<Primitive>& primitives() const { return primitives_; }
  bool empty() const { return primitives_.empty(); }
  std::size_t size() const { return primitives_.size(); }

  /// Membership in the union; `tol` enlarges every primitive by that distance.
  bool Contains(Complex z, Scalar tol = 0) const;
  /// True if every primitive has a mirror image in the list.
  bool IsConjugateSymmetric(Scalar tol = 1e-12) const;
  bool IsBounded() const;

  bool operator==(const Region&) const = default;

 private:
  std::vector<Primitive> primitives_;
};

/// Half-plane normalization: rescales `normal` to unit modulus.
HalfPlane MakeHalfPlane(Complex normal, Scalar offset);

bool Contains(const Primitive& p, Complex z, Scalar tol = 0);
Primitive Conjugate(const Primitive& p);
std::string Describe(const Primitive& p);

/// Adds the mirror image of every primitive not already present.
Region SymmetrizeRegion(const Region& r);
/// Union of two regions.
Region Unite(const Region& a, const Region& b);

/// sup |z| over the region; +inf if unbounded, 0 if empty.
Scalar MaxRadius(const Region& r);

/// Image of the region under z -> 1/z (the point 0 itself, whose image is the
/// point at infinity, is excluded). Throws RegionError for a half-plane with 0
/// in its interior and for the degenerate point {0}.
Region InvertRegion(const Region& r);

/// Union of discs covering every chord point lambda*z + (1-lambda)*conj(z).
/// Off-axis discs are replaced by stacks of discs along the vertical segment;
/// half-planes with non-real normals and disc exteriors close to the whole
/// plane. Throws RegionError for non-symmetric input.
Region ChordClosure(const Region& r);

Region ScaleRegion(const Region& r, Scalar c);
inline Region NegateRegion(const Region& r) { return ScaleRegion(r, -1); }

/// Pairwise Minkowski sum; supports Disc+Disc and Disc+HalfPlane only.
Region MinkowskiSum(const Region& a, const Region& b);

/// inf |x - y| over x in a, y in b; +inf if either region is empty.
Scalar RegionDistance(const Region& a, const Region& b);
Scalar PrimitiveDistance(const Primitive& a, const Primitive& b);

/// Certified lower bound on inf_{tau in [tau_lo, tau_hi]} of
/// RegionDistance(a, ScaleRegion(b, -tau)).
struct SeparationResult {
  Scalar margin = 0;
  /// Grid point with the smallest sampled distance.
  Scalar tau_star = 0;
  Scalar min_sampled_distance = 0;
  /// margin = min_sampled_distance - slack (clamped at 0).
  Scalar slack = 0;
  long evaluations = 0;
  Index grid_points = 0;
};

struct SeparationOptions {
  Index initial_grid = 64;
  Scalar relative_slack = 1e-4;
  long max_evaluations = 1'000'000;
};

/// Throws RegionError when `s2` is unbounded or the tau interval is invalid.
SeparationResult SeparationMargin(const Region& s1_inv, const Region& s2, Scalar tau_lo,
                                  Scalar tau_hi, const SeparationOptions& options = {});

}  // namespace incstab
