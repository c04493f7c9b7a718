#include "incstab/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace incstab {

namespace {

constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();
// Maximum number of intervals used when stacking discs along a chord.
constexpr Index kMaxChordIntervals = 64;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Scalar Dot(Complex n, Complex z) { return (std::conj(n) * z).real(); }

bool Close(Complex a, Complex b, Scalar tol) { return std::abs(a - b) <= tol; }

bool SamePrimitive(const Primitive& a, const Primitive& b, Scalar tol) {
  if (a.index() != b.index()) return false;
  return std::visit(
      Overloaded{
          [&](const Disc& d) {
            const auto& e = std::get<Disc>(b);
            return Close(d.center, e.center, tol) && std::abs(d.radius - e.radius) <= tol;
          },
          [&](const HalfPlane& h) {
            const auto& g = std::get<HalfPlane>(b);
            return Close(h.normal, g.normal, tol) && std::abs(h.offset - g.offset) <= tol;
          },
          [&](const DiscExterior& d) {
            const auto& e = std::get<DiscExterior>(b);
            return Close(d.center, e.center, tol) && std::abs(d.radius - e.radius) <= tol;
          },
      },
      a);
}

void PushUnique(std::vector<Primitive>& out, const Primitive& p) {
  for (const auto& q : out) {
    if (q == p) return;
  }
  out.push_back(p);
}

Region WholePlane() { return Region{HalfPlane{{1, 0}, 0}, HalfPlane{{-1, 0}, 0}}; }

Primitive InvertPrimitive(const Primitive& p) {
  return std::visit(
      Overloaded{
          [](const Disc& d) -> Primitive {
            const Scalar c2 = std::norm(d.center);
            const Scalar r2 = d.radius * d.radius;
            const Scalar mod = std::abs(d.center);
            if (mod > d.radius) {
              return Disc{std::conj(d.center) / (c2 - r2), d.radius / (c2 - r2)};
            }
            if (mod < d.radius) {
              return DiscExterior{std::conj(d.center) / (c2 - r2), d.radius / (r2 - c2)};
            }
            if (mod == 0) throw RegionError("cannot invert the point {0}");
            // 0 on the boundary circle: the image is a half-plane.
            return HalfPlane{std::conj(d.center) / mod, 1 / (2 * mod)};
          },
          [](const HalfPlane& h) -> Primitive {
            if (h.offset > 0) {
              return Disc{std::conj(h.normal) / (2 * h.offset), 1 / (2 * h.offset)};
            }
            if (h.offset == 0) return HalfPlane{std::conj(h.normal), 0};
            throw RegionError("cannot invert a half-plane containing 0 in its interior: " +
                              Describe(h));
          },
          [](const DiscExterior& d) -> Primitive {
            const Scalar c2 = std::norm(d.center);
            const Scalar r2 = d.radius * d.radius;
            const Scalar mod = std::abs(d.center);
            if (mod < d.radius) {
              return Disc{std::conj(d.center) / (c2 - r2), d.radius / (r2 - c2)};
            }
            if (mod > d.radius) {
              return DiscExterior{std::conj(d.center) / (c2 - r2), d.radius / (c2 - r2)};
            }
            if (mod == 0) return HalfPlane{{1, 0}, -kInf};  // whole plane minus 0
            return HalfPlane{-std::conj(d.center) / mod, -1 / (2 * mod)};
          },
      },
      p);
}

}  // namespace

Region::Region(std::vector<Primitive> primitives) : primitives_(std::move(primitives)) {
  for (const auto& p : primitives_) {
    std::visit(Overloaded{
                   [](const Disc& d) {
                     if (!(d.radius >= 0)) throw RegionError("disc radius must be >= 0");
                   },
                   [](const HalfPlane& h) {
                     if (std::abs(std::abs(h.normal) - 1) > 1e-9) {
                       throw RegionError("half-plane normal must have unit modulus");
                     }
                   },
                   [](const DiscExterior& d) {
                     if (!(d.radius >= 0)) throw RegionError("disc exterior radius must be >= 0");
                   },
               },
               p);
  }
}

Region::Region(std::initializer_list<Primitive> primitives)
    : Region(std::vector<Primitive>(primitives)) {}

HalfPlane MakeHalfPlane(Complex normal, Scalar offset) {
  const Scalar mod = std::abs(normal);
  if (!(mod > 0)) throw RegionError("half-plane normal must be nonzero");
  return HalfPlane{normal / mod, offset / mod};
}

bool Contains(const Primitive& p, Complex z, Scalar tol) {
  return std::visit(
      Overloaded{
          [&](const Disc& d) { return std::abs(z - d.center) <= d.radius + tol; },
          [&](const HalfPlane& h) { return Dot(h.normal, z) >= h.offset - tol; },
          [&](const DiscExterior& d) { return std::abs(z - d.center) >= d.radius - tol; },
      },
      p);
}

bool Region::Contains(Complex z, Scalar tol) const {
  return std::any_of(primitives_.begin(), primitives_.end(),
                     [&](const Primitive& p) { return incstab::Contains(p, z, tol); });
}

Primitive Conjugate(const Primitive& p) {
  return std::visit(Overloaded{
                        [](const Disc& d) -> Primitive { return Disc{std::conj(d.center), d.radius}; },
                        [](const HalfPlane& h) -> Primitive {
                          return HalfPlane{std::conj(h.normal), h.offset};
                        },
                        [](const DiscExterior& d) -> Primitive {
                          return DiscExterior{std::conj(d.center), d.radius};
                        },
                    },
                    p);
}

std::string Describe(const Primitive& p) {
  std::ostringstream s;
  s.precision(12);
  std::visit(Overloaded{
                 [&](const Disc& d) {
                   s << "Disc(" << d.center.real() << "," << d.center.imag() << "; " << d.radius
                     << ")";
                 },
                 [&](const HalfPlane& h) {
                   s << "HalfPlane(" << h.normal.real() << "," << h.normal.imag() << "; "
                     << h.offset << ")";
                 },
                 [&](const DiscExterior& d) {
                   s << "DiscExterior(" << d.center.real() << "," << d.center.imag() << "; "
                     << d.radius << ")";
                 },
             },
             p);
  return s.str();
}

bool Region::IsConjugateSymmetric(Scalar tol) const {
  for (const auto& p : primitives_) {
    const Primitive mirror = Conjugate(p);
    const bool found = std::any_of(primitives_.begin(), primitives_.end(),
                                   [&](const Primitive& q) { return SamePrimitive(mirror, q, tol); });
    if (!found) return false;
  }
  return true;
}

bool Region::IsBounded() const {
  return std::all_of(primitives_.begin(), primitives_.end(),
                     [](const Primitive& p) { return std::holds_alternative<Disc>(p); });
}

Region SymmetrizeRegion(const Region& r) {
  std::vector<Primitive> out = r.primitives();
  for (const auto& p : r.primitives()) PushUnique(out, Conjugate(p));
  return Region(std::move(out));
}

Region Unite(const Region& a, const Region& b) {
  std::vector<Primitive> out = a.primitives();
  for (const auto& p : b.primitives()) PushUnique(out, p);
  return Region(std::move(out));
}

Scalar MaxRadius(const Region& r) {
  Scalar best = 0;
  for (const auto& p : r.primitives()) {
    const auto* d = std::get_if<Disc>(&p);
    if (d == nullptr) return kInf;
    best = std::max(best, std::abs(d->center) + d->radius);
  }
  return best;
}

Region InvertRegion(const Region& r) {
  std::vector<Primitive> out;
  out.reserve(r.size());
  for (const auto& p : r.primitives()) {
    Primitive image = InvertPrimitive(p);
    if (const auto* h = std::get_if<HalfPlane>(&image); h != nullptr && std::isinf(h->offset)) {
      for (const auto& q : WholePlane().primitives()) PushUnique(out, q);
      continue;
    }
    PushUnique(out, image);
  }
  return Region(std::move(out));
}

Region ChordClosure(const Region& r) {
  if (!r.IsConjugateSymmetric()) {
    throw RegionError("chord closure requires a conjugate-symmetric region");
  }
  std::vector<Primitive> out;
  for (const auto& p : r.primitives()) {
    if (const auto* d = std::get_if<Disc>(&p)) {
      const Scalar b = std::abs(d->center.imag());
      if (b == 0) {
        PushUnique(out, *d);
        continue;
      }
      const Scalar a = d->center.real();
      Index intervals = kMaxChordIntervals;
      if (d->radius > 0) {
        intervals = std::min<Index>(
            kMaxChordIntervals, static_cast<Index>(std::ceil(2 * b / d->radius)));
      }
      intervals = std::max<Index>(intervals, 1);
      const Scalar h = 2 * b / static_cast<Scalar>(intervals);
      // Discs of radius rho centred h apart miss the flanks between centres;
      // sqrt(rho^2 + h^2/4) is the smallest radius covering the stadium.
      const Scalar radius = std::hypot(d->radius, h / 2);
      for (Index k = 0; k <= intervals; ++k) {
        const Scalar im = (k == intervals) ? -b : b - static_cast<Scalar>(k) * h;
        PushUnique(out, Disc{Complex(a, im), radius});
      }
      continue;
    }
    if (const auto* h = std::get_if<HalfPlane>(&p); h != nullptr && h->normal.imag() == 0) {
      PushUnique(out, *h);
      continue;
    }
    for (const auto& q : WholePlane().primitives()) PushUnique(out, q);
  }
  return Region(std::move(out));
}

Region ScaleRegion(const Region& r, Scalar c) {
  if (r.empty()) return r;
  if (c == 0) return Region{Disc{{0, 0}, 0}};
  const Scalar mag = std::abs(c);
  const Scalar sign = c > 0 ? 1 : -1;
  std::vector<Primitive> out;
  for (const auto& p : r.primitives()) {
    PushUnique(out, std::visit(Overloaded{
                                   [&](const Disc& d) -> Primitive {
                                     return Disc{c * d.center, mag * d.radius};
                                   },
                                   [&](const HalfPlane& h) -> Primitive {
                                     return HalfPlane{sign * h.normal, mag * h.offset};
                                   },
                                   [&](const DiscExterior& d) -> Primitive {
                                     return DiscExterior{c * d.center, mag * d.radius};
                                   },
                               },
                               p));
  }
  return Region(std::move(out));
}

Region MinkowskiSum(const Region& a, const Region& b) {
  std::vector<Primitive> out;
  for (const auto& p : a.primitives()) {
    for (const auto& q : b.primitives()) {
      const auto* dp = std::get_if<Disc>(&p);
      const auto* dq = std::get_if<Disc>(&q);
      if (dp != nullptr && dq != nullptr) {
        PushUnique(out, Disc{dp->center + dq->center, dp->radius + dq->radius});
        continue;
      }
      const auto* hp = std::get_if<HalfPlane>(&p);
      const auto* hq = std::get_if<HalfPlane>(&q);
      if (hp != nullptr && dq != nullptr) {
        PushUnique(out, HalfPlane{hp->normal, hp->offset + Dot(hp->normal, dq->center) - dq->radius});
        continue;
      }
      if (dp != nullptr && hq != nullptr) {
        PushUnique(out, HalfPlane{hq->normal, hq->offset + Dot(hq->normal, dp->center) - dp->radius});
        continue;
      }
      throw RegionError("unsupported Minkowski sum: " + Describe(p) + " + " + Describe(q));
    }
  }
  return Region(std::move(out));
}

Scalar PrimitiveDistance(const Primitive& a, const Primitive& b) {
  return std::visit(
      Overloaded{
          [](const Disc& x, const Disc& y) {
            return std::max<Scalar>(0, std::abs(x.center - y.center) - x.radius - y.radius);
          },
          [](const Disc& x, const HalfPlane& h) {
            return std::max<Scalar>(0, h.offset - Dot(h.normal, x.center) - x.radius);
          },
          [](const HalfPlane& h, const Disc& x) {
            return std::max<Scalar>(0, h.offset - Dot(h.normal, x.center) - x.radius);
          },
          [](const Disc& x, const DiscExterior& e) {
            return std::max<Scalar>(0, e.radius - (std::abs(x.center - e.center) + x.radius));
          },
          [](const DiscExterior& e, const Disc& x) {
            return std::max<Scalar>(0, e.radius - (std::abs(x.center - e.center) + x.radius));
          },
          [](const HalfPlane& g, const HalfPlane& h) {
            if (std::abs(g.normal + h.normal) <= 1e-12) {
              return std::max<Scalar>(0, g.offset + h.offset);
            }
            return Scalar{0};
          },
          [](const auto&, const auto&) { return Scalar{0}; },
      },
      a, b);
}

Scalar RegionDistance(const Region& a, const Region& b) {
  Scalar best = kInf;
  for (const auto& p : a.primitives()) {
    for (const auto& q : b.primitives()) {
      best = std::min(best, PrimitiveDistance(p, q));
      if (best == 0) return 0;
    }
  }
  return best;
}

SeparationResult SeparationMargin(const Region& s1_inv, const Region& s2, Scalar tau_lo,
                                  Scalar tau_hi, const SeparationOptions& options) {
  if (!(tau_lo > 0) || !(tau_lo <= tau_hi) || !(tau_hi <= 1)) {
    throw RegionError("separation margin needs 0 < tau_lo <= tau_hi <= 1");
  }
  if (s1_inv.empty() || s2.empty()) throw RegionError("separation margin of an empty region");
  const Scalar lipschitz = MaxRadius(s2);
  if (std::isinf(lipschitz)) {
    throw RegionError("separation margin needs a bounded second region");
  }
  const auto distance_at = [&](Scalar tau) {
    return RegionDistance(s1_inv, ScaleRegion(s2, -tau));
  };

  SeparationResult result;
  if (lipschitz == 0 || tau_lo == tau_hi) {
    result.min_sampled_distance = distance_at(tau_lo);
    result.margin = result.min_sampled_distance;
    result.tau_star = tau_lo;
    result.evaluations = 1;
    result.grid_points = 1;
    return result;
  }

  Index n = std::max<Index>(options.initial_grid, 2);
  while (true) {
    const Scalar h = (tau_hi - tau_lo) / static_cast<Scalar>(n - 1);
    std::vector<Scalar> d(static_cast<std::size_t>(n));
    Scalar min_d = kInf;
    Scalar tau_star = tau_lo;
    for (Index k = 0; k < n; ++k) {
      const Scalar tau = (k == n - 1) ? tau_hi : tau_lo + static_cast<Scalar>(k) * h;
      d[static_cast<std::size_t>(k)] = distance_at(tau);
      if (d[static_cast<std::size_t>(k)] < min_d) {
        min_d = d[static_cast<std::size_t>(k)];
        tau_star = tau;
      }
    }
    result.evaluations += n;
    result.grid_points = n;
    Scalar lower = min_d;
    for (Index k = 0; k + 1 < n; ++k) {
      const Scalar bound = 0.5 * (d[static_cast<std::size_t>(k)] +
                                  d[static_cast<std::size_t>(k + 1)] - lipschitz * h);
      lower = std::min(lower, bound);
    }
    result.min_sampled_distance = min_d;
    result.tau_star = tau_star;
    result.margin = std::max<Scalar>(0, lower);
    result.slack = min_d - result.margin;
    const bool tight = lipschitz * h / 2 < options.relative_slack * min_d;
    const Index next = 2 * n - 1;
    if (min_d == 0 || tight || result.evaluations + next > options.max_evaluations) break;
    n = next;
  }
  return result;
}

}  // namespace incstab
