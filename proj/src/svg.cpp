#include "incstab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace incstab {

namespace {

constexpr Scalar kCanvas = 480;

std::string Fixed(Scalar v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string Escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

Scalar Extent(const SrgCloud& cloud, const Region& region) {
  Scalar r = 1;
  for (const Complex& z : cloud.points) r = std::max(r, std::abs(z));
  for (const auto& p : region.primitives()) {
    if (const auto* d = std::get_if<Disc>(&p)) r = std::max(r, std::abs(d->center) + d->radius);
    if (const auto* e = std::get_if<DiscExterior>(&p)) r = std::max(r, std::abs(e->center) + e->radius);
    if (const auto* h = std::get_if<HalfPlane>(&p)) r = std::max(r, std::abs(h->offset) + 1);
  }
  return 1.15 * r;
}

}  // namespace

std::string SrgSvg(const SrgCloud& cloud, const Region& region, std::uint64_t seed,
                   const std::string& title) {
  const Scalar r = Extent(cloud, region);
  const Scalar px = 2 * r / kCanvas;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kCanvas << "\" height=\"" << kCanvas
    << "\" viewBox=\"" << Fixed(-r) << ' ' << Fixed(-r) << ' ' << Fixed(2 * r) << ' '
    << Fixed(2 * r) << "\">\n";
  s << "<!-- seed: " << seed << " -->\n";
  if (!title.empty()) s << "<title>" << Escape(title) << "</title>\n";
  s << "<g id=\"guides\" stroke=\"#999999\" fill=\"none\" stroke-width=\"" << Fixed(px) << "\">\n";
  s << "<line x1=\"" << Fixed(-r) << "\" y1=\"0\" x2=\"" << Fixed(r) << "\" y2=\"0\"/>\n";
  s << "<line x1=\"0\" y1=\"" << Fixed(-r) << "\" x2=\"0\" y2=\"" << Fixed(r) << "\"/>\n";
  s << "<path d=\"M 1 0 A 1 1 0 1 0 -1 0 A 1 1 0 1 0 1 0 Z\" stroke-dasharray=\"" << Fixed(4 * px)
    << "\"/>\n";
  s << "</g>\n";

  s << "<g id=\"regions\" stroke=\"#1f77b4\" stroke-width=\"" << Fixed(1.5 * px) << "\">\n";
  for (const auto& p : region.primitives()) {
    if (const auto* d = std::get_if<Disc>(&p)) {
      s << "<circle cx=\"" << Fixed(d->center.real()) << "\" cy=\"" << Fixed(-d->center.imag())
        << "\" r=\"" << Fixed(d->radius) << "\" fill=\"#1f77b4\" fill-opacity=\"0.15\"/>\n";
    } else if (const auto* e = std::get_if<DiscExterior>(&p)) {
      s << "<circle cx=\"" << Fixed(e->center.real()) << "\" cy=\"" << Fixed(-e->center.imag())
        << "\" r=\"" << Fixed(e->radius) << "\" fill=\"none\" stroke-dasharray=\"" << Fixed(6 * px)
        << "\"/>\n";
    } else {
      const auto& h = std::get<HalfPlane>(p);
      // Boundary {Re(conj(n) z) = offset}, long enough to cross the view box.
      const Complex base = h.normal * h.offset;
      const Complex along = Complex(0, 1) * h.normal * (3 * r);
      const Complex a = base - along;
      const Complex b = base + along;
      s << "<line x1=\"" << Fixed(a.real()) << "\" y1=\"" << Fixed(-a.imag()) << "\" x2=\""
        << Fixed(b.real()) << "\" y2=\"" << Fixed(-b.imag()) << "\"/>\n";
    }
  }
  s << "</g>\n";

  s << "<g id=\"cloud\" fill=\"#d62728\" stroke=\"none\">\n";
  for (const Complex& z : cloud.points) {
    s << "<circle cx=\"" << Fixed(z.real()) << "\" cy=\"" << Fixed(-z.imag()) << "\" r=\""
      << Fixed(2 * px) << "\"/>\n";
  }
  s << "</g>\n</svg>\n";
  return s.str();
}

std::string ArctanSvg(const std::vector<ArctanRow>& rows, std::uint64_t seed) {
  constexpr Scalar kMargin = 50;
  std::vector<std::pair<Scalar, Scalar>> pts;
  for (const auto& row : rows) {
    if (row.amplitude > 0 && row.ratio > 0) {
      pts.emplace_back(std::log10(row.amplitude), std::log10(row.ratio));
    }
  }
  Scalar x0 = -1, x1 = 0, y0 = 0, y1 = 1;
  if (!pts.empty()) {
    x0 = x1 = pts.front().first;
    y0 = y1 = pts.front().second;
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    x0 = std::floor(x0);
    x1 = std::ceil(x1 == x0 ? x1 + 1 : x1);
    y0 = std::floor(y0);
    y1 = std::ceil(y1 == y0 ? y1 + 1 : y1);
  }
  const Scalar w = kCanvas - 2 * kMargin;
  auto sx = [&](Scalar x) { return kMargin + (x - x0) / (x1 - x0) * w; };
  auto sy = [&](Scalar y) { return kCanvas - kMargin - (y - y0) / (y1 - y0) * w; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kCanvas << "\" height=\"" << kCanvas
    << "\" viewBox=\"0 0 " << kCanvas << ' ' << kCanvas << "\">\n";
  s << "<!-- seed: " << seed << " -->\n";
  s << "<title>closed-loop incremental ratio vs pulse amplitude (log10-log10)</title>\n";
  s << "<g id=\"axes\" stroke=\"#999999\" fill=\"none\">\n";
  s << "<rect x=\"" << Fixed(kMargin) << "\" y=\"" << Fixed(kMargin) << "\" width=\"" << Fixed(w)
    << "\" height=\"" << Fixed(w) << "\"/>\n</g>\n";
  s << "<g id=\"labels\" font-size=\"11\" fill=\"#333333\">\n";
  for (Scalar x = x0; x <= x1 + 1e-9; x += 1) {
    s << "<text x=\"" << Fixed(sx(x)) << "\" y=\"" << Fixed(kCanvas - kMargin + 16)
      << "\" text-anchor=\"middle\">1e" << static_cast<long>(x) << "</text>\n";
  }
  for (Scalar y = y0; y <= y1 + 1e-9; y += 1) {
    s << "<text x=\"" << Fixed(kMargin - 6) << "\" y=\"" << Fixed(sy(y) + 4)
      << "\" text-anchor=\"end\">1e" << static_cast<long>(y) << "</text>\n";
  }
  s << "</g>\n";
  if (!pts.empty()) {
    // Reference slope -2/3 through the first sample.
    const auto [px, py] = pts.front();
    auto ref = [&](Scalar x) { return py - 2.0 / 3.0 * (x - px); };
    s << "<line id=\"reference\" x1=\"" << Fixed(sx(x0)) << "\" y1=\"" << Fixed(sy(ref(x0)))
      << "\" x2=\"" << Fixed(sx(x1)) << "\" y2=\"" << Fixed(sy(ref(x1)))
      << "\" stroke=\"#999999\" stroke-dasharray=\"4\"/>\n";
    s << "<polyline id=\"data\" fill=\"none\" stroke=\"#d62728\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      s << (i ? " " : "") << Fixed(sx(pts[i].first)) << ',' << Fixed(sy(pts[i].second));
    }
    s << "\"/>\n";
    s << "<g id=\"markers\" fill=\"#d62728\">\n";
    for (const auto& [x, y] : pts) {
      s << "<circle cx=\"" << Fixed(sx(x)) << "\" cy=\"" << Fixed(sy(y)) << "\" r=\"3\"/>\n";
    }
    s << "</g>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace incstab
