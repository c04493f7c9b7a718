#include "incstab/signal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace incstab {

Signal::Signal(Matrix samples, Scalar dt) : samples_(std::move(samples)), dt_(dt) {
  if (samples_.rows() < 1 || samples_.cols() < 1) {
    throw std::invalid_argument("Signal: need at least one sample and one channel");
  }
  if (!(dt_ > 0) || !std::isfinite(dt_)) {
    throw std::invalid_argument("Signal: dt must be positive and finite");
  }
  if (!samples_.allFinite()) {
    throw std::invalid_argument("Signal: samples must be finite");
  }
}

Signal Signal::Zero(Index length, Index dim, Scalar dt) {
  return Signal(Matrix::Zero(length, dim), dt);
}

bool Signal::SameShape(const Signal& other) const {
  return length() == other.length() && dim() == other.dim() && dt_ == other.dt_;
}

void RequireSameShape(const Signal& a, const Signal& b) {
  if (!a.SameShape(b)) {
    std::ostringstream msg;
    msg << "signal shape mismatch: (" << a.length() << "x" << a.dim() << ", dt=" << a.dt()
        << ") vs (" << b.length() << "x" << b.dim() << ", dt=" << b.dt() << ")";
    throw std::invalid_argument(msg.str());
  }
}

Signal operator+(const Signal& a, const Signal& b) {
  RequireSameShape(a, b);
  return Signal(a.samples() + b.samples(), a.dt());
}

Signal operator-(const Signal& a, const Signal& b) {
  RequireSameShape(a, b);
  return Signal(a.samples() - b.samples(), a.dt());
}

Signal operator-(const Signal& a) { return Signal(-a.samples(), a.dt()); }

Signal operator*(Scalar c, const Signal& s) { return Signal(c * s.samples(), s.dt()); }

Scalar Norm(const Signal& s) { return std::sqrt(s.samples().squaredNorm() * s.dt()); }

Scalar Inner(const Signal& a, const Signal& b) {
  RequireSameShape(a, b);
  return a.samples().cwiseProduct(b.samples()).sum() * a.dt();
}

Scalar Angle(const Signal& u, const Signal& y) {
  const Scalar nu = Norm(u);
  const Scalar ny = Norm(y);
  if (nu == 0 || ny == 0) throw std::invalid_argument("Angle: zero-norm argument");
  // 2 atan2(|a - b|, |a + b|) on the unit vectors stays accurate near 0 and
  // pi, where acos of the cosine loses half the digits.
  const Matrix a = u.samples() / nu;
  const Matrix b = y.samples() / ny;
  return 2 * std::atan2((a - b).norm(), (a + b).norm());
}

Signal Truncate(const Signal& s, Scalar horizon) {
  Matrix m = s.samples();
  for (Index k = 0; k < m.rows(); ++k) {
    if (!(s.time(k) < horizon)) m.row(k).setZero();
  }
  return Signal(std::move(m), s.dt());
}

namespace {

// Centered index j maps to frequency index m = j - N/2 and FFT bin (m mod N).
Index FftIndex(Index j, Index n) {
  const Index m = j - n / 2;
  return ((m % n) + n) % n;
}

}  // namespace

Spectrum Dft(const Signal& s) {
  const Index n = s.length();
  Eigen::FFT<Scalar> fft;
  Spectrum out;
  out.dt = s.dt();
  out.d_omega = 2 * kPi / (static_cast<Scalar>(n) * s.dt());
  out.bins.resize(n, s.dim());
  out.frequencies.resize(n);
  for (Index j = 0; j < n; ++j) {
    out.frequencies(j) = static_cast<Scalar>(j - n / 2) * out.d_omega;
  }
  std::vector<Complex> in(static_cast<std::size_t>(n));
  std::vector<Complex> raw;
  for (Index c = 0; c < s.dim(); ++c) {
    for (Index k = 0; k < n; ++k) in[static_cast<std::size_t>(k)] = s.samples()(k, c);
    // Eigen's kissfft backend does not handle a single point; the transform is the identity.
    if (n == 1) {
      raw = in;
    } else {
      fft.fwd(raw, in);
    }
    for (Index j = 0; j < n; ++j) {
      out.bins(j, c) = s.dt() * raw[static_cast<std::size_t>(FftIndex(j, n))];
    }
  }
  return out;
}

Signal Idft(const Spectrum& spectrum) {
  const Index n = spectrum.bins.rows();
  if (n < 1 || !(spectrum.dt > 0)) throw std::invalid_argument("Idft: empty spectrum");
  Eigen::FFT<Scalar> fft;
  Matrix samples(n, spectrum.bins.cols());
  std::vector<Complex> in(static_cast<std::size_t>(n));
  std::vector<Complex> raw;
  for (Index c = 0; c < spectrum.bins.cols(); ++c) {
    for (Index j = 0; j < n; ++j) {
      in[static_cast<std::size_t>(FftIndex(j, n))] = spectrum.bins(j, c) / spectrum.dt;
    }
    if (n == 1) {
      raw = in;
    } else {
      fft.inv(raw, in);
    }
    for (Index k = 0; k < n; ++k) samples(k, c) = raw[static_cast<std::size_t>(k)].real();
  }
  return Signal(std::move(samples), spectrum.dt);
}

Scalar SpectralEnergy(const Spectrum& spectrum) {
  return spectrum.bins.squaredNorm() * spectrum.d_omega / (2 * kPi);
}

namespace {

std::vector<Scalar> ParseCsvRow(const std::string& line, std::size_t line_no) {
  std::vector<Scalar> row;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    Scalar v = 0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      throw std::runtime_error("signal csv line " + std::to_string(line_no) +
                               ": bad number '" + cell + "'");
    }
    if (cell.find_first_not_of(" \t\r", used) != std::string::npos) {
      throw std::runtime_error("signal csv line " + std::to_string(line_no) +
                               ": bad number '" + cell + "'");
    }
    row.push_back(v);
  }
  return row;
}

}  // namespace

Signal ReadSignalCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open signal csv " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("signal csv is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header[0] != "t") {
    throw std::runtime_error("signal csv header must be t,x1,...,xn");
  }
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i] != "x" + std::to_string(i)) {
      throw std::runtime_error("signal csv header must be t,x1,...,xn");
    }
  }
  const std::size_t dim = header.size() - 1;
  std::vector<std::vector<Scalar>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto row = ParseCsvRow(line, line_no);
    if (row.size() != dim + 1) {
      throw std::runtime_error("signal csv line " + std::to_string(line_no) +
                               ": expected " + std::to_string(dim + 1) + " columns");
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw std::runtime_error("signal csv needs at least two samples");
  const Scalar dt = rows[1][0] - rows[0][0];
  if (!(dt > 0)) throw std::runtime_error("signal csv: time must increase");
  if (std::abs(rows[0][0]) > 1e-9 * dt) throw std::runtime_error("signal csv: time must start at 0");
  Matrix samples(static_cast<Index>(rows.size()), static_cast<Index>(dim));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Scalar expected = static_cast<Scalar>(k) * dt;
    if (std::abs(rows[k][0] - expected) > 1e-6 * dt) {
      throw std::runtime_error("signal csv: non-uniform time spacing at row " +
                               std::to_string(k + 2));
    }
    for (std::size_t i = 0; i < dim; ++i) {
      samples(static_cast<Index>(k), static_cast<Index>(i)) = rows[k][i + 1];
    }
  }
  return Signal(std::move(samples), dt);
}

std::string FormatSignalCsv(const Signal& s) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "t";
  for (Index i = 0; i < s.dim(); ++i) out << ",x" << (i + 1);
  out << "\n";
  for (Index k = 0; k < s.length(); ++k) {
    out << s.time(k);
    for (Index i = 0; i < s.dim(); ++i) out << "," << s.samples()(k, i);
    out << "\n";
  }
  return out.str();
}

}  // namespace incstab
