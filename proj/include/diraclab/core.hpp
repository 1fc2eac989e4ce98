#pragma once

// Grid, spinor fields, Fourier transforms and the closed-form Pauli
// exponential. Everything downstream (Hamiltonians, propagators, the ion
// emulator) is built on these types.

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <memory>
#include <utility>

#include "diraclab/common.hpp"

namespace diraclab {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using VecXc = Eigen::VectorXcd;
using VecXd = Eigen::VectorXd;

inline Mat2 sigma_x() { return (Mat2() << 0, 1, 1, 0).finished(); }
inline Mat2 sigma_y() {
  return (Mat2() << 0, cplx(0, -1), cplx(0, 1), 0).finished();
}
inline Mat2 sigma_z() { return (Mat2() << 1, 0, 0, -1).finished(); }

// Physical parameters of the one-dimensional Dirac problem. The four slopes
// are the linear-potential strengths (energy per length); q_sign is the
// charge sign (+1 or -1) and multiplies the electric, magnetic and
// pseudoscalar couplings but not the scalar one.
struct DiracParams {
  double m = 1.0;
  double c = 1.0;
  double hbar = 1.0;
  double q_sign = 1.0;
  double v_sc = 0.0;  // scalar: adds to the mass term
  double v_el = 0.0;  // electric: identity component
  double v_mag = 0.0;
  double v_ps = 0.0;

  void validate() const {
    if (!(m >= 0.0) || !std::isfinite(m))
      throw validation_error("DiracParams: m must be finite and >= 0");
    if (!(c > 0.0) || !std::isfinite(c))
      throw validation_error("DiracParams: c must be finite and > 0");
    if (!(hbar > 0.0) || !std::isfinite(hbar))
      throw validation_error("DiracParams: hbar must be finite and > 0");
    if (q_sign != 1.0 && q_sign != -1.0)
      throw validation_error("DiracParams: q_sign must be +1 or -1");
    for (double v : {v_sc, v_el, v_mag, v_ps})
      if (!std::isfinite(v))
        throw validation_error("DiracParams: potential slopes must be finite");
  }
};

enum class Representation { Position, Momentum };

namespace detail {

struct GridData {
  int n = 0;
  double x_min = 0, x_max = 0, dx = 0, hbar = 1;
  VecXd x;           // x_i = x_min + i*dx
  VecXd p;           // DFT storage order: 0, dp, ..., -n/2*dp, ..., -dp
  VecXc fwd_phase;   // exp(-i p_k x_min / hbar)
  VecXc bwd_phase;   // conj of fwd_phase
};

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace detail

// Uniform periodic grid with its discrete-Fourier momentum lattice.
// Cheap to copy (shared immutable payload).
class Grid {
 public:
  Grid() = default;

  Grid(int n_points, double x_min, double x_max, double hbar = 1.0) {
    if (n_points < 8 || !detail::is_pow2(n_points))
      throw validation_error(
          "Grid: n_points must be a power of two and >= 8");
    if (!(x_min < x_max) || !std::isfinite(x_min) || !std::isfinite(x_max))
      throw validation_error("Grid: require finite x_min < x_max");
    if (!(hbar > 0.0) || !std::isfinite(hbar))
      throw validation_error("Grid: hbar must be finite and > 0");
    auto d = std::make_shared<detail::GridData>();
    d->n = n_points;
    d->x_min = x_min;
    d->x_max = x_max;
    d->hbar = hbar;
    d->dx = (x_max - x_min) / n_points;
    d->x.resize(n_points);
    d->p.resize(n_points);
    d->fwd_phase.resize(n_points);
    d->bwd_phase.resize(n_points);
    const double dp = 2.0 * pi * hbar / (n_points * d->dx);
    for (int j = 0; j < n_points; ++j) {
      d->x[j] = x_min + j * d->dx;
      int jt = j < n_points / 2 ? j : j - n_points;  // signed frequency index
      d->p[j] = dp * jt;
      double ph = -d->p[j] * x_min / hbar;
      d->fwd_phase[j] = cplx(std::cos(ph), std::sin(ph));
      d->bwd_phase[j] = std::conj(d->fwd_phase[j]);
    }
    data_ = std::move(d);
  }

  bool valid() const { return static_cast<bool>(data_); }
  int n() const { return data_->n; }
  double x_min() const { return data_->x_min; }
  double x_max() const { return data_->x_max; }
  double dx() const { return data_->dx; }
  double hbar() const { return data_->hbar; }
  double dp() const { return 2.0 * pi * data_->hbar / (data_->n * data_->dx); }
  double x(int i) const { return data_->x[i]; }
  // Momentum of DFT bin k (storage order, not sorted).
  double p(int k) const { return data_->p[k]; }
  const VecXd& x_values() const { return data_->x; }
  const VecXd& p_values() const { return data_->p; }

  // Map an ascending-momentum index to its DFT storage bin.
  int sorted_to_dft(int i) const { return (i + data_->n / 2) % data_->n; }
  double p_sorted(int i) const { return data_->p[sorted_to_dft(i)]; }

  const VecXc& fwd_phase() const { return data_->fwd_phase; }
  const VecXc& bwd_phase() const { return data_->bwd_phase; }

  friend bool operator==(const Grid& a, const Grid& b) {
    if (a.data_ == b.data_) return true;
    if (!a.data_ || !b.data_) return false;
    return a.n() == b.n() && a.x_min() == b.x_min() &&
           a.x_max() == b.x_max() && a.hbar() == b.hbar();
  }
  friend bool operator!=(const Grid& a, const Grid& b) { return !(a == b); }

 private:
  std::shared_ptr<const detail::GridData> data_;
};

inline Grid grid_new(int n_points, double x_min, double x_max,
                     double hbar = 1.0) {
  return Grid(n_points, x_min, x_max, hbar);
}

// Two-component field over a Grid, in either representation. Momentum
// amplitudes are stored in DFT bin order (use Grid::sorted_to_dft for an
// ascending-momentum view).
struct SpinorField {
  Grid grid;
  Representation rep = Representation::Position;
  VecXc upper, lower;

  static SpinorField zero(const Grid& g,
                          Representation r = Representation::Position) {
    SpinorField f;
    f.grid = g;
    f.rep = r;
    f.upper = VecXc::Zero(g.n());
    f.lower = VecXc::Zero(g.n());
    return f;
  }

  int n() const { return grid.n(); }

  void check_consistent() const {
    if (!grid.valid()) throw validation_error("SpinorField: empty grid");
    if (upper.size() != grid.n() || lower.size() != grid.n())
      throw validation_error("SpinorField: component length != grid size");
  }
};

namespace detail {

// Per-thread FFT engine; Eigen caches plans by size internally.
inline Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

inline void dft_fwd(VecXc& dst, const VecXc& src) {
  dst.resize(src.size());
  fft_engine().fwd(dst.data(), src.data(), static_cast<int>(src.size()));
}

// Eigen's inv() applies the 1/n scaling.
inline void dft_inv(VecXc& dst, const VecXc& src) {
  dst.resize(src.size());
  fft_engine().inv(dst.data(), src.data(), static_cast<int>(src.size()));
}

}  // namespace detail

// Unitary transform conventions (both directions carry 1/sqrt(n), so norms
// are representation independent):
//   phi_k  = n^{-1/2} sum_j psi_j exp(-i p_k x_j / hbar)
//   psi_j  = n^{-1/2} sum_k phi_k exp(+i p_k x_j / hbar)
// The x_min phase is included, so x-multiplication is exactly +i hbar d/dp.
inline SpinorField to_momentum(const SpinorField& f) {
  f.check_consistent();
  if (f.rep != Representation::Position)
    throw validation_error("to_momentum: field already in momentum space");
  SpinorField out;
  out.grid = f.grid;
  out.rep = Representation::Momentum;
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(f.n()));
  detail::dft_fwd(out.upper, f.upper);
  detail::dft_fwd(out.lower, f.lower);
  out.upper.array() *= f.grid.fwd_phase().array() * inv_sqrt_n;
  out.lower.array() *= f.grid.fwd_phase().array() * inv_sqrt_n;
  return out;
}

inline SpinorField to_position(const SpinorField& f) {
  f.check_consistent();
  if (f.rep != Representation::Momentum)
    throw validation_error("to_position: field already in position space");
  SpinorField out;
  out.grid = f.grid;
  out.rep = Representation::Position;
  const double sqrt_n = std::sqrt(static_cast<double>(f.n()));
  VecXc tmp = f.upper.cwiseProduct(f.grid.bwd_phase());
  detail::dft_inv(out.upper, tmp);
  tmp = f.lower.cwiseProduct(f.grid.bwd_phase());
  detail::dft_inv(out.lower, tmp);
  out.upper *= sqrt_n;
  out.lower *= sqrt_n;
  return out;
}

inline SpinorField in_representation(const SpinorField& f, Representation r) {
  if (f.rep == r) return f;
  return r == Representation::Momentum ? to_momentum(f) : to_position(f);
}

// L2 norm with the dx measure; by unitarity the same value in either
// representation.
inline double norm(const SpinorField& f) {
  f.check_consistent();
  return std::sqrt(f.grid.dx() *
                   (f.upper.squaredNorm() + f.lower.squaredNorm()));
}

inline cplx inner(const SpinorField& a, const SpinorField& b) {
  a.check_consistent();
  b.check_consistent();
  if (a.grid != b.grid)
    throw validation_error("inner: fields live on different grids");
  if (a.rep != b.rep)
    throw validation_error("inner: fields in different representations");
  return a.grid.dx() * (a.upper.dot(b.upper) + a.lower.dot(b.lower));
}

inline double expectation_x(const SpinorField& f) {
  SpinorField pos = in_representation(f, Representation::Position);
  double n2 = pos.upper.squaredNorm() + pos.lower.squaredNorm();
  if (n2 <= 0.0) throw validation_error("expectation_x: zero-norm field");
  double acc = (pos.grid.x_values().array() *
                (pos.upper.cwiseAbs2() + pos.lower.cwiseAbs2()).array())
                   .sum();
  return acc / n2;
}

inline double expectation_p(const SpinorField& f) {
  SpinorField mom = in_representation(f, Representation::Momentum);
  double n2 = mom.upper.squaredNorm() + mom.lower.squaredNorm();
  if (n2 <= 0.0) throw validation_error("expectation_p: zero-norm field");
  double acc = (mom.grid.p_values().array() *
                (mom.upper.cwiseAbs2() + mom.lower.cwiseAbs2()).array())
                   .sum();
  return acc / n2;
}

// exp(-i (a0 I + ax sx + ay sy + az sz))
//   = e^{-i a0} (cos r I - i sin(r)/r (ax sx + ay sy + az sz)),  r = |a|.
// The r -> 0 limit is e^{-i a0} I; sin(r)/r is evaluated directly (no
// cancellation for r > 0).
inline Mat2 pauli_exp(double a0, double ax, double ay, double az) {
  const double r = std::sqrt(ax * ax + ay * ay + az * az);
  const double co = std::cos(r);
  const double si = r == 0.0 ? 1.0 : std::sin(r) / r;
  const cplx phase(std::cos(a0), -std::sin(a0));
  Mat2 u;
  u(0, 0) = phase * cplx(co, -si * az);
  u(0, 1) = phase * cplx(-si * ay, -si * ax);
  u(1, 0) = phase * cplx(si * ay, -si * ax);
  u(1, 1) = phase * cplx(co, si * az);
  return u;
}

}  // namespace diraclab
