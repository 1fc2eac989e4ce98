#pragma once

// Two-ion emulator. The simulator Hamiltonian on spin_1 (x) [spin_2 (x)]
// Fock(n_max) is
//
//   H = hbar eta (Wb e^{i phi_b} adag s+  +  Wr e^{i phi_r} a s+  + h.c.)
//     + hbar eta W2 sx_2 xhat / Delta
//     + hbar (Wc + 4 eta Wsc^2 xhat / (omega Delta)) sz_1
//
// with xhat = (adag + a) Delta and phat = i hbar (adag - a) / (2 Delta).
// The sideband pair encodes c sx phat plus the magnetic/pseudoscalar
// slopes, the ancilla sideband the electric slope, the carrier the mass
// term and the scalar drive the scalar slope. Units throughout: hbar = 1,
// Delta = 1 length unit, time in ms, angular frequencies in rad/ms.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "diraclab/core.hpp"
#include "diraclab/dynamics.hpp"
#include "diraclab/states.hpp"

namespace diraclab {

enum class AncillaMode { ReducedEigenvalue, FullQubit };

struct IonParams {
  double eta = 0.05;          // Lamb-Dicke parameter
  double omega_b = 0.0;       // blue-sideband Rabi amplitude
  double omega_r = 0.0;       // red-sideband Rabi amplitude
  double phi_b = 0.0;         // sideband phases
  double phi_r = 0.0;
  double omega_2 = 0.0;       // ancilla sideband Rabi amplitude
  double omega_carrier = 0.0; // hbar * omega_carrier = m c^2
  double omega_sc = 0.0;      // scalar drive Rabi amplitude
  double omega_trap = 1.0;    // trap frequency
  double delta = 1.0;         // ground-state size Delta
  double hbar = 1.0;
  int n_max = 128;            // Fock truncation (levels 0..n_max)
  AncillaMode ancilla_mode = AncillaMode::ReducedEigenvalue;
  int ancilla_eigenvalue = 1; // sx_2 eigenvalue in reduced mode

  void validate() const {
    if (!(eta > 0.0) || !(eta < 1.0))
      throw validation_error("IonParams: eta must be in (0, 1)");
    if (n_max < 16) throw validation_error("IonParams: n_max must be >= 16");
    if (!(delta > 0.0)) throw validation_error("IonParams: Delta must be > 0");
    if (!(omega_trap > 0.0))
      throw validation_error("IonParams: omega_trap must be > 0");
    if (!(hbar > 0.0)) throw validation_error("IonParams: hbar must be > 0");
    if (omega_b < 0.0 || omega_r < 0.0 || omega_2 < 0.0 || omega_sc < 0.0)
      throw validation_error(
          "IonParams: Rabi amplitudes must be non-negative (phases carry "
          "the sign)");
    if (ancilla_eigenvalue != 1 && ancilla_eigenvalue != -1)
      throw validation_error("IonParams: ancilla eigenvalue must be +1 or -1");
    for (double v : {omega_b, omega_r, phi_b, phi_r, omega_2, omega_carrier,
                     omega_sc})
      if (!std::isfinite(v))
        throw validation_error("IonParams: non-finite drive parameter");
  }

  std::vector<std::string> warnings() const {
    std::vector<std::string> w;
    if (eta > 0.1)
      w.push_back("eta > 0.1: outside the Lamb-Dicke validity regime");
    return w;
  }

  int dim() const {
    return (ancilla_mode == AncillaMode::FullQubit ? 4 : 2) * (n_max + 1);
  }
};

// Basis layout: reduced |s1, n> -> 2n + s1; full |s1, s2, n> ->
// 4n + 2 s1 + s2. Spin index 0 is "up" (+1 under sz).
inline int ion_index(int s1, int n) { return 2 * n + s1; }
inline int ion_index(int s1, int s2, int n) { return 4 * n + 2 * s1 + s2; }

struct IonState {
  Eigen::VectorXcd amps;
  double t = 0.0;
  int n_max = 0;
  AncillaMode mode = AncillaMode::ReducedEigenvalue;

  int fock_levels() const { return n_max + 1; }
};

// Population of the top two Fock levels: the truncation-leak indicator.
inline double truncation_leak(const IonState& st) {
  const int spins = st.mode == AncillaMode::FullQubit ? 4 : 2;
  double leak = 0.0;
  for (int n = st.n_max - 1; n <= st.n_max; ++n)
    for (int s = 0; s < spins; ++s)
      leak += std::norm(st.amps[spins * n + s]);
  return leak;
}

namespace detail {

// Writes v at (r, c) and conj(v) at (c, r); diagonal writes must be real.
inline void put_herm(Eigen::MatrixXcd& h, int r, int c, cplx v) {
  h(r, c) += v;
  if (r != c) h(c, r) += std::conj(v);
}

}  // namespace detail

inline Eigen::MatrixXcd ion_hamiltonian(const IonParams& ion) {
  ion.validate();
  const bool full = ion.ancilla_mode == AncillaMode::FullQubit;
  const int dim = ion.dim();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);

  const double hbar = ion.hbar;
  const cplx blue = hbar * ion.eta * ion.omega_b *
                    std::exp(cplx(0.0, ion.phi_b));
  const cplx red = hbar * ion.eta * ion.omega_r *
                   std::exp(cplx(0.0, ion.phi_r));
  const double carrier = hbar * ion.omega_carrier;
  // hbar 4 eta Wsc^2 xhat/(omega Delta) sz: per-quantum element
  // hbar 4 eta Wsc^2 sqrt(n+1)/omega.
  const double scalar_q =
      hbar * 4.0 * ion.eta * ion.omega_sc * ion.omega_sc / ion.omega_trap;
  // hbar eta W2 xhat/Delta: per-quantum element hbar eta W2 sqrt(n+1).
  const double ancilla_q = hbar * ion.eta * ion.omega_2;

  auto idx = [&](int s1, int s2, int n) {
    return full ? ion_index(s1, s2, n) : ion_index(s1, n);
  };
  const int s2_count = full ? 2 : 1;

  for (int n = 0; n <= ion.n_max; ++n)
    for (int s1 = 0; s1 < 2; ++s1)
      for (int s2 = 0; s2 < s2_count; ++s2)
        h(idx(s1, s2, n), idx(s1, s2, n)) += (s1 == 0 ? 1.0 : -1.0) * carrier;

  for (int n = 0; n < ion.n_max; ++n) {
    const double rt = std::sqrt(n + 1.0);
    for (int s2 = 0; s2 < s2_count; ++s2) {
      // blue: adag s+ couples |down, n> -> |up, n+1>
      detail::put_herm(h, idx(0, s2, n + 1), idx(1, s2, n), blue * rt);
      // red: a s+ couples |down, n+1> -> |up, n>
      detail::put_herm(h, idx(0, s2, n), idx(1, s2, n + 1), red * rt);
      for (int s1 = 0; s1 < 2; ++s1) {
        const double sz = s1 == 0 ? 1.0 : -1.0;
        detail::put_herm(h, idx(s1, s2, n + 1), idx(s1, s2, n),
                         sz * scalar_q * rt);
      }
    }
    for (int s1 = 0; s1 < 2; ++s1) {
      if (full) {
        // sx_2 flips s2 while xhat adds/removes a quantum.
        for (int s2 = 0; s2 < 2; ++s2)
          detail::put_herm(h, idx(s1, 1 - s2, n + 1), idx(s1, s2, n),
                           ancilla_q * rt);
      } else {
        detail::put_herm(h, idx(s1, 0, n + 1), idx(s1, 0, n),
                         ion.ancilla_eigenvalue * ancilla_q * rt);
      }
    }
  }
  return h;
}

// The ideal Dirac Hamiltonian written on the same spin (x) Fock basis,
// xhat = (adag + a) Delta, phat = i hbar (adag - a)/(2 Delta):
//   c sx phat + q v_el xhat + (m c^2 + v_sc xhat) sz
//   - q v_ps xhat sy - q v_mag xhat sx.
inline Eigen::MatrixXcd encoded_dirac_hamiltonian(const DiracParams& params,
                                                  double delta, int n_max) {
  params.validate();
  if (!(delta > 0.0))
    throw validation_error("encoded_dirac_hamiltonian: Delta must be > 0");
  if (n_max < 1)
    throw validation_error("encoded_dirac_hamiltonian: n_max must be >= 1");
  const double mc2 = params.m * params.c * params.c;
  const double q = params.q_sign;
  const int dim = 2 * (n_max + 1);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);

  for (int n = 0; n <= n_max; ++n) {
    h(ion_index(0, n), ion_index(0, n)) = mc2;
    h(ion_index(1, n), ion_index(1, n)) = -mc2;
  }
  for (int n = 0; n < n_max; ++n) {
    const double rt = std::sqrt(n + 1.0);
    const cplx kin =
        cplx(0.0, params.c * params.hbar * rt / (2.0 * delta));
    const double xq = delta * rt;  // <n+1| xhat |n>
    for (int s = 0; s < 2; ++s) {
      // c sx phat: spin flip with +i hbar sqrt(n+1)/(2 Delta) upward.
      detail::put_herm(h, ion_index(1 - s, n + 1), ion_index(s, n), kin);
      // q v_el xhat, spin diagonal.
      detail::put_herm(h, ion_index(s, n + 1), ion_index(s, n),
                       q * params.v_el * xq);
      // v_sc xhat sz.
      detail::put_herm(h, ion_index(s, n + 1), ion_index(s, n),
                       (s == 0 ? 1.0 : -1.0) * params.v_sc * xq);
      // -q v_mag xhat sx.
      detail::put_herm(h, ion_index(1 - s, n + 1), ion_index(s, n),
                       -q * params.v_mag * xq);
    }
    // -q v_ps xhat sy: <up|sy|down> = -i, <down|sy|up> = +i.
    detail::put_herm(h, ion_index(0, n + 1), ion_index(1, n),
                     cplx(0.0, q * params.v_ps * xq));
    detail::put_herm(h, ion_index(1, n + 1), ion_index(0, n),
                     cplx(0.0, -q * params.v_ps * xq));
  }
  return h;
}

struct TrapSpec {
  double eta = 0.05;
  double omega_trap = 1.0;
  double delta = 1.0;
  double hbar = 1.0;
  int n_max = 128;
};

// Forward parameter mapping. The sideband amplitudes solve
//   hbar eta beta = -q v_mag Delta + i (c hbar/(2 Delta) + q v_ps Delta)
//   hbar eta rho  = -q v_mag Delta + i (-c hbar/(2 Delta) + q v_ps Delta)
// for the adag s+ and a s+ coefficients; the kinetic-only case reduces to
// equal strengths with phases +pi/2 / -pi/2 and c = 2 eta Wb Delta.
inline IonParams map_dirac_to_ion(const DiracParams& params,
                                  const TrapSpec& trap) {
  params.validate();
  if (params.hbar != trap.hbar)
    throw validation_error("map_dirac_to_ion: hbar mismatch");
  if (params.v_sc < 0.0)
    throw validation_error(
        "map_dirac_to_ion: v_sc < 0 needs a phase-flipped scalar drive not "
        "modeled here");
  const double q = params.q_sign;
  const double he = trap.hbar * trap.eta;
  const cplx beta =
      cplx(-q * params.v_mag * trap.delta,
           params.c * trap.hbar / (2.0 * trap.delta) +
               q * params.v_ps * trap.delta) /
      he;
  const cplx rho =
      cplx(-q * params.v_mag * trap.delta,
           -params.c * trap.hbar / (2.0 * trap.delta) +
               q * params.v_ps * trap.delta) /
      he;

  IonParams ion;
  ion.eta = trap.eta;
  ion.omega_trap = trap.omega_trap;
  ion.delta = trap.delta;
  ion.hbar = trap.hbar;
  ion.n_max = trap.n_max;
  ion.omega_b = std::abs(beta);
  ion.phi_b = std::arg(beta);
  ion.omega_r = std::abs(rho);
  ion.phi_r = std::arg(rho);
  ion.omega_carrier = params.m * params.c * params.c / trap.hbar;
  ion.ancilla_mode = AncillaMode::ReducedEigenvalue;
  ion.ancilla_eigenvalue = q * params.v_el >= 0.0 ? 1 : -1;
  ion.omega_2 = std::abs(q * params.v_el) * trap.delta / he;
  ion.omega_sc =
      std::sqrt(params.v_sc * trap.omega_trap * trap.delta / (4.0 * he));
  ion.validate();
  return ion;
}

// Inverse mapping: effective Dirac parameters realized by a sideband
// configuration, for the given charge sign. Requires a consistent pair of
// sideband amplitudes (equal real parts) and a positive light-cone speed.
inline DiracParams extract_dirac_from_ion(const IonParams& ion,
                                          double q_sign = 1.0) {
  ion.validate();
  if (q_sign != 1.0 && q_sign != -1.0)
    throw validation_error("extract_dirac_from_ion: q_sign must be +1 or -1");
  const cplx beta = ion.omega_b * std::exp(cplx(0.0, ion.phi_b));
  const cplx rho = ion.omega_r * std::exp(cplx(0.0, ion.phi_r));
  const double scale =
      std::max({1.0, std::abs(beta), std::abs(rho)});
  if (std::abs(beta.real() - rho.real()) > 1e-9 * scale)
    throw validation_error(
        "extract_dirac_from_ion: sideband amplitudes unreachable (real "
        "parts of the adag/a coefficients must match)");

  DiracParams p;
  p.hbar = ion.hbar;
  p.q_sign = q_sign;
  p.c = ion.eta * ion.delta * (beta.imag() - rho.imag());
  if (!(p.c > 0.0))
    throw validation_error(
        "extract_dirac_from_ion: sidebands give non-positive c");
  const double he = ion.hbar * ion.eta;
  p.v_mag = -q_sign * he * beta.real() / ion.delta;
  p.v_ps = q_sign * he * (beta.imag() + rho.imag()) / (2.0 * ion.delta);
  p.v_el = q_sign * ion.ancilla_eigenvalue * he * ion.omega_2 / ion.delta;
  p.v_sc = 4.0 * he * ion.omega_sc * ion.omega_sc /
           (ion.omega_trap * ion.delta);
  p.m = ion.hbar * ion.omega_carrier / (p.c * p.c);
  p.validate();
  return p;
}

namespace detail {

// Rows: harmonic-oscillator eigenfunctions phi_n(x_i) for the mode with
// ground-state size Delta (phi_0 = (2 pi Delta^2)^{-1/4} e^{-x^2/4Delta^2};
// x phi_n = Delta (sqrt(n+1) phi_{n+1} + sqrt(n) phi_{n-1})).
inline Eigen::MatrixXd oscillator_basis(const Grid& grid, double delta,
                                        int n_max) {
  const int n_pts = grid.n();
  Eigen::MatrixXd basis(n_max + 1, n_pts);
  const double norm0 = std::pow(2.0 * pi * delta * delta, -0.25);
  for (int i = 0; i < n_pts; ++i) {
    const double x = grid.x(i);
    basis(0, i) = norm0 * std::exp(-x * x / (4.0 * delta * delta));
    if (n_max >= 1) basis(1, i) = x / delta * basis(0, i);
    for (int n = 1; n < n_max; ++n)
      basis(n + 1, i) = (x / delta * basis(n, i) -
                         std::sqrt(static_cast<double>(n)) * basis(n - 1, i)) /
                        std::sqrt(n + 1.0);
  }
  return basis;
}

}  // namespace detail

// Grid wavefunction -> Fock amplitudes per spinor component. The encoding
// is an isometry up to truncation; population stuck in the top two levels
// beyond 1e-4 is rejected as a representation leak.
inline IonState encode_dirac_state(const SpinorField& field,
                                   const IonParams& ion) {
  ion.validate();
  field.check_consistent();
  const SpinorField pos = in_representation(field, Representation::Position);
  const Eigen::MatrixXd basis =
      detail::oscillator_basis(pos.grid, ion.delta, ion.n_max);

  IonState st;
  st.n_max = ion.n_max;
  st.mode = AncillaMode::ReducedEigenvalue;
  st.amps = Eigen::VectorXcd::Zero(2 * (ion.n_max + 1));
  const double dx = pos.grid.dx();
  for (int n = 0; n <= ion.n_max; ++n) {
    cplx cu = 0.0, cl = 0.0;
    for (int i = 0; i < pos.grid.n(); ++i) {
      cu += basis(n, i) * pos.upper[i];
      cl += basis(n, i) * pos.lower[i];
    }
    st.amps[ion_index(0, n)] = cu * dx;
    st.amps[ion_index(1, n)] = cl * dx;
  }
  if (truncation_leak(st) > 1e-4)
    throw validation_error(
        "encode_dirac_state: representation leak in the top Fock levels "
        "exceeds 1e-4; raise n_max");
  return st;
}

// Fock amplitudes -> grid wavefunction (position representation).
inline SpinorField decode_ion_state(const IonState& st, const Grid& grid,
                                    const IonParams& ion) {
  ion.validate();
  if (st.mode != AncillaMode::ReducedEigenvalue)
    throw validation_error(
        "decode_ion_state: decode needs the reduced ancilla mode (project "
        "the ancilla first)");
  if (st.n_max != ion.n_max)
    throw validation_error("decode_ion_state: state/params n_max mismatch");
  const Eigen::MatrixXd basis =
      detail::oscillator_basis(grid, ion.delta, ion.n_max);
  SpinorField f = SpinorField::zero(grid);
  for (int n = 0; n <= ion.n_max; ++n) {
    const cplx cu = st.amps[ion_index(0, n)];
    const cplx cl = st.amps[ion_index(1, n)];
    for (int i = 0; i < grid.n(); ++i) {
      f.upper[i] += cu * basis(n, i);
      f.lower[i] += cl * basis(n, i);
    }
  }
  return f;
}

// Tensor an sx_2 eigenstate onto a reduced state / project it back out.
inline IonState embed_ancilla(const IonState& st, int eigenvalue) {
  if (st.mode != AncillaMode::ReducedEigenvalue)
    throw validation_error("embed_ancilla: state already carries the ancilla");
  if (eigenvalue != 1 && eigenvalue != -1)
    throw validation_error("embed_ancilla: eigenvalue must be +1 or -1");
  IonState out;
  out.t = st.t;
  out.n_max = st.n_max;
  out.mode = AncillaMode::FullQubit;
  out.amps = Eigen::VectorXcd::Zero(4 * (st.n_max + 1));
  const double r = 1.0 / std::sqrt(2.0);
  for (int n = 0; n <= st.n_max; ++n)
    for (int s1 = 0; s1 < 2; ++s1) {
      const cplx a = st.amps[ion_index(s1, n)];
      out.amps[ion_index(s1, 0, n)] = a * r;
      out.amps[ion_index(s1, 1, n)] = a * r * static_cast<double>(eigenvalue);
    }
  return out;
}

inline IonState project_ancilla(const IonState& st, int eigenvalue) {
  if (st.mode != AncillaMode::FullQubit)
    throw validation_error("project_ancilla: state has no ancilla");
  if (eigenvalue != 1 && eigenvalue != -1)
    throw validation_error("project_ancilla: eigenvalue must be +1 or -1");
  IonState out;
  out.t = st.t;
  out.n_max = st.n_max;
  out.mode = AncillaMode::ReducedEigenvalue;
  out.amps = Eigen::VectorXcd::Zero(2 * (st.n_max + 1));
  const double r = 1.0 / std::sqrt(2.0);
  for (int n = 0; n <= st.n_max; ++n)
    for (int s1 = 0; s1 < 2; ++s1)
      out.amps[ion_index(s1, n)] =
          r * (st.amps[ion_index(s1, 0, n)] +
               static_cast<double>(eigenvalue) * st.amps[ion_index(s1, 1, n)]);
  return out;
}

// One eigendecomposition, arbitrarily many exact propagation times.
class IonPropagator {
 public:
  explicit IonPropagator(const IonParams& ion) : hbar_(ion.hbar) {
    Eigen::MatrixXcd h = ion_hamiltonian(ion);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success)
      throw numerical_error("IonPropagator: eigendecomposition failed");
    vals_ = es.eigenvalues();
    vecs_ = es.eigenvectors();
  }

  Eigen::VectorXcd propagate(const Eigen::VectorXcd& amps, double t) const {
    if (amps.size() != vals_.size())
      throw validation_error("IonPropagator: state dimension mismatch");
    Eigen::VectorXcd modal = vecs_.adjoint() * amps;
    for (Eigen::Index i = 0; i < modal.size(); ++i)
      modal[i] *= std::exp(cplx(0.0, -vals_[i] * t / hbar_));
    return vecs_ * modal;
  }

 private:
  double hbar_;
  Eigen::VectorXd vals_;
  Eigen::MatrixXcd vecs_;
};

// Exact evolution by eigendecomposition, with truncation-leak checkpoints
// every dt of simulated time. Leak beyond 1e-3 aborts (n_max too small for
// the scenario); the norm is preserved to round-off by construction.
inline IonState ion_evolve(const IonState& st, const IonParams& ion, double t,
                           double dt = 0.01) {
  ion.validate();
  if (!(t >= 0.0)) throw validation_error("ion_evolve: t must be >= 0");
  if (!(dt > 0.0)) throw validation_error("ion_evolve: dt must be > 0");
  if ((st.mode == AncillaMode::FullQubit) !=
      (ion.ancilla_mode == AncillaMode::FullQubit))
    throw validation_error("ion_evolve: state/params ancilla mode mismatch");
  if (st.amps.size() != ion.dim())
    throw validation_error("ion_evolve: state dimension mismatch");
  if (truncation_leak(st) > 1e-4)
    throw validation_error(
        "ion_evolve: initial truncation leak already exceeds 1e-4");

  const IonPropagator prop(ion);
  IonState out = st;
  const long long checks = std::max<long long>(1, std::llround(t / dt));
  for (long long i = 1; i <= checks; ++i) {
    const double ti = t * static_cast<double>(i) / checks;
    out.amps = prop.propagate(st.amps, ti);
    out.t = st.t + ti;
    const double leak = truncation_leak(out);
    if (leak > 1e-3) {
      std::ostringstream msg;
      msg << "ion_evolve: truncation leak " << leak
          << " exceeds 1e-3 at t = " << out.t
          << " ms; n_max = " << ion.n_max << " is too small for this run";
      throw numerical_error(msg.str());
    }
  }
  return out;
}

struct FidelitySample {
  double t = 0.0;
  double fidelity = 0.0;   // |<decode(ion)|dirac>|^2, unit-normalized
  double leak = 0.0;       // ion truncation leak
  double ion_negative = 0.0;  // negative-branch fraction of the decoded state
};

// Overlap of the decoded ion evolution with the ideal grid evolution at the
// requested sample times (ascending). Both sides start from the same
// packet; the grid side advances by split-operator between samples.
inline std::vector<FidelitySample> ion_vs_dirac_fidelity(
    const Grid& grid, const DiracParams& params, const PacketSpec& packet,
    const IonParams& ion, const std::vector<double>& t_samples,
    double dirac_dt) {
  ion.validate();
  params.validate();
  if (t_samples.empty())
    throw validation_error("ion_vs_dirac_fidelity: no sample times");
  for (std::size_t i = 0; i < t_samples.size(); ++i) {
    if (t_samples[i] < 0.0 ||
        (i > 0 && t_samples[i] <= t_samples[i - 1]))
      throw validation_error(
          "ion_vs_dirac_fidelity: sample times must be ascending and >= 0");
  }
  if (ion.ancilla_mode != AncillaMode::ReducedEigenvalue)
    throw validation_error(
        "ion_vs_dirac_fidelity: needs the reduced ancilla mode");

  SpinorField psi = gaussian_packet(grid, packet, params);
  const IonState ion0 = encode_dirac_state(psi, ion);
  const IonPropagator prop(ion);
  const HamiltonianSlices slices = build_slices(grid, params);

  std::vector<FidelitySample> curve;
  curve.reserve(t_samples.size());
  double t_prev = 0.0;
  for (double t : t_samples) {
    const long long steps =
        detail::exact_step_count(t - t_prev, dirac_dt, "ion_vs_dirac_fidelity");
    if (steps > 0) {
      EvolutionSpec leg;
      leg.t_final = t - t_prev;
      leg.dt = dirac_dt;
      leg.frame_stride = std::numeric_limits<int>::max();
      psi = evolve(psi, slices, leg).field;
    }
    t_prev = t;

    IonState it = ion0;
    it.amps = prop.propagate(ion0.amps, t);
    it.t = t;
    FidelitySample s;
    s.t = t;
    s.leak = truncation_leak(it);
    if (s.leak > 1e-3) {
      std::ostringstream msg;
      msg << "ion_vs_dirac_fidelity: truncation leak " << s.leak
          << " exceeds 1e-3 at t = " << t << " ms (n_max = " << ion.n_max
          << ")";
      throw numerical_error(msg.str());
    }
    SpinorField dec = decode_ion_state(it, grid, ion);
    const double n1 = norm(dec), n2 = norm(psi);
    if (!(n1 > 0.0) || !(n2 > 0.0))
      throw numerical_error("ion_vs_dirac_fidelity: zero-norm state");
    const cplx ov = inner(dec, psi);
    s.fidelity = std::norm(ov) / (n1 * n1 * n2 * n2);
    const BranchPopulations bp = branch_population(dec, params);
    s.ion_negative = bp.negative / (bp.positive + bp.negative);
    curve.push_back(s);
  }
  return curve;
}

struct QuadraticEffectiveReport {
  double detuning = 0.0;        // Omega_2 detuning (rad/ms)
  double ratio = 0.0;           // detuning / (eta * Omega_2 sideband)
  double duration = 0.0;        // evolution time used for the fit
  double fitted_coeff = 0.0;    // xhat^2 phase coefficient per unit time
  double predicted_coeff = 0.0; // eta^2 W2^2 / (2 detuning Delta^2)
  double residual = 0.0;        // max fit residual / max accumulated phase
};

// Far-detuned ancilla drive: H = hbar eta W2 xhat sx_2/Delta +
// hbar D sz_2 commutes with xhat, so the conditioned dynamics is a pure
// phase per xhat eigenvalue. Evolve the full two-level (x) Fock system,
// read the survival phase of |up, xi> for every eigenvalue xi of the
// truncated xhat, and fit theta(xi) = a + kappa xi^2.
inline QuadraticEffectiveReport quadratic_effective_check(
    double omega_2_detuning, const IonParams& ion) {
  ion.validate();
  if (ion.ancilla_mode != AncillaMode::FullQubit)
    throw validation_error(
        "quadratic_effective_check: requires FullQubit mode");
  if (!(omega_2_detuning >= 10.0 * ion.eta * ion.omega_2))
    throw validation_error(
        "quadratic_effective_check: detuning must be >= 10 eta Omega_2");

  const int levels = ion.n_max + 1;
  const double g = ion.hbar * ion.eta * ion.omega_2 / ion.delta;  // xhat coeff

  // Truncated xhat (tridiagonal, real symmetric) eigen-decomposition.
  Eigen::MatrixXd xop = Eigen::MatrixXd::Zero(levels, levels);
  for (int n = 0; n < levels - 1; ++n) {
    const double v = ion.delta * std::sqrt(n + 1.0);
    xop(n + 1, n) = v;
    xop(n, n + 1) = v;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> xes(xop);
  if (xes.info() != Eigen::Success)
    throw numerical_error("quadratic_effective_check: xhat eigensolve failed");

  // Two-level (x) Fock Hamiltonian, basis 2n + s2.
  Eigen::MatrixXcd h =
      Eigen::MatrixXcd::Zero(2 * levels, 2 * levels);
  for (int n = 0; n < levels; ++n) {
    h(2 * n, 2 * n) = ion.hbar * omega_2_detuning;
    h(2 * n + 1, 2 * n + 1) = -ion.hbar * omega_2_detuning;
  }
  for (int n = 0; n < levels - 1; ++n) {
    const double v = ion.hbar * ion.eta * ion.omega_2 * std::sqrt(n + 1.0);
    for (int s2 = 0; s2 < 2; ++s2)
      detail::put_herm(h, 2 * (n + 1) + (1 - s2), 2 * n + s2, v);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success)
    throw numerical_error("quadratic_effective_check: eigensolve failed");

  const double xi_max = xes.eigenvalues().cwiseAbs().maxCoeff();
  const double w_max = std::hypot(omega_2_detuning, g * xi_max / ion.hbar);
  const double t = 2.0 / w_max;  // keeps every phase below pi (no wrapping)

  QuadraticEffectiveReport rep;
  rep.detuning = omega_2_detuning;
  rep.ratio = omega_2_detuning / (ion.eta * ion.omega_2);
  rep.duration = t;
  rep.predicted_coeff = ion.eta * ion.eta * ion.omega_2 * ion.omega_2 /
                        (2.0 * omega_2_detuning * ion.delta * ion.delta);

  // Survival phase of |up> (x) |xi_j> under U(t).
  Eigen::VectorXcd phases =
      (cplx(0.0, -t / ion.hbar) * es.eigenvalues().array().cast<cplx>())
          .exp()
          .matrix();
  std::vector<double> xi2(levels), theta(levels);
  for (int j = 0; j < levels; ++j) {
    Eigen::VectorXcd state = Eigen::VectorXcd::Zero(2 * levels);
    for (int n = 0; n < levels; ++n) state[2 * n] = xes.eigenvectors()(n, j);
    Eigen::VectorXcd modal = es.eigenvectors().adjoint() * state;
    const cplx amp =
        (es.eigenvectors() * modal.cwiseProduct(phases)).dot(state);
    xi2[j] = xes.eigenvalues()[j] * xes.eigenvalues()[j];
    theta[j] = -std::arg(std::conj(amp));
  }

  // Least squares theta = a + kappa xi^2.
  double s0 = levels, s1 = 0, s2 = 0, sy = 0, sxy = 0;
  for (int j = 0; j < levels; ++j) {
    s1 += xi2[j];
    s2 += xi2[j] * xi2[j];
    sy += theta[j];
    sxy += xi2[j] * theta[j];
  }
  const double det = s0 * s2 - s1 * s1;
  if (std::abs(det) < 1e-12)
    throw numerical_error("quadratic_effective_check: degenerate fit");
  const double kappa = (s0 * sxy - s1 * sy) / det;
  const double a = (s2 * sy - s1 * sxy) / det;

  double max_resid = 0.0, max_theta = 0.0;
  for (int j = 0; j < levels; ++j) {
    max_resid = std::max(max_resid, std::abs(theta[j] - a - kappa * xi2[j]));
    max_theta = std::max(max_theta, std::abs(theta[j]));
  }
  rep.fitted_coeff = kappa / t;
  rep.residual = max_theta > 0.0 ? max_resid / max_theta : 0.0;
  return rep;
}

}  // namespace diraclab
