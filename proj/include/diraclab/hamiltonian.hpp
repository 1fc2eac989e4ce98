#pragma once

// Hamiltonian assembly. The operator is kept as two families of 2x2 slices:
// one per grid point (everything diagonal in x) and one per momentum bin
// (the kinetic term, diagonal in p):
//
//   X_i = q v_el x_i I + (m c^2 + v_sc x_i) sz - q v_ps x_i sy - q v_mag x_i sx
//   P_k = c p_k sx
//
// The mass term rides with the position slices. A dense 2n x 2n matrix
// (component-major ordering: [upper block; lower block]) can be materialized
// for spectra and small oracle problems.

#include <Eigen/Dense>

#include "diraclab/core.hpp"

namespace diraclab {

struct HamiltonianSlices {
  Grid grid;
  DiracParams params;
  // Pauli coefficients of X_i, energy units.
  VecXd a0, ax, ay, az;
  // Kinetic coefficient c * p_k, DFT bin order.
  VecXd kin;

  Mat2 x_slice(int i) const {
    Mat2 h;
    h(0, 0) = a0[i] + az[i];
    h(0, 1) = cplx(ax[i], -ay[i]);
    h(1, 0) = cplx(ax[i], ay[i]);
    h(1, 1) = a0[i] - az[i];
    return h;
  }

  Mat2 p_slice(int k) const { return kin[k] * sigma_x(); }
};

inline HamiltonianSlices build_slices(const Grid& grid,
                                      const DiracParams& params) {
  params.validate();
  if (!grid.valid()) throw validation_error("build_slices: empty grid");
  if (params.hbar != grid.hbar())
    throw validation_error("build_slices: params.hbar != grid.hbar");
  HamiltonianSlices s;
  s.grid = grid;
  s.params = params;
  const double q = params.q_sign;
  const double mc2 = params.m * params.c * params.c;
  const VecXd& x = grid.x_values();
  s.a0 = q * params.v_el * x;
  s.az = VecXd::Constant(grid.n(), mc2) + params.v_sc * x;
  s.ay = -q * params.v_ps * x;
  s.ax = -q * params.v_mag * x;
  s.kin = params.c * grid.p_values();
  // The Nyquist bin is its own image under p -> -p on the DFT lattice, so an
  // odd operator like c p sx cannot act antisymmetrically on it. Zeroing that
  // sample (the standard convention for odd-order spectral derivatives) keeps
  // charge conjugation exact on the lattice and is invisible to any state
  // resolved by the grid.
  s.kin[grid.n() / 2] = 0.0;
  return s;
}

// H applied to a position-representation field: pointwise X plus the kinetic
// term routed through momentum space. Input in either representation; output
// matches the input representation.
inline SpinorField apply_hamiltonian(const HamiltonianSlices& s,
                                     const SpinorField& f) {
  f.check_consistent();
  if (f.grid != s.grid)
    throw validation_error("apply_hamiltonian: field grid != slice grid");
  const SpinorField pos = in_representation(f, Representation::Position);
  SpinorField out = SpinorField::zero(s.grid);

  VecXc diag_u = (s.a0 + s.az).cast<cplx>();
  VecXc diag_l = (s.a0 - s.az).cast<cplx>();
  VecXc off_u = s.ax.cast<cplx>() - cplx(0, 1) * s.ay.cast<cplx>();
  out.upper = diag_u.cwiseProduct(pos.upper) + off_u.cwiseProduct(pos.lower);
  out.lower = off_u.conjugate().cwiseProduct(pos.upper) +
              diag_l.cwiseProduct(pos.lower);

  SpinorField mom = to_momentum(pos);
  // c p sx swaps components.
  VecXc kin_c = s.kin.cast<cplx>();
  VecXc ku = kin_c.cwiseProduct(mom.lower);
  VecXc kl = kin_c.cwiseProduct(mom.upper);
  mom.upper = std::move(ku);
  mom.lower = std::move(kl);
  SpinorField kin_pos = to_position(mom);
  out.upper += kin_pos.upper;
  out.lower += kin_pos.lower;

  return f.rep == Representation::Position ? out : to_momentum(out);
}

// Vectorization convention used by dense operators: component-major, upper
// amplitudes in rows [0, n), lower in [n, 2n).
inline VecXc to_dense_vector(const SpinorField& f) {
  f.check_consistent();
  VecXc v(2 * f.n());
  v.head(f.n()) = f.upper;
  v.tail(f.n()) = f.lower;
  return v;
}

inline SpinorField from_dense_vector(const Grid& g, const VecXc& v,
                                     Representation rep) {
  if (v.size() != 2 * g.n())
    throw validation_error("from_dense_vector: length mismatch");
  SpinorField f;
  f.grid = g;
  f.rep = rep;
  f.upper = v.head(g.n());
  f.lower = v.tail(g.n());
  return f;
}

// Dense 2n x 2n Hamiltonian. The kinetic block F^dag diag(c p) F depends only
// on j - l, so it is assembled as a circulant from one inverse DFT instead of
// an O(n^3) triple product.
inline Eigen::MatrixXcd build_dense(const HamiltonianSlices& s) {
  const int n = s.grid.n();
  if (n > 4096)
    throw validation_error(
        "build_dense: refusing grids beyond 4096 points (dense budget)");
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2 * n, 2 * n);

  VecXc kin_c = s.kin.cast<cplx>();
  VecXc w;
  detail::dft_inv(w, kin_c);  // w_d = (1/n) sum_k c p_k exp(+2 pi i k d / n)
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) {
      const cplx kjl = w[(j - l + n) % n];
      h(j, n + l) += kjl;
      h(n + j, l) += kjl;
    }
  }

  for (int i = 0; i < n; ++i) {
    h(i, i) += cplx(s.a0[i] + s.az[i], 0);
    h(n + i, n + i) += cplx(s.a0[i] - s.az[i], 0);
    h(i, n + i) += cplx(s.ax[i], -s.ay[i]);
    h(n + i, i) += cplx(s.ax[i], s.ay[i]);
  }
  return h;
}

inline Eigen::MatrixXcd dense_hamiltonian(const Grid& grid,
                                          const DiracParams& params) {
  return build_dense(build_slices(grid, params));
}

}  // namespace diraclab
