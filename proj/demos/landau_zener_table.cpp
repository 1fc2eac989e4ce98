// Klein tunneling as a Landau-Zener process: each momentum mode of a packet
// in a linear electric potential sweeps through an avoided crossing of the
// two energy branches. Compares the closed-form transition probability
// exp(-pi m^2 c^4 / (hbar c |v_el|)) with a direct integration of one mode.

#include <cstdio>

#include "diraclab/diraclab.hpp"

int main() {
  using namespace diraclab;

  const double p_start = 15.0;  // sweep p from +p_start down to -p_start
  std::printf("# m    closed_form    one_mode_numeric\n");
  for (double m : {0.0, 0.25, 0.5, 0.75, 1.0, 1.25}) {
    DiracParams params;
    params.m = m;
    params.v_el = 1.0;

    // In the comoving frame p(t) = p_start - v_el * t.
    const double t_total = 2.0 * p_start / params.v_el;
    const Mat2 u = lz_mode_solve(p_start, params, 0.0, t_total, 1e-3);

    // Start on the positive branch, ask for the negative-branch weight at
    // the end of the sweep.
    const Mat2 pin = m > 0.0 ? energy_projector(p_start, params, Branch::Positive)
                             : (Mat2() << 1, 0, 0, 0).finished();
    Eigen::Vector2cd v0 = pin.col(0).normalized();
    if (m > 0.0 && pin.col(0).norm() < 0.5) v0 = pin.col(1).normalized();
    const Eigen::Vector2cd v1 = u * v0;

    double tunneled = 1.0;
    if (m > 0.0) {
      const Mat2 pneg = energy_projector(-p_start, params, Branch::Negative);
      tunneled = (pneg * v1).squaredNorm();
    }
    std::printf("%5.2f   %.6f       %.6f\n", m, lz_probability(params),
                tunneled);
  }
  return 0;
}
