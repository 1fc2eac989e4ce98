#pragma once

// State preparation and analysis: Gaussian packets (optionally projected
// onto an energy branch), free-particle energy projectors, branch
// populations and the charge-conjugation map.

#include <cmath>

#include "diraclab/core.hpp"
#include "diraclab/hamiltonian.hpp"

namespace diraclab {

enum class Branch { Positive, Negative, UpperComponent };

struct PacketSpec {
  double x0 = 0.0;
  double p0 = 0.0;
  double width = 1.0;  // envelope exp(-(x-x0)^2 / (4 width^2))
  Branch branch = Branch::Positive;
};

namespace detail {

// (I +/- (c p sx + m c^2 sz)/E)/2 with the degenerate m=0, p=0 crossing
// resolved by continuity from p -> 0+ (H/E -> sx).
inline Mat2 projector_with_limit(double p, const DiracParams& params,
                                 Branch branch) {
  const double cp = params.c * p;
  const double mc2 = params.m * params.c * params.c;
  const double e = std::hypot(cp, mc2);
  const double sgn = branch == Branch::Positive ? 1.0 : -1.0;
  double nx, nz;
  if (e == 0.0) {
    nx = 1.0;
    nz = 0.0;
  } else {
    nx = cp / e;
    nz = mc2 / e;
  }
  Mat2 pr;
  pr(0, 0) = 0.5 * (1.0 + sgn * nz);
  pr(0, 1) = 0.5 * sgn * nx;
  pr(1, 0) = 0.5 * sgn * nx;
  pr(1, 1) = 0.5 * (1.0 - sgn * nz);
  return pr;
}

}  // namespace detail

inline Mat2 energy_projector(double p, const DiracParams& params,
                             Branch branch) {
  params.validate();
  if (branch == Branch::UpperComponent)
    throw validation_error("energy_projector: branch must be Positive or Negative");
  if (params.m == 0.0 && p == 0.0)
    throw validation_error(
        "energy_projector: degenerate m=0, p=0 crossing has no unique "
        "projector");
  return detail::projector_with_limit(p, params, branch);
}

// Normalized Gaussian packet. For Positive/Negative the upper-component
// seed is projected per momentum mode onto the requested free-energy branch
// before normalization.
inline SpinorField gaussian_packet(const Grid& grid, const PacketSpec& spec,
                                   const DiracParams& params) {
  params.validate();
  if (!grid.valid()) throw validation_error("gaussian_packet: empty grid");
  if (!(spec.width >= 4.0 * grid.dx()))
    throw validation_error("gaussian_packet: width must be >= 4 dx");
  if (!(spec.width <= (grid.x_max() - grid.x_min()) / 8.0))
    throw validation_error(
        "gaussian_packet: width must be <= (x_max - x_min)/8");
  if (!(spec.x0 > grid.x_min() && spec.x0 < grid.x_max()))
    throw validation_error("gaussian_packet: x0 outside the grid");

  SpinorField f = SpinorField::zero(grid);
  const double hbar = grid.hbar();
  for (int i = 0; i < grid.n(); ++i) {
    const double x = grid.x(i);
    const double g = std::exp(-(x - spec.x0) * (x - spec.x0) /
                              (4.0 * spec.width * spec.width));
    const double ph = spec.p0 * x / hbar;
    f.upper[i] = g * cplx(std::cos(ph), std::sin(ph));
  }

  if (spec.branch != Branch::UpperComponent) {
    SpinorField mom = to_momentum(f);
    for (int k = 0; k < grid.n(); ++k) {
      Mat2 pr = detail::projector_with_limit(grid.p(k), params, spec.branch);
      const cplx u = mom.upper[k], l = mom.lower[k];
      mom.upper[k] = pr(0, 0) * u + pr(0, 1) * l;
      mom.lower[k] = pr(1, 0) * u + pr(1, 1) * l;
    }
    f = to_position(mom);
  }

  const double nrm = norm(f);
  if (!(nrm > 1e-12))
    throw validation_error(
        "gaussian_packet: branch projection annihilated the packet");
  f.upper /= nrm;
  f.lower /= nrm;

  // Probability mass sitting on the first/last grid point; a clean packet
  // must not touch the boundary.
  const int n = grid.n();
  const double edge_mass =
      grid.dx() * (std::norm(f.upper[0]) + std::norm(f.lower[0]) +
                   std::norm(f.upper[n - 1]) + std::norm(f.lower[n - 1]));
  if (edge_mass > 1e-10)
    throw validation_error(
        "gaussian_packet: packet overlaps the grid boundary (edge tail > "
        "1e-10)");
  return f;
}

struct BranchPopulations {
  double positive = 0.0;
  double negative = 0.0;
};

// Free-branch weights, summed per momentum mode with the dx measure, so
// positive + negative equals the squared norm.
inline BranchPopulations branch_population(const SpinorField& f,
                                           const DiracParams& params) {
  params.validate();
  SpinorField mom = in_representation(f, Representation::Momentum);
  BranchPopulations pops;
  const double mc2 = params.m * params.c * params.c;
  for (int k = 0; k < mom.n(); ++k) {
    const double cp = params.c * mom.grid.p(k);
    const double e = std::hypot(cp, mc2);
    const cplx u = mom.upper[k], l = mom.lower[k];
    const double w = std::norm(u) + std::norm(l);
    double nx = 1.0, nz = 0.0;
    if (e != 0.0) {
      nx = cp / e;
      nz = mc2 / e;
    }
    // <phi| H_p/E |phi> with H_p/E = nx sx + nz sz.
    const double h_over_e =
        nz * (std::norm(u) - std::norm(l)) + 2.0 * nx * std::real(std::conj(u) * l);
    pops.positive += 0.5 * (w + h_over_e);
    pops.negative += 0.5 * (w - h_over_e);
  }
  pops.positive *= mom.grid.dx();
  pops.negative *= mom.grid.dx();
  return pops;
}

// Projection of a field onto one free-energy branch, applied per momentum
// mode. The result is unnormalized; its squared norm is the corresponding
// branch population.
inline SpinorField project_branch(const SpinorField& f,
                                  const DiracParams& params, Branch branch) {
  params.validate();
  if (branch == Branch::UpperComponent)
    throw validation_error("project_branch: branch must be Positive or Negative");
  SpinorField mom = in_representation(f, Representation::Momentum);
  for (int k = 0; k < mom.n(); ++k) {
    const Mat2 pr = detail::projector_with_limit(mom.grid.p(k), params, branch);
    const cplx u = mom.upper[k], l = mom.lower[k];
    mom.upper[k] = pr(0, 0) * u + pr(0, 1) * l;
    mom.lower[k] = pr(1, 0) * u + pr(1, 1) * l;
  }
  return f.rep == Representation::Momentum ? mom : to_position(mom);
}

// Antiunitary charge conjugation K = C conj with C = sx: swaps components
// and conjugates. Satisfies K H(q) K^-1 = -H(-q) and K^2 = 1.
inline SpinorField charge_conjugate(const SpinorField& f) {
  SpinorField pos = in_representation(f, Representation::Position);
  SpinorField out = SpinorField::zero(pos.grid);
  out.upper = pos.lower.conjugate();
  out.lower = pos.upper.conjugate();
  return f.rep == Representation::Position ? out : to_momentum(out);
}

}  // namespace diraclab
