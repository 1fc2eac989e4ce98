#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "diraclab/core.hpp"
#include "support/oracles.hpp"

using namespace diraclab;

TEST_CASE("grid layout and lattices", "[core]") {
  const Grid g = grid_new(64, -8.0, 8.0);
  CHECK(g.n() == 64);
  CHECK(g.dx() == Catch::Approx(0.25).epsilon(1e-14));
  // dp = 2 pi hbar / L with L = 16.
  CHECK(g.dp() == Catch::Approx(0.39269908169872414).epsilon(1e-14));
  CHECK(g.x(0) == Catch::Approx(-8.0).epsilon(1e-14));
  CHECK(g.x(63) == Catch::Approx(8.0 - 0.25).epsilon(1e-14));
  // Sorted momentum lattice spans [-pi hbar/dx, pi hbar/dx).
  CHECK(g.p_sorted(0) == Catch::Approx(-12.566370614359172).epsilon(1e-14));
  CHECK(g.p_sorted(32) == Catch::Approx(0.0).margin(1e-14));
  CHECK(g.p_sorted(63) ==
        Catch::Approx(12.566370614359172 - 0.39269908169872414)
            .epsilon(1e-13));

  CHECK_THROWS_AS(grid_new(63, -8.0, 8.0), validation_error);
  CHECK_THROWS_AS(grid_new(4, -8.0, 8.0), validation_error);
  CHECK_THROWS_AS(grid_new(64, 8.0, -8.0), validation_error);
}

TEST_CASE("fourier round trip is the identity", "[core]") {
  const Grid g = grid_new(128, -10.0, 10.0);
  const SpinorField f = oracle::random_field(g, 17u);
  const SpinorField back = to_position(to_momentum(f));
  double err = 0.0;
  for (int i = 0; i < g.n(); ++i) {
    err = std::max(err, std::abs(back.upper[i] - f.upper[i]));
    err = std::max(err, std::abs(back.lower[i] - f.lower[i]));
  }
  CHECK(err < 1e-12);
  CHECK(norm(to_momentum(f)) == Catch::Approx(norm(f)).epsilon(1e-12));
}

TEST_CASE("plane wave concentrates on a single momentum bin", "[core]") {
  const Grid g = grid_new(64, -8.0, 8.0);
  const int k_sorted = 41;  // arbitrary interior bin
  const double pk = g.p_sorted(k_sorted);

  SpinorField f = SpinorField::zero(g, Representation::Position);
  const double amp = 1.0 / std::sqrt(g.n() * g.dx());
  for (int i = 0; i < g.n(); ++i)
    f.upper[i] = amp * std::exp(cplx(0.0, pk * g.x(i) / g.hbar()));
  REQUIRE(norm(f) == Catch::Approx(1.0).epsilon(1e-12));

  const SpinorField m = to_momentum(f);
  for (int s = 0; s < g.n(); ++s) {
    const double w = std::abs(m.upper[g.sorted_to_dft(s)]);
    if (s == k_sorted)
      CHECK(w == Catch::Approx(1.0 / std::sqrt(g.dx())).epsilon(1e-10));
    else
      CHECK(w < 1e-12);
  }
}

TEST_CASE("gaussian matches its analytic fourier transform", "[core]") {
  const Grid g = grid_new(256, -16.0, 16.0);
  const double x0 = 1.5, p0 = 2.0, w = 1.0, hbar = g.hbar();

  SpinorField f = SpinorField::zero(g, Representation::Position);
  const double nrm = std::pow(2.0 * pi * w * w, -0.25);
  for (int i = 0; i < g.n(); ++i) {
    const double x = g.x(i);
    f.upper[i] = nrm *
                 std::exp(cplx(-(x - x0) * (x - x0) / (4.0 * w * w),
                               p0 * (x - x0) / hbar));
  }
  REQUIRE(norm(f) == Catch::Approx(1.0).epsilon(1e-9));

  // Continuum transform: phi(p) = (2 w^2/(pi hbar^2))^(1/4)
  //   * exp(-w^2 (p-p0)^2 / hbar^2) * exp(-i p x0 / hbar).
  // A unitary-DFT bin holds phi(p_k) * sqrt(dp/dx).
  const SpinorField m = to_momentum(f);
  const double scale = std::sqrt(g.dp() / g.dx());
  double err = 0.0;
  for (int s = 0; s < g.n(); ++s) {
    const double p = g.p_sorted(s);
    const cplx expected =
        std::pow(2.0 * w * w / (pi * hbar * hbar), 0.25) *
        std::exp(cplx(-w * w * (p - p0) * (p - p0) / (hbar * hbar),
                      -p * x0 / hbar)) *
        scale;
    err = std::max(err, std::abs(m.upper[g.sorted_to_dft(s)] - expected));
  }
  CHECK(err < 1e-6);

  CHECK(expectation_x(f) == Catch::Approx(x0).margin(1e-9));
  CHECK(expectation_p(f) == Catch::Approx(p0).margin(1e-9));
}

TEST_CASE("pauli_exp equals the taylor-series exponential", "[core]") {
  std::mt19937 rng(2024u);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a0 = dist(rng), ax = dist(rng), ay = dist(rng),
                 az = dist(rng);
    const Mat2 u = pauli_exp(a0, ax, ay, az);

    Mat2 h = a0 * Mat2::Identity() + ax * sigma_x() + ay * sigma_y() +
             az * sigma_z();
    const Eigen::MatrixXcd ref = oracle::expm_taylor(cplx(0.0, -1.0) * h);
    CHECK((u - ref).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((u.adjoint() * u - Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-14);
  }
  // Tiny rotation: sinc branch.
  const Mat2 u = pauli_exp(0.0, 1e-12, 0.0, 0.0);
  CHECK(std::abs(u(0, 1) - cplx(0.0, -1e-12)) < 1e-24);
  CHECK(std::abs(u(0, 0) - 1.0) < 1e-15);
}

TEST_CASE("inner product and norm are consistent", "[core]") {
  const Grid g = grid_new(64, -8.0, 8.0);
  const SpinorField a = oracle::random_field(g, 3u);
  const SpinorField b = oracle::random_field(g, 4u);
  CHECK(std::abs(inner(a, a).real() - 1.0) < 1e-12);
  CHECK(std::abs(inner(a, a).imag()) < 1e-14);
  CHECK(std::abs(inner(a, b) - std::conj(inner(b, a))) < 1e-14);
  // Parseval: inner product invariant under the representation change.
  CHECK(std::abs(inner(to_momentum(a), to_momentum(b)) - inner(a, b)) <
        1e-12);
}

TEST_CASE("parallel and serial reductions agree", "[core]") {
  std::vector<double> out(257, 0.0);
  detail::parallel_for(
      out.size(), [&](std::size_t i) { out[i] = std::sqrt(double(i)); },
      false);
  std::vector<double> ref(257, 0.0);
  detail::parallel_for(
      ref.size(), [&](std::size_t i) { ref[i] = std::sqrt(double(i)); },
      true);
  CHECK(out == ref);
}
