#include <cmath>
#include <complex>

#include "doctest.h"

#include "tbsm/analytic.hpp"
#include "tbsm/heff.hpp"
#include "tbsm/coupling.hpp"
#include "tbsm/oracle.hpp"

using namespace tbsm;

TEST_CASE("chain wave matching: perfect transmission at unit contacts") {
  for (int n : {1, 2, 5, 10}) {
    for (double k : {0.3, 1.1, M_PI / 2, 2.7}) {
      const ScatteringSolution1D sol = solve_chain_1d(n, 1.0, 1.0, k);
      CHECK(std::abs(sol.t - Complex(1.0, 0.0)) < 1e-12);
      CHECK(std::abs(sol.r) < 1e-12);
      CHECK(sol.residual < 1e-12);
    }
  }
}

TEST_CASE("chain wave matching: flux conservation and residual for generic contacts") {
  for (int n : {1, 3, 7}) {
    for (double vl : {0.3, 0.8, 1.7}) {
      for (double vr : {0.5, 1.0, 2.4}) {
        for (int i = 1; i <= 20; ++i) {
          const double k = M_PI * i / 21.0;
          const ScatteringSolution1D sol = solve_chain_1d(n, vl, vr, k);
          CHECK(std::abs(std::norm(sol.t) + std::norm(sol.r) - 1.0) < 1e-12);
          CHECK(sol.residual < 1e-11);
        }
      }
    }
  }
}

TEST_CASE("chain wave matching reproduces the interior closed forms") {
  // Eliminating the right-contact rows gives
  //   a = t (v_R - e^{-2ik}/v_R)/(1 - e^{-2ik}),
  //   b = t (v_R - 1/v_R) e^{2ikN}/(e^{-2ik} - 1).
  for (int n : {2, 4}) {
    for (double k : {0.7, 1.9}) {
      const double vl = 0.6, vr = 1.3;
      const ScatteringSolution1D sol = solve_chain_1d(n, vl, vr, k);
      const Complex e2 = std::exp(Complex(0.0, 2.0 * k));
      const Complex a_ref = sol.t * (vr - (1.0 / vr) / e2) / (1.0 - 1.0 / e2);
      const Complex b_ref = sol.t * (vr - 1.0 / vr) * std::pow(e2, n) / (1.0 / e2 - 1.0);
      CHECK(std::abs(sol.a - a_ref) < 1e-12);
      CHECK(std::abs(sol.b - b_ref) < 1e-12);
    }
  }
}

TEST_CASE("chain wave matching: decoupled box reflects with the Dirichlet phase") {
  const ScatteringSolution1D sol = solve_chain_1d(4, 0.0, 0.0, 1.0);
  CHECK(std::abs(sol.t) == 0.0);
  CHECK(std::abs(sol.r + std::exp(Complex(0.0, 2.0))) < 1e-13);
  CHECK(std::abs(sol.a) == 0.0);
  CHECK(std::abs(sol.b) == 0.0);
}

TEST_CASE("chain wave matching rejects band edges") {
  CHECK_THROWS_AS(solve_chain_1d(3, 1.0, 1.0, 0.0), BandEdgeError);
  CHECK_THROWS_AS(solve_chain_1d(3, 1.0, 1.0, M_PI), BandEdgeError);
}

TEST_CASE("2D mode matching degenerates to the 1D chain at ny = 1") {
  RectGeometry geometry;
  geometry.nx = 5;
  geometry.ny = 1;
  geometry.left = {Side::Left, 0, 2, 0.8};
  geometry.right = {Side::Right, 0, 2, 1.4};
  for (double k : {0.6, 1.3, 2.2}) {
    const double energy = -2.0 * std::cos(k);
    const LatticeSolution lat = solve_lattice_2d(geometry, energy);
    const ScatteringSolution1D chain = solve_chain_1d(5, 0.8, 1.4, k);
    REQUIRE(lat.s.rows() == 2);
    CHECK(std::abs(lat.s(0, 0) - chain.r) < 1e-12);  // r
    CHECK(std::abs(lat.s(1, 0) - chain.t) < 1e-12);  // t
    CHECK(std::abs(lat.s(0, 1) - chain.t) < 1e-12);  // t' = t
  }
}

TEST_CASE("2D mode matching: unitarity, reciprocity, separability") {
  SUBCASE("full-width leads separate into shifted 1D chains") {
    RectGeometry geometry;
    geometry.nx = 5;
    geometry.ny = 3;
    geometry.left = {Side::Left, 0, 4, 0.7};
    geometry.right = {Side::Right, 0, 4, 0.7};
    const double energy = -0.35;
    const LatticeSolution lat = solve_lattice_2d(geometry, energy);
    const std::vector<TransverseMode> modes = transverse_modes(3);
    for (size_t c = 0; c < lat.channels.size(); ++c) {
      const Channel& in = lat.channels[c];
      if (in.lead != 0) continue;
      const double shifted = energy - modes[in.mode - 1].threshold;
      const double k = std::acos(-0.5 * shifted);
      const ScatteringSolution1D chain = solve_chain_1d(5, 0.7, 0.7, k);
      for (size_t o = 0; o < lat.channels.size(); ++o) {
        const Channel& out = lat.channels[o];
        if (out.lead != 1) continue;
        if (out.mode == in.mode)
          CHECK(std::abs(lat.s(o, c) - chain.t) < 1e-12);
        else
          CHECK(std::abs(lat.s(o, c)) < 1e-12);
      }
    }
  }
  SUBCASE("partial-width leads stay unitary and symmetric") {
    RectGeometry geometry;
    geometry.nx = 6;
    geometry.ny = 6;
    geometry.left = {Side::Left, 1, 5, 1.0};   // width 3
    geometry.right = {Side::Right, 2, 6, 0.9};  // width 3
    const LatticeSolution lat = solve_lattice_2d(geometry, -0.7);
    const Eigen::MatrixXcd gram = lat.s * lat.s.adjoint();
    CHECK((gram - Eigen::MatrixXcd::Identity(lat.s.rows(), lat.s.cols())).cwiseAbs().maxCoeff() <
          1e-10);
    CHECK((lat.s - lat.s.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("pole scan: closed system has real poles at the box levels") {
  const System closed = chain_system(4, 0.0, 0.0);
  const std::vector<PoleEstimate> poles =
      oracle_pole_scan(closed, Complex(-2.2, -0.4), Complex(2.2, 0.1), 60, 24);
  REQUIRE(poles.size() == 4);
  const Eigen::VectorXd levels = box_eigensystem(4).energies;
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(poles[i].z.real() - levels(i)) < 1e-9);
    CHECK(std::abs(poles[i].z.imag()) < 1e-9);
  }
}

TEST_CASE("pole scan agrees with the one-site dot's analytic pole") {
  // Denominator of the dot transmission: cos k = v^2 e^{ik}; for v < 1/sqrt(2)
  // the resonance sits at z = -2 i v^2 / sqrt(1 - 2 v^2) on the second sheet.
  const double v = 0.5;
  const Complex expected(0.0, -2.0 * v * v / std::sqrt(1.0 - 2.0 * v * v));
  const System dot = chain_system(1, v, v);
  const std::vector<PoleEstimate> poles =
      oracle_pole_scan(dot, Complex(-1.0, -1.4), Complex(1.0, 0.05), 41, 41);
  REQUIRE(poles.size() == 1);
  CHECK(std::abs(poles[0].z - expected) < 1e-8);
  CHECK(poles[0].residual < 1e-8);
}

TEST_CASE("pole scan: one-site dot family, complex resonance and real bound pair") {
  SUBCASE("weak contacts: single resonance z = -2iv^2/sqrt(1-2v^2)") {
    for (double v : {0.3, 0.5}) {
      const System sys = chain_system(1, v, v);
      const std::vector<PoleEstimate> poles =
          oracle_pole_scan(sys, Complex(-3.0, -2.5), Complex(3.0, 0.05), 81, 61);
      REQUIRE(poles.size() == 1);
      const Complex expected(0.0, -2.0 * v * v / std::sqrt(1.0 - 2.0 * v * v));
      CHECK(std::abs(poles[0].z - expected) < 1e-9);
    }
  }
  SUBCASE("strong contacts: the resonance trades for a real pair outside the band") {
    const double v = 0.9;
    const System sys = chain_system(1, v, v);
    const std::vector<PoleEstimate> poles =
        oracle_pole_scan(sys, Complex(-3.0, -2.5), Complex(3.0, 0.05), 81, 61);
    REQUIRE(poles.size() == 2);
    const double expected = 2.0 * v * v / std::sqrt(2.0 * v * v - 1.0);
    CHECK(std::abs(poles[0].z - Complex(-expected, 0.0)) < 1e-9);
    CHECK(std::abs(poles[1].z - Complex(expected, 0.0)) < 1e-9);
  }
}

TEST_CASE("fixed-energy determinant minima of the series dot merge as |mu| -> 1") {
  // At fixed E = 0 the characteristic determinant of the 2x2 effective
  // Hamiltonian has two roots that coalesce when |mu| reaches 1.
  const double vr = 0.5;
  auto separation = [&](double abs_mu) {
    const double vl = std::sqrt(2.0 * abs_mu + vr * vr);
    const Eigen::MatrixXcd h =
        build_heff(chain_system(2, vl, vr), 0.0, SelfEnergyMode::AllChannels).matrix;
    auto det_at = [&](Complex z) {
      return (z - h(0, 0)) * (z - h(1, 1)) - h(0, 1) * h(1, 0);
    };
    // polish the two roots from quadratic seeds
    const Complex mean = 0.5 * (h(0, 0) + h(1, 1));
    Complex roots[2] = {mean + Complex(0.7, 0.0), mean - Complex(0.7, 0.0)};
    for (Complex& z : roots)
      for (int it = 0; it < 80; ++it) {
        const double step = 1e-7 * (1.0 + std::abs(z));
        const Complex df = (det_at(z + step) - det_at(z - step)) / (2.0 * step);
        z -= det_at(z) / df;
      }
    return std::abs(roots[0] - roots[1]);
  };
  const double d_far = separation(0.80);
  const double d_near = separation(0.98);
  const double d_critical = separation(1.0);
  CHECK(d_near < d_far);
  CHECK(d_critical < 1e-6);
}
