#include <cmath>
#include <complex>

#include "doctest.h"

#include <Eigen/Eigenvalues>

#include "tbsm/coupling.hpp"
#include "tbsm/heff.hpp"

using namespace tbsm;

TEST_CASE("effective Hamiltonian closed cases") {
  SUBCASE("decoupled box is the real diagonal") {
    const System sys = chain_system(4, 0.0, 0.0);
    const EffectiveHamiltonian h = build_heff(sys, 0.3, SelfEnergyMode::AllChannels);
    const Eigen::MatrixXcd expected = sys.levels.cast<Complex>().asDiagonal();
    CHECK((h.matrix - expected).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("single site: scalar -2 v^2 e^{ik}") {
    const double v = 0.6;
    const System sys = chain_system(1, v, v);
    for (double e : {-1.2, 0.0, 0.9}) {
      const EffectiveHamiltonian h = build_heff(sys, e, SelfEnergyMode::OpenChannelsOnly);
      const Complex expected = -2.0 * v * v * channel_momentum(e, 0.0).phase;
      CHECK(std::abs(h.matrix(0, 0) - expected) < 1e-15);
    }
  }
  SUBCASE("two sites at band center: diag(-1 - i, 1 - i)") {
    const System sys = chain_system(2, 1.0, 1.0);
    const EffectiveHamiltonian h = build_heff(sys, 0.0, SelfEnergyMode::OpenChannelsOnly);
    CHECK(std::abs(h.matrix(0, 0) - Complex(-1.0, -1.0)) < 1e-14);
    CHECK(std::abs(h.matrix(1, 1) - Complex(1.0, -1.0)) < 1e-14);
    CHECK(std::abs(h.matrix(0, 1)) < 1e-14);
    CHECK(std::abs(h.matrix(1, 0)) < 1e-14);
  }
}

TEST_CASE("self-energy modes") {
  const System sys = rect_system({4, 3, {Side::Left, 0, 4, 0.8}, {Side::Right, 0, 4, 0.8}});
  SUBCASE("open-only outside every band throws") {
    CHECK_THROWS_AS(build_heff(sys, -4.5, SelfEnergyMode::OpenChannelsOnly), NoOpenChannelError);
  }
  SUBCASE("all-channels adds real evanescent terms") {
    // At E = -2.0 only the lowest transverse channel is open.
    const EffectiveHamiltonian open_only = build_heff(sys, -2.0, SelfEnergyMode::OpenChannelsOnly);
    const EffectiveHamiltonian all = build_heff(sys, -2.0, SelfEnergyMode::AllChannels);
    const Eigen::MatrixXcd diff = all.matrix - open_only.matrix;
    CHECK(diff.cwiseAbs().maxCoeff() > 1e-6);
    CHECK(diff.imag().cwiseAbs().maxCoeff() < 1e-15);  // closed channels are real
  }
  SUBCASE("wide band equals open-only at band center for a single 1D channel") {
    const System chain = chain_system(3, 0.4, 0.9);
    const EffectiveHamiltonian wb = build_heff(chain, 0.0, SelfEnergyMode::WideBand);
    const EffectiveHamiltonian oo = build_heff(chain, 0.0, SelfEnergyMode::OpenChannelsOnly);
    CHECK((wb.matrix - oo.matrix).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("complex symmetry and decay structure") {
  const std::vector<System> systems = {
      chain_system(5, 0.5, 0.5),
      chain_system(2, 1.3, 0.4),
      rect_system({4, 4, {Side::Left, 0, 5, 1.0}, {Side::Right, 1, 4, 0.7}}),
      point_contact_system(rect_eigensystem(3, 3), {2, 2}, {3, 1}, 0.8, 0.5),
      slab_face_lead_system(box_eigensystem(3).energies, 2, 1.1),
  };
  for (const System& sys : systems) {
    for (double e : {-0.9, 0.0, 0.7}) {
      for (SelfEnergyMode mode :
           {SelfEnergyMode::OpenChannelsOnly, SelfEnergyMode::AllChannels,
            SelfEnergyMode::WideBand}) {
        const EffectiveHamiltonian h = build_heff(sys, e, mode);
        CHECK((h.matrix - h.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-12);

        // Anti-Hermitian part negative semidefinite at the matrix level.
        const Eigen::MatrixXd imag_part = h.matrix.imag();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(imag_part);
        CHECK(es.eigenvalues().maxCoeff() < 1e-12);

        const PoleSet poles = eigensystem(h);
        CHECK(poles.poles.imag().maxCoeff() < 1e-12);
        CHECK(std::abs(poles.poles.sum() - h.matrix.trace()) < 1e-10);
      }
    }
  }
}

TEST_CASE("full-width leads block-diagonalize onto shifted 1D chains") {
  const int nx = 5, ny = 3;
  const double v = 0.7, energy = -0.35;
  const System rect = rect_system({nx, ny, {Side::Left, 0, ny + 1, v}, {Side::Right, 0, ny + 1, v}});
  const RectSpectrum2D spectrum = rect_eigensystem(nx, ny);
  const Eigen::MatrixXcd h2d = build_heff(rect, energy, SelfEnergyMode::AllChannels).matrix;
  const BoxSpectrum1D ybox = box_eigensystem(ny);
  for (int n = 1; n <= ny; ++n) {
    // collect the states with transverse quantum number n, ordered by m
    std::vector<int> block;
    for (int m = 1; m <= nx; ++m)
      for (int s = 0; s < spectrum.size(); ++s)
        if (spectrum.states[s].m == m && spectrum.states[s].n == n) block.push_back(s);
    const Eigen::MatrixXcd chain =
        build_heff(chain_system(nx, v, v), energy - ybox.energies(n - 1),
                   SelfEnergyMode::AllChannels)
            .matrix;
    for (int a = 0; a < nx; ++a)
      for (int b = 0; b < nx; ++b) {
        const Complex expected =
            chain(a, b) + (a == b ? Complex(ybox.energies(n - 1)) : Complex(0.0));
        CHECK(std::abs(h2d(block[a], block[b]) - expected) < 1e-13);
      }
    // no coupling between different transverse numbers
    for (int s = 0; s < spectrum.size(); ++s) {
      if (spectrum.states[s].n == n) continue;
      for (int a = 0; a < nx; ++a) CHECK(std::abs(h2d(block[a], s)) < 1e-14);
    }
  }
}

TEST_CASE("slab with a lead at every site is diagonal with poles E_b - v^2 e^{ik}") {
  const RectSpectrum2D rect = rect_eigensystem(3, 2);
  Eigen::MatrixXd site_modes(rect.size(), rect.size());
  int site = 0;
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 2; ++j, ++site)
      for (int s = 0; s < rect.size(); ++s) site_modes(site, s) = rect.psi(s, i, j);
  const double v = 0.8, energy = 0.4;
  const System sys = slab_site_leads_system(rect.level_energies(), site_modes, v);
  const Eigen::MatrixXcd h = build_heff(sys, energy, SelfEnergyMode::AllChannels).matrix;
  const Complex shift = v * v * channel_momentum(energy, 0.0).phase;
  for (int a = 0; a < rect.size(); ++a)
    for (int b = 0; b < rect.size(); ++b) {
      const Complex expected = a == b ? Complex(rect.states[a].energy) - shift : Complex(0.0);
      CHECK(std::abs(h(a, b) - expected) < 1e-13);
    }
}

TEST_CASE("eigensystem basics") {
  SUBCASE("diagonal matrix: poles are the entries, vectors the identity") {
    const System sys = chain_system(3, 0.0, 0.0);
    const PoleSet poles = eigensystem(build_heff(sys, 0.1, SelfEnergyMode::AllChannels));
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(poles.poles(i) - sys.levels(i)) < 1e-14);
      CHECK(std::abs(poles.right_vectors(i, i) - Complex(1.0, 0.0)) < 1e-14);
      CHECK(!poles.defective[i]);
    }
  }
  SUBCASE("biorthonormality of the right vectors") {
    const System sys = chain_system(6, 0.8, 0.3);
    const PoleSet poles = eigensystem(build_heff(sys, 0.45, SelfEnergyMode::AllChannels));
    const Eigen::MatrixXcd gram = poles.right_vectors.transpose() * poles.right_vectors;
    CHECK((gram - Eigen::MatrixXcd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("sign convention is deterministic") {
    const System sys = chain_system(4, 0.7, 0.2);
    const PoleSet a = eigensystem(build_heff(sys, 0.2, SelfEnergyMode::AllChannels));
    const PoleSet b = eigensystem(build_heff(sys, 0.2, SelfEnergyMode::AllChannels));
    CHECK((a.right_vectors - b.right_vectors).cwiseAbs().maxCoeff() == 0.0);
    for (int c = 0; c < 4; ++c) {
      int imax = 0;
      a.right_vectors.col(c).cwiseAbs().maxCoeff(&imax);
      CHECK(a.right_vectors(imax, c).real() > 0.0);
    }
  }
  SUBCASE("exceptional point is flagged, not fatal") {
    // Series dot at E = 0 with |mu| = 1: the 2x2 block coalesces at -lambda.
    const double vr = 0.5;
    const double vl = std::sqrt(2.0 + vr * vr);
    const System sys = chain_system(2, vl, vr);
    const PoleSet poles = eigensystem(build_heff(sys, 0.0, SelfEnergyMode::AllChannels));
    CHECK(poles.any_defective());
    CHECK(std::abs(poles.poles(0) - poles.poles(1)) < 1e-6);
    const Complex minus_lambda(0.0, -0.5 * (vl * vl + vr * vr));  // -lambda at e^{ik} = i
    CHECK(std::abs(poles.poles(0) - minus_lambda) < 1e-6);
  }
}

TEST_CASE("five-site poles cross-checked against a determinant root scan") {
  // Independent root search of det(H - z I) = 0 at fixed E: scan the
  // characteristic polynomial on a grid and polish by Newton.
  const System sys = chain_system(5, 0.5, 0.5);
  const EffectiveHamiltonian h = build_heff(sys, 1.0, SelfEnergyMode::AllChannels);
  const PoleSet poles = eigensystem(h);
  CHECK(poles.poles.imag().maxCoeff() < 0.0);

  auto det_at = [&](Complex z) {
    const Eigen::MatrixXcd m = z * Eigen::MatrixXcd::Identity(5, 5) - h.matrix;
    return Eigen::PartialPivLU<Eigen::MatrixXcd>(m).determinant();
  };
  for (int i = 0; i < 5; ++i) {
    Complex z = poles.poles(i) + Complex(3e-3, -2e-3);  // offset seed, then polish
    for (int it = 0; it < 60; ++it) {
      const double step = 1e-7 * (1.0 + std::abs(z));
      const Complex f = det_at(z);
      const Complex df = (det_at(z + step) - det_at(z - step)) / (2.0 * step);
      z -= f / df;
    }
    CHECK(std::abs(z - poles.poles(i)) < 1e-9);
  }
}

TEST_CASE("first-order pole shift at weak coupling") {
  const int n = 5;
  for (double v : {0.02, 0.05}) {
    const System sys = chain_system(n, v, v);
    const BoxSpectrum1D box = box_eigensystem(n);
    for (int level = 0; level < n; ++level) {
      const double e_n = box.energies(level);
      const PoleSet poles = eigensystem(build_heff(sys, e_n, SelfEnergyMode::OpenChannelsOnly));
      // V_nn = v^2 (psi_n(1)^2 + psi_n(N)^2), first-order pole z = E_n - V_nn e^{ik_n}
      const double vnn =
          v * v * (box.modes(0, level) * box.modes(0, level) +
                   box.modes(n - 1, level) * box.modes(n - 1, level));
      const Complex first_order = e_n - vnn * channel_momentum(e_n, 0.0).phase;
      double best = 1e300;
      for (int i = 0; i < n; ++i) best = std::min(best, std::abs(poles.poles(i) - first_order));
      CHECK(best < 5.0 * v * v * v * v);
    }
  }
}

TEST_CASE("poles move continuously in energy and coupling") {
  const System sys = chain_system(5, 0.5, 0.5);
  Complex prev[5];
  bool first = true;
  for (double e = -1.0; e <= 1.0 + 1e-12; e += 0.002) {
    const PoleSet poles = eigensystem(build_heff(sys, e, SelfEnergyMode::AllChannels));
    if (!first) {
      for (int i = 0; i < 5; ++i) {
        double nearest = 1e300;
        for (int j = 0; j < 5; ++j) nearest = std::min(nearest, std::abs(poles.poles(j) - prev[i]));
        CHECK(nearest < 0.05);
      }
    }
    for (int i = 0; i < 5; ++i) prev[i] = poles.poles(i);
    first = false;
  }
}

TEST_CASE("resonance-sheet continuation and self-consistent poles") {
  SUBCASE("continuation matches the physical phase on the real band") {
    for (double e : {-1.5, -0.2, 0.0, 1.1}) {
      const Complex x = lead_phase_continued(Complex(e, 0.0), 0.0);
      CHECK(std::abs(x - channel_momentum(e, 0.0).phase) < 1e-12);
    }
  }
  SUBCASE("below the axis the resonance sheet has |x| >= 1") {
    const Complex x = lead_phase_continued(Complex(0.3, -0.4), 0.0);
    CHECK(std::abs(x) > 1.0);
    CHECK(std::abs(x + 1.0 / x + Complex(0.3, -0.4)) < 1e-12);
  }
  SUBCASE("one-site dot pole from the fixed point") {
    const double v = 0.5;
    const SelfConsistentPole pole = solve_pole(chain_system(1, v, v), Complex(0.0, -0.1));
    CHECK(pole.converged);
    const Complex expected(0.0, -2.0 * v * v / std::sqrt(1.0 - 2.0 * v * v));
    CHECK(std::abs(pole.z - expected) < 1e-10);
  }
}
