#pragma once

// Direct solution of the lattice scattering problem by wave matching,
// independent of the effective-Hamiltonian pipeline: plane waves in the
// leads (evanescent modes included), the finite-difference Schroedinger
// equation in the interior, amplitudes from one dense linear solve.
// Ground truth for every transmission and pole claim.

#include <vector>

#include <Eigen/Core>

#include "tbsm/coupling.hpp"
#include "tbsm/types.hpp"

namespace tbsm {

// 1D chain: psi_j = e^{ikj} + r e^{-ikj} on the left, a e^{ikj} + b e^{-ikj}
// inside the box, t e^{ikj} on the right. residual is the largest violation
// of the site equations over a window spanning both contacts.
struct ScatteringSolution1D {
  Complex r, t, a, b;
  double residual = 0.0;
};

ScatteringSolution1D solve_chain_1d(int sites, double v_left, double v_right, double k);

// 2D rectangle with two side leads: mode matching with incoming unit flux in
// one open channel and outgoing expansions over all lead modes. S is in the
// plane-wave convention, channels ordered (lead, p) over open channels.
struct LatticeSolution {
  double energy = 0.0;
  std::vector<Channel> channels;  // open channels in matrix order
  Eigen::MatrixXcd s;             // plane-wave S-matrix
  // Interior field psi(i, j) for each incidence column of s.
  std::vector<Eigen::MatrixXcd> interior;
};

LatticeSolution solve_lattice_2d(const RectGeometry& geometry, double energy);

// Resolvent-pole scan: local minima of |det(z - H(z))| on a complex window,
// Newton-polished. H(z) is assembled here from the system data with the
// resonance-sheet phase continuation; the heff module is not used.
struct PoleEstimate {
  Complex z;
  double residual = 0.0;  // |det| at the polished root, locally rescaled
};

std::vector<PoleEstimate> oracle_pole_scan(const System& system, Complex window_lo,
                                           Complex window_hi, int grid_re, int grid_im);

}  // namespace tbsm
