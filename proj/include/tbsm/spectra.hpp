#pragma once

// Closed-system spectra of the tight-binding box and its leads, all in exact
// closed form (no numeric diagonalization, so downstream cross-checks are
// bit-stable). Energies are in units of the lead hopping, so every lead
// channel propagates on the band E - E_p in (-2, 2).

#include <vector>

#include <Eigen/Core>

#include "tbsm/types.hpp"

namespace tbsm {

// 1D hard-wall box of N sites: E_n = -2 cos(pi n/(N+1)),
// psi_n(j) = sqrt(2/(N+1)) sin(pi n j/(N+1)), vanishing at virtual sites
// 0 and N+1. Columns of `modes` are orthonormal.
struct BoxSpectrum1D {
  int sites = 0;
  Eigen::VectorXd energies;  // ascending in n = 1..N
  Eigen::MatrixXd modes;     // modes(j-1, n-1) = psi_n(j)
};

BoxSpectrum1D box_eigensystem(int sites);

struct RectState {
  int m = 0;  // x quantum number, 1..nx
  int n = 0;  // y quantum number, 1..ny
  double energy = 0.0;
};

// Separable rectangle: E_{m,n} = E_m + E_n, psi_{m,n}(i,j) = psi_m(i) psi_n(j).
// States sorted ascending by energy with (m,n)-lexicographic tie-break.
struct RectSpectrum2D {
  int nx = 0;
  int ny = 0;
  std::vector<RectState> states;
  BoxSpectrum1D x_box;
  BoxSpectrum1D y_box;

  int size() const { return static_cast<int>(states.size()); }
  // psi of state s at lattice site (i, j), 1-based.
  double psi(int s, int i, int j) const {
    return x_box.modes(i - 1, states[s].m - 1) * y_box.modes(j - 1, states[s].n - 1);
  }
  Eigen::VectorXd level_energies() const;
};

RectSpectrum2D rect_eigensystem(int nx, int ny);

// Longitudinal momentum of a lead channel from E = -2 cos k + E_p.
// Inside the band k is real in (0, pi); below it k = i kappa and above it
// k = pi + i kappa, so the phase factor e^{ik} always satisfies
// e^{ik} + e^{-ik} = -(E - E_p) on the branch |e^{ik}| <= 1, Im e^{ik} >= 0
// (decay into the lead). Band edges give e^{ik} = +1 / -1 exactly.
struct LeadMomentum {
  Complex k;
  Complex phase;  // e^{ik}
  bool open = false;
};

LeadMomentum channel_momentum(double energy, double threshold);

// Transverse modes of a straight lead of width N_L: same closed forms as the
// 1D box, one (threshold, profile) pair per channel p = 1..N_L.
struct TransverseMode {
  double threshold = 0.0;
  Eigen::VectorXd profile;
};

std::vector<TransverseMode> transverse_modes(int width);

}  // namespace tbsm
