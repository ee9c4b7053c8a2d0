#pragma once

// Energy-dependent non-Hermitian effective Hamiltonian
//     H(E) = diag(E_b) - sum_c e^{ik_c(E)} w_c w_c^T
// and its biorthogonal eigensystem. H is complex symmetric by construction;
// its eigenvalues are the S-matrix poles (Re z = resonance position,
// -2 Im z = width).

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "tbsm/coupling.hpp"
#include "tbsm/types.hpp"

namespace tbsm {

enum class SelfEnergyMode {
  OpenChannelsOnly,  // sum over propagating channels only
  AllChannels,       // evanescent channels included (real e^{ik} terms)
  WideBand,          // e^{ik_p} ~ -(E - E_p)/2 + i for every channel
};

struct EffectiveHamiltonian {
  Eigen::MatrixXcd matrix;
  double energy = 0.0;
  SelfEnergyMode mode = SelfEnergyMode::AllChannels;
};

EffectiveHamiltonian build_heff(const System& system, double energy, SelfEnergyMode mode);

// Eigensystem with biorthogonal (transpose, non-conjugated) normalization:
// columns of right_vectors satisfy v^T v = 1 with the sign fixed so the
// largest-magnitude component has positive real part. Poles sorted by
// (Re, Im) ascending. Eigenvalue pairs closer than the defect tolerance
// |z_i - z_j| < 1e-6 (1 + |z_i|), and vectors whose transpose norm nearly
// vanishes (self-orthogonal, the exceptional-point signature), are flagged
// defective rather than rejected.
struct PoleSet {
  Eigen::VectorXcd poles;
  Eigen::MatrixXcd right_vectors;
  std::vector<bool> defective;

  bool any_defective() const;
};

PoleSet eigensystem(const EffectiveHamiltonian& heff);

// --- self-consistent poles ---------------------------------------------------

// Continuation of e^{ik} to complex z on the resonance sheet: the root of
// x + 1/x = -(z - E_p) with |x| >= 1, i.e. the continuation of the in-band
// physical values through the band cut into the lower half-plane.
Complex lead_phase_continued(Complex z, double threshold);

// H with every channel's phase continued to complex z (all channels).
Eigen::MatrixXcd build_heff_continued(const System& system, Complex z);

// Solves z = eig(H(z)) by eigenvalue-tracking fixed point from `seed` with
// damping, then a Newton polish on det(z - H(z)). residual is the distance
// from z to the nearest eigenvalue of H(z).
struct SelfConsistentPole {
  Complex z;
  double residual = 0.0;
  bool converged = false;
  int iterations = 0;
};

SelfConsistentPole solve_pole(const System& system, Complex seed);

}  // namespace tbsm
