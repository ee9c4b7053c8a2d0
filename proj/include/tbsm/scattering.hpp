#pragma once

// Multichannel S-matrix, transmission, Landauer conductance and the interior
// scattering wavefunction, computed by resolvent inversion of Q = E - H_eff
// and, as an independent route, by pole expansion over the biorthogonal
// eigensystem.
//
// Two S-matrix conventions are carried side by side:
//  - `s`: standing-wave channel basis. Identity when all contacts vanish.
//  - `s_wave`: plane-wave amplitudes, per-channel map u = i e^{i k * steps}
//    applied on both sides. Its t/r blocks equal the wave-matching amplitudes
//    of the direct lattice solution (oracle) and the closed chain forms.
// Both are unitary and symmetric on the open-channel space.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "tbsm/coupling.hpp"
#include "tbsm/heff.hpp"
#include "tbsm/types.hpp"

namespace tbsm {

struct SMatrixResult {
  double energy = 0.0;
  SelfEnergyMode mode = SelfEnergyMode::AllChannels;
  std::vector<int> open;          // open channel indices into the system table
  std::vector<Channel> channels;  // the open channels, in matrix order
  Eigen::MatrixXcd s;             // standing-wave convention
  Eigen::MatrixXcd s_wave;        // plane-wave convention

  // Sub-block of s_wave mapping incoming lead `from` to outgoing lead `to`
  // (reflection blocks when to == from).
  Eigen::MatrixXcd wave_block(int to_lead, int from_lead) const;
  // Landauer sum of |t|^2 over the (to, from) transmission block.
  double conductance(int from_lead = 0, int to_lead = 1) const;
};

SMatrixResult smatrix(const System& system, double energy, SelfEnergyMode mode);

// S-matrix element in the plane-wave convention from the pole expansion
// S = delta - i * sum_l V_l V_l / (E - z_l) over the biorthogonal set.
// Refuses defective pole sets (the expansion assumes diagonalizability);
// the resolvent path in smatrix() stays exact there.
Complex transmission_pole_expansion(const System& system, double energy, const PoleSet& poles,
                                    int channel_in, int channel_out);

struct SweepRow {
  double energy = 0.0;
  double k_first_open = 0.0;  // longitudinal momentum of the lowest open channel
  int open_count = 0;
  double conductance = 0.0;
  bool excluded = false;       // band-edge guard: min open |sin k| < 1e-6
  std::vector<double> t2;      // |t|^2 per (to, from) channel pair; NaN if closed
  std::vector<double> phase;   // arg t per pair; NaN if closed
};

struct SweepTable {
  int from_lead = 0;
  int to_lead = 1;
  std::vector<std::string> pair_labels;  // e.g. "t[2<-1]"
  std::vector<SweepRow> rows;
};

// Transmission sweep over an energy grid; rows at energies with no open
// channel report zero conductance with open_count = 0, and points inside
// 1e-6 of a band edge are flagged excluded rather than dropped.
SweepTable conductance_sweep(const System& system, const Eigen::VectorXd& grid,
                             SelfEnergyMode mode, int from_lead = 0, int to_lead = 1,
                             int threads = 1);

struct InteriorWavefunction {
  Eigen::VectorXcd billiard_coefficients;  // f_b over closed-billiard states
  Eigen::VectorXcd pole_coefficients;      // f_lambda over H_eff eigenstates
  bool pole_expansion_valid = true;        // false near defective poles
};

// Interior response to a unit standing-wave excitation in one open channel:
// f = Q^{-1} V(:, channel), plus the same expansion over H_eff eigenstates.
InteriorWavefunction interior_wavefunction(const System& system, double energy,
                                           SelfEnergyMode mode, int channel);

// Lattice samples sum_b f_b psi_b(x) of an interior expansion.
Eigen::VectorXcd sample_interior(const BoxSpectrum1D& box, const Eigen::VectorXcd& f);
Eigen::MatrixXcd sample_interior(const RectSpectrum2D& rect, const Eigen::VectorXcd& f);

}  // namespace tbsm
