#pragma once

// Closed-form reference results for the small geometries: chain transmission
// and reflection, one- and two-site dots, the point-contact secular equation
// and the slab block poles. Every formula here is an exact cross-check for
// the numeric pipeline; amplitudes are in the plane-wave convention so the
// identities hold at complex-amplitude level, not just in modulus.

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "tbsm/coupling.hpp"
#include "tbsm/types.hpp"

namespace tbsm {

struct ChainAmplitudes {
  Complex t, r;
  bool decoupled = false;  // set by the v -> 0 guard (t = 0, r = -1 returned)
};

// N-site chain amplitudes, 0 < k < pi. Contains 1/v factors; at v = 0 the
// guard value is returned with `decoupled` set.
ChainAmplitudes chain_rt(int sites, double v_left, double v_right, double k);

// Single-site dot with equal contacts: t = -i v^2 sin k / (cos k - v^2 e^{ik}).
Complex dot1_transmission(double v, double k);

struct Dot2Params {
  double v_left = 1.0;
  double v_right = 1.0;
  Dot2Topology topology = Dot2Topology::SeriesSites;
};

// lambda = (v_L^2 + v_R^2) e^{ik} / 2, mu = (v_L^2 - v_R^2) e^{ik} / 2.
std::pair<Complex, Complex> dot2_lambda_mu(const Dot2Params& params, double energy);

// Pole pair: series z = -lambda +/- sqrt(1 + mu^2); shared-site
// z = -lambda +/- sqrt(1 + lambda^2). Principal square root.
std::pair<Complex, Complex> dot2_poles(const Dot2Params& params, double energy);

// Transmission amplitude through both pole factors; the shared-site topology
// has an exact zero at E = 0, the series topology only at the band edges.
Complex dot2_transmission(const Dot2Params& params, double energy);

struct PoleRoot {
  Complex z;
  double residual = 0.0;
  bool converged = true;
  bool dark = false;  // decoupled at the contact; stays at z = E_b exactly
};

// Self-consistent roots of 1 + omega(z) sum_b psi_b^2 / (z - E_b) = 0 with
// omega(z) = (v_L^2 + v_R^2) e^{ik(z)} continued on the resonance sheet.
// Levels degenerate at the contact are grouped: one shifted root per distinct
// level, the remaining combinations reported dark at E_b. One pole per state.
std::vector<PoleRoot> point_contact_pole_roots(const Eigen::VectorXd& levels,
                                               const Eigen::VectorXd& contact_amplitudes,
                                               double v_left, double v_right);

// Slab Nz = 2 block poles z = E_b - (v^2/2) e^{ik_b} +/- sqrt(1 + (v^4/4) e^{2ik_b}),
// k_b from E = -2 cos k_b + E_b.
std::pair<Complex, Complex> slab_poles(double level, double v, double energy);

// Radical of slab_poles vanishes iff v^2 = 2 and E = E_b; returns the
// residual |v^2 - 2| + |E - E_b| of that condition.
double slab_double_pole_residual(double level, double v, double energy);

}  // namespace tbsm
