#pragma once

// Billiard-to-lead coupling matrices W for every geometry in scope, plus the
// assembled System (closed-level energies + W + channel table) consumed by
// the effective-Hamiltonian and S-matrix layers.
//
// W entries carry the contact strength v_C and the spatial overlap only; the
// energy dependence (flux factors sqrt(|sin k_p|/2pi) and the e^{ik_p}
// self-energy phases) is applied downstream, so one W serves all energies.
//
// Channel ordering contract: channels are sorted by (lead id, transverse
// index p ascending). The S-matrix layout depends on this ordering.

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "tbsm/spectra.hpp"
#include "tbsm/types.hpp"

namespace tbsm {

struct Channel {
  int lead = 0;            // lead id (0 = left/input, 1 = right/output, ...)
  int mode = 1;            // transverse index p within the lead, 1-based
  double threshold = 0.0;  // E_p
  // Plane-wave phase reference of this channel's lead: the wave-convention
  // S-matrix applies u = i e^{i k_p * wave_steps} per channel. Leads attached
  // at the first column use +1; a lead at column Nx uses -Nx; point/face
  // contacts use the lead-local convention +1 (or -Nz for a face at Nz).
  int wave_steps = 1;
};

struct CouplingMatrix {
  Eigen::MatrixXd w;              // N_states x K, channel order as `channels`
  std::vector<Channel> channels;  // sorted by (lead, mode)

  int state_count() const { return static_cast<int>(w.rows()); }
  int channel_count() const { return static_cast<int>(w.cols()); }
};

// Energy-evaluated coupling with the flux factor sqrt(|sin k_p|/2pi) folded
// in; defined column-by-column for open channels only.
struct FluxNormalizedCoupling {
  double energy = 0.0;
  Eigen::MatrixXd v;           // N_states x K_open
  std::vector<int> open;       // column c maps to channel index open[c]
};

struct System {
  Eigen::VectorXd levels;  // closed-billiard energies E_b
  CouplingMatrix coupling;

  int size() const { return static_cast<int>(levels.size()); }
};

FluxNormalizedCoupling flux_normalized(const CouplingMatrix& coupling, double energy);

// --- 1D chain -------------------------------------------------------------

// W_{n,L} = v_L psi_n(1), W_{n,R} = v_R psi_n(N). K = 2.
CouplingMatrix coupling_1d(const BoxSpectrum1D& box, double v_left, double v_right);
System chain_system(int sites, double v_left, double v_right);

// --- two-site dot -----------------------------------------------------------

enum class Dot2Topology {
  SeriesSites,  // contacts on opposite sites (the N = 2 chain)
  SharedSite,   // both contacts on the same site
};

System dot2_system(Dot2Topology topology, double v_left, double v_right);

// --- 2D rectangle with side leads ------------------------------------------

enum class Side { Left, Right };

// Lead attached to a side of the rectangle, wall rows at wall_low/wall_high
// (exclusive): lead rows are wall_low+1 .. wall_high-1, width
// N_L = wall_high - wall_low - 1. Full width is wall_low = 0,
// wall_high = ny + 1.
struct RectLead {
  Side side = Side::Left;
  int wall_low = 0;
  int wall_high = 0;
  double strength = 1.0;

  int width() const { return wall_high - wall_low - 1; }
};

struct RectGeometry {
  int nx = 0;
  int ny = 0;
  RectLead left;
  RectLead right;
};

// Per-channel overlaps W((m,n),(C,p)) = v_C psi_m(attach column)
// * sum_j psi_n(j) phi_p(j) over the lead rows.
CouplingMatrix coupling_rect2d(const RectSpectrum2D& rect, const std::vector<RectLead>& leads);
System rect_system(const RectGeometry& geometry);

// --- point contacts ---------------------------------------------------------

using GridPoint = std::pair<int, int>;  // (i, j), 1-based

// Two 1D leads touching interior points: W(b, C) = v_C psi_b(j_C). K = 2.
CouplingMatrix coupling_point_contact(const RectSpectrum2D& rect, GridPoint left_point,
                                      GridPoint right_point, double v_left, double v_right);
System point_contact_system(const RectSpectrum2D& rect, GridPoint left_point,
                            GridPoint right_point, double v_left, double v_right);

// --- 3D slab ----------------------------------------------------------------

// Case (a): one 1D lead per billiard site, coupling v psi_b(j) in the state
// basis; W W^T = v^2 I, so the effective Hamiltonian is diagonal.
System slab_site_leads_system(const Eigen::VectorXd& levels, const Eigen::MatrixXd& site_modes,
                              double v);

// Case (b): one face lead whose transverse modes coincide with the billiard's
// transverse states. States are (b, n_z), channels are b with threshold E_b,
// and W((b,n_z), b') = v psi_{n_z}(N_z) delta_{b b'}.
System slab_face_lead_system(const Eigen::VectorXd& transverse_levels, int nz, double v);

}  // namespace tbsm
