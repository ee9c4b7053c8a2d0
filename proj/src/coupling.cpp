#include "tbsm/coupling.hpp"

#include <cmath>
#include <stdexcept>

namespace tbsm {

FluxNormalizedCoupling flux_normalized(const CouplingMatrix& coupling, double energy) {
  FluxNormalizedCoupling out;
  out.energy = energy;
  for (int c = 0; c < coupling.channel_count(); ++c)
    if (channel_momentum(energy, coupling.channels[c].threshold).open) out.open.push_back(c);
  out.v.resize(coupling.w.rows(), static_cast<Eigen::Index>(out.open.size()));
  for (size_t c = 0; c < out.open.size(); ++c) {
    const LeadMomentum lm = channel_momentum(energy, coupling.channels[out.open[c]].threshold);
    out.v.col(static_cast<Eigen::Index>(c)) =
        coupling.w.col(out.open[c]) * std::sqrt(lm.phase.imag() / (2.0 * M_PI));
  }
  return out;
}

CouplingMatrix coupling_1d(const BoxSpectrum1D& box, double v_left, double v_right) {
  if (v_left < 0.0 || v_right < 0.0)
    throw std::invalid_argument("coupling_1d: contact strengths must be >= 0");
  CouplingMatrix cm;
  cm.w.resize(box.sites, 2);
  cm.w.col(0) = v_left * box.modes.row(0).transpose();
  cm.w.col(1) = v_right * box.modes.row(box.sites - 1).transpose();
  cm.channels = {{0, 1, 0.0, 1}, {1, 1, 0.0, -box.sites}};
  return cm;
}

System chain_system(int sites, double v_left, double v_right) {
  const BoxSpectrum1D box = box_eigensystem(sites);
  return {box.energies, coupling_1d(box, v_left, v_right)};
}

System dot2_system(Dot2Topology topology, double v_left, double v_right) {
  if (topology == Dot2Topology::SeriesSites) return chain_system(2, v_left, v_right);
  if (v_left < 0.0 || v_right < 0.0)
    throw std::invalid_argument("dot2_system: contact strengths must be >= 0");
  const BoxSpectrum1D box = box_eigensystem(2);
  System sys;
  sys.levels = box.energies;
  sys.coupling.w.resize(2, 2);
  sys.coupling.w.col(0) = v_left * box.modes.row(0).transpose();
  sys.coupling.w.col(1) = v_right * box.modes.row(0).transpose();
  sys.coupling.channels = {{0, 1, 0.0, 1}, {1, 1, 0.0, 1}};
  return sys;
}

CouplingMatrix coupling_rect2d(const RectSpectrum2D& rect, const std::vector<RectLead>& leads) {
  const int n_states = rect.size();
  int total_channels = 0;
  for (const RectLead& lead : leads) {
    if (lead.strength < 0.0)
      throw std::invalid_argument("coupling_rect2d: contact strength must be >= 0");
    if (lead.wall_low < 0 || lead.wall_high > rect.ny + 1 || lead.width() < 1)
      throw std::invalid_argument("coupling_rect2d: lead walls outside the billiard side");
    total_channels += lead.width();
  }

  CouplingMatrix cm;
  cm.w.setZero(n_states, total_channels);
  int col = 0;
  for (size_t lead_id = 0; lead_id < leads.size(); ++lead_id) {
    const RectLead& lead = leads[lead_id];
    const int attach_col = lead.side == Side::Left ? 1 : rect.nx;
    const int wave_steps = lead.side == Side::Left ? 1 : -rect.nx;
    const std::vector<TransverseMode> modes = transverse_modes(lead.width());
    for (int p = 1; p <= lead.width(); ++p, ++col) {
      const Eigen::VectorXd& phi = modes[p - 1].profile;
      for (int s = 0; s < n_states; ++s) {
        double overlap = 0.0;
        for (int j = lead.wall_low + 1; j < lead.wall_high; ++j)
          overlap += rect.y_box.modes(j - 1, rect.states[s].n - 1) * phi(j - lead.wall_low - 1);
        cm.w(s, col) =
            lead.strength * rect.x_box.modes(attach_col - 1, rect.states[s].m - 1) * overlap;
      }
      cm.channels.push_back({static_cast<int>(lead_id), p, modes[p - 1].threshold, wave_steps});
    }
  }
  return cm;
}

System rect_system(const RectGeometry& geometry) {
  if (geometry.left.side != Side::Left || geometry.right.side != Side::Right)
    throw std::invalid_argument("rect_system: leads must sit on opposite sides");
  const RectSpectrum2D rect = rect_eigensystem(geometry.nx, geometry.ny);
  return {rect.level_energies(), coupling_rect2d(rect, {geometry.left, geometry.right})};
}

CouplingMatrix coupling_point_contact(const RectSpectrum2D& rect, GridPoint left_point,
                                      GridPoint right_point, double v_left, double v_right) {
  if (v_left < 0.0 || v_right < 0.0)
    throw std::invalid_argument("coupling_point_contact: contact strengths must be >= 0");
  for (const GridPoint& pt : {left_point, right_point})
    if (pt.first < 1 || pt.first > rect.nx || pt.second < 1 || pt.second > rect.ny)
      throw std::invalid_argument("coupling_point_contact: contact point outside the billiard");
  CouplingMatrix cm;
  cm.w.resize(rect.size(), 2);
  for (int s = 0; s < rect.size(); ++s) {
    cm.w(s, 0) = v_left * rect.psi(s, left_point.first, left_point.second);
    cm.w(s, 1) = v_right * rect.psi(s, right_point.first, right_point.second);
  }
  cm.channels = {{0, 1, 0.0, 1}, {1, 1, 0.0, 1}};
  return cm;
}

System point_contact_system(const RectSpectrum2D& rect, GridPoint left_point,
                            GridPoint right_point, double v_left, double v_right) {
  return {rect.level_energies(),
          coupling_point_contact(rect, left_point, right_point, v_left, v_right)};
}

System slab_site_leads_system(const Eigen::VectorXd& levels, const Eigen::MatrixXd& site_modes,
                              double v) {
  if (v < 0.0) throw std::invalid_argument("slab_site_leads_system: strength must be >= 0");
  if (site_modes.rows() != levels.size() || site_modes.cols() != levels.size())
    throw std::invalid_argument("slab_site_leads_system: site_modes must be N x N");
  System sys;
  sys.levels = levels;
  // One channel per site j; W(b, j) = v psi_b(j).
  sys.coupling.w = v * site_modes.transpose();
  for (int j = 0; j < levels.size(); ++j)
    sys.coupling.channels.push_back({j, 1, 0.0, 1});
  return sys;
}

System slab_face_lead_system(const Eigen::VectorXd& transverse_levels, int nz, double v) {
  if (nz < 1) throw std::invalid_argument("slab_face_lead_system: nz must be >= 1");
  if (v < 0.0) throw std::invalid_argument("slab_face_lead_system: strength must be >= 0");
  const BoxSpectrum1D zbox = box_eigensystem(nz);
  const int nb = static_cast<int>(transverse_levels.size());
  System sys;
  sys.levels.resize(nb * nz);
  sys.coupling.w.setZero(nb * nz, nb);
  for (int b = 0; b < nb; ++b) {
    for (int m = 0; m < nz; ++m) {
      const int s = b * nz + m;
      sys.levels(s) = transverse_levels(b) + zbox.energies(m);
      sys.coupling.w(s, b) = v * zbox.modes(nz - 1, m);  // psi_{n_z}(N_z)
    }
    sys.coupling.channels.push_back({0, b + 1, transverse_levels(b), -nz});
  }
  return sys;
}

}  // namespace tbsm
