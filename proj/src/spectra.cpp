#include "tbsm/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tbsm {

BoxSpectrum1D box_eigensystem(int sites) {
  if (sites < 1) throw std::invalid_argument("box_eigensystem: sites must be >= 1");
  BoxSpectrum1D box;
  box.sites = sites;
  box.energies.resize(sites);
  box.modes.resize(sites, sites);
  const double norm = std::sqrt(2.0 / (sites + 1));
  for (int n = 1; n <= sites; ++n) {
    box.energies(n - 1) = -2.0 * std::cos(M_PI * n / (sites + 1));
    for (int j = 1; j <= sites; ++j)
      box.modes(j - 1, n - 1) = norm * std::sin(M_PI * n * j / (sites + 1));
  }
  return box;
}

Eigen::VectorXd RectSpectrum2D::level_energies() const {
  Eigen::VectorXd e(size());
  for (int s = 0; s < size(); ++s) e(s) = states[s].energy;
  return e;
}

RectSpectrum2D rect_eigensystem(int nx, int ny) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("rect_eigensystem: grid sizes must be >= 1");
  RectSpectrum2D rect;
  rect.nx = nx;
  rect.ny = ny;
  rect.x_box = box_eigensystem(nx);
  rect.y_box = box_eigensystem(ny);
  rect.states.reserve(static_cast<size_t>(nx) * ny);
  for (int m = 1; m <= nx; ++m)
    for (int n = 1; n <= ny; ++n)
      rect.states.push_back({m, n, rect.x_box.energies(m - 1) + rect.y_box.energies(n - 1)});
  std::sort(rect.states.begin(), rect.states.end(), [](const RectState& a, const RectState& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    if (a.m != b.m) return a.m < b.m;
    return a.n < b.n;
  });
  return rect;
}

LeadMomentum channel_momentum(double energy, double threshold) {
  const double u = energy - threshold;
  LeadMomentum lm;
  if (std::abs(u) < 2.0) {
    const double k = std::acos(-0.5 * u);
    lm.k = Complex(k, 0.0);
    lm.phase = Complex(-0.5 * u, std::sqrt(1.0 - 0.25 * u * u));
    lm.open = true;
  } else if (u <= -2.0) {
    // Below the channel band: k = i kappa, e^{ik} = e^{-kappa} in (0, 1].
    const double kappa = std::acosh(-0.5 * u);
    lm.k = Complex(0.0, kappa);
    lm.phase = Complex(std::exp(-kappa), 0.0);
  } else {
    // Above the band: k = pi + i kappa, e^{ik} = -e^{-kappa}.
    const double kappa = std::acosh(0.5 * u);
    lm.k = Complex(M_PI, kappa);
    lm.phase = Complex(-std::exp(-kappa), 0.0);
  }
  return lm;
}

std::vector<TransverseMode> transverse_modes(int width) {
  if (width < 1) throw std::invalid_argument("transverse_modes: width must be >= 1");
  const BoxSpectrum1D box = box_eigensystem(width);
  std::vector<TransverseMode> modes(width);
  for (int p = 0; p < width; ++p) {
    modes[p].threshold = box.energies(p);
    modes[p].profile = box.modes.col(p);
  }
  return modes;
}

}  // namespace tbsm
