#include "tbsm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/LU>

namespace tbsm {

namespace {

const Complex kImag(0.0, 1.0);

Complex phase_factor(double k) { return Complex(std::cos(k), std::sin(k)); }

}  // namespace

ScatteringSolution1D solve_chain_1d(int sites, double v_left, double v_right, double k) {
  if (sites < 1) throw std::invalid_argument("solve_chain_1d: sites must be >= 1");
  if (v_left < 0.0 || v_right < 0.0)
    throw std::invalid_argument("solve_chain_1d: contact strengths must be >= 0");
  if (!(k > 0.0 && k < M_PI) || std::abs(std::sin(k)) < 1e-12)
    throw BandEdgeError("solve_chain_1d: k at a band edge");

  const double energy = -2.0 * std::cos(k);
  const Complex e1 = phase_factor(k);        // e^{ik}
  const Complex em1 = std::conj(e1);         // e^{-ik}
  const Complex en = std::pow(e1, sites);    // e^{ikN}
  const Complex en1 = en * e1;               // e^{ik(N+1)}

  // Matching rows at the four sites touching the contact bonds, with the
  // plane-wave ansatz substituted; unknowns (r, a, b, t).
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  Eigen::Vector4cd rhs = Eigen::Vector4cd::Zero();
  m(0, 0) = em1;
  m(0, 1) = -v_left * e1;
  m(0, 2) = -v_left * em1;
  rhs(0) = -e1;
  m(1, 0) = v_left;
  m(1, 1) = -1.0;
  m(1, 2) = -1.0;
  rhs(1) = -v_left;
  m(2, 1) = en1;
  m(2, 2) = Complex(1.0) / en1;
  m(2, 3) = -v_right * en1;
  m(3, 1) = v_right * en;
  m(3, 2) = v_right / en;
  m(3, 3) = -en;

  const Eigen::Vector4cd sol = m.fullPivLu().solve(rhs);

  ScatteringSolution1D out;
  out.r = sol(0);
  out.a = sol(1);
  out.b = sol(2);
  out.t = sol(3);

  // Residual: violation of the site equations on a window spanning both
  // contacts, with the solved amplitudes substituted.
  auto psi = [&](int j) -> Complex {
    if (j <= 0) return std::pow(e1, j) + out.r * std::pow(em1, j);
    if (j <= sites) return out.a * std::pow(e1, j) + out.b * std::pow(em1, j);
    return out.t * std::pow(e1, j);
  };
  auto bond = [&](int j) -> double {  // hopping on bond (j, j+1)
    if (j == 0) return v_left;
    if (j == sites) return v_right;
    return 1.0;
  };
  double residual = 0.0;
  for (int j = -3; j <= sites + 4; ++j) {
    const Complex violation =
        -bond(j - 1) * psi(j - 1) - bond(j) * psi(j + 1) - energy * psi(j);
    residual = std::max(residual, std::abs(violation));
  }
  out.residual = residual;
  return out;
}

LatticeSolution solve_lattice_2d(const RectGeometry& geometry, double energy) {
  const int nx = geometry.nx;
  const int ny = geometry.ny;
  if (nx < 1 || ny < 1) throw std::invalid_argument("solve_lattice_2d: grid sizes must be >= 1");
  for (const RectLead& lead : {geometry.left, geometry.right})
    if (lead.wall_low < 0 || lead.wall_high > ny + 1 || lead.width() < 1)
      throw std::invalid_argument("solve_lattice_2d: lead walls outside the billiard side");

  const std::vector<TransverseMode> modes_left = transverse_modes(geometry.left.width());
  const std::vector<TransverseMode> modes_right = transverse_modes(geometry.right.width());
  const double v_left = geometry.left.strength;
  const double v_right = geometry.right.strength;

  struct LeadChannel {
    int lead;
    int mode;  // 1-based
    LeadMomentum lm;
  };
  std::vector<LeadChannel> open;
  for (int p = 1; p <= geometry.left.width(); ++p) {
    const LeadMomentum lm = channel_momentum(energy, modes_left[p - 1].threshold);
    if (lm.open) open.push_back({0, p, lm});
  }
  for (int p = 1; p <= geometry.right.width(); ++p) {
    const LeadMomentum lm = channel_momentum(energy, modes_right[p - 1].threshold);
    if (lm.open) open.push_back({1, p, lm});
  }
  if (open.empty())
    throw NoOpenChannelError("solve_lattice_2d: no open channel at E = " + std::to_string(energy));

  const int nb = nx * ny;
  const int w_left = geometry.left.width();
  const int w_right = geometry.right.width();
  const int dim = nb + w_left + w_right;
  const int k_open = static_cast<int>(open.size());

  auto site = [&](int i, int j) { return (i - 1) * ny + (j - 1); };
  auto left_amp = [&](int p) { return nb + p - 1; };           // outgoing at column 0
  auto right_amp = [&](int p) { return nb + w_left + p - 1; };  // outgoing at column nx+1

  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(dim, k_open);

  // Interior lattice equations: E psi + sum of neighbours + lead surface
  // values = -(incident surface value).
  for (int i = 1; i <= nx; ++i)
    for (int j = 1; j <= ny; ++j) {
      const int row = site(i, j);
      a(row, row) += energy;
      if (i > 1) a(row, site(i - 1, j)) += 1.0;
      if (i < nx) a(row, site(i + 1, j)) += 1.0;
      if (j > 1) a(row, site(i, j - 1)) += 1.0;
      if (j < ny) a(row, site(i, j + 1)) += 1.0;
      if (i == 1 && j > geometry.left.wall_low && j < geometry.left.wall_high) {
        const int local = j - geometry.left.wall_low;  // row inside the lead window
        for (int p = 1; p <= w_left; ++p)
          a(row, left_amp(p)) += v_left * modes_left[p - 1].profile(local - 1);
      }
      if (i == nx && j > geometry.right.wall_low && j < geometry.right.wall_high) {
        const int local = j - geometry.right.wall_low;
        for (int p = 1; p <= w_right; ++p)
          a(row, right_amp(p)) += v_right * modes_right[p - 1].profile(local - 1);
      }
    }

  // Mode-matching rows: the modal continuation one step into the billiard
  // equals v_C times the interior boundary column, projected on each phi_q.
  for (int q = 1; q <= w_left; ++q) {
    const int row = nb + q - 1;
    a(row, left_amp(q)) = 1.0 / channel_momentum(energy, modes_left[q - 1].threshold).phase;
    for (int j = geometry.left.wall_low + 1; j < geometry.left.wall_high; ++j)
      a(row, site(1, j)) -= v_left * modes_left[q - 1].profile(j - geometry.left.wall_low - 1);
  }
  for (int q = 1; q <= w_right; ++q) {
    const int row = nb + w_left + q - 1;
    a(row, right_amp(q)) = 1.0 / channel_momentum(energy, modes_right[q - 1].threshold).phase;
    for (int j = geometry.right.wall_low + 1; j < geometry.right.wall_high; ++j)
      a(row, site(nx, j)) -= v_right * modes_right[q - 1].profile(j - geometry.right.wall_low - 1);
  }

  // Incidence columns: unit plane-wave amplitude in global coordinates.
  for (int c = 0; c < k_open; ++c) {
    const LeadChannel& in = open[c];
    // Global-coordinate amplitude of the incident wave at its lead surface.
    const Complex surface_amp =
        in.lead == 0 ? Complex(1.0) : std::pow(Complex(1.0) / in.lm.phase, nx + 1);
    if (in.lead == 0) {
      const Eigen::VectorXd& phi = modes_left[in.mode - 1].profile;
      for (int j = geometry.left.wall_low + 1; j < geometry.left.wall_high; ++j)
        rhs(site(1, j), c) -= v_left * surface_amp * phi(j - geometry.left.wall_low - 1);
      rhs(nb + in.mode - 1, c) = -surface_amp * in.lm.phase;
    } else {
      const Eigen::VectorXd& phi = modes_right[in.mode - 1].profile;
      for (int j = geometry.right.wall_low + 1; j < geometry.right.wall_high; ++j)
        rhs(site(nx, j), c) -= v_right * surface_amp * phi(j - geometry.right.wall_low - 1);
      rhs(nb + w_left + in.mode - 1, c) = -surface_amp * in.lm.phase;
    }
  }

  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  const Eigen::MatrixXcd sol = lu.solve(rhs);
  const double defect = (a * sol - rhs).cwiseAbs().maxCoeff();
  if (!sol.allFinite() || defect > 1e-8 * (1.0 + rhs.cwiseAbs().maxCoeff()))
    throw SingularResolventError("solve_lattice_2d: singular interior system at E = " +
                                 std::to_string(energy) + " (solve defect " +
                                 std::to_string(defect) + ")");

  LatticeSolution out;
  out.energy = energy;
  out.s.resize(k_open, k_open);
  for (const LeadChannel& ch : open)
    out.channels.push_back(
        {ch.lead, ch.mode,
         (ch.lead == 0 ? modes_left : modes_right)[ch.mode - 1].threshold,
         ch.lead == 0 ? 1 : -nx});

  for (int c = 0; c < k_open; ++c) {
    const LeadChannel& in = open[c];
    const double sin_in = in.lm.phase.imag();
    for (int o = 0; o < k_open; ++o) {
      const LeadChannel& ch = open[o];
      const double flux = std::sqrt(ch.lm.phase.imag() / sin_in);
      if (ch.lead == 0) {
        out.s(o, c) = flux * sol(left_amp(ch.mode), c);
      } else {
        // Convert the surface-referenced amplitude to the global coefficient.
        out.s(o, c) = flux * sol(right_amp(ch.mode), c) *
                      std::pow(Complex(1.0) / ch.lm.phase, nx + 1);
      }
    }
    Eigen::MatrixXcd field(nx, ny);
    for (int i = 1; i <= nx; ++i)
      for (int j = 1; j <= ny; ++j) field(i - 1, j - 1) = sol(site(i, j), c);
    out.interior.push_back(std::move(field));
  }
  return out;
}

namespace {

// Resonance-sheet continuation of e^{ik}: the root of x^2 + (z - E_p) x + 1
// with |x| >= 1 (continuation of the physical in-band values through the
// band cut). Local to the oracle on purpose: independent of the heff path.
Complex second_sheet_phase(Complex z, double threshold) {
  const Complex u = z - threshold;
  const Complex s = std::sqrt(u * u - 4.0);
  const Complex r1 = 0.5 * (-u + s);
  const Complex r2 = 0.5 * (-u - s);
  Complex big = std::abs(r1) >= std::abs(r2) ? r1 : r2;
  if (std::abs(std::abs(big) - 1.0) < 1e-12) return big.imag() >= 0.0 ? big : 1.0 / big;
  return big;
}

Complex scan_determinant(const System& system, Complex z) {
  const int n = system.size();
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(n, n);
  q.diagonal() = (z - system.levels.array().cast<Complex>()).matrix();
  for (int c = 0; c < system.coupling.channel_count(); ++c) {
    const Eigen::VectorXd w = system.coupling.w.col(c);
    q += second_sheet_phase(z, system.coupling.channels[c].threshold) *
         (w * w.transpose()).cast<Complex>();
  }
  return Eigen::PartialPivLU<Eigen::MatrixXcd>(q).determinant();
}

}  // namespace

std::vector<PoleEstimate> oracle_pole_scan(const System& system, Complex window_lo,
                                           Complex window_hi, int grid_re, int grid_im) {
  if (grid_re < 3 || grid_im < 3)
    throw std::invalid_argument("oracle_pole_scan: grid must be at least 3x3");

  Eigen::MatrixXd logabs(grid_re, grid_im);
  auto node = [&](int i, int j) {
    const double re = window_lo.real() +
                      (window_hi.real() - window_lo.real()) * i / (grid_re - 1);
    const double im = window_lo.imag() +
                      (window_hi.imag() - window_lo.imag()) * j / (grid_im - 1);
    return Complex(re, im);
  };
  for (int i = 0; i < grid_re; ++i)
    for (int j = 0; j < grid_im; ++j)
      logabs(i, j) = std::log(std::abs(scan_determinant(system, node(i, j))) +
                              std::numeric_limits<double>::min());

  std::vector<PoleEstimate> found;
  for (int i = 0; i < grid_re; ++i)
    for (int j = 0; j < grid_im; ++j) {
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di)
        for (int dj = -1; dj <= 1 && is_min; ++dj) {
          if (di == 0 && dj == 0) continue;
          const int ii = i + di, jj = j + dj;
          if (ii < 0 || ii >= grid_re || jj < 0 || jj >= grid_im) continue;
          if (logabs(ii, jj) < logabs(i, j)) is_min = false;
        }
      if (!is_min) continue;

      // Newton polish with a numerical derivative.
      Complex z = node(i, j);
      for (int it = 0; it < 60; ++it) {
        const double h = 1e-7 * (1.0 + std::abs(z));
        const Complex f = scan_determinant(system, z);
        const Complex df =
            (scan_determinant(system, z + h) - scan_determinant(system, z - h)) / (2.0 * h);
        if (std::abs(df) == 0.0) break;
        const Complex step = f / df;
        z -= step;
        if (std::abs(step) < 1e-14 * (1.0 + std::abs(z))) break;
      }
      const double h = 1e-7 * (1.0 + std::abs(z));
      const Complex f = scan_determinant(system, z);
      const Complex df =
          (scan_determinant(system, z + h) - scan_determinant(system, z - h)) / (2.0 * h);
      const double residual = std::abs(df) > 0.0 ? std::abs(f / df) : std::abs(f);
      if (residual > 1e-6 * (1.0 + std::abs(z))) continue;  // saddle, not a root

      // Newton may walk out of the window (e.g. toward the mirror root in the
      // upper half-plane); keep only roots inside the requested box.
      const double margin = 1e-9;
      if (z.real() < window_lo.real() - margin || z.real() > window_hi.real() + margin ||
          z.imag() < window_lo.imag() - margin || z.imag() > window_hi.imag() + margin)
        continue;

      bool duplicate = false;
      for (const PoleEstimate& p : found)
        if (std::abs(p.z - z) < 1e-7 * (1.0 + std::abs(z))) duplicate = true;
      if (!duplicate) found.push_back({z, residual});
    }

  std::sort(found.begin(), found.end(), [](const PoleEstimate& a, const PoleEstimate& b) {
    if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
    return a.z.imag() < b.z.imag();
  });
  return found;
}

}  // namespace tbsm
