#include "tbsm/scattering.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include <Eigen/LU>

namespace tbsm {

namespace {

constexpr double kBandEdgeGuard = 1e-6;
const Complex kImag(0.0, 1.0);

// Plane-wave phase map u = i e^{i k * steps} for one open channel.
Complex wave_phase(const Channel& channel, const LeadMomentum& lm) {
  return kImag * std::pow(lm.phase, channel.wave_steps);
}

}  // namespace

Eigen::MatrixXcd SMatrixResult::wave_block(int to_lead, int from_lead) const {
  std::vector<int> rows, cols;
  for (int c = 0; c < static_cast<int>(channels.size()); ++c) {
    if (channels[c].lead == to_lead) rows.push_back(c);
    if (channels[c].lead == from_lead) cols.push_back(c);
  }
  Eigen::MatrixXcd block(rows.size(), cols.size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j) block(i, j) = s_wave(rows[i], cols[j]);
  return block;
}

double SMatrixResult::conductance(int from_lead, int to_lead) const {
  return wave_block(to_lead, from_lead).squaredNorm();
}

SMatrixResult smatrix(const System& system, double energy, SelfEnergyMode mode) {
  const FluxNormalizedCoupling flux = flux_normalized(system.coupling, energy);
  const int k_open = static_cast<int>(flux.open.size());
  if (k_open == 0)
    throw NoOpenChannelError("smatrix: no open channel at E = " + std::to_string(energy));

  const EffectiveHamiltonian heff = build_heff(system, energy, mode);
  const int n = system.size();
  const Eigen::MatrixXcd q =
      energy * Eigen::MatrixXcd::Identity(n, n) - heff.matrix;
  const Eigen::MatrixXcd v = flux.v.cast<Complex>();
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(q);
  const Eigen::MatrixXcd x = lu.solve(v);
  const double scale = 1.0 + v.cwiseAbs().maxCoeff();
  if (n > 0 && (!x.allFinite() || (q * x - v).cwiseAbs().maxCoeff() > 1e-8 * scale))
    throw SingularResolventError("smatrix: E - H_eff is singular at E = " +
                                 std::to_string(energy));

  SMatrixResult result;
  result.energy = energy;
  result.mode = mode;
  result.open = flux.open;
  for (int c : flux.open) result.channels.push_back(system.coupling.channels[c]);

  // Lead states behind the sqrt(|sin k|/2pi) factors are half-normalized
  // standing waves, which puts a factor 2 in front of the resolvent term.
  result.s = Eigen::MatrixXcd::Identity(k_open, k_open) -
             4.0 * M_PI * kImag * (v.transpose() * x);

  Eigen::VectorXcd u(k_open);
  for (int c = 0; c < k_open; ++c) {
    const Channel& channel = result.channels[c];
    u(c) = wave_phase(channel, channel_momentum(energy, channel.threshold));
  }
  result.s_wave = u.asDiagonal() * result.s * u.asDiagonal();
  return result;
}

Complex transmission_pole_expansion(const System& system, double energy, const PoleSet& poles,
                                    int channel_in, int channel_out) {
  if (poles.any_defective())
    throw DefectivePoleError(
        "transmission_pole_expansion: defective pole set; use the smatrix() resolvent path");
  const CouplingMatrix& cm = system.coupling;
  if (channel_in < 0 || channel_in >= cm.channel_count() || channel_out < 0 ||
      channel_out >= cm.channel_count())
    throw std::invalid_argument("transmission_pole_expansion: channel index out of range");

  const LeadMomentum lm_in = channel_momentum(energy, cm.channels[channel_in].threshold);
  const LeadMomentum lm_out = channel_momentum(energy, cm.channels[channel_out].threshold);
  if (!lm_in.open || !lm_out.open)
    throw NoOpenChannelError("transmission_pole_expansion: channel closed at E = " +
                             std::to_string(energy));

  const Eigen::VectorXcd v_in =
      (cm.w.col(channel_in) * std::sqrt(lm_in.phase.imag() / (2.0 * M_PI))).cast<Complex>();
  const Eigen::VectorXcd v_out =
      (cm.w.col(channel_out) * std::sqrt(lm_out.phase.imag() / (2.0 * M_PI))).cast<Complex>();
  const Eigen::VectorXcd a = poles.right_vectors.transpose() * v_in;
  const Eigen::VectorXcd b = poles.right_vectors.transpose() * v_out;

  Complex sum(0.0, 0.0);
  for (int l = 0; l < poles.poles.size(); ++l) sum += a(l) * b(l) / (energy - poles.poles(l));

  Complex element = -4.0 * M_PI * kImag * sum;
  if (channel_in == channel_out) element += 1.0;
  return wave_phase(cm.channels[channel_out], lm_out) * element *
         wave_phase(cm.channels[channel_in], lm_in);
}

SweepTable conductance_sweep(const System& system, const Eigen::VectorXd& grid,
                             SelfEnergyMode mode, int from_lead, int to_lead, int threads) {
  if (grid.size() < 1) throw std::invalid_argument("conductance_sweep: empty energy grid");

  std::vector<int> out_channels, in_channels;
  for (int c = 0; c < system.coupling.channel_count(); ++c) {
    if (system.coupling.channels[c].lead == to_lead) out_channels.push_back(c);
    if (system.coupling.channels[c].lead == from_lead) in_channels.push_back(c);
  }

  SweepTable table;
  table.from_lead = from_lead;
  table.to_lead = to_lead;
  for (int q : out_channels)
    for (int p : in_channels)
      table.pair_labels.push_back("t[" + std::to_string(to_lead) + "." +
                                  std::to_string(system.coupling.channels[q].mode) + "<-" +
                                  std::to_string(from_lead) + "." +
                                  std::to_string(system.coupling.channels[p].mode) + "]");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  table.rows.assign(grid.size(), SweepRow{});

  auto compute_row = [&](Eigen::Index g) {
    SweepRow row;
    row.energy = grid(g);
    row.t2.assign(table.pair_labels.size(), nan);
    row.phase.assign(table.pair_labels.size(), nan);
    row.k_first_open = nan;

    double min_sin = std::numeric_limits<double>::infinity();
    for (const Channel& channel : system.coupling.channels) {
      const LeadMomentum lm = channel_momentum(row.energy, channel.threshold);
      if (!lm.open) continue;
      ++row.open_count;
      min_sin = std::min(min_sin, lm.phase.imag());
      if (std::isnan(row.k_first_open)) row.k_first_open = lm.k.real();
    }
    if (row.open_count == 0) {
      table.rows[g] = row;
      return;
    }
    if (min_sin < kBandEdgeGuard) {
      row.excluded = true;
      table.rows[g] = row;
      return;
    }

    const SMatrixResult s = smatrix(system, row.energy, mode);
    size_t pair = 0;
    for (int q : out_channels)
      for (int p : in_channels) {
        int qi = -1, pi = -1;
        for (size_t c = 0; c < s.open.size(); ++c) {
          if (s.open[c] == q) qi = static_cast<int>(c);
          if (s.open[c] == p) pi = static_cast<int>(c);
        }
        if (qi >= 0 && pi >= 0) {
          const Complex t = s.s_wave(qi, pi);
          row.t2[pair] = std::norm(t);
          row.phase[pair] = std::arg(t);
          row.conductance += std::norm(t);
        }
        ++pair;
      }
    table.rows[g] = row;
  };

  threads = std::max(1, threads);
  if (threads == 1) {
    for (Eigen::Index g = 0; g < grid.size(); ++g) compute_row(g);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t]() {
        for (Eigen::Index g = t; g < grid.size(); g += threads) compute_row(g);
      });
    for (std::thread& t : pool) t.join();
  }
  return table;
}

InteriorWavefunction interior_wavefunction(const System& system, double energy,
                                           SelfEnergyMode mode, int channel) {
  const CouplingMatrix& cm = system.coupling;
  if (channel < 0 || channel >= cm.channel_count())
    throw std::invalid_argument("interior_wavefunction: channel index out of range");
  const LeadMomentum lm = channel_momentum(energy, cm.channels[channel].threshold);
  if (!lm.open)
    throw NoOpenChannelError("interior_wavefunction: incident channel closed at E = " +
                             std::to_string(energy));

  const EffectiveHamiltonian heff = build_heff(system, energy, mode);
  const int n = system.size();
  const Eigen::VectorXcd v =
      (cm.w.col(channel) * std::sqrt(lm.phase.imag() / (2.0 * M_PI))).cast<Complex>();
  const Eigen::MatrixXcd q = energy * Eigen::MatrixXcd::Identity(n, n) - heff.matrix;

  InteriorWavefunction out;
  out.billiard_coefficients = Eigen::PartialPivLU<Eigen::MatrixXcd>(q).solve(v);

  const PoleSet poles = eigensystem(heff);
  out.pole_expansion_valid = !poles.any_defective();
  const Eigen::VectorXcd amplitudes = poles.right_vectors.transpose() * v;
  out.pole_coefficients.resize(n);
  for (int l = 0; l < n; ++l)
    out.pole_coefficients(l) = amplitudes(l) / (energy - poles.poles(l));
  return out;
}

Eigen::VectorXcd sample_interior(const BoxSpectrum1D& box, const Eigen::VectorXcd& f) {
  return box.modes.cast<Complex>() * f;
}

Eigen::MatrixXcd sample_interior(const RectSpectrum2D& rect, const Eigen::VectorXcd& f) {
  Eigen::MatrixXcd field = Eigen::MatrixXcd::Zero(rect.nx, rect.ny);
  for (int s = 0; s < rect.size(); ++s)
    for (int i = 1; i <= rect.nx; ++i)
      for (int j = 1; j <= rect.ny; ++j) field(i - 1, j - 1) += f(s) * rect.psi(s, i, j);
  return field;
}

}  // namespace tbsm
