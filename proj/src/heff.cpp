#include "tbsm/heff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace tbsm {

namespace {

Complex wide_band_phase(double energy, double threshold) {
  return Complex(-0.5 * (energy - threshold), 1.0);
}

}  // namespace

EffectiveHamiltonian build_heff(const System& system, double energy, SelfEnergyMode mode) {
  const int n = system.size();
  const CouplingMatrix& cm = system.coupling;
  EffectiveHamiltonian heff;
  heff.energy = energy;
  heff.mode = mode;
  heff.matrix = Eigen::MatrixXcd::Zero(n, n);
  heff.matrix.diagonal() = system.levels.cast<Complex>();

  bool any_open = false;
  for (int c = 0; c < cm.channel_count(); ++c) {
    const LeadMomentum lm = channel_momentum(energy, cm.channels[c].threshold);
    any_open = any_open || lm.open;
    Complex phase;
    switch (mode) {
      case SelfEnergyMode::OpenChannelsOnly:
        if (!lm.open) continue;
        phase = lm.phase;
        break;
      case SelfEnergyMode::AllChannels:
        phase = lm.phase;
        break;
      case SelfEnergyMode::WideBand:
        phase = wide_band_phase(energy, cm.channels[c].threshold);
        break;
    }
    const Eigen::VectorXd w = cm.w.col(c);
    heff.matrix -= phase * (w * w.transpose()).cast<Complex>();
  }
  if (mode == SelfEnergyMode::OpenChannelsOnly && !any_open)
    throw NoOpenChannelError("build_heff: no open channel at E = " + std::to_string(energy));
  return heff;
}

bool PoleSet::any_defective() const {
  for (bool f : defective)
    if (f) return true;
  return false;
}

PoleSet eigensystem(const EffectiveHamiltonian& heff) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(heff.matrix);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigensystem: complex eigensolver did not converge");
  const int n = static_cast<int>(heff.matrix.rows());

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const Eigen::VectorXcd& ev = solver.eigenvalues();
  std::sort(order.begin(), order.end(), [&ev](int a, int b) {
    if (ev(a).real() != ev(b).real()) return ev(a).real() < ev(b).real();
    return ev(a).imag() < ev(b).imag();
  });

  PoleSet out;
  out.poles.resize(n);
  out.right_vectors.resize(n, n);
  out.defective.assign(n, false);
  for (int i = 0; i < n; ++i) {
    out.poles(i) = ev(order[i]);
    Eigen::VectorXcd v = solver.eigenvectors().col(order[i]);
    // Transpose (non-conjugated) norm; it vanishes at an exceptional point.
    const Complex tnorm = v.cwiseProduct(v).sum();
    if (std::abs(tnorm) < 1e-8 * v.squaredNorm()) {
      out.defective[i] = true;
      v /= v.norm();
    } else {
      v /= std::sqrt(tnorm);
    }
    int imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    const Complex lead = v(imax);
    if (lead.real() < 0.0 || (lead.real() == 0.0 && lead.imag() < 0.0)) v = -v;
    out.right_vectors.col(i) = v;
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double scale = 1.0 + std::max(std::abs(out.poles(i)), std::abs(out.poles(j)));
      if (std::abs(out.poles(i) - out.poles(j)) < 1e-6 * scale) {
        out.defective[i] = true;
        out.defective[j] = true;
      }
    }
  return out;
}

Complex lead_phase_continued(Complex z, double threshold) {
  const Complex u = z - threshold;
  const Complex s = std::sqrt(u * u - 4.0);
  // Larger-magnitude root of x^2 + u x + 1 = 0, evaluated cancellation-free.
  const Complex a = (-u + s) * 0.5;
  const Complex b = (-u - s) * 0.5;
  Complex big = std::abs(a) >= std::abs(b) ? a : b;
  if (std::abs(std::abs(big) - 1.0) < 1e-12) {
    // On the band: both roots sit on the unit circle; take Im >= 0.
    return big.imag() >= 0.0 ? big : 1.0 / big;
  }
  return big;
}

Eigen::MatrixXcd build_heff_continued(const System& system, Complex z) {
  const int n = system.size();
  const CouplingMatrix& cm = system.coupling;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  h.diagonal() = system.levels.cast<Complex>();
  for (int c = 0; c < cm.channel_count(); ++c) {
    const Eigen::VectorXd w = cm.w.col(c);
    h -= lead_phase_continued(z, cm.channels[c].threshold) * (w * w.transpose()).cast<Complex>();
  }
  return h;
}

namespace {

Complex nearest_eigenvalue(const Eigen::MatrixXcd& h, Complex target) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(h, false);
  const Eigen::VectorXcd& ev = solver.eigenvalues();
  int best = 0;
  for (int i = 1; i < ev.size(); ++i)
    if (std::abs(ev(i) - target) < std::abs(ev(best) - target)) best = i;
  return ev(best);
}

Complex secular_determinant(const System& system, Complex z) {
  const Eigen::MatrixXcd q =
      z * Eigen::MatrixXcd::Identity(system.size(), system.size()) - build_heff_continued(system, z);
  return Eigen::PartialPivLU<Eigen::MatrixXcd>(q).determinant();
}

}  // namespace

SelfConsistentPole solve_pole(const System& system, Complex seed) {
  SelfConsistentPole result;
  Complex z = seed;
  double damping = 1.0;
  double last_step = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < 200; ++it) {
    const Complex target = nearest_eigenvalue(build_heff_continued(system, z), z);
    const Complex step = target - z;
    if (std::abs(step) > last_step) damping = std::max(0.25 * damping, 0.05);
    last_step = std::abs(step);
    z += damping * step;
    if (std::abs(step) < 1e-13 * (1.0 + std::abs(z))) break;
  }
  // Newton polish on det(z - H(z)) with a numerical derivative.
  for (int polish = 0; polish < 30; ++polish) {
    const double h = 1e-7 * (1.0 + std::abs(z));
    const Complex f = secular_determinant(system, z);
    const Complex df =
        (secular_determinant(system, z + h) - secular_determinant(system, z - h)) / (2.0 * h);
    if (std::abs(df) == 0.0) break;
    const Complex step = f / df;
    z -= step;
    if (std::abs(step) < 1e-14 * (1.0 + std::abs(z))) break;
  }
  result.z = z;
  result.iterations = it;
  result.residual = std::abs(nearest_eigenvalue(build_heff_continued(system, z), z) - z);
  result.converged = result.residual < 1e-9 * (1.0 + std::abs(z));
  return result;
}

}  // namespace tbsm
