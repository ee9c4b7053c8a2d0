#include "tbsm/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tbsm/heff.hpp"
#include "tbsm/spectra.hpp"

namespace tbsm {

namespace {

const Complex kImag(0.0, 1.0);

Complex phase_factor(double k) { return Complex(std::cos(k), std::sin(k)); }

void require_in_band(double k, const char* who) {
  if (!(k > 0.0 && k < M_PI))
    throw std::invalid_argument(std::string(who) + ": k must lie in (0, pi)");
}

}  // namespace

ChainAmplitudes chain_rt(int sites, double v_left, double v_right, double k) {
  if (sites < 1) throw std::invalid_argument("chain_rt: sites must be >= 1");
  if (v_left < 0.0 || v_right < 0.0)
    throw std::invalid_argument("chain_rt: contact strengths must be >= 0");
  require_in_band(k, "chain_rt");
  if (v_left < 1e-12 || v_right < 1e-12) return {Complex(0.0), Complex(-1.0), true};

  const Complex e2 = phase_factor(2.0 * k);
  const Complex e2n = std::pow(phase_factor(k), 2 * sites);
  const double sl = v_left - 1.0 / v_left;
  const double sr = v_right - 1.0 / v_right;
  const Complex a_denom = sl * sr * e2n -
                          (v_left * e2 - 1.0 / v_left) * (v_right * e2 - 1.0 / v_right) / e2;
  ChainAmplitudes out;
  out.t = 4.0 * std::sin(k) * std::sin(k) / a_denom;
  out.r = out.t / (v_left * (1.0 - 1.0 / e2)) *
              (v_right - (1.0 / v_right) / e2 + (1.0 / v_right - v_right) * e2n) -
          1.0;
  return out;
}

Complex dot1_transmission(double v, double k) {
  require_in_band(k, "dot1_transmission");
  const Complex e1 = phase_factor(k);
  return -kImag * v * v * std::sin(k) / (std::cos(k) - v * v * e1);
}

std::pair<Complex, Complex> dot2_lambda_mu(const Dot2Params& params, double energy) {
  const LeadMomentum lm = channel_momentum(energy, 0.0);
  const Complex lambda = 0.5 * (params.v_left * params.v_left + params.v_right * params.v_right) *
                         lm.phase;
  const Complex mu = 0.5 * (params.v_left * params.v_left - params.v_right * params.v_right) *
                     lm.phase;
  return {lambda, mu};
}

std::pair<Complex, Complex> dot2_poles(const Dot2Params& params, double energy) {
  if (std::abs(energy) >= 2.0)
    throw std::invalid_argument("dot2_poles: energy must lie inside the band");
  const auto [lambda, mu] = dot2_lambda_mu(params, energy);
  const Complex radical = params.topology == Dot2Topology::SeriesSites
                              ? std::sqrt(1.0 + mu * mu)
                              : std::sqrt(1.0 + lambda * lambda);
  return {-lambda + radical, -lambda - radical};
}

Complex dot2_transmission(const Dot2Params& params, double energy) {
  if (std::abs(energy) >= 2.0)
    throw std::invalid_argument("dot2_transmission: energy must lie inside the band");
  const auto [z1, z2] = dot2_poles(params, energy);
  const Complex phase = channel_momentum(energy, 0.0).phase;
  const double sink = std::sqrt(1.0 - 0.25 * energy * energy);
  const Complex denom = (energy - z1) * (energy - z2);
  if (params.topology == Dot2Topology::SeriesSites)
    return -2.0 * kImag / phase * params.v_left * params.v_right * sink / denom;
  return 2.0 * kImag * phase * phase * params.v_left * params.v_right * energy * sink / denom;
}

std::vector<PoleRoot> point_contact_pole_roots(const Eigen::VectorXd& levels,
                                               const Eigen::VectorXd& contact_amplitudes,
                                               double v_left, double v_right) {
  if (levels.size() != contact_amplitudes.size())
    throw std::invalid_argument("point_contact_pole_roots: size mismatch");
  if (contact_amplitudes.cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument("point_contact_pole_roots: all contact amplitudes vanish");
  const double coupling2 = v_left * v_left + v_right * v_right;

  // Group degenerate levels: the contact couples one combination per distinct
  // level; the orthogonal combinations stay dark at E_b exactly.
  struct Group {
    double level;
    double weight;  // sum of psi_b^2 over the group
    int count;
  };
  std::vector<Group> groups;
  std::vector<int> sorted(levels.size());
  std::iota(sorted.begin(), sorted.end(), 0);
  std::sort(sorted.begin(), sorted.end(),
            [&](int a, int b) { return levels(a) < levels(b); });
  for (int idx : sorted) {
    const double e = levels(idx);
    const double w = contact_amplitudes(idx) * contact_amplitudes(idx);
    if (!groups.empty() && std::abs(groups.back().level - e) < 1e-12 * (1.0 + std::abs(e))) {
      groups.back().weight += w;
      groups.back().count += 1;
    } else {
      groups.push_back({e, w, 1});
    }
  }

  auto omega = [&](Complex z) { return coupling2 * lead_phase_continued(z, 0.0); };
  auto secular = [&](Complex z) {
    Complex f(1.0, 0.0);
    const Complex om = omega(z);
    for (const Group& g : groups) f += om * g.weight / (z - g.level);
    return f;
  };

  std::vector<PoleRoot> roots;
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    const Group& g = groups[gi];
    const double weight_floor = 1e-14;
    const int dark_count = g.weight > weight_floor ? g.count - 1 : g.count;
    for (int d = 0; d < dark_count; ++d) roots.push_back({Complex(g.level), 0.0, true, true});
    if (g.weight <= weight_floor) continue;

    // Fixed point z = E_i - omega g_i / (1 + sum_{j != i} ...), seeded at E_i.
    Complex z(g.level, 0.0);
    bool converged = false;
    for (int it = 0; it < 300; ++it) {
      Complex rest(1.0, 0.0);
      const Complex om = omega(z);
      for (size_t gj = 0; gj < groups.size(); ++gj)
        if (gj != gi) rest += om * groups[gj].weight / (z - groups[gj].level);
      const Complex next = g.level - om * g.weight / rest;
      const double step = std::abs(next - z);
      z = next;
      if (step < 1e-14 * (1.0 + std::abs(z))) {
        converged = true;
        break;
      }
    }
    // Newton polish on the secular function (z is now off the real poles).
    for (int it = 0; it < 50; ++it) {
      const double h = 1e-8 * (1.0 + std::abs(z));
      const Complex f = secular(z);
      const Complex df = (secular(z + h) - secular(z - h)) / (2.0 * h);
      if (std::abs(df) == 0.0) break;
      const Complex step = f / df;
      z -= step;
      if (std::abs(step) < 1e-15 * (1.0 + std::abs(z))) break;
    }
    const double residual = std::abs(secular(z));
    roots.push_back({z, residual, converged || residual < 1e-10, false});
  }

  std::sort(roots.begin(), roots.end(), [](const PoleRoot& a, const PoleRoot& b) {
    if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
    return a.z.imag() < b.z.imag();
  });
  return roots;
}

std::pair<Complex, Complex> slab_poles(double level, double v, double energy) {
  const Complex phase = channel_momentum(energy, level).phase;
  const Complex shift = 0.5 * v * v * phase;
  const Complex radical = std::sqrt(1.0 + 0.25 * v * v * v * v * phase * phase);
  return {level - shift + radical, level - shift - radical};
}

double slab_double_pole_residual(double level, double v, double energy) {
  return std::abs(v * v - 2.0) + std::abs(energy - level);
}

}  // namespace tbsm
