#include "tbsm/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace tbsm {

std::vector<int> match_branches(const Eigen::MatrixXd& cost) {
  // Shortest-augmenting-path assignment with potentials, O(n^3).
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw std::invalid_argument("match_branches: cost matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

namespace {

Eigen::VectorXcd sorted_eigenvalues(const Eigen::MatrixXcd& h) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(h, false);
  Eigen::VectorXcd ev = solver.eigenvalues();
  std::sort(ev.data(), ev.data() + ev.size(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return ev;
}

Eigen::MatrixXd distance_matrix(const Eigen::VectorXcd& from, const Eigen::VectorXcd& to) {
  const int n = static_cast<int>(from.size());
  Eigen::MatrixXd cost(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cost(i, j) = std::abs(from(i) - to(j));
  return cost;
}

std::vector<int> greedy_match(Eigen::MatrixXd cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<int> row_to_col(n, -1);
  for (int pick = 0; pick < n; ++pick) {
    int bi = -1, bj = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (row_to_col[i] >= 0) continue;
      for (int j = 0; j < n; ++j)
        if (cost(i, j) < best) {
          best = cost(i, j);
          bi = i;
          bj = j;
        }
    }
    row_to_col[bi] = bj;
    cost.col(bj).setConstant(std::numeric_limits<double>::infinity());
  }
  return row_to_col;
}

bool continuity_violated(const Eigen::VectorXcd& from, const Eigen::VectorXcd& matched) {
  const int n = static_cast<int>(from.size());
  if (n < 2) return false;
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = std::abs(from(i) - matched(i));
  Eigen::VectorXd s = d;
  std::sort(s.data(), s.data() + n);
  const double median = n % 2 ? s(n / 2) : 0.5 * (s(n / 2 - 1) + s(n / 2));
  // A swap needs a displacement comparable to the branch separation; one
  // branch legitimately outrunning the median (e.g. a single resonance
  // broadening) is not a violation, and a pure ratio test would keep firing
  // no matter how far the step is bisected.
  double min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) min_gap = std::min(min_gap, std::abs(matched(i) - matched(j)));
  return d.maxCoeff() > 10.0 * median + 1e-12 && d.maxCoeff() > 0.25 * min_gap;
}

// Matches eigenvalues at parameter b to the branch order in `from`,
// bisecting the parameter interval while the continuity guard fires.
Eigen::VectorXcd continue_branches(const std::function<EffectiveHamiltonian(double)>& builder,
                                   double a, const Eigen::VectorXcd& from, double b, int depth,
                                   bool* guard_fired) {
  const Eigen::VectorXcd raw = sorted_eigenvalues(builder(b).matrix);
  const std::vector<int> assign = match_branches(distance_matrix(from, raw));
  Eigen::VectorXcd matched(from.size());
  for (int i = 0; i < from.size(); ++i) matched(i) = raw(assign[i]);
  if (!continuity_violated(from, matched)) return matched;
  if (depth <= 0) {
    *guard_fired = true;
    return matched;
  }
  const double mid = 0.5 * (a + b);
  const Eigen::VectorXcd half = continue_branches(builder, a, from, mid, depth - 1, guard_fired);
  return continue_branches(builder, mid, half, b, depth - 1, guard_fired);
}

}  // namespace

PoleTrajectory trace_poles(const std::function<EffectiveHamiltonian(double)>& builder,
                           const std::vector<double>& path) {
  if (path.size() < 2) throw std::invalid_argument("trace_poles: path needs at least two points");

  PoleTrajectory traj;
  traj.parameters = path;

  EffectiveHamiltonian first = builder(path.front());
  Eigen::VectorXcd current = sorted_eigenvalues(first.matrix);
  const int n = static_cast<int>(current.size());
  traj.branches.resize(n, static_cast<Eigen::Index>(path.size()));
  traj.branches.col(0) = current;
  traj.guard.assign(path.size(), false);
  traj.ambiguous.assign(path.size(), false);
  traj.trace_error.resize(static_cast<Eigen::Index>(path.size()));
  traj.trace_error(0) = std::abs(current.sum() - first.matrix.trace());

  for (size_t s = 1; s < path.size(); ++s) {
    bool guard_fired = false;
    const Eigen::VectorXcd matched =
        continue_branches(builder, path[s - 1], current, path[s], 8, &guard_fired);
    traj.guard[s] = guard_fired;

    // Cross-check the final assignment against greedy nearest-neighbour;
    // disagreement marks the step ambiguous and records the alternative.
    const Eigen::VectorXcd raw = sorted_eigenvalues(builder(path[s]).matrix);
    const Eigen::MatrixXd cost = distance_matrix(current, raw);
    const std::vector<int> optimal = match_branches(cost);
    const std::vector<int> greedy = greedy_match(cost);
    if (greedy != optimal) {
      traj.ambiguous[s] = true;
      traj.alternatives.emplace_back(static_cast<int>(s), greedy);
    }

    const EffectiveHamiltonian h = builder(path[s]);
    traj.trace_error(static_cast<Eigen::Index>(s)) =
        std::abs(matched.sum() - h.matrix.trace());
    traj.branches.col(static_cast<Eigen::Index>(s)) = matched;
    current = matched;
  }
  return traj;
}

TrappingReport trapping_report(const PoleTrajectory& trajectory, double reference_parameter) {
  const int n = static_cast<int>(trajectory.branches.rows());
  const Eigen::Index steps = trajectory.branches.cols();
  Eigen::Index ref = 0;
  for (Eigen::Index s = 1; s < steps; ++s)
    if (std::abs(trajectory.parameters[s] - reference_parameter) <
        std::abs(trajectory.parameters[ref] - reference_parameter))
      ref = s;

  TrappingReport report;
  report.width_reference = -2.0 * trajectory.branches.col(ref).imag();
  report.width_end = -2.0 * trajectory.branches.col(steps - 1).imag();
  report.broadened.resize(n);
  report.left_band.resize(n);
  for (int i = 0; i < n; ++i) {
    report.broadened[i] = report.width_end(i) > report.width_reference(i);
    const double re = trajectory.branches(i, steps - 1).real();
    report.left_band[i] = re < -2.0 || re > 2.0;
    if (report.broadened[i])
      ++report.broad_count;
    else
      ++report.trapped_count;
  }
  return report;
}

namespace {

double smallest_gap(const Eigen::MatrixXcd& h, int* pair_i = nullptr, int* pair_j = nullptr) {
  const Eigen::VectorXcd ev = sorted_eigenvalues(h);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ev.size(); ++i)
    for (int j = i + 1; j < ev.size(); ++j) {
      const double g = std::abs(ev(i) - ev(j));
      if (g < best) {
        best = g;
        if (pair_i) *pair_i = i;
        if (pair_j) *pair_j = j;
      }
    }
  return best;
}

// Golden-section minimization of a 1D slice; tolerates the sqrt cusp.
double golden_minimize(const std::function<double(double)>& f, double lo, double hi, int iters) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < iters; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

}  // namespace

DoublePoleResult find_double_pole(
    const std::function<EffectiveHamiltonian(double, double)>& builder, double a_lo, double a_hi,
    double b_lo, double b_hi, const DoublePoleSearchOptions& options,
    const std::function<double(double, double)>& analytic_residual) {
  auto gap_at = [&](double a, double b) { return smallest_gap(builder(a, b).matrix); };

  double best_a = a_lo, best_b = b_lo;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < options.coarse_a; ++i)
    for (int j = 0; j < options.coarse_b; ++j) {
      const double a = a_lo + (a_hi - a_lo) * i / (options.coarse_a - 1);
      const double b = b_lo + (b_hi - b_lo) * j / (options.coarse_b - 1);
      const double g = gap_at(a, b);
      if (g < best) {
        best = g;
        best_a = a;
        best_b = b;
      }
    }

  double width_a = (a_hi - a_lo) / (options.coarse_a - 1);
  double width_b = (b_hi - b_lo) / (options.coarse_b - 1);
  for (int round = 0; round < options.refine_rounds; ++round) {
    const double lo_a = std::max(a_lo, best_a - width_a);
    const double hi_a = std::min(a_hi, best_a + width_a);
    best_a = golden_minimize([&](double a) { return gap_at(a, best_b); }, lo_a, hi_a, 40);
    const double lo_b = std::max(b_lo, best_b - width_b);
    const double hi_b = std::min(b_hi, best_b + width_b);
    best_b = golden_minimize([&](double b) { return gap_at(best_a, b); }, lo_b, hi_b, 40);
    width_a *= 0.5;
    width_b *= 0.5;
    if (width_a < 1e-14 * (1.0 + std::abs(best_a)) && width_b < 1e-14 * (1.0 + std::abs(best_b)))
      break;
  }

  DoublePoleResult result;
  result.param_a = best_a;
  result.param_b = best_b;

  const Eigen::MatrixXcd h = builder(best_a, best_b).matrix;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(h);
  const Eigen::VectorXcd& ev = solver.eigenvalues();
  int pi = 0, pj = 1;
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ev.size(); ++i)
    for (int j = i + 1; j < ev.size(); ++j)
      if (std::abs(ev(i) - ev(j)) < gap) {
        gap = std::abs(ev(i) - ev(j));
        pi = i;
        pj = j;
      }
  result.gap = gap;
  result.pole = 0.5 * (ev(pi) + ev(pj));
  double self_orth = std::numeric_limits<double>::infinity();
  for (int idx : {pi, pj}) {
    const Eigen::VectorXcd v = solver.eigenvectors().col(idx);
    self_orth = std::min(self_orth, std::abs(v.cwiseProduct(v).sum()) / v.squaredNorm());
  }
  result.self_orthogonality = self_orth;
  result.found = gap < options.gap_threshold;
  result.analytic_residual = analytic_residual
                                 ? analytic_residual(best_a, best_b)
                                 : std::numeric_limits<double>::quiet_NaN();
  return result;
}

CrossingKind classify_real_crossing(const PoleTrajectory& trajectory, int branch_a,
                                    int branch_b) {
  const Eigen::Index last = trajectory.branches.cols() - 1;
  const double start = trajectory.branches(branch_a, 0).real() -
                       trajectory.branches(branch_b, 0).real();
  const double end = trajectory.branches(branch_a, last).real() -
                     trajectory.branches(branch_b, last).real();
  return start * end < 0.0 ? CrossingKind::Crossing : CrossingKind::Avoided;
}

}  // namespace tbsm
