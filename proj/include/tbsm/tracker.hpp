#pragma once

// Pole-trajectory continuation over a coupling or energy path, resonance
// trapping diagnostics and double-pole (exceptional point) search.

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "tbsm/heff.hpp"
#include "tbsm/types.hpp"

namespace tbsm {

// Minimal-total-|dz| assignment of new poles to previous ones (exact
// assignment solve on the distance matrix). Returns, per branch index, the
// matched column of `cost`.
std::vector<int> match_branches(const Eigen::MatrixXd& cost);

struct PoleTrajectory {
  std::vector<double> parameters;
  Eigen::MatrixXcd branches;        // branch x step, matched along the path
  std::vector<bool> guard;          // continuity guard fired at this step
  std::vector<bool> ambiguous;      // greedy and optimal matching disagreed
  // For ambiguous steps, the greedy permutation that was rejected.
  std::vector<std::pair<int, std::vector<int>>> alternatives;
  Eigen::VectorXd trace_error;      // |sum z - tr H| per step
};

// Follows all eigenvalue branches of builder(parameter) along the path.
// Branches are matched step to step by optimal assignment; when a branch
// moves more than 10x the median displacement and a quarter of the smallest
// branch separation, the step is halved internally (up to 8 times) before
// the guard flag is raised.
PoleTrajectory trace_poles(const std::function<EffectiveHamiltonian(double)>& builder,
                           const std::vector<double>& path);

struct TrappingReport {
  Eigen::VectorXd width_reference;  // -2 Im z at the reference parameter
  Eigen::VectorXd width_end;        // -2 Im z at the path end
  std::vector<bool> broadened;      // width grew relative to the reference
  std::vector<bool> left_band;      // Re z outside [-2, 2] at the path end
  int broad_count = 0;
  int trapped_count = 0;
};

TrappingReport trapping_report(const PoleTrajectory& trajectory, double reference_parameter);

struct DoublePoleSearchOptions {
  int coarse_a = 41;
  int coarse_b = 41;
  int refine_rounds = 60;
  double gap_threshold = 1e-6;
};

struct DoublePoleResult {
  bool found = false;
  double param_a = 0.0;
  double param_b = 0.0;
  double gap = 0.0;                // |z_i - z_j| of the closest pair
  double self_orthogonality = 0.0; // |v^T v| / |v|^2 of the coalescing vector
  Complex pole;                    // midpoint of the coalescing pair
  double analytic_residual = 0.0;  // NaN when no analytic condition was given
};

// Minimizes the smallest eigenvalue gap of builder(a, b) over the box
// [a_lo, a_hi] x [b_lo, b_hi]: coarse grid, then alternating per-axis
// golden-section refinement (the gap has a square-root cusp at an
// exceptional point, so derivative-free search is used on purpose).
DoublePoleResult find_double_pole(
    const std::function<EffectiveHamiltonian(double, double)>& builder, double a_lo, double a_hi,
    double b_lo, double b_hi, const DoublePoleSearchOptions& options = {},
    const std::function<double(double, double)>& analytic_residual = nullptr);

enum class CrossingKind { Crossing, Avoided };

// Whether two matched branches exchange their Re z ordering along the path
// (free crossing in the complex plane) or keep it (self-avoided crossing).
CrossingKind classify_real_crossing(const PoleTrajectory& trajectory, int branch_a, int branch_b);

}  // namespace tbsm
