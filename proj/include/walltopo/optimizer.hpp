#pragma once

#include <span>
#include <vector>

#include "walltopo/schemes.hpp"

namespace walltopo {

struct SolverSettings {
  int max_iterations = 500;
  double initial_step = 1.0;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  double stagnation_tol = 1e-8;
  double projection_tol = 1e-10;
};

struct SolverResult {
  std::vector<double> t_mm;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;  ///< monotone non-increasing
};

/// Exact Euclidean projection of y onto {x : l <= x <= u, w.x = c} by
/// bisection on the dual multiplier of the hyperplane. Requires w > 0 and
/// l <= u. Throws InfeasibleError when the set is empty, naming the
/// violated inequality.
std::vector<double> project_box_hyperplane(std::span<const double> y, std::span<const double> l,
                                           std::span<const double> u, std::span<const double> w,
                                           double c, double tol = 1e-12);

/// Projected gradient descent with Armijo backtracking on the scheme
/// objective. Every iterate satisfies the bounds and the volume constraint
/// to settings.projection_tol.
SolverResult solve_update(const UpdateProblem& problem, const SolverSettings& settings = {});

/// Exhaustive grid reference for small problems (n <= 4): the last variable
/// is eliminated through the equality constraint and the rest scanned at
/// the given resolution. Returns the feasible grid point with the lowest
/// objective.
std::vector<double> brute_force_oracle(const UpdateProblem& problem, double resolution);

}  // namespace walltopo
