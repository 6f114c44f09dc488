#include "walltopo/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "walltopo/errors.hpp"
#include "walltopo/numeric.hpp"

namespace walltopo {

namespace {

double weighted_sum(std::span<const double> w, std::span<const double> x) {
  std::vector<double> terms(w.size());
  for (size_t j = 0; j < w.size(); ++j) terms[j] = w[j] * x[j];
  return sum_compensated(terms);
}

std::vector<double> clip_shifted(std::span<const double> y, std::span<const double> l,
                                 std::span<const double> u, std::span<const double> w,
                                 double lambda) {
  std::vector<double> x(y.size());
  for (size_t j = 0; j < y.size(); ++j)
    x[j] = std::clamp(y[j] + lambda * w[j], l[j], u[j]);
  return x;
}

}  // namespace

std::vector<double> project_box_hyperplane(std::span<const double> y, std::span<const double> l,
                                           std::span<const double> u, std::span<const double> w,
                                           double c, double tol) {
  const size_t n = y.size();
  if (n == 0) throw ValidationError("projection: empty input");
  if (l.size() != n || u.size() != n || w.size() != n)
    throw ValidationError("projection inputs disagree in size");
  for (size_t j = 0; j < n; ++j) {
    if (!(w[j] > 0.0))
      throw ValidationError("projection weight " + std::to_string(j) + " must be positive, got " +
                            std::to_string(w[j]));
    if (l[j] > u[j])
      throw ValidationError("projection bounds inverted at " + std::to_string(j));
  }
  const double cmin = weighted_sum(w, l);
  const double cmax = weighted_sum(w, u);
  const double slack = tol * std::max(1.0, std::abs(c));
  if (c < cmin - slack)
    throw InfeasibleError("projection infeasible: c = " + std::to_string(c) + " < w.l = " +
                          std::to_string(cmin));
  if (c > cmax + slack)
    throw InfeasibleError("projection infeasible: c = " + std::to_string(c) + " > w.u = " +
                          std::to_string(cmax));

  // x(lambda) = clip(y + lambda w); w.x(lambda) is non-decreasing in lambda,
  // so bisect for w.x = c.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < n; ++j) {
    lo = std::min(lo, (l[j] - y[j]) / w[j]);
    hi = std::max(hi, (u[j] - y[j]) / w[j]);
  }
  lo -= 1.0;
  hi += 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const std::vector<double> x = clip_shifted(y, l, u, w, mid);
    if (weighted_sum(w, x) < c)
      lo = mid;
    else
      hi = mid;
  }
  std::vector<double> x = clip_shifted(y, l, u, w, hi);

  // Polish: distribute the residual over the strictly interior variables in
  // the least-squares direction, then re-clip.
  for (int pass = 0; pass < 2; ++pass) {
    const double r = c - weighted_sum(w, x);
    if (std::abs(r) <= tol * std::max(1.0, std::abs(c))) break;
    double denom = 0.0;
    for (size_t j = 0; j < n; ++j)
      if (x[j] > l[j] && x[j] < u[j]) denom += w[j] * w[j];
    if (denom == 0.0) break;
    for (size_t j = 0; j < n; ++j)
      if (x[j] > l[j] && x[j] < u[j]) x[j] = std::clamp(x[j] + w[j] * r / denom, l[j], u[j]);
  }
  return x;
}

SolverResult solve_update(const UpdateProblem& problem, const SolverSettings& settings) {
  problem.validate();
  const size_t n = problem.size();
  const std::span<const double> energy(problem.energy_prev_j);
  const std::span<const double> lengths(problem.lengths_mm);
  // Work in mm: the constraint H sum(L t) = V becomes sum(L t) = V / H.
  const double c = problem.target_volume_mm3 / problem.height_mm;
  const double proj_tol = settings.projection_tol / problem.height_mm;

  auto objective = [&](std::span<const double> t) {
    return scheme_objective(problem.scheme, energy, lengths, t);
  };
  auto project = [&](std::span<const double> y) {
    return project_box_hyperplane(y, problem.lower_mm, problem.upper_mm, lengths, c, proj_tol);
  };

  SolverResult result;
  std::vector<double> x = project(problem.t_start_mm);
  double f = objective(x);
  result.objective_history.push_back(f);

  // Deterministic warm start: thickness proportional to energy equalizes the
  // scheme-1 density exactly when unconstrained, and is a strong start for
  // scheme 2 as well. Keep it only if it is at least as good.
  const double e_total = sum_compensated(energy);
  if (e_total > 0.0) {
    std::vector<double> prop(n);
    for (size_t j = 0; j < n; ++j) prop[j] = c * energy[j] / (e_total * lengths[j]);
    std::vector<double> xp = project(prop);
    const double fp = objective(xp);
    if (fp < f) {
      x = std::move(xp);
      f = fp;
      result.objective_history.push_back(f);
    }
  }

  int it = 0;
  for (; it < settings.max_iterations; ++it) {
    const std::vector<double> g = scheme_gradient(problem.scheme, energy, lengths, x);
    if (!std::isfinite(f))
      throw std::runtime_error("solver objective became non-finite at iteration " +
                               std::to_string(it));
    for (double gj : g)
      if (!std::isfinite(gj))
        throw std::runtime_error("solver gradient became non-finite at iteration " +
                                 std::to_string(it));

    double alpha = settings.initial_step;
    bool accepted = false;
    std::vector<double> x_next;
    double f_next = f;
    while (alpha >= 1e-18) {
      std::vector<double> y(n);
      for (size_t j = 0; j < n; ++j) y[j] = x[j] - alpha * g[j];
      std::vector<double> candidate = project(y);
      const double fc = objective(candidate);
      std::vector<double> diff(n);
      for (size_t j = 0; j < n; ++j) diff[j] = x[j] - candidate[j];
      const double decrease = weighted_sum(g, diff);
      if (fc <= f - settings.armijo_c * decrease) {
        x_next = std::move(candidate);
        f_next = fc;
        accepted = true;
        break;
      }
      alpha *= settings.backtrack_factor;
    }
    if (!accepted) {
      result.converged = true;
      break;
    }
    double step = 0.0;
    for (size_t j = 0; j < n; ++j) step = std::max(step, std::abs(x_next[j] - x[j]));
    x = std::move(x_next);
    f = f_next;
    result.objective_history.push_back(f);
    if (step < settings.stagnation_tol) {
      ++it;
      result.converged = true;
      break;
    }
  }

  result.t_mm = std::move(x);
  result.objective = f;
  result.iterations = it;
  return result;
}

std::vector<double> brute_force_oracle(const UpdateProblem& problem, double resolution) {
  problem.validate();
  const size_t n = problem.size();
  if (n > 4)
    throw ValidationError("brute_force_oracle supports at most 4 variables, got " +
                          std::to_string(n));
  if (!(resolution > 0.0))
    throw ValidationError("resolution must be positive, got " + std::to_string(resolution));
  const std::span<const double> lengths(problem.lengths_mm);
  const double c = problem.target_volume_mm3 / problem.height_mm;

  if (n == 1) return {c / lengths[0]};

  std::vector<double> best;
  double best_f = std::numeric_limits<double>::infinity();
  std::vector<double> t(n, 0.0);

  auto scan = [&](auto&& self, size_t dim) -> void {
    if (dim == n - 1) {
      // Eliminate the last variable through the equality constraint.
      std::vector<double> partial(n - 1);
      for (size_t j = 0; j + 1 < n; ++j) partial[j] = lengths[j] * t[j];
      const double t_last = (c - sum_compensated(partial)) / lengths[n - 1];
      if (t_last < problem.lower_mm[n - 1] - 1e-12 || t_last > problem.upper_mm[n - 1] + 1e-12)
        return;
      t[n - 1] = std::clamp(t_last, problem.lower_mm[n - 1], problem.upper_mm[n - 1]);
      const double f =
          scheme_objective(problem.scheme, problem.energy_prev_j, problem.lengths_mm, t);
      if (f < best_f) {
        best_f = f;
        best = t;
      }
      return;
    }
    const double lo = problem.lower_mm[dim];
    const double hi = problem.upper_mm[dim];
    const int steps = static_cast<int>(std::floor((hi - lo) / resolution)) + 1;
    for (int k = 0; k <= steps; ++k) {
      t[dim] = std::min(lo + k * resolution, hi);
      self(self, dim + 1);
      if (t[dim] >= hi) break;
    }
  };
  scan(scan, 0);

  if (best.empty()) {
    // No grid point hit the constraint slice; fall back to projecting the
    // box midpoint so the caller always gets a feasible reference.
    std::vector<double> mid(n);
    for (size_t j = 0; j < n; ++j) mid[j] = 0.5 * (problem.lower_mm[j] + problem.upper_mm[j]);
    return project_box_hyperplane(mid, problem.lower_mm, problem.upper_mm, lengths, c);
  }
  return best;
}

}  // namespace walltopo
