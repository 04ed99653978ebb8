#include "mecrelay/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mecrelay::solver {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

SolveReport dual_equalize(std::span<const SeparableTerm> terms, std::span<const double> lower_bounds,
                          double budget) {
  if (terms.size() != lower_bounds.size() || terms.empty())
    throw std::invalid_argument("dual_equalize: terms and lower_bounds must match and be non-empty");

  SolveReport rep;
  const std::size_t n = terms.size();
  const double lb_sum = std::accumulate(lower_bounds.begin(), lower_bounds.end(), 0.0);
  if (!(lb_sum <= budget) || !(budget > 0.0)) {
    rep.certificate = Certificate::Infeasible;
    return rep;
  }

  auto finish = [&](std::vector<double> t, double lambda, int iters) {
    rep.value = 0.0;
    for (std::size_t i = 0; i < n; ++i) rep.value += terms[i].energy(t[i]);
    rep.argmin = std::move(t);
    rep.duals = {lambda};
    rep.iterations = iters;
    rep.certificate = Certificate::Converged;
    return rep;
  };

  std::vector<double> t(lower_bounds.begin(), lower_bounds.end());
  double lambda_hi = 0.0;  // every hop pinned at its lower bound
  double lambda_lo = kInf; // some hop would want the whole budget
  for (std::size_t i = 0; i < n; ++i) {
    lambda_hi = std::max(lambda_hi, -terms[i].slope(lower_bounds[i]));
    lambda_lo = std::min(lambda_lo, -terms[i].slope(budget));
  }
  if (lb_sum >= budget * (1.0 - 1e-15)) return finish(t, lambda_hi, 0);
  // A slope that underflows to zero would put log(0) in the bracket.
  lambda_lo = std::max(lambda_lo, std::numeric_limits<double>::min());

  int inner_iters = 0;
  auto slot_at = [&](std::size_t i, double lambda) {
    const double lb = lower_bounds[i];
    if (terms[i].slope(lb) >= -lambda) return lb;
    if (terms[i].slope(budget) <= -lambda) return budget;
    ++inner_iters;
    const auto g = [&](double x) { return terms[i].slope(x) + lambda; };
    const Bracket r = bisect_bracket(g, Bracket(lb, budget, 1e-15));
    return 0.5 * (r.lo + r.hi);
  };
  auto excess = [&](double log_lambda) {
    const double lambda = std::exp(log_lambda);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += slot_at(i, lambda);
    return s - budget;
  };

  double lambda;
  if (!(lambda_lo < lambda_hi)) {
    lambda = lambda_hi;
  } else {
    const Bracket r = bisect_bracket(excess, Bracket(std::log(lambda_lo), std::log(lambda_hi), 1e-15));
    lambda = std::exp(0.5 * (r.lo + r.hi));
  }

  for (std::size_t i = 0; i < n; ++i) t[i] = slot_at(i, lambda);

  // Put the rounding residual on the largest free slot so the budget is met exactly.
  const double residual = budget - std::accumulate(t.begin(), t.end(), 0.0);
  std::size_t pick = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (t[i] > lower_bounds[i] && (pick == n || t[i] > t[pick])) pick = i;
  }
  if (pick != n && t[pick] + residual >= lower_bounds[pick]) t[pick] += residual;

  return finish(std::move(t), lambda, inner_iters);
}

namespace {

struct GridPass {
  bool found_feasible = false;
  std::vector<double> best_x;
  double best_f = kInf;
  std::vector<double> least_violating_x;
  double least_violation = kInf;
};

GridPass scan_box(const GridObjective& objective, std::span<const GridConstraint> constraints,
                  const Box& box, int resolution, double tol) {
  const std::size_t d = box.dims();
  std::vector<int> counts(d);
  std::vector<double> step(d);
  for (std::size_t k = 0; k < d; ++k) {
    counts[k] = box.hi[k] > box.lo[k] ? resolution : 1;
    step[k] = counts[k] > 1 ? (box.hi[k] - box.lo[k]) / (counts[k] - 1) : 0.0;
  }

  GridPass pass;
  std::vector<int> idx(d, 0);
  std::vector<double> x(d);
  for (;;) {
    for (std::size_t k = 0; k < d; ++k)
      x[k] = (idx[k] == counts[k] - 1) ? box.hi[k] : box.lo[k] + step[k] * idx[k];

    // Once a feasible point exists the size of a violation no longer matters,
    // so the first violated constraint ends the check.
    double violation = constraints.empty() ? 0.0 : -kInf;
    for (const auto& c : constraints) {
      const double ci = c(x);
      violation = std::isnan(ci) ? kInf : std::max(violation, ci);
      if (pass.found_feasible && violation > tol) break;
    }

    if (violation <= tol) {
      const double v = objective(x);
      if (v < pass.best_f) {
        pass.best_f = v;
        pass.best_x = x;
        pass.found_feasible = true;
      }
    } else if (violation < pass.least_violation) {
      pass.least_violation = violation;
      pass.least_violating_x = x;
    }

    std::size_t k = 0;
    while (k < d && ++idx[k] == counts[k]) idx[k++] = 0;
    if (k == d) break;
  }
  return pass;
}

Box shrink_around(const std::vector<double>& center, const Box& current, const Box& outer,
                  int resolution, double halfwidth) {
  Box next{center, center};
  for (std::size_t k = 0; k < center.size(); ++k) {
    const double h = (current.hi[k] - current.lo[k]) / std::max(1, resolution - 1);
    next.lo[k] = std::max(outer.lo[k], center[k] - halfwidth * h);
    next.hi[k] = std::min(outer.hi[k], center[k] + halfwidth * h);
  }
  return next;
}

}  // namespace

SolveReport grid_solve(const GridObjective& objective, std::span<const GridConstraint> constraints,
                       const Box& box, const GridOptions& opts) {
  if (opts.resolution < 2) throw std::invalid_argument("grid_solve: resolution must be >= 2");
  if (box.lo.size() != box.hi.size() || box.lo.empty())
    throw std::invalid_argument("grid_solve: malformed box");

  SolveReport rep;
  for (std::size_t k = 0; k < box.dims(); ++k) {
    if (!(box.lo[k] <= box.hi[k])) return rep;  // empty box
  }

  Box current = box;
  GridPass pass = scan_box(objective, constraints, current, opts.resolution, opts.constraint_tol);
  int passes = 1;

  for (int p = 0; !pass.found_feasible && p < opts.phase1_passes; ++p) {
    if (pass.least_violating_x.empty()) break;
    current = shrink_around(pass.least_violating_x, current, box, opts.resolution, opts.phase1_halfwidth);
    GridPass next = scan_box(objective, constraints, current, opts.resolution, opts.constraint_tol);
    ++passes;
    if (next.least_violation > pass.least_violation && !next.found_feasible) {
      next.least_violation = pass.least_violation;
      next.least_violating_x = pass.least_violating_x;
    }
    pass = std::move(next);
  }

  if (!pass.found_feasible) {
    rep.iterations = passes;
    return rep;
  }

  // An incumbent on an inner face of the box means the minimum may lie outside
  // it; such passes recenter at the same size instead of shrinking.
  int shrinks = 0;
  int recenters = 0;
  bool on_face = false;
  while (shrinks < opts.refine_passes) {
    if (on_face && recenters < 2 * opts.refine_passes) {
      ++recenters;
      Box moved = current;
      for (std::size_t k = 0; k < box.dims(); ++k) {
        const double half = 0.5 * (current.hi[k] - current.lo[k]);
        moved.lo[k] = std::max(box.lo[k], pass.best_x[k] - half);
        moved.hi[k] = std::min(box.hi[k], pass.best_x[k] + half);
      }
      current = moved;
    } else {
      ++shrinks;
      current = shrink_around(pass.best_x, current, box, opts.resolution, opts.refine_halfwidth);
    }
    GridPass next = scan_box(objective, constraints, current, opts.resolution, opts.constraint_tol);
    ++passes;
    on_face = false;
    if (next.found_feasible && next.best_f < pass.best_f) {
      pass.best_f = next.best_f;
      pass.best_x = next.best_x;
      for (std::size_t k = 0; k < box.dims(); ++k) {
        const bool at_lo = pass.best_x[k] <= current.lo[k] && current.lo[k] > box.lo[k];
        const bool at_hi = pass.best_x[k] >= current.hi[k] && current.hi[k] < box.hi[k];
        on_face = on_face || at_lo || at_hi;
      }
    }
  }

  rep.argmin = pass.best_x;
  rep.value = pass.best_f;
  rep.iterations = passes;
  rep.certificate = Certificate::Converged;
  return rep;
}

}  // namespace mecrelay::solver
