#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mecrelay::solver {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by bisect_root when f does not change sign over the bracket.
class NoSignChange : public SolverError {
 public:
  NoSignChange() : SolverError("bisect_root: f does not change sign over bracket") {}
};

struct Bracket {
  double lo;
  double hi;
  double tol_rel;

  Bracket(double lo_, double hi_, double tol = 1e-12) : lo(lo_), hi(hi_), tol_rel(tol) {
    if (!(lo < hi)) throw std::invalid_argument("Bracket: lo must be < hi");
    if (!(tol_rel > 0.0 && tol_rel <= 1e-3)) throw std::invalid_argument("Bracket: tol_rel out of (0, 1e-3]");
  }
  double span() const { return hi - lo; }
};

enum class Certificate { Converged, HitBound, Infeasible };

struct SolveReport {
  std::vector<double> argmin;
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  Certificate certificate = Certificate::Infeasible;
  /// Lagrange multipliers, when the kernel has them (dual_equalize: {lambda}).
  std::vector<double> duals;

  bool feasible() const { return certificate != Certificate::Infeasible; }
};

/// Bracketing root search for a monotone f. Returns the final bracket, which
/// still straddles the sign change and is at most tol_rel * max(|lo|,|hi|) wide
/// (or 200 iterations, whichever first). f may return +-inf at either end.
///
/// Steps are Illinois false-position with a bisection fallback whenever an
/// endpoint value is non-finite or the interpolated step stalls.
template <class F>
Bracket bisect_bracket(F&& f, Bracket b) {
  double lo = b.lo, hi = b.hi;
  double flo = f(lo), fhi = f(hi);
  if (std::isnan(flo) || std::isnan(fhi)) throw SolverError("bisect_root: NaN at bracket end");
  if (flo == 0.0) return Bracket(lo, std::nextafter(lo, hi), b.tol_rel);
  if (fhi == 0.0) return Bracket(std::nextafter(hi, lo), hi, b.tol_rel);
  if (std::signbit(flo) == std::signbit(fhi)) throw NoSignChange();

  int side = 0;  // which end was retained last step (-1 lo, +1 hi)
  for (int it = 0; it < 200; ++it) {
    const double width = hi - lo;
    if (width <= b.tol_rel * std::max(std::abs(lo), std::abs(hi))) break;

    double x;
    if (std::isfinite(flo) && std::isfinite(fhi) && (it % 4 != 3)) {
      x = (lo * fhi - hi * flo) / (fhi - flo);
      if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    } else {
      x = 0.5 * (lo + hi);
    }
    if (x <= lo || x >= hi) break;  // adjacent doubles

    const double fx = f(x);
    if (std::isnan(fx)) throw SolverError("bisect_root: NaN inside bracket");
    if (fx == 0.0) return Bracket(std::nextafter(x, lo), std::nextafter(x, hi), b.tol_rel);
    if (std::signbit(fx) == std::signbit(flo)) {
      lo = x;
      flo = fx;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == +1) flo *= 0.5;
      side = +1;
    }
  }
  return Bracket(lo, hi, b.tol_rel);
}

template <class F>
double bisect_root(F&& f, Bracket b) {
  const Bracket r = bisect_bracket(std::forward<F>(f), b);
  return 0.5 * (r.lo + r.hi);
}

/// ceil(log(1/tol_rel)/log(phi)) + 2.
inline int golden_iteration_bound(const Bracket& b) {
  return static_cast<int>(std::ceil(std::log(1.0 / b.tol_rel) / std::log(std::numbers::phi))) + 2;
}

/// Golden-section minimization of a unimodal f over the bracket. The bracket
/// ends are evaluated too, so a minimum sitting on a bound is returned exactly
/// (certificate HitBound). +inf values encode infeasible points; when every
/// probe is infeasible a 64-point scan is tried before giving up.
template <class F>
SolveReport golden_minimize(F&& f, Bracket b) {
  constexpr double kInvPhi = 1.0 / std::numbers::phi;
  SolveReport rep;
  const double tol = b.tol_rel * b.span();
  double a = b.lo, c = b.hi;
  const double f_lo = f(b.lo);
  const double f_hi = f(b.hi);

  double x1 = c - kInvPhi * (c - a);
  double x2 = a + kInvPhi * (c - a);
  double f1 = f(x1), f2 = f(x2);

  if (std::isinf(f1) && std::isinf(f2)) {
    // No interior information: locate any finite point first.
    constexpr int kScan = 64;
    double best_x = 0.0, best_f = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kScan; ++i) {
      const double x = b.lo + b.span() * i / kScan;
      const double v = (i == 0) ? f_lo : (i == kScan ? f_hi : f(x));
      if (v < best_f) best_f = v, best_x = x;
    }
    if (std::isinf(best_f)) {
      rep.iterations = 0;
      rep.certificate = Certificate::Infeasible;
      return rep;
    }
    a = std::max(b.lo, best_x - b.span() / kScan);
    c = std::min(b.hi, best_x + b.span() / kScan);
    x1 = c - kInvPhi * (c - a);
    x2 = a + kInvPhi * (c - a);
    f1 = f(x1);
    f2 = f(x2);
  }

  const int max_iter = golden_iteration_bound(b);
  int it = 0;
  while ((c - a) > tol && it < max_iter) {
    ++it;
    if (f1 <= f2) {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - kInvPhi * (c - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (c - a);
      f2 = f(x2);
    }
  }

  double best_x = x1, best_f = f1;
  if (f2 < best_f) best_x = x2, best_f = f2;
  rep.certificate = Certificate::Converged;
  if (f_lo <= best_f) best_x = b.lo, best_f = f_lo, rep.certificate = Certificate::HitBound;
  if (f_hi < best_f) best_x = b.hi, best_f = f_hi, rep.certificate = Certificate::HitBound;
  if (std::isinf(best_f)) rep.certificate = Certificate::Infeasible;
  rep.argmin = {best_x};
  rep.value = best_f;
  rep.iterations = it;
  return rep;
}

/// One strictly convex, strictly decreasing term of a separable objective.
struct SeparableTerm {
  std::function<double(double)> energy;
  std::function<double(double)> slope;  // d energy / dt
};

/// Minimizes sum_n energy_n(t_n) subject to sum_n t_n = budget, t_n >= lower_n by
/// equalizing marginal energies: every hop above its bound sits where
/// slope_n(t_n) = -lambda. Certificate Infeasible when sum(lower) > budget.
/// duals = {lambda}.
SolveReport dual_equalize(std::span<const SeparableTerm> terms, std::span<const double> lower_bounds,
                          double budget);

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
  std::size_t dims() const { return lo.size(); }
};

struct GridOptions {
  int resolution = 64;            // points per dimension, endpoints included
  int refine_passes = 8;          // shrinking passes around the incumbent after the coarse grid
  double refine_halfwidth = 8.0;  // refined box half-width, in current grid spacings
  int phase1_passes = 16;         // extra passes chasing the least-violating point
  double phase1_halfwidth = 8.0;  // box half-width while chasing the least-violating point
  double constraint_tol = 1e-9;   // c_i(x) <= tol counts as satisfied
};

using GridObjective = std::function<double(std::span<const double>)>;
/// Normalized constraint, feasible when <= 0.
using GridConstraint = std::function<double(std::span<const double>)>;

/// Brute-force minimization over a box: best feasible grid point, then repeated
/// refinement around the incumbent. When the coarse grid holds no feasible
/// point, refinement follows the point of least constraint violation for up to
/// phase1_passes before reporting Infeasible.
SolveReport grid_solve(const GridObjective& objective, std::span<const GridConstraint> constraints,
                       const Box& box, const GridOptions& opts = {});

}  // namespace mecrelay::solver
