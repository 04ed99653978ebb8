#pragma once

#include "mecrelay/model.hpp"
#include "mecrelay/solver.hpp"

namespace mecrelay::oracle {

/// Brute-force reference for each offloading scheme, built on grid_solve.
///
/// The oracle restates each scheme's problem without the structural shortcuts
/// the analytic solvers take: slots are free grid coordinates with only the
/// budget equality eliminated, FD-Orthogonal keeps b2 and b3 as independent
/// coordinates under b2 + b3 <= B_max, and FD-Shared powers come from solving the
/// coupled 2x2 linear system directly. Constraints are normalized so a value
/// <= 0 means satisfied.
///
/// Free dimensions: Direct 1 (t), TwoHopHD 1 (t1), HDHD 2 (t1, t2),
/// HDFDO 3 (t1, b2, b3), HDFDS 1 (t1). ThreeHopUnopt has nothing to optimize and
/// is evaluated at its fixed equal split.
solver::SolveReport oracle_solve(SchemeId id, const Scenario& scenario,
                                 const solver::GridOptions& opts = {});

/// Hop energy t*p for a hop with its own band, evaluated from the capacity
/// formula with long double intermediates.
double reference_hop_energy(double slot, double bandwidth, double data_bits, double gain,
                            const RadioParams& params);

struct CoupledPowers {
  double p2;
  double p3;
  bool valid;
};

/// FD-Shared powers from Cramer's rule on
///   p2 - (g_self*Gamma/g2) p3 = K Gamma / g2
///   p3 - (g_cross*Gamma/g3) p2 = K Gamma / g3.
/// valid is false when the determinant is non-positive.
CoupledPowers reference_shared_powers(double slot, double bandwidth, double data_bits,
                                      const ChannelSet& channels, const RadioParams& params);

}  // namespace mecrelay::oracle
