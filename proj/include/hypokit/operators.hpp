#pragma once

#include <vector>

#include "hypokit/grid.hpp"
#include "hypokit/norms.hpp"

namespace hypokit {

/// A h = grad_v h, one component per velocity axis.
std::vector<GridFunction> apply_A(const GridFunction& h);

/// A* g = sum_j (-d/dv_j + v_j) g_j, the L2(mu) adjoint of A.
GridFunction apply_Astar(const std::vector<GridFunction>& g, const PotentialSpec& context);

/// B h = v . grad_x h - grad V(x) . grad_v h (antisymmetric in L2(mu)).
GridFunction apply_B(const GridFunction& h, const PotentialSpec& V);

/// L h = A*A h + B h.
GridFunction apply_L(const GridFunction& h, const PotentialSpec& V);

/// Relative L2(mu) residuals of the commutator identities
/// [A,B] = grad_x and [C,B] = -hess V . grad_v.
struct CommutatorResiduals {
    double AB_res = 0.0;
    double CB_res = 0.0;
};
CommutatorResiduals commutator_residuals(const PotentialSpec& V, const GridFunction& test_h);

/// Directly computed and closed-form values of the four dissipation terms at
/// derivative split (m1, m2 = k - m1).
struct DissipationTerms {
    double T_A_direct = 0.0, T_A_closed = 0.0;
    double T_B_direct = 0.0, T_B_closed = 0.0;
    double Tmix_A_direct = 0.0, Tmix_A_closed = 0.0;
    double Tmix_B_direct = 0.0, Tmix_B_closed = 0.0;
};
DissipationTerms dissipation_terms(const GridFunction& h, const PotentialSpec& V, int k,
                                   int m1);

/// Slacks (LHS - RHS) of the lower-bound estimates on the dissipation terms;
/// all should be >= -tolerance when V satisfies the relative bound with M.
struct DissipationBoundReport {
    std::vector<double> slack_TA;   // T^A_{i,k-i} >= W_i^2, i = 0..k
    std::vector<double> slack_TB;   // i = 0..k-1 lower bounds
    double slack_TB_top = 0.0;      // i = k lower bound
    double slack_Tmix_A = 0.0;
    double slack_Tmix_B = 0.0;
    bool M_consistent = true;       // caller's M vs what the potential honestly satisfies
    double min_slack = 0.0;
};
DissipationBoundReport verify_dissipation_bounds(const GridFunction& h, const PotentialSpec& V, double M, int k);

/// All seminorms ||grad_x^i grad_v^j h|| for i + j <= k + 1, the mixed inner
/// products, and the Z/W aggregates.
NormAggregates compute_norm_aggregates(const GridFunction& h, int k);

} // namespace hypokit
