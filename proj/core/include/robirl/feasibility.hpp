#pragma once

#include "robirl/mdp.hpp"

#include <optional>

namespace robirl {

/**
 * Linear system T pi = v over the flattened learner policy (column s*|A| + a).
 * The first |S| rows are discounted probability-flow equations
 *   rho(s_i) - (1-gamma) P0(s_i) = gamma * sum_{s',a'} rho(s') T(s_i|s',a') pi(a'|s'),
 * the last |S| rows ask each policy row to sum to one.
 */
struct FlowSystem {
    int n_states = 0;
    int n_actions = 0;
    Matrix t_matrix;
    Vector v_vector;
    int rank_t = -1;
    int rank_augmented = -1;
    bool feasible = false;
    /// rank_t equals 2|S| - 1, the largest rank the structure permits.
    bool full_rank = false;
};

FlowSystem build_flow_system(const TabularMdp& learner, const OccupancyMeasure& rho);

/// Row-echelon rank; a pivot counts when |pivot| > rel_tol * max|m_ij|.
int numerical_rank(const Matrix& m, double rel_tol = 1e-9);

FlowSystem check_feasibility(const TabularMdp& learner, const OccupancyMeasure& rho, double rel_tol = 1e-9);

struct MatchingResult {
    std::optional<StochasticPolicy> policy;
    Vector solution;        // raw minimum-norm least-squares solution
    double residual = 0.0;  // ||T pi - v||_2
    double min_entry = 0.0; // most negative entry of the raw solution

    bool ok() const { return policy.has_value(); }
};

/// Minimum-norm least-squares witness; clamped and renormalised when it is a valid policy.
MatchingResult solve_matching_policy(const FlowSystem& fs);

} // namespace robirl
