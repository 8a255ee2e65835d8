#pragma once

#include "robirl/mdp.hpp"
#include "robirl/solvers.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace robirl {

struct IrlStepInfo {
    int step = 0;
    double grad_norm = 0.0;
    double l1_mismatch = 0.0;
};

struct IrlConfig {
    double learning_rate = 0.5;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.99;
    double adam_eps = 1e-7;
    double weight_decay = 0.0;
    int n_steps = 200;
    double inner_tol = 1e-10;
    long max_inner_iterations = 100000;
    Vector theta_init; // empty means zeros
    /// Stop early once the gradient norm falls below this value; 0 disables.
    double grad_norm_stop = 0.0;
    bool record_theta = false;
    std::function<void(const IrlStepInfo&)> on_step;

    /// Adam settings used for the GridWorld family.
    static IrlConfig gridworld();
    /// Adam settings used for ObjectWorld (smaller step, decoupled weight decay).
    static IrlConfig objectworld();

    void validate() const;
    SolverOptions solver_options() const { return {inner_tol, max_inner_iterations}; }
};

struct AdamState {
    Vector m;
    Vector v;
};

/// One descent step: theta <- theta - lr * m_hat / (sqrt(v_hat) + eps), step_index >= 1.
void adam_step(Vector& theta, const Vector& grad, AdamState& state, const IrlConfig& cfg, int step_index);

struct IrlResult {
    Vector theta;
    StochasticPolicy policy;                  // soft policy, or the player for the robust variant
    std::optional<StochasticPolicy> opponent; // robust variant only
    std::vector<double> gradient_norm_history;
    std::vector<double> l1_history;
    std::vector<Vector> theta_history; // filled when cfg.record_theta
    double final_l1_mismatch = 0.0;    // mixture occupancy for the robust variant
    double player_l1_mismatch = 0.0;   // player-only occupancy
    int steps_run = 0;
};

struct MceGradient {
    Vector gradient;  // Phi^T (rho_soft - rho_target)
    Vector mismatch;  // rho_soft - rho_target
    SoftSolution solution;
};

/// Gradient of the dual objective at theta: soft VI, occupancy of the soft policy, projection onto features.
MceGradient mce_gradient(const TabularMdp& learner, const OccupancyMeasure& rho_target, const Matrix& features,
                         const Vector& theta, const SolverOptions& opts = {});

/// Standard MCE IRL by occupancy matching in the learner MDP (reward of the MDP is ignored).
IrlResult mce_irl(const TabularMdp& learner, const OccupancyMeasure& rho_target, const Matrix& features,
                  const IrlConfig& cfg);

/**
 * Robust MCE IRL: matches the occupancy of alpha*pl + (1-alpha)*op against the
 * target, re-solving the two-player game after each parameter update.
 */
IrlResult robust_mce_irl(const TabularMdp& learner, const OccupancyMeasure& rho_target, double alpha,
                         const Matrix& features, const IrlConfig& cfg);

} // namespace robirl
