#pragma once

#include "robirl/mdp.hpp"

#include <optional>

namespace robirl {

struct SolverOptions {
    double tol = 1e-10;
    long max_iterations = 100000;
};

struct HardSolution {
    Vector v_star;
    RowMatrix q_star;
    StochasticPolicy policy;
    long iterations = 0;
};

struct SoftSolution {
    Vector v_soft;
    RowMatrix q_soft;
    StochasticPolicy policy;
    long iterations = 0;
};

/// T^two(s'|s,a_pl,a_op) = alpha T(s'|s,a_pl) + (1-alpha) T(s'|s,a_op).
struct TwoPlayerTransition {
    int n_states = 0;
    int n_actions = 0;
    RowMatrix data; // row ((s*|A| + a_pl)*|A| + a_op)

    double operator()(int s, int a_pl, int a_op, int s_next) const {
        return data((static_cast<Eigen::Index>(s) * n_actions + a_pl) * n_actions + a_op, s_next);
    }
};

struct TwoPlayerSolution {
    int n_actions = 0;
    Vector joint_q; // flat, index (s*|A| + a_pl)*|A| + a_op
    Vector v;
    RowMatrix q_player;   // min over a_op
    RowMatrix q_opponent; // logsumexp over a_pl
    StochasticPolicy player;
    StochasticPolicy opponent;
    long iterations = 0;

    double q(int s, int a_pl, int a_op) const {
        return joint_q((static_cast<Eigen::Index>(s) * n_actions + a_pl) * n_actions + a_op);
    }
};

/// Numerically stable log(sum(exp(x))).
double logsumexp(const Eigen::Ref<const Eigen::RowVectorXd>& x);
/// exp(x - max) / sum, so equal entries give an exactly uniform row.
Eigen::RowVectorXd softmax(const Eigen::Ref<const Eigen::RowVectorXd>& x);

HardSolution value_iteration(const TabularMdp& mdp, const SolverOptions& opts = {});
HardSolution value_iteration(const TabularMdp& mdp, const Vector& reward, const SolverOptions& opts = {});

SoftSolution soft_value_iteration(const TabularMdp& mdp, const SolverOptions& opts = {});
SoftSolution soft_value_iteration(const TabularMdp& mdp, const Vector& reward, const SolverOptions& opts = {},
                                  const std::optional<Vector>& v_init = std::nullopt);

TwoPlayerTransition two_player_transition(const TabularMdp& mdp, double alpha);

/**
 * Soft value iteration for the action-robust game where an opponent takes
 * over with probability 1-alpha. Player maximises an entropy-regularised
 * value, the opponent minimises it. Uses linearity of the mixed kernel so
 * the |S||A|^2 x |S| tensor is never formed.
 */
TwoPlayerSolution two_player_soft_vi(const TabularMdp& mdp, double alpha, const SolverOptions& opts = {});
TwoPlayerSolution two_player_soft_vi(const TabularMdp& mdp, const Vector& reward, double alpha,
                                     const SolverOptions& opts = {});

} // namespace robirl
