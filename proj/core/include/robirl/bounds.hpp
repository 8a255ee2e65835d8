#pragma once

#include "robirl/mdp.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace robirl {

struct BoundInputs {
    double gamma = 0.99;
    double r_min = 0.0;
    double r_max = 0.0;
    double r_abs_max = 0.0;
    int n_actions = 1;
    double d_dyn = 0.0;
    std::optional<double> alpha;
    std::optional<double> d_pol;

    /// Fills r_min/r_max/r_abs_max from a per-state reward vector.
    static BoundInputs from_rewards(double gamma, const Vector& reward, int n_actions, double d_dyn);
    void validate() const;
};

/// A bound value with its named additive terms.
struct BoundBreakdown {
    double value = 0.0;
    std::vector<std::pair<std::string, double>> terms;
};

double kappa(const BoundInputs& in);
double lemma1_pol_bound(const BoundInputs& in);
double thm1_gap_bound(const BoundInputs& in);
double soft_expert_gap_bound(const BoundInputs& in);
double robust_gap_bound(const BoundInputs& in);

struct TransferInputs {
    double d_dyn_learner_expert = 0.0; // d(T^L, T^E)
    double d_dyn_train_learner = 0.0;  // d(T^train, T^L)
    double kappa_train = 0.0;
    double d_pol_term = 0.0; // d_pol between the soft policy trained in T^train and the deployed learner policy
};

BoundBreakdown reward_transfer_bound(const BoundInputs& in, const TransferInputs& tr);
/// Special case: training MDP equal to the expert MDP, learner deploys the training soft policy.
double reward_transfer_bound_simplified(const BoundInputs& in);

struct InfeasibleInputs {
    double d_dyn_expert_learner = 0.0; // d(T^E, T^L)
    double d_dyn_expert_tstar = 0.0;   // d(T^E, T*)
    double d_pol_expert_player = 0.0;  // d_pol(pi*_E, pi^pl)
};

BoundBreakdown infeasible_gap_bound(const BoundInputs& in, const InfeasibleInputs& inf);

double corollary_alpha_choice(double d_dyn_expert_learner, double d_dyn_tstar_expert);

struct ConstructiveGaps {
    double mce_gap = 0.0;
    double robust_gap = 0.0;
    double player_a1_prob = 0.0;
};

ConstructiveGaps constructive_gaps(double eps_e, double gamma, double alpha);

} // namespace robirl
