#include "robirl/bounds.hpp"

#include "robirl/errors.hpp"

#include <algorithm>
#include <cmath>

namespace robirl {

namespace {

void require_alpha(const BoundInputs& in) {
    if (!in.alpha)
        throw ConfigError("this bound needs alpha");
    if (!(*in.alpha >= 0.0 && *in.alpha <= 1.0))
        throw DomainError("alpha must lie in [0,1]");
}

void require_distance(double d, const char* name) {
    if (!(d >= 0.0 && d <= 2.0))
        throw DomainError(std::string(name) + " must lie in [0,2]");
}

double scale(const BoundInputs& in) { return in.r_abs_max / ((1.0 - in.gamma) * (1.0 - in.gamma)); }

} // namespace

BoundInputs BoundInputs::from_rewards(double gamma, const Vector& reward, int n_actions, double d_dyn) {
    BoundInputs in;
    in.gamma = gamma;
    in.r_min = reward.minCoeff();
    in.r_max = reward.maxCoeff();
    in.r_abs_max = std::max(std::abs(in.r_min), std::abs(in.r_max));
    in.n_actions = n_actions;
    in.d_dyn = d_dyn;
    return in;
}

void BoundInputs::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw DomainError("gamma must lie in (0,1)");
    if (r_min > r_max)
        throw DomainError("r_min must not exceed r_max");
    if (std::abs(r_abs_max - std::max(std::abs(r_min), std::abs(r_max))) > 1e-12 * (1.0 + r_abs_max))
        throw DomainError("r_abs_max must equal max(|r_min|, |r_max|)");
    if (n_actions < 1)
        throw DomainError("n_actions must be positive");
    require_distance(d_dyn, "d_dyn");
    if (d_pol)
        require_distance(*d_pol, "d_pol");
}

double kappa(const BoundInputs& in) {
    in.validate();
    const double log_a = std::log(static_cast<double>(in.n_actions));
    const double radicand = in.gamma * std::max(in.r_max + log_a, -log_a - in.r_min);
    if (radicand < 0.0)
        throw DomainError("kappa radicand is negative; the bound is inapplicable for these rewards");
    return std::sqrt(radicand);
}

double lemma1_pol_bound(const BoundInputs& in) {
    const double k = kappa(in);
    const double g = in.gamma;
    const double sqrt_branch = k * std::sqrt(in.d_dyn) / (1.0 - g);
    const double lin_branch = k * k * in.d_dyn / ((1.0 - g) * (1.0 - g));
    return std::min(2.0, 2.0 * std::min(sqrt_branch, lin_branch));
}

double thm1_gap_bound(const BoundInputs& in) {
    in.validate();
    return in.gamma * scale(in) * in.d_dyn;
}

double soft_expert_gap_bound(const BoundInputs& in) {
    const double k = kappa(in);
    const double g = in.gamma;
    return thm1_gap_bound(in) + 2.0 * k * in.r_abs_max / std::pow(1.0 - g, 3) * std::sqrt(in.d_dyn);
}

double robust_gap_bound(const BoundInputs& in) {
    in.validate();
    require_alpha(in);
    return scale(in) * (in.gamma * in.d_dyn + 2.0 * (1.0 - *in.alpha));
}

BoundBreakdown reward_transfer_bound(const BoundInputs& in, const TransferInputs& tr) {
    in.validate();
    require_distance(tr.d_dyn_learner_expert, "d(T^L,T^E)");
    require_distance(tr.d_dyn_train_learner, "d(T^train,T^L)");
    require_distance(tr.d_pol_term, "d_pol");
    if (tr.kappa_train < 0.0)
        throw DomainError("kappa_train must be nonnegative");
    const double c = scale(in);
    const double g = in.gamma;
    BoundBreakdown b;
    b.terms = {
        {"learner_expert_dynamics", c * g * tr.d_dyn_learner_expert},
        {"soft_policy_shift", c * 2.0 * tr.kappa_train * std::sqrt(tr.d_dyn_train_learner) / (1.0 - g)},
        {"train_learner_dynamics", c * g * tr.d_dyn_train_learner},
        {"policy_distance", c * tr.d_pol_term},
    };
    for (const auto& [name, v] : b.terms)
        b.value += v;
    return b;
}

double reward_transfer_bound_simplified(const BoundInputs& in) {
    const double k = kappa(in);
    const double g = in.gamma;
    return 2.0 * scale(in) * (g * in.d_dyn + k * std::sqrt(in.d_dyn) / (1.0 - g));
}

BoundBreakdown infeasible_gap_bound(const BoundInputs& in, const InfeasibleInputs& inf) {
    in.validate();
    require_alpha(in);
    require_distance(inf.d_dyn_expert_learner, "d(T^E,T^L)");
    require_distance(inf.d_dyn_expert_tstar, "d(T^E,T*)");
    require_distance(inf.d_pol_expert_player, "d_pol(pi*_E,pi^pl)");
    const double c = scale(in);
    const double g = in.gamma;
    const double a = *in.alpha;
    BoundBreakdown b;
    b.terms = {
        {"demonstration", g * c * inf.d_dyn_expert_learner},
        {"transfer", g * c * 2.0 * (1.0 - a) * (1.0 - a)},
        {"infeasibility_policy", c * inf.d_pol_expert_player},
        {"infeasibility_dynamics",
         g * c * (a * inf.d_dyn_expert_learner + (1.0 - a) * inf.d_dyn_expert_tstar)},
    };
    for (const auto& [name, v] : b.terms)
        b.value += v;
    return b;
}

double corollary_alpha_choice(double d_dyn_expert_learner, double d_dyn_tstar_expert) {
    require_distance(d_dyn_expert_learner, "d(T^E,T^L)");
    require_distance(d_dyn_tstar_expert, "d(T*,T^E)");
    return std::min(1.0, 1.0 - d_dyn_expert_learner / 4.0 + d_dyn_tstar_expert / 4.0);
}

ConstructiveGaps constructive_gaps(double eps_e, double gamma, double alpha) {
    if (!(eps_e >= 0.0 && eps_e <= 1.0))
        throw DomainError("eps_e must lie in [0,1]");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw DomainError("gamma must lie in (0,1)");
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw DomainError("alpha must lie in (0,1]");
    if (alpha < 1.0 - eps_e)
        throw DomainError("player policy not well-defined: alpha < 1 - eps_e");
    const double lead = 2.0 * gamma / (1.0 - gamma);
    return ConstructiveGaps{lead * eps_e, lead * std::abs(alpha - (1.0 - eps_e)) / alpha, (1.0 - eps_e) / alpha};
}

} // namespace robirl
