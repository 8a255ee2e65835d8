#include "robirl/mdp.hpp"

#include "robirl/errors.hpp"

#include <cmath>
#include <string>

namespace robirl {

TransitionTensor::TransitionTensor(int n_states, int n_actions)
    : n_states_(n_states), n_actions_(n_actions),
      data_(RowMatrix::Zero(static_cast<Eigen::Index>(n_states) * n_actions, n_states)) {
    if (n_states <= 0 || n_actions <= 0)
        throw ShapeError("transition tensor needs positive state and action counts");
}

TransitionTensor::TransitionTensor(int n_states, int n_actions, RowMatrix data)
    : n_states_(n_states), n_actions_(n_actions), data_(std::move(data)) {
    if (n_states <= 0 || n_actions <= 0)
        throw ShapeError("transition tensor needs positive state and action counts");
    if (data_.rows() != static_cast<Eigen::Index>(n_states) * n_actions || data_.cols() != n_states)
        throw ShapeError("transition matrix must be (|S|*|A|) x |S|");
}

void TransitionTensor::validate(double tol) const {
    for (Eigen::Index r = 0; r < data_.rows(); ++r) {
        for (Eigen::Index c = 0; c < data_.cols(); ++c) {
            double p = data_(r, c);
            if (!(p >= 0.0 && p <= 1.0))
                throw DomainError("transition probability outside [0,1] at row " + std::to_string(r));
        }
        if (std::abs(data_.row(r).sum() - 1.0) > tol)
            throw DomainError("transition row " + std::to_string(r) + " does not sum to 1");
    }
}

RewardModel RewardModel::one_hot(const Vector& per_state) {
    const auto n = per_state.size();
    return RewardModel{Matrix::Identity(n, n), per_state};
}

Vector RewardModel::rewards() const {
    if (features.cols() != theta.size())
        throw ShapeError("reward features and theta disagree in dimension");
    return features * theta;
}

void RewardModel::validate(int n_states) const {
    if (features.rows() != n_states)
        throw ShapeError("feature matrix must have one row per state");
    if (features.cols() != theta.size())
        throw ShapeError("reward features and theta disagree in dimension");
}

StochasticPolicy StochasticPolicy::uniform(int n_states, int n_actions) {
    return StochasticPolicy(RowMatrix::Constant(n_states, n_actions, 1.0 / n_actions));
}

StochasticPolicy StochasticPolicy::deterministic(const std::vector<int>& actions, int n_actions) {
    RowMatrix p = RowMatrix::Zero(static_cast<Eigen::Index>(actions.size()), n_actions);
    for (std::size_t s = 0; s < actions.size(); ++s) {
        if (actions[s] < 0 || actions[s] >= n_actions)
            throw DomainError("action index out of range");
        p(static_cast<Eigen::Index>(s), actions[s]) = 1.0;
    }
    return StochasticPolicy(std::move(p));
}

void StochasticPolicy::validate(double tol) const {
    for (Eigen::Index s = 0; s < probs.rows(); ++s) {
        for (Eigen::Index a = 0; a < probs.cols(); ++a) {
            double p = probs(s, a);
            if (!(p >= 0.0 && p <= 1.0))
                throw DomainError("policy probability outside [0,1] in state " + std::to_string(s));
        }
        if (std::abs(probs.row(s).sum() - 1.0) > tol)
            throw DomainError("policy row " + std::to_string(s) + " does not sum to 1");
    }
}

void OccupancyMeasure::validate(double tol) const {
    if ((rho.array() < 0.0).any())
        throw DomainError("occupancy measure has negative entries");
    if (std::abs(rho.sum() - 1.0) > tol)
        throw DomainError("occupancy measure does not sum to 1");
}

TabularMdp::TabularMdp(TransitionTensor transitions, double gamma, Vector p0,
                       std::optional<RewardModel> reward)
    : transitions_(std::move(transitions)), gamma_(gamma), p0_(std::move(p0)), reward_(std::move(reward)) {
    if (!(gamma_ > 0.0 && gamma_ < 1.0))
        throw DomainError("gamma must lie in (0,1)");
    if (p0_.size() != transitions_.n_states())
        throw ShapeError("initial distribution length must equal |S|");
    if ((p0_.array() < 0.0).any() || std::abs(p0_.sum() - 1.0) > kProbTol)
        throw DomainError("initial distribution must be nonnegative and sum to 1");
    transitions_.validate();
    if (reward_)
        reward_->validate(transitions_.n_states());
}

Vector TabularMdp::reward_vector() const {
    if (!reward_)
        throw ConfigError("MDP has no reward model");
    return reward_->rewards();
}

TabularMdp TabularMdp::with_reward(RewardModel reward) const {
    return TabularMdp(transitions_, gamma_, p0_, std::move(reward));
}

TabularMdp TabularMdp::with_transitions(TransitionTensor transitions) const {
    return TabularMdp(std::move(transitions), gamma_, p0_, reward_);
}

TabularMdp TabularMdp::without_reward() const {
    return TabularMdp(transitions_, gamma_, p0_, std::nullopt);
}

void check_policy_shape(const TabularMdp& mdp, const StochasticPolicy& policy) {
    if (policy.n_states() != mdp.n_states() || policy.n_actions() != mdp.n_actions())
        throw ShapeError("policy shape does not match the MDP");
}

Matrix policy_kernel(const TabularMdp& mdp, const StochasticPolicy& policy) {
    check_policy_shape(mdp, policy);
    const int ns = mdp.n_states(), na = mdp.n_actions();
    const RowMatrix& t = mdp.transitions().matrix();
    Matrix k = Matrix::Zero(ns, ns);
    for (int s = 0; s < ns; ++s)
        for (int a = 0; a < na; ++a) {
            double p = policy(s, a);
            if (p != 0.0)
                k.row(s) += p * t.row(s * na + a);
        }
    return k;
}

OccupancyMeasure state_occupancy(const TabularMdp& mdp, const StochasticPolicy& policy,
                                 double tol, long max_iterations) {
    if (!(tol > 0.0))
        throw DomainError("occupancy tolerance must be positive");
    const Matrix kt = policy_kernel(mdp, policy).transpose();
    const double g = mdp.gamma();
    const Vector base = (1.0 - g) * mdp.p0();
    Vector rho = base;
    Vector next(rho.size());
    // gamma/(1-gamma) * ||rho_{k+1} - rho_k||_1 bounds the remaining l1 error
    const double err_factor = g / (1.0 - g);
    double change = 0.0;
    for (long it = 1; it <= max_iterations; ++it) {
        next.noalias() = kt * rho;
        next = base + g * next;
        change = err_factor * (next - rho).lpNorm<1>();
        rho.swap(next);
        if (change <= tol)
            return OccupancyMeasure{rho};
    }
    throw ConvergenceError("state occupancy did not converge", max_iterations, change);
}

double dyn_distance(const TransitionTensor& t1, const TransitionTensor& t2) {
    if (t1.n_states() != t2.n_states() || t1.n_actions() != t2.n_actions())
        throw ShapeError("transition tensors differ in shape");
    return (t1.matrix() - t2.matrix()).cwiseAbs().rowwise().sum().maxCoeff();
}

double pol_distance(const StochasticPolicy& p1, const StochasticPolicy& p2) {
    if (p1.n_states() != p2.n_states() || p1.n_actions() != p2.n_actions())
        throw ShapeError("policies differ in shape");
    return (p1.probs - p2.probs).cwiseAbs().rowwise().sum().maxCoeff();
}

TransitionTensor mix_dynamics(const TransitionTensor& t_ref, const TransitionTensor& t_bar, double eps) {
    if (!(eps >= 0.0 && eps <= 1.0))
        throw DomainError("mixing weight must lie in [0,1]");
    if (t_ref.n_states() != t_bar.n_states() || t_ref.n_actions() != t_bar.n_actions())
        throw ShapeError("transition tensors differ in shape");
    RowMatrix m = (1.0 - eps) * t_ref.matrix() + eps * t_bar.matrix();
    return TransitionTensor(t_ref.n_states(), t_ref.n_actions(), std::move(m));
}

StochasticPolicy mix_policies(const StochasticPolicy& p_pl, const StochasticPolicy& p_op, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw DomainError("alpha must lie in [0,1]");
    if (p_pl.n_states() != p_op.n_states() || p_pl.n_actions() != p_op.n_actions())
        throw ShapeError("policies differ in shape");
    return StochasticPolicy(RowMatrix(alpha * p_pl.probs + (1.0 - alpha) * p_op.probs));
}

Vector policy_entropy(const StochasticPolicy& policy) {
    Vector h = Vector::Zero(policy.n_states());
    for (int s = 0; s < policy.n_states(); ++s)
        for (int a = 0; a < policy.n_actions(); ++a) {
            double p = policy(s, a);
            if (p > 0.0)
                h(s) -= p * std::log(p);
        }
    return h;
}

double return_from_occupancy(const Vector& reward, const OccupancyMeasure& occ, double gamma) {
    if (reward.size() != occ.rho.size())
        throw ShapeError("reward and occupancy differ in length");
    return reward.dot(occ.rho) / (1.0 - gamma);
}

double expected_return(const TabularMdp& mdp, const StochasticPolicy& policy, double tol) {
    const Vector r = mdp.reward_vector();
    return return_from_occupancy(r, state_occupancy(mdp, policy, tol), mdp.gamma());
}

double soft_return(const TabularMdp& mdp, const StochasticPolicy& policy, double tol) {
    const Vector r = mdp.reward_vector();
    const Vector h = policy_entropy(policy);
    return return_from_occupancy(r + h, state_occupancy(mdp, policy, tol), mdp.gamma());
}

} // namespace robirl
