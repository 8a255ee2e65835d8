#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace robirl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kProbTol = 1e-12;

/**
 * Dense transition kernel. Row s*|A| + a of the backing matrix holds the
 * next-state distribution T(.|s,a).
 */
class TransitionTensor {
public:
    TransitionTensor() = default;
    TransitionTensor(int n_states, int n_actions);
    TransitionTensor(int n_states, int n_actions, RowMatrix data);

    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }

    /// T(s_next | s, a)
    double operator()(int s, int a, int s_next) const { return data_(row(s, a), s_next); }
    double& operator()(int s, int a, int s_next) { return data_(row(s, a), s_next); }

    int row(int s, int a) const { return s * n_actions_ + a; }
    const RowMatrix& matrix() const { return data_; }

    /// Throws DomainError unless every row is a distribution within tol.
    void validate(double tol = kProbTol) const;

private:
    int n_states_ = 0;
    int n_actions_ = 0;
    RowMatrix data_;
};

/// Linear reward R(s) = <theta, phi(s)>.
struct RewardModel {
    Matrix features; // |S| x d
    Vector theta;    // d

    static RewardModel one_hot(const Vector& per_state);

    Vector rewards() const;
    int dim() const { return static_cast<int>(features.cols()); }
    void validate(int n_states) const;
};

struct StochasticPolicy {
    RowMatrix probs; // |S| x |A|

    StochasticPolicy() = default;
    explicit StochasticPolicy(RowMatrix p) : probs(std::move(p)) {}

    static StochasticPolicy uniform(int n_states, int n_actions);
    static StochasticPolicy deterministic(const std::vector<int>& actions, int n_actions);

    int n_states() const { return static_cast<int>(probs.rows()); }
    int n_actions() const { return static_cast<int>(probs.cols()); }
    double operator()(int s, int a) const { return probs(s, a); }

    void validate(double tol = kProbTol) const;
};

struct OccupancyMeasure {
    Vector rho;

    void validate(double tol = 1e-9) const;
};

class TabularMdp {
public:
    TabularMdp(TransitionTensor transitions, double gamma, Vector p0,
               std::optional<RewardModel> reward = std::nullopt);

    int n_states() const { return transitions_.n_states(); }
    int n_actions() const { return transitions_.n_actions(); }
    double gamma() const { return gamma_; }
    const Vector& p0() const { return p0_; }
    const TransitionTensor& transitions() const { return transitions_; }
    const std::optional<RewardModel>& reward() const { return reward_; }

    /// Per-state reward vector; throws ConfigError when the MDP carries none.
    Vector reward_vector() const;

    TabularMdp with_reward(RewardModel reward) const;
    TabularMdp with_transitions(TransitionTensor transitions) const;
    TabularMdp without_reward() const;

private:
    TransitionTensor transitions_;
    double gamma_;
    Vector p0_;
    std::optional<RewardModel> reward_;
};

/// State-to-state kernel under a policy: P(s, s') = sum_a pi(a|s) T(s'|s,a).
Matrix policy_kernel(const TabularMdp& mdp, const StochasticPolicy& policy);

/**
 * Discounted state occupancy, normalised to sum to one, by fixed-point
 * iteration from (1-gamma) P0. Stops once the contraction bound
 * gamma/(1-gamma) * ||rho_{k+1} - rho_k||_1 on the remaining error is <= tol.
 */
OccupancyMeasure state_occupancy(const TabularMdp& mdp, const StochasticPolicy& policy,
                                 double tol = 1e-10, long max_iterations = 100000);

double dyn_distance(const TransitionTensor& t1, const TransitionTensor& t2);
double pol_distance(const StochasticPolicy& p1, const StochasticPolicy& p2);

TransitionTensor mix_dynamics(const TransitionTensor& t_ref, const TransitionTensor& t_bar, double eps);
StochasticPolicy mix_policies(const StochasticPolicy& p_pl, const StochasticPolicy& p_op, double alpha);

/// Shannon entropy (nats) of each policy row, with 0 log 0 = 0.
Vector policy_entropy(const StochasticPolicy& policy);

double expected_return(const TabularMdp& mdp, const StochasticPolicy& policy, double tol = 1e-10);
double soft_return(const TabularMdp& mdp, const StochasticPolicy& policy, double tol = 1e-10);

/// Reward-free return from an occupancy: <R, rho> / (1 - gamma).
double return_from_occupancy(const Vector& reward, const OccupancyMeasure& occ, double gamma);

void check_policy_shape(const TabularMdp& mdp, const StochasticPolicy& policy);

} // namespace robirl
