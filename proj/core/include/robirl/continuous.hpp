#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace robirl::cont {

using Vec2 = Eigen::Vector2d;
using Vec7 = Eigen::Matrix<double, 7, 1>;
using Params = Eigen::Matrix<double, 16, 1>; // 14 weights (row-major) then 2 log-stds
using Rng = std::mt19937_64;

inline constexpr double kActionBound = 0.5;

struct State {
    double x = 0.0;
    double y = 1.0;
};

struct GaussianGridEnv {
    double eps = 0.0;   // probability of the drift branch
    int horizon = 200;  // episode cap
    double gamma = 0.99;
};

/// [x^2, y^2, x, y, exp(-8(x^2+y^2)), goal indicator, 1]
Vec7 features(const State& s);
/// Weights that reproduce the task reward through features().
Vec7 true_reward_weights();
double true_reward(const State& s);
bool in_goal(const State& s);

struct StepResult {
    State next;
    double reward = 0.0;
    bool done = false;
    bool drifted = false;
};

/// One transition; the action must already lie in the action box. Reward is <theta, phi(next)>.
StepResult gaussian_grid_step(const State& s, const Vec2& a, double eps, Rng& rng,
                              const Vec7& reward_theta = true_reward_weights());

Vec2 clip_action(const Vec2& a);

struct LinearGaussianPolicy {
    Eigen::Matrix<double, 2, 7> weights = Eigen::Matrix<double, 2, 7>::Zero();
    Vec2 log_std = Vec2::Constant(std::log(0.3));

    Vec2 mean(const Vec7& phi) const { return weights * phi; }
    /// Unclipped sample from N(W phi, diag(exp(2 log_std))).
    Vec2 sample(const Vec7& phi, Rng& rng) const;
    double log_prob(const Vec7& phi, const Vec2& a) const;
    Params grad_log_prob(const Vec7& phi, const Vec2& a) const;

    Params params() const;
    void set_params(const Params& p);
};

/// Hand-set controller used as the demonstrator: go right along the top edge, then down.
LinearGaussianPolicy expert_policy();

struct Trajectory {
    std::vector<State> states; // s_0 .. s_T
    std::vector<Vec2> player_actions;
    std::vector<Vec2> opponent_actions;
    std::vector<char> player_controlled;
    std::vector<double> rewards; // rewards[t] = R(s_{t+1})
    Vec7 feature_means = Vec7::Zero();
    bool reached_goal = false;
};

/// Player controls each step w.p. alpha. With uniform_actions both players draw uniformly from the box.
Trajectory rollout(const GaussianGridEnv& env, const LinearGaussianPolicy& player,
                   const LinearGaussianPolicy* opponent, double alpha, const Vec7& reward_theta, Rng& rng,
                   bool uniform_actions = false);

double discounted_return(const Trajectory& tr, double gamma);

class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PolicyGradientConfig {
    int n_updates = 50;
    int n_traj = 20;
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double min_log_std = std::log(0.02);
    double max_log_std = std::log(1.0);
    bool train_opponent = true;
    /// Subtract the leave-one-out batch mean of the return-to-go at each step (unbiased).
    bool baseline = true;
    int n_workers = 1;
};

/// REINFORCE gradients from a batch: player ascent direction, opponent descent direction, each gated
/// to the steps that policy controlled.
struct GameGradients {
    Params player = Params::Zero();
    Params opponent = Params::Zero();
};
GameGradients reinforce_gradients(const std::vector<Trajectory>& batch, const LinearGaussianPolicy& player,
                                  const LinearGaussianPolicy& opponent, double gamma, bool baseline = false);

struct PolicyAdam {
    Params m = Params::Zero();
    Params v = Params::Zero();
    int t = 0;
};

struct GamePolicies {
    LinearGaussianPolicy player;
    LinearGaussianPolicy opponent;
    PolicyAdam player_adam;
    PolicyAdam opponent_adam;
};

/**
 * Policy-gradient solver for the action-robust game under reward <theta, phi>.
 * Warm-starts from and updates `game` in place.
 */
void two_player_policy_gradient(const GaussianGridEnv& env, const Vec7& reward_theta, double alpha,
                                const PolicyGradientConfig& cfg, GamePolicies& game, std::uint64_t seed);

struct ReirlConfig {
    int n_outer = 30;
    int n_theta = 20;
    int dataset_size = 100;
    double theta_lr = 0.2;
    PolicyGradientConfig pg;
    /// false: single-agent RE IRL with no opponent at all.
    bool two_player = true;
};

struct ReirlResult {
    Vec7 theta = Vec7::Zero();
    LinearGaussianPolicy player;
    LinearGaussianPolicy opponent;
    std::vector<double> grad_norm_history;
};

/// Softmax of <theta, phi_bar^tau> over the dataset.
Eigen::VectorXd trajectory_weights(const Vec7& theta, const std::vector<Vec7>& feature_means);
/// phi_bar^E - sum_tau P(tau|theta) phi_bar^tau
Vec7 reirl_gradient(const Vec7& theta, const Vec7& expert_mean, const std::vector<Vec7>& feature_means);

ReirlResult relative_entropy_irl(const GaussianGridEnv& env, const Vec7& expert_feature_mean, double alpha,
                                 const ReirlConfig& cfg, std::uint64_t seed);

/// Mean of per-trajectory feature means over n demonstrations of the expert.
Vec7 expert_feature_mean(const GaussianGridEnv& env, const LinearGaussianPolicy& expert, int n_demos,
                         std::uint64_t seed);

struct ReturnStats {
    double mean = 0.0;
    double sd = 0.0;
};

/// Discounted task return of the policy acting alone.
ReturnStats evaluate_continuous(const GaussianGridEnv& env, const LinearGaussianPolicy& policy, int n_episodes,
                                std::uint64_t seed);

/// Independent stream for (seed, a, b, c).
Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

} // namespace robirl::cont
