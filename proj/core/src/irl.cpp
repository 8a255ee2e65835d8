#include "robirl/irl.hpp"

#include "robirl/errors.hpp"

#include <cmath>
#include <string>

namespace robirl {

IrlConfig IrlConfig::gridworld() { return IrlConfig{}; }

IrlConfig IrlConfig::objectworld() {
    IrlConfig c;
    c.learning_rate = 1e-3;
    c.adam_beta1 = 0.9;
    c.adam_beta2 = 0.999;
    c.adam_eps = 1e-8;
    c.weight_decay = 0.01;
    c.n_steps = 200;
    return c;
}

void IrlConfig::validate() const {
    if (!(learning_rate > 0.0))
        throw ConfigError("learning_rate must be positive");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
        throw ConfigError("Adam betas must lie in [0,1)");
    if (!(adam_eps > 0.0))
        throw ConfigError("adam_eps must be positive");
    if (weight_decay < 0.0)
        throw ConfigError("weight_decay must be nonnegative");
    if (n_steps < 1)
        throw ConfigError("n_steps must be at least 1");
    if (!(inner_tol > 0.0))
        throw ConfigError("inner_tol must be positive");
}

void adam_step(Vector& theta, const Vector& grad, AdamState& state, const IrlConfig& cfg, int step_index) {
    if (grad.size() != theta.size())
        throw ShapeError("gradient and theta differ in length");
    if (step_index < 1)
        throw DomainError("Adam step index starts at 1");
    if (state.m.size() == 0) {
        state.m = Vector::Zero(theta.size());
        state.v = Vector::Zero(theta.size());
    }
    if (state.m.size() != theta.size() || state.v.size() != theta.size())
        throw ShapeError("Adam moments differ in length from theta");

    if (cfg.weight_decay > 0.0)
        theta -= cfg.learning_rate * cfg.weight_decay * theta;

    const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
    state.m = b1 * state.m + (1.0 - b1) * grad;
    state.v = b2 * state.v + (1.0 - b2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(b1, step_index);
    const double c2 = 1.0 - std::pow(b2, step_index);
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        double m_hat = state.m(i) / c1;
        double v_hat = state.v(i) / c2;
        theta(i) -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
    }
}

namespace {

Vector initial_theta(const IrlConfig& cfg, const Matrix& features) {
    if (cfg.theta_init.size() == 0)
        return Vector::Zero(features.cols());
    if (cfg.theta_init.size() != features.cols())
        throw ShapeError("theta_init length must equal the feature dimension");
    return cfg.theta_init;
}

void check_inputs(const TabularMdp& learner, const OccupancyMeasure& target, const Matrix& features) {
    if (target.rho.size() != learner.n_states())
        throw ShapeError("target occupancy length must equal |S|");
    if (features.rows() != learner.n_states())
        throw ShapeError("feature matrix must have one row per state");
    target.validate();
}

template <class F>
auto at_step(int step, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(std::string("IRL step ") + std::to_string(step) + ": " + e.what(),
                               e.iterations(), e.residual());
    }
}

void record(IrlResult& res, const IrlConfig& cfg, int step, const Vector& grad, double l1, const Vector& theta) {
    IrlStepInfo info{step, grad.norm(), l1};
    res.gradient_norm_history.push_back(info.grad_norm);
    res.l1_history.push_back(l1);
    if (cfg.record_theta)
        res.theta_history.push_back(theta);
    if (cfg.on_step)
        cfg.on_step(info);
}

} // namespace

MceGradient mce_gradient(const TabularMdp& learner, const OccupancyMeasure& rho_target, const Matrix& features,
                         const Vector& theta, const SolverOptions& opts) {
    check_inputs(learner, rho_target, features);
    if (theta.size() != features.cols())
        throw ShapeError("theta length must equal the feature dimension");
    MceGradient out;
    out.solution = soft_value_iteration(learner, features * theta, opts);
    const OccupancyMeasure occ = state_occupancy(learner, out.solution.policy, opts.tol, opts.max_iterations);
    out.mismatch = occ.rho - rho_target.rho;
    out.gradient = features.transpose() * out.mismatch;
    return out;
}

IrlResult mce_irl(const TabularMdp& learner, const OccupancyMeasure& rho_target, const Matrix& features,
                  const IrlConfig& cfg) {
    cfg.validate();
    check_inputs(learner, rho_target, features);
    const SolverOptions opts = cfg.solver_options();

    IrlResult res;
    Vector theta = initial_theta(cfg, features);
    AdamState adam;
    for (int k = 1; k <= cfg.n_steps; ++k) {
        const MceGradient g = at_step(k, [&] { return mce_gradient(learner, rho_target, features, theta, opts); });
        const Vector& grad = g.gradient;
        adam_step(theta, grad, adam, cfg, k);
        record(res, cfg, k, grad, g.mismatch.lpNorm<1>(), theta);
        res.steps_run = k;
        if (cfg.grad_norm_stop > 0.0 && grad.norm() < cfg.grad_norm_stop)
            break;
    }

    const int last = res.steps_run + 1;
    MceGradient g = at_step(last, [&] { return mce_gradient(learner, rho_target, features, theta, opts); });
    res.final_l1_mismatch = g.mismatch.lpNorm<1>();
    res.player_l1_mismatch = res.final_l1_mismatch;
    res.theta = theta;
    res.policy = std::move(g.solution.policy);
    return res;
}

IrlResult robust_mce_irl(const TabularMdp& learner, const OccupancyMeasure& rho_target, double alpha,
                         const Matrix& features, const IrlConfig& cfg) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw DomainError("alpha must lie in (0,1]");
    cfg.validate();
    check_inputs(learner, rho_target, features);
    const SolverOptions opts = cfg.solver_options();

    IrlResult res;
    Vector theta = initial_theta(cfg, features);
    AdamState adam;

    // Player starts at its soft policy under theta_init (uniform for theta = 0),
    // the opponent starts uniform.
    StochasticPolicy player =
        at_step(0, [&] { return two_player_soft_vi(learner, features * theta, alpha, opts); }).player;
    StochasticPolicy opponent = StochasticPolicy::uniform(learner.n_states(), learner.n_actions());

    for (int k = 1; k <= cfg.n_steps; ++k) {
        const StochasticPolicy mix = mix_policies(player, opponent, alpha);
        const OccupancyMeasure occ = at_step(k, [&] { return state_occupancy(learner, mix, cfg.inner_tol); });
        const Vector diff = occ.rho - rho_target.rho;
        const Vector grad = features.transpose() * diff;
        adam_step(theta, grad, adam, cfg, k);
        TwoPlayerSolution sol = at_step(k, [&] { return two_player_soft_vi(learner, features * theta, alpha, opts); });
        player = std::move(sol.player);
        opponent = std::move(sol.opponent);
        record(res, cfg, k, grad, diff.lpNorm<1>(), theta);
        res.steps_run = k;
        if (cfg.grad_norm_stop > 0.0 && grad.norm() < cfg.grad_norm_stop)
            break;
    }

    const int last = res.steps_run + 1;
    const OccupancyMeasure occ_mix =
        at_step(last, [&] { return state_occupancy(learner, mix_policies(player, opponent, alpha), cfg.inner_tol); });
    const OccupancyMeasure occ_pl = at_step(last, [&] { return state_occupancy(learner, player, cfg.inner_tol); });
    res.final_l1_mismatch = (occ_mix.rho - rho_target.rho).lpNorm<1>();
    res.player_l1_mismatch = (occ_pl.rho - rho_target.rho).lpNorm<1>();
    res.theta = theta;
    res.policy = std::move(player);
    res.opponent = std::move(opponent);
    return res;
}

} // namespace robirl
