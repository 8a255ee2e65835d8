#include "robirl/continuous.hpp"

#include "robirl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

namespace robirl::cont {

namespace {

template <class F>
std::vector<Trajectory> collect(int n, int workers, F&& make) {
    std::vector<Trajectory> out(static_cast<std::size_t>(n));
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i)
            out[i] = make(i);
        return out;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (int i = w; i < n; i += workers)
                out[i] = make(i);
        });
    for (auto& t : pool)
        t.join();
    return out;
}

void adam_ascent(Params& p, const Params& grad, PolicyAdam& st, const PolicyGradientConfig& cfg) {
    ++st.t;
    st.m = cfg.beta1 * st.m + (1.0 - cfg.beta1) * grad;
    st.v = cfg.beta2 * st.v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(cfg.beta1, st.t);
    const double c2 = 1.0 - std::pow(cfg.beta2, st.t);
    for (int i = 0; i < p.size(); ++i)
        p(i) += cfg.lr * (st.m(i) / c1) / (std::sqrt(st.v(i) / c2) + cfg.adam_eps);
}

void clamp_std(LinearGaussianPolicy& pol, const PolicyGradientConfig& cfg) {
    for (int i = 0; i < 2; ++i)
        pol.log_std(i) = std::clamp(pol.log_std(i), cfg.min_log_std, cfg.max_log_std);
}

void divergence_guard(const LinearGaussianPolicy& pol, const char* who) {
    const double mean_abs = pol.weights.cwiseAbs().mean();
    if (!(mean_abs <= 1e3))
        throw DivergenceError(std::string(who) + " weights diverged (mean |w| = " + std::to_string(mean_abs) + ")");
}

} // namespace

Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(c)};
    return Rng(seq);
}

Vec7 features(const State& s) {
    Vec7 f;
    f << s.x * s.x, s.y * s.y, s.x, s.y, std::exp(-8.0 * (s.x * s.x + s.y * s.y)), in_goal(s) ? 1.0 : 0.0, 1.0;
    return f;
}

Vec7 true_reward_weights() {
    // -(x-1)^2 - (y+1)^2 - 80 exp(-8 r^2) + 10 * goal
    Vec7 w;
    w << -1.0, -1.0, 2.0, -2.0, -80.0, 10.0, -2.0;
    return w;
}

double true_reward(const State& s) { return true_reward_weights().dot(features(s)); }

bool in_goal(const State& s) { return s.x >= 0.95 && s.x <= 1.0 && s.y >= -1.0 && s.y <= -0.95; }

Vec2 clip_action(const Vec2& a) { return a.cwiseMax(-kActionBound).cwiseMin(kActionBound); }

StepResult gaussian_grid_step(const State& s, const Vec2& a, double eps, Rng& rng, const Vec7& reward_theta) {
    if (!(eps >= 0.0 && eps <= 1.0))
        throw DomainError("drift probability must lie in [0,1]");
    if ((a.array().abs() > kActionBound + 1e-12).any())
        throw DomainError("action outside the action box");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    StepResult out;
    out.drifted = unif(rng) < eps;
    State n = s;
    if (out.drifted) {
        const double norm = std::hypot(s.x, s.y);
        if (norm > 0.0) {
            n.x -= s.x / (10.0 * norm);
            n.y -= s.y / (10.0 * norm);
        }
    } else {
        n.x += a(0) / 10.0;
        n.y += a(1) / 10.0;
    }
    n.x = std::clamp(n.x, 0.0, 1.0);
    n.y = std::clamp(n.y, -1.0, 1.0);
    out.next = n;
    out.reward = reward_theta.dot(features(n));
    out.done = in_goal(n);
    return out;
}

Vec2 LinearGaussianPolicy::sample(const Vec7& phi, Rng& rng) const {
    std::normal_distribution<double> z(0.0, 1.0);
    const Vec2 mu = mean(phi);
    Vec2 a;
    for (int i = 0; i < 2; ++i)
        a(i) = mu(i) + std::exp(log_std(i)) * z(rng);
    return a;
}

double LinearGaussianPolicy::log_prob(const Vec7& phi, const Vec2& a) const {
    const Vec2 mu = mean(phi);
    double lp = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double z = (a(i) - mu(i)) / std::exp(log_std(i));
        lp += -0.5 * z * z - log_std(i) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
    return lp;
}

Params LinearGaussianPolicy::grad_log_prob(const Vec7& phi, const Vec2& a) const {
    const Vec2 mu = mean(phi);
    Params g;
    for (int i = 0; i < 2; ++i) {
        const double var = std::exp(2.0 * log_std(i));
        const double diff = a(i) - mu(i);
        for (int j = 0; j < 7; ++j)
            g(i * 7 + j) = diff / var * phi(j);
        g(14 + i) = diff * diff / var - 1.0;
    }
    return g;
}

Params LinearGaussianPolicy::params() const {
    Params p;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 7; ++j)
            p(i * 7 + j) = weights(i, j);
    p(14) = log_std(0);
    p(15) = log_std(1);
    return p;
}

void LinearGaussianPolicy::set_params(const Params& p) {
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 7; ++j)
            weights(i, j) = p(i * 7 + j);
    log_std << p(14), p(15);
}

LinearGaussianPolicy expert_policy() {
    LinearGaussianPolicy pol;
    // a_x = 0.5 (saturated), a_y = -0.6 x^2: sweeps along the top edge, then down the right edge
    pol.weights.setZero();
    pol.weights(0, 6) = 0.5;
    pol.weights(1, 0) = -0.6;
    pol.log_std = Vec2::Constant(std::log(0.05));
    return pol;
}

Trajectory rollout(const GaussianGridEnv& env, const LinearGaussianPolicy& player,
                   const LinearGaussianPolicy* opponent, double alpha, const Vec7& reward_theta, Rng& rng,
                   bool uniform_actions) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw DomainError("alpha must lie in [0,1]");
    if (env.horizon < 1)
        throw DomainError("horizon must be positive");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_real_distribution<double> box(-kActionBound, kActionBound);

    Trajectory tr;
    State s{0.0, 1.0};
    tr.states.push_back(s);
    Vec7 phi = features(s);
    tr.feature_means = phi;
    for (int t = 0; t < env.horizon; ++t) {
        Vec2 a_pl, a_op = Vec2::Zero();
        if (uniform_actions) {
            a_pl << box(rng), box(rng);
            a_op = a_pl;
        } else {
            a_pl = player.sample(phi, rng);
            if (opponent)
                a_op = opponent->sample(phi, rng);
        }
        bool by_player = true;
        if (opponent && !uniform_actions)
            by_player = unif(rng) < alpha;
        const Vec2 executed = clip_action(by_player ? a_pl : a_op);
        const StepResult st = gaussian_grid_step(s, executed, env.eps, rng, reward_theta);
        tr.player_actions.push_back(a_pl);
        tr.opponent_actions.push_back(a_op);
        tr.player_controlled.push_back(by_player ? 1 : 0);
        tr.rewards.push_back(st.reward);
        s = st.next;
        tr.states.push_back(s);
        phi = features(s);
        tr.feature_means += phi;
        if (st.done) {
            tr.reached_goal = true;
            break;
        }
    }
    tr.feature_means /= static_cast<double>(tr.states.size());
    return tr;
}

double discounted_return(const Trajectory& tr, double gamma) {
    double g = 0.0;
    for (auto it = tr.rewards.rbegin(); it != tr.rewards.rend(); ++it)
        g = *it + gamma * g;
    return g;
}

GameGradients reinforce_gradients(const std::vector<Trajectory>& batch, const LinearGaussianPolicy& player,
                                  const LinearGaussianPolicy& opponent, double gamma, bool baseline) {
    GameGradients out;
    if (batch.empty())
        return out;
    // return-to-go per trajectory, zero past termination
    std::size_t longest = 0;
    for (const auto& tr : batch)
        longest = std::max(longest, tr.rewards.size());
    std::vector<std::vector<double>> togo(batch.size());
    std::vector<double> total(longest, 0.0);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& r = batch[i].rewards;
        togo[i].assign(r.size(), 0.0);
        double g = 0.0;
        for (std::size_t t = r.size(); t-- > 0;) {
            g = r[t] + gamma * g;
            togo[i][t] = g;
            total[t] += g;
        }
    }
    const double others = static_cast<double>(batch.size()) - 1.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& tr = batch[i];
        double disc = 1.0;
        for (std::size_t t = 0; t < tr.rewards.size(); ++t) {
            double credit = togo[i][t];
            if (baseline && others > 0.0)
                credit -= (total[t] - togo[i][t]) / others;
            const Vec7 phi = features(tr.states[t]);
            if (tr.player_controlled[t])
                out.player += disc * credit * player.grad_log_prob(phi, tr.player_actions[t]);
            else
                out.opponent -= disc * credit * opponent.grad_log_prob(phi, tr.opponent_actions[t]);
            disc *= gamma;
        }
    }
    out.player /= static_cast<double>(batch.size());
    out.opponent /= static_cast<double>(batch.size());
    return out;
}

void two_player_policy_gradient(const GaussianGridEnv& env, const Vec7& reward_theta, double alpha,
                                const PolicyGradientConfig& cfg, GamePolicies& game, std::uint64_t seed) {
    if (cfg.n_updates < 1 || cfg.n_traj < 1)
        throw DomainError("policy-gradient counts must be positive");
    for (int k = 0; k < cfg.n_updates; ++k) {
        const LinearGaussianPolicy* opp = cfg.train_opponent ? &game.opponent : nullptr;
        std::vector<Trajectory> batch = collect(cfg.n_traj, cfg.n_workers, [&](int i) {
            Rng rng = stream(seed, 1, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(i));
            return rollout(env, game.player, opp, alpha, reward_theta, rng);
        });
        const GameGradients g = reinforce_gradients(batch, game.player, game.opponent, env.gamma, cfg.baseline);

        Params p = game.player.params();
        adam_ascent(p, g.player, game.player_adam, cfg);
        game.player.set_params(p);
        clamp_std(game.player, cfg);
        divergence_guard(game.player, "player");

        if (cfg.train_opponent && alpha < 1.0) {
            Params q = game.opponent.params();
            adam_ascent(q, g.opponent, game.opponent_adam, cfg);
            game.opponent.set_params(q);
            clamp_std(game.opponent, cfg);
            divergence_guard(game.opponent, "opponent");
        }
    }
}

Eigen::VectorXd trajectory_weights(const Vec7& theta, const std::vector<Vec7>& feature_means) {
    const auto n = static_cast<Eigen::Index>(feature_means.size());
    Eigen::VectorXd logits(n);
    for (Eigen::Index i = 0; i < n; ++i)
        logits(i) = theta.dot(feature_means[static_cast<std::size_t>(i)]);
    const double m = logits.maxCoeff();
    Eigen::VectorXd w = (logits.array() - m).exp();
    return w / w.sum();
}

Vec7 reirl_gradient(const Vec7& theta, const Vec7& expert_mean, const std::vector<Vec7>& feature_means) {
    if (feature_means.empty())
        throw DomainError("empty trajectory dataset");
    const Eigen::VectorXd w = trajectory_weights(theta, feature_means);
    Vec7 expect = Vec7::Zero();
    for (std::size_t i = 0; i < feature_means.size(); ++i)
        expect += w(static_cast<Eigen::Index>(i)) * feature_means[i];
    return expert_mean - expect;
}

ReirlResult relative_entropy_irl(const GaussianGridEnv& env, const Vec7& expert_feature_mean, double alpha,
                                 const ReirlConfig& cfg, std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw DomainError("alpha must lie in (0,1]");
    if (cfg.n_outer < 1 || cfg.n_theta < 1 || cfg.dataset_size < 1)
        throw DomainError("RE IRL counts must be positive");

    PolicyGradientConfig pg = cfg.pg;
    pg.train_opponent = cfg.two_player;
    const double game_alpha = cfg.two_player ? alpha : 1.0;

    ReirlResult res;
    GamePolicies game;
    Vec7 theta = Vec7::Zero();
    Vec7 m = Vec7::Zero(), v = Vec7::Zero();
    int adam_t = 0;
    const double b1 = 0.9, b2 = 0.999, adam_eps = 1e-8;

    for (int outer = 0; outer < cfg.n_outer; ++outer) {
        const bool uniform = outer == 0;
        const LinearGaussianPolicy* opp = cfg.two_player ? &game.opponent : nullptr;
        std::vector<Trajectory> data = collect(cfg.dataset_size, pg.n_workers, [&](int i) {
            Rng rng = stream(seed, 2, static_cast<std::uint64_t>(outer), static_cast<std::uint64_t>(i));
            return rollout(env, game.player, opp, game_alpha, true_reward_weights(), rng, uniform);
        });
        std::vector<Vec7> phis;
        phis.reserve(data.size());
        for (const auto& tr : data)
            phis.push_back(tr.feature_means);

        for (int k = 0; k < cfg.n_theta; ++k) {
            const Vec7 g = reirl_gradient(theta, expert_feature_mean, phis);
            res.grad_norm_history.push_back(g.norm());
            ++adam_t;
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
            const double c1 = 1.0 - std::pow(b1, adam_t), c2 = 1.0 - std::pow(b2, adam_t);
            for (int i = 0; i < 7; ++i)
                theta(i) += cfg.theta_lr * (m(i) / c1) / (std::sqrt(v(i) / c2) + adam_eps);
        }

        two_player_policy_gradient(env, theta, game_alpha, pg, game,
                                   seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(outer + 1)));
    }
    res.theta = theta;
    res.player = game.player;
    res.opponent = game.opponent;
    return res;
}

Vec7 expert_feature_mean(const GaussianGridEnv& env, const LinearGaussianPolicy& expert, int n_demos,
                         std::uint64_t seed) {
    if (n_demos < 1)
        throw DomainError("need at least one demonstration");
    Vec7 acc = Vec7::Zero();
    for (int i = 0; i < n_demos; ++i) {
        Rng rng = stream(seed, 3, static_cast<std::uint64_t>(i));
        acc += rollout(env, expert, nullptr, 1.0, true_reward_weights(), rng).feature_means;
    }
    return acc / n_demos;
}

ReturnStats evaluate_continuous(const GaussianGridEnv& env, const LinearGaussianPolicy& policy, int n_episodes,
                                std::uint64_t seed) {
    if (n_episodes < 1)
        throw DomainError("need at least one evaluation episode");
    std::vector<double> g(static_cast<std::size_t>(n_episodes));
    for (int i = 0; i < n_episodes; ++i) {
        Rng rng = stream(seed, 4, static_cast<std::uint64_t>(i));
        g[i] = discounted_return(rollout(env, policy, nullptr, 1.0, true_reward_weights(), rng), env.gamma);
    }
    double mean = 0.0;
    for (double x : g)
        mean += x;
    mean /= n_episodes;
    double ss = 0.0;
    for (double x : g)
        ss += (x - mean) * (x - mean);
    return ReturnStats{mean, n_episodes > 1 ? std::sqrt(ss / (n_episodes - 1)) : 0.0};
}

} // namespace robirl::cont
