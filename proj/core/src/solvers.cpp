#include "robirl/solvers.hpp"

#include "robirl/errors.hpp"

#include <cmath>
#include <limits>

namespace robirl {

namespace {

void check_reward(const TabularMdp& mdp, const Vector& reward) {
    if (reward.size() != mdp.n_states())
        throw ShapeError("reward vector length must equal |S|");
}

void check_opts(const SolverOptions& opts) {
    if (!(opts.tol > 0.0))
        throw DomainError("solver tolerance must be positive");
    if (opts.max_iterations <= 0)
        throw DomainError("solver iteration cap must be positive");
}

// Q(s,a) = R(s) + gamma * (T V)(s,a); shared by every solver so that the
// alpha = 1 game reproduces single-agent soft VI bit for bit.
void bellman_q(const TabularMdp& mdp, const Vector& reward, const Vector& v, Vector& tv, RowMatrix& q) {
    const int ns = mdp.n_states(), na = mdp.n_actions();
    const double g = mdp.gamma();
    tv.noalias() = mdp.transitions().matrix() * v;
    for (int s = 0; s < ns; ++s)
        for (int a = 0; a < na; ++a)
            q(s, a) = reward(s) + g * tv(s * na + a);
}

} // namespace

double logsumexp(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
    const double m = x.maxCoeff();
    if (!std::isfinite(m))
        return m;
    return m + std::log((x.array() - m).exp().sum());
}

Eigen::RowVectorXd softmax(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
    const double m = x.maxCoeff();
    Eigen::RowVectorXd e = (x.array() - m).exp();
    return e / e.sum();
}

HardSolution value_iteration(const TabularMdp& mdp, const SolverOptions& opts) {
    return value_iteration(mdp, mdp.reward_vector(), opts);
}

HardSolution value_iteration(const TabularMdp& mdp, const Vector& reward, const SolverOptions& opts) {
    check_reward(mdp, reward);
    check_opts(opts);
    const int ns = mdp.n_states(), na = mdp.n_actions();
    Vector v = Vector::Zero(ns), tv(ns * na);
    RowMatrix q(ns, na);
    double change = 0.0;
    for (long it = 1; it <= opts.max_iterations; ++it) {
        bellman_q(mdp, reward, v, tv, q);
        Vector next = q.rowwise().maxCoeff();
        change = (next - v).lpNorm<Eigen::Infinity>();
        v.swap(next);
        if (change <= opts.tol) {
            bellman_q(mdp, reward, v, tv, q);
            std::vector<int> greedy(ns);
            for (int s = 0; s < ns; ++s) {
                int best = 0;
                for (int a = 1; a < na; ++a)
                    if (q(s, a) > q(s, best))
                        best = a;
                greedy[s] = best;
            }
            v = q.rowwise().maxCoeff();
            return HardSolution{v, q, StochasticPolicy::deterministic(greedy, na), it};
        }
    }
    throw ConvergenceError("value iteration did not converge", opts.max_iterations, change);
}

SoftSolution soft_value_iteration(const TabularMdp& mdp, const SolverOptions& opts) {
    return soft_value_iteration(mdp, mdp.reward_vector(), opts);
}

SoftSolution soft_value_iteration(const TabularMdp& mdp, const Vector& reward, const SolverOptions& opts,
                                  const std::optional<Vector>& v_init) {
    check_reward(mdp, reward);
    check_opts(opts);
    const int ns = mdp.n_states(), na = mdp.n_actions();
    Vector v = v_init ? *v_init : Vector::Zero(ns);
    if (v.size() != ns)
        throw ShapeError("initial value vector length must equal |S|");
    Vector tv(ns * na), next(ns);
    RowMatrix q(ns, na);
    double change = 0.0;
    for (long it = 1; it <= opts.max_iterations; ++it) {
        bellman_q(mdp, reward, v, tv, q);
        for (int s = 0; s < ns; ++s)
            next(s) = logsumexp(q.row(s));
        change = (next - v).lpNorm<Eigen::Infinity>();
        v.swap(next);
        if (change <= opts.tol) {
            RowMatrix pi(ns, na);
            for (int s = 0; s < ns; ++s)
                pi.row(s) = softmax(q.row(s));
            return SoftSolution{v, q, StochasticPolicy(std::move(pi)), it};
        }
    }
    throw ConvergenceError("soft value iteration did not converge", opts.max_iterations, change);
}

TwoPlayerTransition two_player_transition(const TabularMdp& mdp, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw DomainError("alpha must lie in [0,1]");
    const int ns = mdp.n_states(), na = mdp.n_actions();
    const RowMatrix& t = mdp.transitions().matrix();
    TwoPlayerTransition out{ns, na, RowMatrix(static_cast<Eigen::Index>(ns) * na * na, ns)};
    for (int s = 0; s < ns; ++s)
        for (int ap = 0; ap < na; ++ap)
            for (int ao = 0; ao < na; ++ao)
                out.data.row((static_cast<Eigen::Index>(s) * na + ap) * na + ao) =
                    alpha * t.row(s * na + ap) + (1.0 - alpha) * t.row(s * na + ao);
    return out;
}

TwoPlayerSolution two_player_soft_vi(const TabularMdp& mdp, double alpha, const SolverOptions& opts) {
    return two_player_soft_vi(mdp, mdp.reward_vector(), alpha, opts);
}

TwoPlayerSolution two_player_soft_vi(const TabularMdp& mdp, const Vector& reward, double alpha,
                                     const SolverOptions& opts) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw DomainError("alpha must lie in [0,1]");
    check_reward(mdp, reward);
    check_opts(opts);
    const int ns = mdp.n_states(), na = mdp.n_actions();
    const double g = mdp.gamma();
    const double beta = 1.0 - alpha;
    const RowMatrix& t = mdp.transitions().matrix();

    Vector v = Vector::Zero(ns), next(ns), tv(ns * na);
    Vector joint(static_cast<Eigen::Index>(ns) * na * na);
    RowMatrix q_pl(ns, na);

    auto sweep = [&]() {
        tv.noalias() = t * v;
        for (int s = 0; s < ns; ++s)
            for (int ap = 0; ap < na; ++ap) {
                double lo = std::numeric_limits<double>::infinity();
                for (int ao = 0; ao < na; ++ao) {
                    double x = alpha * tv(s * na + ap) + beta * tv(s * na + ao);
                    double qv = reward(s) + g * x;
                    joint((static_cast<Eigen::Index>(s) * na + ap) * na + ao) = qv;
                    if (qv < lo)
                        lo = qv;
                }
                q_pl(s, ap) = lo;
            }
    };

    double change = 0.0;
    for (long it = 1; it <= opts.max_iterations; ++it) {
        sweep();
        for (int s = 0; s < ns; ++s)
            next(s) = logsumexp(q_pl.row(s));
        change = (next - v).lpNorm<Eigen::Infinity>();
        v.swap(next);
        if (change <= opts.tol) {
            TwoPlayerSolution sol;
            sol.n_actions = na;
            sol.iterations = it;
            sol.joint_q = joint;
            sol.v = v;
            sol.q_player = q_pl;
            sol.q_opponent.resize(ns, na);
            RowMatrix pl(ns, na);
            std::vector<int> greedy(ns);
            Eigen::RowVectorXd col(na);
            for (int s = 0; s < ns; ++s) {
                pl.row(s) = softmax(q_pl.row(s));
                for (int ao = 0; ao < na; ++ao) {
                    for (int ap = 0; ap < na; ++ap)
                        col(ap) = joint((static_cast<Eigen::Index>(s) * na + ap) * na + ao);
                    sol.q_opponent(s, ao) = logsumexp(col);
                }
                int best = 0;
                for (int ao = 1; ao < na; ++ao)
                    if (sol.q_opponent(s, ao) < sol.q_opponent(s, best))
                        best = ao;
                greedy[s] = best;
            }
            sol.player = StochasticPolicy(std::move(pl));
            sol.opponent = StochasticPolicy::deterministic(greedy, na);
            return sol;
        }
    }
    throw ConvergenceError("two-player soft value iteration did not converge", opts.max_iterations, change);
}

} // namespace robirl
