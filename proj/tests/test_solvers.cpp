#include "oracles.hpp"

#include "robirl/environments.hpp"
#include "robirl/errors.hpp"
#include "robirl/solvers.hpp"

#include <doctest.h>

using namespace robirl;

namespace {

TabularMdp one_state(int na, double r, double gamma) {
    TransitionTensor t(1, na);
    for (int a = 0; a < na; ++a) t(0, a, 0) = 1.0;
    return TabularMdp(t, gamma, Vector::Ones(1), RewardModel::one_hot(Vector::Constant(1, r)));
}

} // namespace

TEST_SUITE("tabular_solvers") {

TEST_CASE("logsumexp and softmax against a direct reference") {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 20; ++k) {
        Eigen::RowVectorXd x = oracle::random_vector(5, rng, -30, 30).transpose();
        double direct = std::log(x.array().exp().sum());
        CHECK(logsumexp(x) == doctest::Approx(direct).epsilon(1e-12));
        Eigen::RowVectorXd ref = (x.array() - x.maxCoeff()).exp();
        ref /= ref.sum();
        CHECK((softmax(x) - ref).cwiseAbs().maxCoeff() <= 1e-15);
    }
    Eigen::RowVectorXd big(2);
    big << 1000.0, 1000.0;
    CHECK(logsumexp(big) == doctest::Approx(1000.0 + std::log(2.0)));
    CHECK(softmax(big)(0) == 0.5);
}

TEST_CASE("value_iteration: constructive and zero reward") {
    auto m = make_constructive(0.0, 0.99);
    auto sol = value_iteration(m);
    CHECK(sol.policy(0, 0) == 1.0);
    CHECK(sol.v_star(0) == doctest::Approx(99.0).epsilon(1e-8));
    auto zero = m.with_reward(RewardModel::one_hot(Vector::Zero(3)));
    auto z = value_iteration(zero);
    CHECK(z.v_star.cwiseAbs().maxCoeff() == 0.0);
    for (int s = 0; s < 3; ++s) CHECK(z.policy(s, 0) == 1.0);
}

TEST_CASE("value_iteration: policy enumeration oracle") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        auto m = oracle::random_mdp(4, 3, 0.9, rng);
        auto sol = value_iteration(m);
        Vector best = oracle::enumerate_optimal_values(m, m.reward_vector());
        CHECK((sol.v_star - best).cwiseAbs().maxCoeff() <= 1e-6);
        for (int s = 0; s < 4; ++s) {
            CHECK(sol.v_star(s) == sol.q_star.row(s).maxCoeff());
            int a;
            sol.q_star.row(s).maxCoeff(&a);
            CHECK(sol.policy(s, a) == 1.0);
        }
    }
}

TEST_CASE("soft_value_iteration: closed forms") {
    auto one = soft_value_iteration(one_state(1, 1.0, 0.5));
    CHECK(one.v_soft(0) == doctest::Approx(2.0).epsilon(1e-9));
    auto two = soft_value_iteration(one_state(2, 0.0, 0.5));
    CHECK(two.v_soft(0) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-9));
    CHECK(two.policy(0, 0) == 0.5);
    auto c = soft_value_iteration(make_constructive(0.1, 0.99));
    CHECK(c.policy(0, 0) > c.policy(0, 1));
}

TEST_CASE("soft_value_iteration: residuals and policy-iteration oracle") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        auto m = oracle::random_mdp(2 + trial % 5, 2 + trial % 3, 0.95, rng);
        auto sol = soft_value_iteration(m);
        CHECK(oracle::soft_residual(m, sol) <= 1e-8);
        Vector ref = oracle::soft_values_by_policy_iteration(m, m.reward_vector());
        CHECK((sol.v_soft - ref).cwiseAbs().maxCoeff() <= 1e-7);
    }
}

TEST_CASE("soft_value_iteration: unique fixed point from two starts") {
    std::mt19937_64 rng(4);
    const double tol = 1e-10;
    for (int trial = 0; trial < 5; ++trial) {
        auto m = oracle::random_mdp(5, 3, 0.9, rng);
        Vector r = m.reward_vector();
        auto a = soft_value_iteration(m, r, {tol, 100000});
        auto b = soft_value_iteration(m, r, {tol, 100000}, Vector(r / (1 - m.gamma())));
        CHECK((a.v_soft - b.v_soft).cwiseAbs().maxCoeff() <= 10 * tol);
    }
}

TEST_CASE("soft vs hard argmax at large reward scale") {
    std::mt19937_64 rng(5);
    int checked = 0;
    for (int trial = 0; trial < 10; ++trial) {
        auto m = oracle::random_mdp(4, 3, 0.9, rng);
        Vector r = 100.0 * m.reward_vector();
        auto hard = value_iteration(m, r);
        // Skip instances with near-ties in the optimal action.
        bool tie = false;
        for (int s = 0; s < 4; ++s) {
            Eigen::RowVectorXd q = hard.q_star.row(s);
            std::sort(q.data(), q.data() + q.size());
            if (q(2) - q(1) < 1.0) tie = true;
        }
        if (tie) continue;
        auto soft = soft_value_iteration(m, r);
        for (int s = 0; s < 4; ++s) {
            int hs, ss;
            hard.policy.probs.row(s).maxCoeff(&hs);
            soft.policy.probs.row(s).maxCoeff(&ss);
            CHECK(hs == ss);
        }
        ++checked;
    }
    CHECK(checked > 0);
}

TEST_CASE("iteration cap raises ConvergenceError") {
    auto m = make_constructive(0.1, 0.99);
    CHECK_THROWS_AS(soft_value_iteration(m, SolverOptions{1e-10, 5}), ConvergenceError);
    CHECK_THROWS_AS(value_iteration(m, SolverOptions{1e-10, 5}), ConvergenceError);
    CHECK_THROWS_AS(two_player_soft_vi(m, 0.9, {1e-10, 5}), ConvergenceError);
    CHECK_THROWS_AS(soft_value_iteration(m.without_reward()), ConfigError);
}

TEST_CASE("two_player_transition") {
    auto m = make_constructive(0.0, 0.99);
    auto t1 = two_player_transition(m, 1.0);
    auto t0 = two_player_transition(m, 0.0);
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a)
            for (int o = 0; o < 2; ++o)
                for (int s2 = 0; s2 < 3; ++s2) {
                    CHECK(t1(s, a, o, s2) == m.transitions()(s, a, s2));
                    CHECK(t0(s, a, o, s2) == m.transitions()(s, o, s2));
                }
    auto t9 = two_player_transition(m, 0.9);
    CHECK(t9(0, 0, 1, 1) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK_THROWS_AS(two_player_transition(m, 1.1), DomainError);
}

TEST_CASE("two_player_soft_vi: alpha 1 equals soft VI") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 5; ++trial) {
        auto m = oracle::random_mdp(4, 3, 0.9, rng);
        auto soft = soft_value_iteration(m);
        auto game = two_player_soft_vi(m, 1.0);
        CHECK((soft.policy.probs - game.player.probs).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK((soft.v_soft - game.v).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("two_player_soft_vi: invariants") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        const int ns = 3, na = 3;
        auto m = oracle::random_mdp(ns, na, 0.9, rng);
        const double alpha = 0.8;
        auto g = two_player_soft_vi(m, alpha);
        Vector r = m.reward_vector();
        for (int s = 0; s < ns; ++s) {
            Eigen::RowVectorXd qpl(na), qop(na);
            for (int a = 0; a < na; ++a) {
                double mn = std::numeric_limits<double>::infinity();
                for (int o = 0; o < na; ++o) {
                    double ev = 0.0;
                    for (int s2 = 0; s2 < ns; ++s2)
                        ev += (alpha * m.transitions()(s, a, s2) + (1 - alpha) * m.transitions()(s, o, s2)) * g.v(s2);
                    CHECK(std::abs(g.q(s, a, o) - r(s) - m.gamma() * ev) <= 1e-8);
                    mn = std::min(mn, g.q(s, a, o));
                }
                qpl(a) = mn;
            }
            CHECK(std::abs(g.v(s) - logsumexp(qpl)) <= 1e-8);
            Eigen::RowVectorXd ref = (qpl.array() - qpl.maxCoeff()).exp();
            ref /= ref.sum();
            CHECK((g.player.probs.row(s) - ref).cwiseAbs().maxCoeff() <= 1e-8);
            for (int o = 0; o < na; ++o) {
                Eigen::RowVectorXd col(na);
                for (int a = 0; a < na; ++a) col(a) = g.q(s, a, o);
                qop(o) = logsumexp(col);
            }
            int best;
            qop.minCoeff(&best);
            CHECK(g.opponent(s, best) == 1.0);
        }
    }
}

TEST_CASE("two_player_soft_vi: constructive opponent plays a2") {
    auto g = two_player_soft_vi(make_constructive(0.0, 0.99), 0.9);
    CHECK(g.opponent(0, 1) == 1.0);
}

TEST_CASE("two_player_soft_vi: stage-game grid oracle") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        auto m = oracle::random_mdp(2, 2, 0.9, rng);
        const double alpha = 0.7 + 0.03 * trial;
        auto g = two_player_soft_vi(m, alpha);
        for (int s = 0; s < 2; ++s) {
            auto grid = oracle::stage_game_grid(m, m.reward_vector(), g.v, alpha, s);
            CHECK(std::abs(grid.max_min - g.v(s)) <= 1e-3);
            CHECK(std::abs(grid.min_max - g.v(s)) <= 1e-3);
        }
    }
}

TEST_CASE("two_player_soft_vi: value non-increasing in opponent strength") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        auto m = oracle::random_mdp(4, 3, 0.9, rng);
        Vector prev = two_player_soft_vi(m, 1.0).v;
        for (double alpha : {0.95, 0.9, 0.8}) {
            Vector v = two_player_soft_vi(m, alpha).v;
            CHECK((v.array() <= prev.array() + 1e-9).all());
            prev = v;
        }
    }
}

TEST_CASE("soft Bellman residuals on every preset") {
    for (const auto& name : preset_names()) {
        auto m = make_preset(name, 5);
        auto sol = soft_value_iteration(m);
        CHECK_MESSAGE(oracle::soft_residual(m, sol) <= 1e-8, name);
    }
}

}
