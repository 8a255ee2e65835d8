#include "oracles.hpp"

#include "robirl/environments.hpp"
#include "robirl/errors.hpp"
#include "robirl/mdp.hpp"
#include "robirl/solvers.hpp"

#include <doctest.h>

using namespace robirl;

namespace {

TabularMdp single_state(double gamma, double reward, int n_actions = 1) {
    TransitionTensor t(1, n_actions);
    for (int a = 0; a < n_actions; ++a) t(0, a, 0) = 1.0;
    Vector p0 = Vector::Ones(1);
    return TabularMdp(t, gamma, p0, RewardModel::one_hot(Vector::Constant(1, reward)));
}

StochasticPolicy constructive_expert(double p_a1) {
    RowMatrix p(3, 2);
    p << p_a1, 1.0 - p_a1, 1.0, 0.0, 1.0, 0.0;
    return StochasticPolicy(p);
}

} // namespace

TEST_SUITE("mdp_core") {

TEST_CASE("construction rejects bad inputs") {
    TransitionTensor t(2, 1);
    t(0, 0, 0) = 0.5;
    t(0, 0, 1) = 0.5;
    t(1, 0, 1) = 1.0;
    Vector p0(2);
    p0 << 0.5, 0.5;
    CHECK_NOTHROW(TabularMdp(t, 0.9, p0));
    CHECK_THROWS_AS(TabularMdp(t, 1.0, p0), DomainError);
    CHECK_THROWS_AS(TabularMdp(t, 0.0, p0), DomainError);
    Vector bad_p0(2);
    bad_p0 << 0.6, 0.5;
    CHECK_THROWS_AS(TabularMdp(t, 0.9, bad_p0), DomainError);
    TransitionTensor bad = t;
    bad(1, 0, 1) = 0.9;
    CHECK_THROWS_AS(TabularMdp(bad, 0.9, p0), DomainError);
    CHECK_THROWS_AS(TabularMdp(t, 0.9, Vector::Ones(3) / 3.0), ShapeError);
}

TEST_CASE("reward model is a dot product") {
    std::mt19937_64 rng(3);
    RewardModel rm{Matrix::Random(5, 3), oracle::random_vector(3, rng)};
    Vector r = rm.rewards();
    for (int s = 0; s < 5; ++s) CHECK(r(s) == doctest::Approx(rm.features.row(s).dot(rm.theta)).epsilon(1e-14));
    auto oh = RewardModel::one_hot(Vector::LinSpaced(4, -1, 1));
    CHECK(oh.features.isIdentity());
    CHECK(oh.dim() == 4);
}

TEST_CASE("occupancy: single state is [1]") {
    for (double g : {0.1, 0.5, 0.99}) {
        auto m = single_state(g, 0.0);
        auto occ = state_occupancy(m, StochasticPolicy::uniform(1, 1));
        CHECK(std::abs(occ.rho(0) - 1.0) <= 1e-10 + 1e-15);
    }
}

TEST_CASE("occupancy: constructive expert") {
    auto m = make_constructive(0.1, 0.99);
    auto occ = state_occupancy(m, constructive_expert(1.0));
    CHECK(occ.rho(0) == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(occ.rho(1) == doctest::Approx(0.891).epsilon(1e-9));
    CHECK(occ.rho(2) == doctest::Approx(0.099).epsilon(1e-9));
}

TEST_CASE("occupancy: symmetric chain against linear solve") {
    TransitionTensor t(2, 2);
    t(0, 0, 0) = 1.0;
    t(0, 1, 1) = 1.0;
    t(1, 0, 1) = 1.0;
    t(1, 1, 0) = 1.0;
    Vector p0(2);
    p0 << 1.0, 0.0;
    TabularMdp m(t, 0.5, p0);
    auto pi = StochasticPolicy::uniform(2, 2);
    auto occ = state_occupancy(m, pi);
    Vector ref = oracle::occupancy(m, pi);
    CHECK((occ.rho - ref).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("occupancy: matches linear solve within 10 tol and satisfies flow") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        int ns = 1 + static_cast<int>(rng() % 20), na = 1 + static_cast<int>(rng() % 4);
        double gamma = std::uniform_real_distribution<double>(0.5, 0.99)(rng);
        auto m = oracle::random_mdp(ns, na, gamma, rng, false);
        auto pi = oracle::random_policy(ns, na, rng);
        const double tol = 1e-10;
        auto occ = state_occupancy(m, pi, tol);
        Vector ref = oracle::occupancy(m, pi);
        CHECK((occ.rho - ref).cwiseAbs().maxCoeff() <= 10 * tol);
        CHECK(occ.rho.sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(occ.rho.minCoeff() >= 0.0);
        Vector flow = occ.rho - (1 - gamma) * m.p0() - gamma * oracle::kernel(m, pi).transpose() * occ.rho;
        CHECK(flow.cwiseAbs().maxCoeff() <= 10 * tol);
    }
}

TEST_CASE("occupancy: iteration cap raises") {
    auto m = make_constructive(0.1, 0.99);
    CHECK_THROWS_AS(state_occupancy(m, constructive_expert(0.5), 1e-10, 3), ConvergenceError);
    CHECK_THROWS_AS(state_occupancy(m, StochasticPolicy::uniform(2, 2)), ShapeError);
}

TEST_CASE("dyn_distance: brute force, symmetry, triangle") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        auto a = oracle::random_transitions(3, 2, rng, 0.3);
        auto b = oracle::random_transitions(3, 2, rng, 0.3);
        auto c = oracle::random_transitions(3, 2, rng, 0.3);
        double naive = 0.0;
        for (int s = 0; s < 3; ++s)
            for (int x = 0; x < 2; ++x) {
                double l1 = 0.0;
                for (int s2 = 0; s2 < 3; ++s2) l1 += std::abs(a(s, x, s2) - b(s, x, s2));
                naive = std::max(naive, l1);
            }
        CHECK(dyn_distance(a, b) == doctest::Approx(naive).epsilon(1e-15));
        CHECK(dyn_distance(a, b) == dyn_distance(b, a));
        CHECK(dyn_distance(a, c) <= dyn_distance(a, b) + dyn_distance(b, c) + 1e-15);
        CHECK(dyn_distance(a, b) <= 2.0);
    }
    auto a = oracle::random_transitions(3, 2, rng);
    CHECK(dyn_distance(a, a) == 0.0);
    CHECK_THROWS_AS(dyn_distance(a, oracle::random_transitions(3, 3, rng)), ShapeError);
}

TEST_CASE("pol_distance: brute force, symmetry, triangle") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        auto a = oracle::random_policy(4, 3, rng), b = oracle::random_policy(4, 3, rng),
             c = oracle::random_policy(4, 3, rng);
        double naive = 0.0;
        for (int s = 0; s < 4; ++s) {
            double l1 = 0.0;
            for (int x = 0; x < 3; ++x) l1 += std::abs(a(s, x) - b(s, x));
            naive = std::max(naive, l1);
        }
        CHECK(pol_distance(a, b) == doctest::Approx(naive).epsilon(1e-15));
        CHECK(pol_distance(a, b) == pol_distance(b, a));
        CHECK(pol_distance(a, c) <= pol_distance(a, b) + pol_distance(b, c) + 1e-15);
        CHECK(pol_distance(a, a) == 0.0);
    }
    auto d1 = StochasticPolicy::deterministic({0, 1, 1}, 2);
    auto d2 = StochasticPolicy::deterministic({0, 0, 1}, 2);
    CHECK(pol_distance(d1, d2) == 2.0);
    CHECK_THROWS_AS(pol_distance(d1, StochasticPolicy::uniform(3, 3)), ShapeError);
}

TEST_CASE("mixing operators") {
    std::mt19937_64 rng(8);
    auto a = oracle::random_transitions(2, 2, rng), b = oracle::random_transitions(2, 2, rng);
    CHECK(mix_dynamics(a, b, 0.0).matrix() == a.matrix());
    CHECK(mix_dynamics(a, b, 1.0).matrix() == b.matrix());
    auto m = mix_dynamics(a, b, 0.3);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 2; ++c)
            CHECK(m.matrix()(r, c) == doctest::Approx(0.7 * a.matrix()(r, c) + 0.3 * b.matrix()(r, c)).epsilon(1e-15));
    CHECK_NOTHROW(m.validate());
    CHECK_THROWS_AS(mix_dynamics(a, b, 1.5), DomainError);
    CHECK_THROWS_AS(mix_dynamics(a, b, -0.1), DomainError);

    auto p = oracle::random_policy(3, 2, rng), q = oracle::random_policy(3, 2, rng);
    CHECK(mix_policies(p, q, 1.0).probs == p.probs);
    CHECK(mix_policies(p, q, 0.0).probs == q.probs);
    auto pl = StochasticPolicy::deterministic({0}, 2), op = StochasticPolicy::deterministic({1}, 2);
    auto mix = mix_policies(pl, op, 0.9);
    CHECK(mix(0, 0) == doctest::Approx(0.9));
    CHECK(mix(0, 1) == doctest::Approx(0.1));
    CHECK_THROWS_AS(mix_policies(p, q, 2.0), DomainError);
}

TEST_CASE("expected_return: closed forms and errors") {
    auto m = make_constructive(0.1, 0.99);
    CHECK(expected_return(m, constructive_expert(1.0)) == doctest::Approx(79.2).epsilon(1e-9));
    auto zero = m.with_reward(RewardModel::one_hot(Vector::Zero(3)));
    CHECK(expected_return(zero, constructive_expert(0.3)) == 0.0);
    CHECK_THROWS_AS(expected_return(m.without_reward(), constructive_expert(1.0)), ConfigError);
}

TEST_CASE("expected_return: Monte Carlo oracle") {
    std::mt19937_64 rng(21);
    auto m = oracle::random_mdp(2, 2, 0.9, rng);
    auto pi = oracle::random_policy(2, 2, rng);
    auto mc = oracle::monte_carlo_return(m, pi, m.reward_vector(), 100000, 1000, 77);
    CHECK(std::abs(expected_return(m, pi) - mc.mean) <= 3 * mc.se);
}

TEST_CASE("soft_return: closed forms") {
    auto m = single_state(0.5, 0.0, 2);
    CHECK(soft_return(m, StochasticPolicy::uniform(1, 2)) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-10));
    auto c = make_constructive(0.2, 0.99);
    auto det = constructive_expert(1.0);
    CHECK(soft_return(c, det) == expected_return(c, det));
}

TEST_CASE("soft_return: soft-optimal policy dominates random policies") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        int ns = 2 + trial, na = 2 + trial % 2;
        auto m = oracle::random_mdp(ns, na, 0.9, rng);
        auto sol = soft_value_iteration(m);
        double best = soft_return(m, sol.policy);
        for (int k = 0; k < 100; ++k) CHECK(soft_return(m, oracle::random_policy(ns, na, rng)) <= best + 1e-9);
    }
}

TEST_CASE("return is a linear functional of occupancy") {
    // The mixture policy and the policy recovered from its occupancy share the return.
    std::mt19937_64 rng(41);
    auto m = oracle::random_mdp(4, 3, 0.9, rng);
    auto mix = mix_policies(oracle::random_policy(4, 3, rng), oracle::random_policy(4, 3, rng), 0.7);
    auto occ = state_occupancy(m, mix);
    CHECK(expected_return(m, mix) == doctest::Approx(return_from_occupancy(m.reward_vector(), occ, 0.9)).epsilon(1e-9));
    CHECK(expected_return(m, mix) ==
          doctest::Approx(oracle::exact_return(m, mix, m.reward_vector())).epsilon(1e-8));
}

TEST_CASE("policy entropy uses 0 log 0 = 0") {
    auto det = StochasticPolicy::deterministic({0, 1}, 3);
    CHECK(policy_entropy(det).cwiseAbs().maxCoeff() == 0.0);
    auto u = StochasticPolicy::uniform(1, 4);
    CHECK(policy_entropy(u)(0) == doctest::Approx(std::log(4.0)));
}

TEST_CASE("dyn_distance closed form under uniform noise") {
    for (int n : {3, 5, 10}) {
        auto base = make_preset("grid-1", n);
        for (double a : {0.0, 0.05, 0.1, 0.15, 0.2})
            for (double b : {0.0, 0.05, 0.1}) {
                double d = dyn_distance(make_noisy(base, a).transitions(), make_noisy(base, b).transitions());
                CHECK(std::abs(d - 2.0 * (1.0 - 1.0 / (n * n)) * std::abs(a - b)) <= 1e-12);
            }
    }
}

}
