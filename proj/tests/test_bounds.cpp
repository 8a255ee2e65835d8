#include "oracles.hpp"

#include "robirl/bounds.hpp"
#include "robirl/errors.hpp"

#include <doctest.h>

using namespace robirl;

namespace {

BoundInputs inputs(double gamma, double r_min, double r_max, int n_actions, double d) {
    BoundInputs in;
    in.gamma = gamma;
    in.r_min = r_min;
    in.r_max = r_max;
    in.r_abs_max = std::max(std::abs(r_min), std::abs(r_max));
    in.n_actions = n_actions;
    in.d_dyn = d;
    return in;
}

} // namespace

TEST_SUITE("bound_calculators") {

TEST_CASE("kappa") {
    CHECK(kappa(inputs(0.99, -1, 1, 2, 0.0)) == doctest::Approx(std::sqrt(0.99 * (1 + std::log(2.0)))));
    CHECK(kappa(inputs(0.99, -1, 1, 2, 0.0)) == doctest::Approx(1.29469).epsilon(1e-5));
    CHECK(kappa(inputs(1e-12, -1, 1, 2, 0.0)) < 1e-5);
    const double la = std::log(3.0);
    CHECK(kappa(inputs(0.9, -la, -la, 3, 0.0)) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(kappa(inputs(0.9, -5, -2, 2, 0.0)) == doctest::Approx(std::sqrt(0.9 * (5 - std::log(2.0)))));
}

TEST_CASE("lemma1_pol_bound") {
    CHECK(lemma1_pol_bound(inputs(0.9, 0, 1, 4, 0.0)) == 0.0);
    auto in = inputs(0.9, 0, 1, 4, 0.1);
    double k = std::sqrt(0.9 * (1 + std::log(4.0)));
    double expected = std::min(2.0, 2 * std::min(k * std::sqrt(0.1) / 0.1, k * k * 0.1 / 0.01));
    CHECK(lemma1_pol_bound(in) == doctest::Approx(expected));
    auto small = inputs(0.5, 0, 0.1, 2, 1e-4);
    double ks = std::sqrt(0.5 * (0.1 + std::log(2.0)));
    CHECK(lemma1_pol_bound(small) == doctest::Approx(2 * std::min(ks * 1e-2 / 0.5, ks * ks * 1e-4 / 0.25)));
    CHECK(lemma1_pol_bound(small) < 2.0);
    CHECK(lemma1_pol_bound(inputs(0.99, -1, 1, 2, 2.0)) == 2.0);
}

TEST_CASE("thm1_gap_bound") {
    CHECK(thm1_gap_bound(inputs(0.99, -1, 1, 4, 0.0)) == 0.0);
    CHECK(thm1_gap_bound(inputs(0.99, -1, 1, 4, 0.198)) == doctest::Approx(1960.2).epsilon(1e-12));
    CHECK(thm1_gap_bound(inputs(0.5, -2, 1, 4, 1.0)) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("soft_expert_gap_bound") {
    CHECK(soft_expert_gap_bound(inputs(0.9, -1, 1, 2, 0.0)) == 0.0);
    auto in = inputs(0.9, -1, 1, 2, 0.04);
    double k = std::sqrt(0.9 * (1 + std::log(2.0)));
    double expected = 0.9 / 0.01 * 0.04 + 2 * k / 0.001 * 0.2;
    CHECK(soft_expert_gap_bound(in) == doctest::Approx(expected).epsilon(1e-12));
    for (double d : {1e-4, 0.01, 0.5, 2.0}) {
        auto x = inputs(0.9, -1, 1, 2, d);
        CHECK(soft_expert_gap_bound(x) >= thm1_gap_bound(x));
    }
}

TEST_CASE("robust_gap_bound") {
    auto in = inputs(0.99, -1, 1, 4, 0.198);
    in.alpha = 1.0;
    CHECK(robust_gap_bound(in) == doctest::Approx(thm1_gap_bound(in)).epsilon(1e-14));
    in.alpha = 0.9;
    CHECK(robust_gap_bound(in) == doctest::Approx(3960.2).epsilon(1e-12));
    auto zero = inputs(0.99, -1, 1, 4, 0.0);
    zero.alpha = 1.0;
    CHECK(robust_gap_bound(zero) == 0.0);
    zero.alpha.reset();
    CHECK_THROWS_AS(robust_gap_bound(zero), ConfigError);
}

TEST_CASE("reward_transfer_bound") {
    auto in = inputs(0.9, -1, 1, 2, 0.01);
    CHECK(reward_transfer_bound(in, TransferInputs{}).value == 0.0);
    double k = kappa(in);
    double simplified = 2 * 100.0 * (0.9 * 0.01 + k * 0.1 / 0.1);
    CHECK(reward_transfer_bound_simplified(in) == doctest::Approx(simplified).epsilon(1e-12));
    // Training MDP = expert MDP, learner deploys the training policy: d(T^train,T^L) = d(T^E,T^L), d_pol = 0.
    TransferInputs tr{in.d_dyn, in.d_dyn, k, 0.0};
    auto full = reward_transfer_bound(in, tr);
    CHECK(full.terms.size() == 4u);
    CHECK(full.value == doctest::Approx(reward_transfer_bound_simplified(in)).epsilon(1e-12));
    TransferInputs bad{3.0, 0.0, 0.0, 0.0};
    CHECK_THROWS_AS(reward_transfer_bound(in, bad), DomainError);
}

TEST_CASE("infeasible_gap_bound") {
    auto in = inputs(0.9, -1, 1, 2, 0.0);
    in.alpha = 1.0;
    CHECK(infeasible_gap_bound(in, InfeasibleInputs{}).value == 0.0);
    in.alpha = 0.9;
    auto b = infeasible_gap_bound(in, InfeasibleInputs{0.2, 0.1, 0.05});
    REQUIRE(b.terms.size() == 4u);
    CHECK(b.terms[0].second == doctest::Approx(18.0));
    CHECK(b.terms[1].second == doctest::Approx(1.8));
    CHECK(b.terms[2].second == doctest::Approx(5.0));
    CHECK(b.terms[3].second == doctest::Approx(17.1));
    CHECK(b.value == doctest::Approx(41.9));
    in.alpha = 1.0;
    CHECK(infeasible_gap_bound(in, InfeasibleInputs{0.2, 0.1, 0.05}).terms[1].second == 0.0);
}

TEST_CASE("corollary_alpha_choice minimises the infeasible bound") {
    CHECK(corollary_alpha_choice(0.0, 0.0) == 1.0);
    CHECK(corollary_alpha_choice(0.4, 0.0) == doctest::Approx(0.9));
    CHECK(corollary_alpha_choice(0.3, 0.5) == 1.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int k = 0; k < 20; ++k) {
        double d1 = u(rng), d2 = u(rng);
        double best_alpha = corollary_alpha_choice(d1, d2);
        auto in = inputs(0.9, -1, 1, 2, 0.0);
        in.alpha = best_alpha;
        double best = infeasible_gap_bound(in, InfeasibleInputs{d1, d2, 0.1}).value;
        for (int i = 0; i <= 100; ++i) {
            in.alpha = 0.5 + 0.005 * i;
            CHECK(infeasible_gap_bound(in, InfeasibleInputs{d1, d2, 0.1}).value >= best - 1e-9);
        }
    }
}

TEST_CASE("constructive_gaps") {
    auto g = constructive_gaps(0.1, 0.99, 0.9);
    CHECK(g.robust_gap == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(g.player_a1_prob == doctest::Approx(1.0));
    auto a1 = constructive_gaps(0.1, 0.99, 1.0);
    CHECK(a1.mce_gap == doctest::Approx(19.8));
    CHECK(a1.robust_gap == doctest::Approx(19.8));
    auto z = constructive_gaps(0.0, 0.99, 1.0);
    CHECK(z.mce_gap == 0.0);
    CHECK(z.robust_gap == 0.0);
    CHECK_THROWS_AS(constructive_gaps(0.1, 0.99, 0.85), DomainError);
}

TEST_CASE("input validation") {
    auto in = inputs(0.9, 1, -1, 2, 0.1);
    CHECK_THROWS_AS(thm1_gap_bound(in), DomainError);
    in = inputs(0.9, -1, 1, 2, 2.5);
    CHECK_THROWS_AS(thm1_gap_bound(in), DomainError);
    in = inputs(0.9, -1, 1, 2, 0.1);
    in.r_abs_max = 3.0;
    CHECK_THROWS_AS(thm1_gap_bound(in), DomainError);
    Vector r(3);
    r << -2.0, 0.5, 1.0;
    auto fr = BoundInputs::from_rewards(0.9, r, 4, 0.1);
    CHECK(fr.r_min == -2.0);
    CHECK(fr.r_max == 1.0);
    CHECK(fr.r_abs_max == 2.0);
}

TEST_CASE("policy-shift bound dominates soft-policy shifts on random MDPs") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        int ns = 2 + trial % 4, na = 2 + trial % 3;
        auto m = oracle::random_mdp(ns, na, 0.9, rng);
        auto m2 = m.with_transitions(mix_dynamics(m.transitions(), oracle::random_transitions(ns, na, rng), 0.05 * (trial % 5)));
        Vector r = m.reward_vector();
        auto in = BoundInputs::from_rewards(0.9, r, na, dyn_distance(m.transitions(), m2.transitions()));
        double d = pol_distance(soft_value_iteration(m).policy, soft_value_iteration(m2).policy);
        CHECK(d <= lemma1_pol_bound(in) + 1e-12);
    }
}

}
