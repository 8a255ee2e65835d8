#include "robirl/feasibility.hpp"

#include "robirl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace robirl {

FlowSystem build_flow_system(const TabularMdp& learner, const OccupancyMeasure& rho) {
    const int ns = learner.n_states(), na = learner.n_actions();
    if (rho.rho.size() != ns)
        throw ShapeError("occupancy length must equal |S|");
    const double g = learner.gamma();
    const TransitionTensor& t = learner.transitions();

    FlowSystem fs;
    fs.n_states = ns;
    fs.n_actions = na;
    fs.t_matrix = Matrix::Zero(2 * ns, ns * na);
    fs.v_vector = Vector::Ones(2 * ns);
    for (int si = 0; si < ns; ++si) {
        for (int sp = 0; sp < ns; ++sp)
            for (int a = 0; a < na; ++a)
                fs.t_matrix(si, sp * na + a) = g * rho.rho(sp) * t(sp, a, si);
        fs.v_vector(si) = rho.rho(si) - (1.0 - g) * learner.p0()(si);
    }
    for (int sp = 0; sp < ns; ++sp)
        fs.t_matrix.block(ns + sp, sp * na, 1, na).setOnes();
    return fs;
}

int numerical_rank(const Matrix& m, double rel_tol) {
    if (!(rel_tol > 0.0 && rel_tol < 1.0))
        throw DomainError("rel_tol must lie in (0,1)");
    if (m.size() == 0)
        return 0;
    const double threshold = rel_tol * m.cwiseAbs().maxCoeff();
    Matrix a = m;
    const Eigen::Index rows = a.rows(), cols = a.cols();
    Eigen::Index r = 0;
    for (Eigen::Index c = 0; c < cols && r < rows; ++c) {
        Eigen::Index piv = r;
        for (Eigen::Index i = r + 1; i < rows; ++i)
            if (std::abs(a(i, c)) > std::abs(a(piv, c)))
                piv = i;
        if (!(std::abs(a(piv, c)) > threshold))
            continue;
        if (piv != r)
            a.row(piv).swap(a.row(r));
        for (Eigen::Index i = r + 1; i < rows; ++i) {
            double f = a(i, c) / a(r, c);
            if (f != 0.0)
                a.row(i).tail(cols - c) -= f * a.row(r).tail(cols - c);
        }
        ++r;
    }
    return static_cast<int>(r);
}

FlowSystem check_feasibility(const TabularMdp& learner, const OccupancyMeasure& rho, double rel_tol) {
    FlowSystem fs = build_flow_system(learner, rho);
    Matrix aug(fs.t_matrix.rows(), fs.t_matrix.cols() + 1);
    aug << fs.t_matrix, fs.v_vector;
    fs.rank_t = numerical_rank(fs.t_matrix, rel_tol);
    fs.rank_augmented = numerical_rank(aug, rel_tol);
    fs.feasible = fs.rank_t == fs.rank_augmented;
    fs.full_rank = fs.rank_t == 2 * fs.n_states - 1;
    return fs;
}

MatchingResult solve_matching_policy(const FlowSystem& fs) {
    MatchingResult out;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(fs.t_matrix);
    out.solution = cod.solve(fs.v_vector);
    out.residual = (fs.t_matrix * out.solution - fs.v_vector).norm();
    out.min_entry = out.solution.minCoeff();
    if (out.residual <= 1e-8 && out.min_entry >= -1e-9) {
        RowMatrix p(fs.n_states, fs.n_actions);
        for (int s = 0; s < fs.n_states; ++s) {
            for (int a = 0; a < fs.n_actions; ++a)
                p(s, a) = std::max(0.0, out.solution(s * fs.n_actions + a));
            p.row(s) /= p.row(s).sum();
        }
        out.policy = StochasticPolicy(std::move(p));
    }
    return out;
}

} // namespace robirl
