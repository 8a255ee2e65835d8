#include "robirl/environments.hpp"

#include "robirl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace robirl {

namespace {

TransitionTensor grid_dynamics(int n, const std::vector<int>& terminal_cells) {
    const int ns = n * n;
    TransitionTensor t(ns, 4);
    std::set<int> terminal(terminal_cells.begin(), terminal_cells.end());
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const int s = cell_index(n, r, c);
            for (int a = 0; a < 4; ++a) {
                int nr = r, nc = c;
                if (!terminal.count(s)) {
                    switch (a) {
                    case kUp: nr = r - 1; break;
                    case kDown: nr = r + 1; break;
                    case kLeft: nc = c - 1; break;
                    default: nc = c + 1; break;
                    }
                    if (nr < 0 || nr >= n || nc < 0 || nc >= n) {
                        nr = r;
                        nc = c;
                    }
                }
                t(s, a, cell_index(n, nr, nc)) = 1.0;
            }
        }
    return t;
}

void check_cells(int n, const std::vector<int>& cells) {
    for (int s : cells)
        if (s < 0 || s >= n * n)
            throw DomainError("cell index out of range");
}

int chebyshev(int r1, int c1, int r2, int c2) { return std::max(std::abs(r1 - r2), std::abs(c1 - c2)); }

} // namespace

void GridSpec::validate() const {
    if (n < 1)
        throw DomainError("grid side must be positive");
    if (static_cast<int>(reward_map.size()) != n * n)
        throw ShapeError("reward_map must have n*n entries");
    check_cells(n, terminal_cells);
    if (features) {
        if (features->rows() != n * n)
            throw ShapeError("custom features need one row per cell");
        if (!theta || theta->size() != features->cols())
            throw ShapeError("custom features need a matching theta");
    }
}

TabularMdp make_gridworld(const GridSpec& spec) {
    spec.validate();
    const int ns = spec.n * spec.n;
    RewardModel reward;
    if (spec.features) {
        reward = RewardModel{*spec.features, *spec.theta};
    } else {
        reward = RewardModel::one_hot(Eigen::Map<const Vector>(spec.reward_map.data(), ns));
    }
    return TabularMdp(grid_dynamics(spec.n, spec.terminal_cells), spec.gamma, Vector::Constant(ns, 1.0 / ns),
                      std::move(reward));
}

TabularMdp make_noisy(const TabularMdp& mdp, double eps) {
    if (!(eps >= 0.0 && eps <= 1.0))
        throw DomainError("noise level must lie in [0,1]");
    const int ns = mdp.n_states(), na = mdp.n_actions();
    TransitionTensor uniform(ns, na, RowMatrix::Constant(static_cast<Eigen::Index>(ns) * na, ns, 1.0 / ns));
    return mdp.with_transitions(mix_dynamics(mdp.transitions(), uniform, eps));
}

std::vector<double> objectworld_rewards(int n, const std::vector<WorldObject>& objects) {
    std::vector<double> out(static_cast<std::size_t>(n) * n, -1.0);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            bool near_blue = false, near_green = false;
            for (const auto& o : objects) {
                const int d = chebyshev(r, c, o.row, o.col);
                if (o.outer == ObjectColor::kBlue && d <= 3)
                    near_blue = true;
                if (o.outer == ObjectColor::kGreen && d <= 2)
                    near_green = true;
            }
            if (near_blue)
                out[cell_index(n, r, c)] = near_green ? 0.0 : -2.0;
        }
    return out;
}

ObjectWorld make_objectworld(const ObjectWorldSpec& spec) {
    if (spec.n < 1)
        throw DomainError("grid side must be positive");
    const int ns = spec.n * spec.n;
    std::mt19937_64 rng(spec.seed);

    std::vector<WorldObject> objects;
    if (spec.objects) {
        objects = *spec.objects;
        std::set<int> seen;
        for (const auto& o : objects) {
            if (o.row < 0 || o.row >= spec.n || o.col < 0 || o.col >= spec.n)
                throw DomainError("object outside the grid");
            if (!seen.insert(cell_index(spec.n, o.row, o.col)).second)
                throw DomainError("objects must occupy distinct cells");
        }
    } else {
        if (spec.n_objects < 0 || spec.n_objects > ns)
            throw DomainError("n_objects must lie in [0, n*n]");
        std::vector<int> cells(ns);
        for (int i = 0; i < ns; ++i)
            cells[i] = i;
        std::shuffle(cells.begin(), cells.end(), rng);
        std::bernoulli_distribution coin(0.5);
        for (int k = 0; k < spec.n_objects; ++k) {
            WorldObject o;
            o.row = cells[k] / spec.n;
            o.col = cells[k] % spec.n;
            o.outer = coin(rng) ? ObjectColor::kGreen : ObjectColor::kBlue;
            o.inner = coin(rng) ? ObjectColor::kGreen : ObjectColor::kBlue;
            objects.push_back(o);
        }
    }

    std::vector<double> rewards = objectworld_rewards(spec.n, objects);
    std::vector<int> white;
    for (int s = 0; s < ns; ++s)
        if (rewards[s] == 0.0)
            white.push_back(s);
    if (white.empty())
        throw ConfigError("ObjectWorld has no zero-reward cell for the goal");
    std::uniform_int_distribution<std::size_t> pick(0, white.size() - 1);
    const int goal = white[pick(rng)];

    // One-hot state features plus a reached-goal indicator.
    int extra = spec.custom_features ? 4 : 0;
    Matrix phi = Matrix::Zero(ns, ns + 1 + extra);
    phi.leftCols(ns).setIdentity();
    phi(goal, ns) = 1.0;
    if (spec.custom_features) {
        for (int s = 0; s < ns; ++s) {
            const int r = s / spec.n, c = s % spec.n;
            double dist[4] = {2.0 * spec.n, 2.0 * spec.n, 2.0 * spec.n, 2.0 * spec.n};
            for (const auto& o : objects) {
                double d = chebyshev(r, c, o.row, o.col);
                double& outer = dist[static_cast<int>(o.outer)];
                double& inner = dist[2 + static_cast<int>(o.inner)];
                outer = std::min(outer, d);
                inner = std::min(inner, d);
            }
            for (int k = 0; k < 4; ++k)
                phi(s, ns + 1 + k) = dist[k];
        }
    }
    Vector theta = Vector::Zero(phi.cols());
    for (int s = 0; s < ns; ++s)
        theta(s) = rewards[s];

    TabularMdp mdp(grid_dynamics(spec.n, {goal}), spec.gamma, Vector::Constant(ns, 1.0 / ns),
                   RewardModel{std::move(phi), std::move(theta)});
    return ObjectWorld{std::move(mdp), std::move(objects), goal, std::move(rewards)};
}

TabularMdp make_constructive(double eps, double gamma) {
    if (!(eps >= 0.0 && eps <= 1.0))
        throw DomainError("eps must lie in [0,1]");
    TransitionTensor t(3, 2);
    t(0, 0, 1) = 1.0 - eps;
    t(0, 0, 2) = eps;
    t(0, 1, 2) = 1.0;
    for (int a = 0; a < 2; ++a) {
        t(1, a, 1) = 1.0;
        t(2, a, 2) = 1.0;
    }
    Vector p0(3);
    p0 << 1.0, 0.0, 0.0;
    Vector r(3);
    r << 0.0, 1.0, -1.0;
    return TabularMdp(std::move(t), gamma, std::move(p0), RewardModel::one_hot(r));
}

TabularMdp make_gridworld_l(const GridWorldLSpec& spec) {
    const int ns = spec.n * spec.n;
    if (static_cast<int>(spec.danger.size()) != ns)
        throw ShapeError("danger layout must have n*n entries");
    check_cells(spec.n, spec.terminal_cells);
    std::set<int> terminal(spec.terminal_cells.begin(), spec.terminal_cells.end());
    Matrix phi = Matrix::Zero(ns, 3);
    for (int s = 0; s < ns; ++s) {
        if (terminal.count(s))
            continue;
        if (spec.danger[s] == Danger::kType1)
            phi(s, 0) = 1.0;
        if (spec.danger[s] == Danger::kType2)
            phi(s, 1) = 1.0;
        phi(s, 2) = 1.0;
    }
    Vector w(3);
    w << -2.0, -6.0, -1.0;
    return TabularMdp(grid_dynamics(spec.n, spec.terminal_cells), spec.gamma, Vector::Constant(ns, 1.0 / ns),
                      RewardModel{std::move(phi), std::move(w)});
}

GridSpec grid_preset(const std::string& name, int n) {
    if (n < 3)
        throw DomainError("grid presets need a side of at least 3");
    GridSpec spec;
    spec.n = n;
    spec.reward_map.assign(static_cast<std::size_t>(n) * n, 0.0);
    auto set = [&](int r, int c, double v) { spec.reward_map[cell_index(n, r, c)] = v; };
    const int mid = n / 2;

    if (name == "grid-1") {
        // goal in the bottom-right corner behind a penalty wall with a gap in the last row
        for (int r = 0; r < n - 1; ++r)
            set(r, mid, -1.0);
        set(n - 1, n - 1, 1.0);
    } else if (name == "grid-2") {
        // 2x2 goal region, penalty corridor across the middle row
        for (int c = 0; c < n - 1; ++c)
            set(mid, c, -1.0);
        for (int r = n - 2; r < n; ++r)
            for (int c = n - 2; c < n; ++c)
                set(r, c, 1.0);
    } else if (name == "grid-3") {
        // two goals of different value and scattered penalty cells
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                if ((r + 2 * c) % 4 == 1)
                    set(r, c, -0.5);
        set(0, n - 1, 1.0);
        set(n - 1, 0, 0.5);
    } else if (name == "grid-4") {
        // reward falls off with Manhattan distance to the centre goal
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                double d = std::abs(r - mid) + std::abs(c - mid);
                set(r, c, -d / (2.0 * (n - 1)));
            }
        set(mid, mid, 1.0);
    } else {
        throw ConfigError("unknown grid preset '" + name + "'");
    }
    return spec;
}

GridWorldLSpec gridworld_l_preset() {
    GridWorldLSpec spec;
    spec.n = 6;
    spec.danger.assign(36, Danger::kNone);
    auto set = [&](int r, int c, Danger d) { spec.danger[cell_index(6, r, c)] = d; };
    for (int c = 1; c < 5; ++c)
        set(2, c, Danger::kType1);
    set(4, 2, Danger::kType2);
    set(4, 3, Danger::kType2);
    set(1, 4, Danger::kType2);
    spec.terminal_cells = {cell_index(6, 5, 5)};
    return spec;
}

std::vector<std::string> preset_names() {
    return {"grid-1", "grid-2", "grid-3", "grid-4", "objectworld-10", "gridworld-l", "constructive"};
}

TabularMdp make_preset(const std::string& name, int n, std::uint64_t seed) {
    if (name.rfind("grid-", 0) == 0)
        return make_gridworld(grid_preset(name, n));
    if (name == "objectworld-10") {
        ObjectWorldSpec spec;
        spec.n = 10;
        spec.seed = seed;
        return make_objectworld(spec).mdp;
    }
    if (name == "gridworld-l")
        return make_gridworld_l(gridworld_l_preset());
    if (name == "constructive")
        return make_constructive(0.0);
    throw ConfigError("unknown environment preset '" + name + "'");
}

} // namespace robirl
