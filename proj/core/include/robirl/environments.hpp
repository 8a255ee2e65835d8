#pragma once

#include "robirl/mdp.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace robirl {

/// Grid actions, in index order.
enum GridAction : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

inline int cell_index(int n, int row, int col) { return row * n + col; }

struct GridSpec {
    int n = 5;
    std::vector<double> reward_map;   // n*n, row-major, row 0 at the top
    std::vector<int> terminal_cells;  // absorbing under every action
    std::optional<Matrix> features;   // custom feature matrix; one-hot when empty
    std::optional<Vector> theta;      // weights for custom features
    double gamma = 0.99;

    void validate() const;
};

/// Deterministic 4-action grid; off-grid moves stay in place; uniform P0.
TabularMdp make_gridworld(const GridSpec& spec);

/// Mixes the dynamics with the uniform next-state kernel.
TabularMdp make_noisy(const TabularMdp& mdp, double eps);

enum class ObjectColor : int { kBlue = 0, kGreen = 1 };

struct WorldObject {
    int row = 0;
    int col = 0;
    ObjectColor outer = ObjectColor::kBlue;
    ObjectColor inner = ObjectColor::kBlue; // distractor, not used by the reward
};

struct ObjectWorldSpec {
    int n = 10;
    int n_objects = 12;
    std::uint64_t seed = 0;
    double gamma = 0.7;
    /// When set, these objects are used instead of random placement.
    std::optional<std::vector<WorldObject>> objects;
    /// Append outer/inner colour distances as extra feature columns.
    bool custom_features = false;
};

struct ObjectWorld {
    TabularMdp mdp;
    std::vector<WorldObject> objects;
    int goal = 0;
    std::vector<double> reward_map;
};

/// Chebyshev-distance reward rules; the goal is absorbing and sits in a zero-reward cell.
ObjectWorld make_objectworld(const ObjectWorldSpec& spec);
/// Reward map only: -2 near blue, 0 when also near green, -1 elsewhere.
std::vector<double> objectworld_rewards(int n, const std::vector<WorldObject>& objects);

/// Three states s0, s1, s2 with s1, s2 absorbing; action a1 reaches s1 w.p. 1-eps.
TabularMdp make_constructive(double eps, double gamma = 0.99);

enum class Danger : int { kNone = 0, kType1 = 1, kType2 = 2 };

struct GridWorldLSpec {
    int n = 6;
    std::vector<Danger> danger;       // n*n
    std::vector<int> terminal_cells;
    double gamma = 0.99;
};

/// Features [danger-1, danger-2, nonterminal] with weights [-2, -6, -1].
TabularMdp make_gridworld_l(const GridWorldLSpec& spec);

GridSpec grid_preset(const std::string& name, int n = 10);
GridWorldLSpec gridworld_l_preset();

/// Names accepted by make_preset.
std::vector<std::string> preset_names();
/// grid-1..grid-4 (side n), objectworld-10, gridworld-l, constructive (noise-free).
TabularMdp make_preset(const std::string& name, int n = 10, std::uint64_t seed = 0);

} // namespace robirl
