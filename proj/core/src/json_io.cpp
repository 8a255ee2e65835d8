#include "robirl/json_io.hpp"

#include "robirl/errors.hpp"

#include <fstream>
#include <sstream>

namespace robirl {

namespace {

int get_positive(const Json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number_integer())
        throw ConfigError(std::string("MDP JSON: missing integer field '") + key + "'");
    int v = j.at(key).get<int>();
    if (v <= 0)
        throw ConfigError(std::string("MDP JSON: field '") + key + "' must be positive");
    return v;
}

} // namespace

Json vector_to_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(v(i));
    return out;
}

Vector vector_from_json(const Json& j) {
    if (!j.is_array())
        throw ConfigError("expected a JSON array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number())
            throw ConfigError("expected a JSON array of numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

Json matrix_to_json(const Matrix& m) {
    Json out = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        out.push_back(vector_to_json(m.row(r).transpose()));
    return out;
}

Matrix matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty())
        throw ConfigError("expected a non-empty JSON array of rows");
    const auto cols = j[0].size();
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (j[r].size() != cols)
            throw ConfigError("ragged matrix in JSON");
        m.row(static_cast<Eigen::Index>(r)) = vector_from_json(j[r]).transpose();
    }
    return m;
}

Json mdp_to_json(const TabularMdp& mdp) {
    const int ns = mdp.n_states(), na = mdp.n_actions();
    Json t = Json::array();
    for (int s = 0; s < ns; ++s) {
        Json per_action = Json::array();
        for (int a = 0; a < na; ++a) {
            Json row = Json::array();
            for (int s2 = 0; s2 < ns; ++s2)
                row.push_back(mdp.transitions()(s, a, s2));
            per_action.push_back(std::move(row));
        }
        t.push_back(std::move(per_action));
    }
    Json j;
    j["n_states"] = ns;
    j["n_actions"] = na;
    j["gamma"] = mdp.gamma();
    j["p0"] = vector_to_json(mdp.p0());
    j["transitions"] = std::move(t);
    if (mdp.reward())
        j["reward"] = Json{{"features", matrix_to_json(mdp.reward()->features)},
                           {"theta", vector_to_json(mdp.reward()->theta)}};
    else
        j["reward"] = nullptr;
    return j;
}

TabularMdp mdp_from_json(const Json& j) {
    if (!j.is_object())
        throw ConfigError("MDP JSON must be an object");
    const int ns = get_positive(j, "n_states");
    const int na = get_positive(j, "n_actions");
    if (!j.contains("gamma") || !j.at("gamma").is_number())
        throw ConfigError("MDP JSON: missing numeric field 'gamma'");
    const double gamma = j.at("gamma").get<double>();
    if (!j.contains("p0"))
        throw ConfigError("MDP JSON: missing field 'p0'");
    Vector p0 = vector_from_json(j.at("p0"));

    const Json& jt = j.at("transitions");
    if (!jt.is_array() || static_cast<int>(jt.size()) != ns)
        throw ShapeError("MDP JSON: transitions must have n_states entries");
    TransitionTensor t(ns, na);
    for (int s = 0; s < ns; ++s) {
        if (!jt[s].is_array() || static_cast<int>(jt[s].size()) != na)
            throw ShapeError("MDP JSON: transitions[s] must have n_actions entries");
        for (int a = 0; a < na; ++a) {
            Vector row = vector_from_json(jt[s][a]);
            if (row.size() != ns)
                throw ShapeError("MDP JSON: transitions[s][a] must have n_states entries");
            for (int s2 = 0; s2 < ns; ++s2)
                t(s, a, s2) = row(s2);
        }
    }

    std::optional<RewardModel> reward;
    if (j.contains("reward") && !j.at("reward").is_null()) {
        const Json& jr = j.at("reward");
        reward = RewardModel{matrix_from_json(jr.at("features")), vector_from_json(jr.at("theta"))};
    }
    return TabularMdp(std::move(t), gamma, std::move(p0), std::move(reward));
}

Json policy_to_json(const StochasticPolicy& p) { return matrix_to_json(p.probs); }

StochasticPolicy policy_from_json(const Json& j) {
    StochasticPolicy p(RowMatrix(matrix_from_json(j)));
    p.validate();
    return p;
}

OccupancyMeasure occupancy_from_json(const Json& j) {
    OccupancyMeasure occ{vector_from_json(j.is_object() ? j.at("rho") : j)};
    occ.validate();
    return occ;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("invalid JSON in '" + path + "': " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
    if (!out)
        throw std::runtime_error("write failed for '" + path + "'");
}

} // namespace robirl
