#include "robirl/experiment.hpp"

#include "robirl/bounds.hpp"
#include "robirl/environments.hpp"
#include "robirl/errors.hpp"
#include "robirl/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

namespace robirl {

namespace {

const std::set<std::string> kMethods{"mce", "robust", "ideal"};

template <class T>
T take(const Json& j, const char* key, T fallback) {
    if (!j.contains(key))
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(std::string("unknown key '") + it.key() + "' in " + where);
}

double round12(double x) { return std::strtod(format_number(x).c_str(), nullptr); }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += "\"\"";
        else if (c == '\n' || c == '\r')
            out += ' ';
        else
            out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

const char* kHeader =
    "env,eps_e,eps_l,alpha,method,seed,return_mean,return_sd,d_dyn,thm1_bound,l1_mismatch,wall_ms,best_alpha,error";

double to_double(const std::string& s) {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size())
        throw ConfigError("malformed number '" + s + "'");
    return v;
}

struct Task {
    double eps_e;
    double eps_l;
    std::string method;
    std::optional<double> alpha;
};

std::vector<ResultRow> run_task(const ExperimentConfig& cfg, const Task& task) {
    std::vector<ResultRow> rows;
    ResultRow base;
    base.env = cfg.env_preset;
    base.eps_e = task.eps_e;
    base.eps_l = task.eps_l;
    base.alpha = task.alpha;
    base.method = task.method;
    try {
        const TabularMdp learner = build_environment(cfg, task.eps_l);
        const TabularMdp expert = build_environment(cfg, task.eps_e);
        const Vector reward = learner.reward_vector();
        const Matrix& features = learner.reward()->features;
        const SolverOptions opts = cfg.irl.solver_options();

        const StochasticPolicy expert_policy =
            cfg.soft_expert ? soft_value_iteration(expert, opts).policy : value_iteration(expert, opts).policy;
        const OccupancyMeasure target = state_occupancy(expert, expert_policy, cfg.irl.inner_tol);

        base.d_dyn = dyn_distance(expert.transitions(), learner.transitions());
        base.thm1_bound = thm1_gap_bound(BoundInputs::from_rewards(learner.gamma(), reward, learner.n_actions(),
                                                                   std::min(2.0, base.d_dyn)));

        const auto t0 = std::chrono::steady_clock::now();
        StochasticPolicy policy;
        if (task.method == "mce") {
            IrlResult r = mce_irl(learner, target, features, cfg.irl);
            base.l1_mismatch = r.final_l1_mismatch;
            policy = std::move(r.policy);
        } else if (task.method == "robust") {
            IrlResult r = robust_mce_irl(learner, target, *task.alpha, features, cfg.irl);
            base.l1_mismatch = r.final_l1_mismatch;
            policy = std::move(r.policy);
        } else {
            policy = value_iteration(learner, opts).policy;
            base.l1_mismatch = (state_occupancy(learner, policy, cfg.irl.inner_tol).rho - target.rho).lpNorm<1>();
        }
        const auto t1 = std::chrono::steady_clock::now();
        if (cfg.record_wall_time)
            base.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

        for (std::uint64_t seed : cfg.seeds) {
            ResultRow row = base;
            row.seed = seed;
            const ReturnEstimate est = evaluate_policy(learner, policy, cfg.eval, seed);
            row.return_mean = est.mean;
            row.return_sd = est.sd;
            rows.push_back(std::move(row));
        }
    } catch (const std::exception& e) {
        rows.clear();
        for (std::uint64_t seed : cfg.seeds) {
            ResultRow row = base;
            row.seed = seed;
            row.error = e.what();
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

} // namespace

std::string format_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

void ExperimentConfig::apply_paper_scale() {
    grid_size = 10;
    eval.monte_carlo = true;
    eval.n_per_state = 1000;
    eval.horizon = 1000;
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
    if (!j.is_object())
        throw ConfigError("experiment config must be a JSON object");
    reject_unknown(j,
                   {"env", "grid_size", "env_seed", "eps_e", "eps_l", "alpha", "methods", "seeds", "eval", "irl",
                    "soft_expert", "record_wall_time", "threads", "paper_scale"},
                   "experiment config");
    ExperimentConfig c;
    c.env_preset = take<std::string>(j, "env", c.env_preset);
    if (c.env_preset == "objectworld-10")
        c.irl = IrlConfig::objectworld();
    if (take<bool>(j, "paper_scale", false))
        c.apply_paper_scale();
    c.grid_size = take<int>(j, "grid_size", c.grid_size);
    c.env_seed = take<std::uint64_t>(j, "env_seed", c.env_seed);
    c.eps_e_grid = take<std::vector<double>>(j, "eps_e", c.eps_e_grid);
    c.eps_l_grid = take<std::vector<double>>(j, "eps_l", c.eps_l_grid);
    c.alpha_grid = take<std::vector<double>>(j, "alpha", c.alpha_grid);
    c.methods = take<std::vector<std::string>>(j, "methods", c.methods);
    c.seeds = take<std::vector<std::uint64_t>>(j, "seeds", c.seeds);
    c.soft_expert = take<bool>(j, "soft_expert", c.soft_expert);
    c.record_wall_time = take<bool>(j, "record_wall_time", c.record_wall_time);
    c.threads = take<int>(j, "threads", c.threads);
    if (j.contains("eval")) {
        const Json& e = j.at("eval");
        reject_unknown(e, {"mode", "n_per_state", "horizon"}, "eval");
        const std::string mode = take<std::string>(e, "mode", c.eval.monte_carlo ? "monte_carlo" : "exact");
        if (mode != "exact" && mode != "monte_carlo")
            throw ConfigError("eval.mode must be 'exact' or 'monte_carlo'");
        c.eval.monte_carlo = mode == "monte_carlo";
        c.eval.n_per_state = take<int>(e, "n_per_state", c.eval.n_per_state);
        c.eval.horizon = take<int>(e, "horizon", c.eval.horizon);
    }
    if (j.contains("irl")) {
        const Json& r = j.at("irl");
        reject_unknown(r,
                       {"learning_rate", "beta1", "beta2", "eps", "weight_decay", "n_steps", "inner_tol",
                        "grad_norm_stop", "max_inner_iterations"},
                       "irl");
        c.irl.learning_rate = take<double>(r, "learning_rate", c.irl.learning_rate);
        c.irl.adam_beta1 = take<double>(r, "beta1", c.irl.adam_beta1);
        c.irl.adam_beta2 = take<double>(r, "beta2", c.irl.adam_beta2);
        c.irl.adam_eps = take<double>(r, "eps", c.irl.adam_eps);
        c.irl.weight_decay = take<double>(r, "weight_decay", c.irl.weight_decay);
        c.irl.n_steps = take<int>(r, "n_steps", c.irl.n_steps);
        c.irl.inner_tol = take<double>(r, "inner_tol", c.irl.inner_tol);
        c.irl.grad_norm_stop = take<double>(r, "grad_norm_stop", c.irl.grad_norm_stop);
        c.irl.max_inner_iterations = take<long>(r, "max_inner_iterations", c.irl.max_inner_iterations);
    }
    c.validate();
    return c;
}

Json ExperimentConfig::to_json() const {
    return Json{{"env", env_preset},
                {"grid_size", grid_size},
                {"env_seed", env_seed},
                {"eps_e", eps_e_grid},
                {"eps_l", eps_l_grid},
                {"alpha", alpha_grid},
                {"methods", methods},
                {"seeds", seeds},
                {"eval",
                 {{"mode", eval.monte_carlo ? "monte_carlo" : "exact"},
                  {"n_per_state", eval.n_per_state},
                  {"horizon", eval.horizon}}},
                {"irl",
                 {{"learning_rate", irl.learning_rate},
                  {"beta1", irl.adam_beta1},
                  {"beta2", irl.adam_beta2},
                  {"eps", irl.adam_eps},
                  {"weight_decay", irl.weight_decay},
                  {"n_steps", irl.n_steps},
                  {"inner_tol", irl.inner_tol},
                  {"grad_norm_stop", irl.grad_norm_stop},
                  {"max_inner_iterations", irl.max_inner_iterations}}},
                {"soft_expert", soft_expert},
                {"record_wall_time", record_wall_time},
                {"threads", threads}};
}

void ExperimentConfig::validate() const {
    auto names = preset_names();
    if (std::find(names.begin(), names.end(), env_preset) == names.end())
        throw ConfigError("unknown environment preset '" + env_preset + "'");
    if (grid_size < 3)
        throw ConfigError("grid_size must be at least 3");
    if (eps_e_grid.empty() || eps_l_grid.empty() || methods.empty() || seeds.empty())
        throw ConfigError("eps_e, eps_l, methods and seeds must be non-empty");
    for (double e : eps_e_grid)
        if (!(e >= 0.0 && e <= 1.0))
            throw ConfigError("eps_e values must lie in [0,1]");
    for (double e : eps_l_grid)
        if (!(e >= 0.0 && e <= 1.0))
            throw ConfigError("eps_l values must lie in [0,1]");
    for (const auto& m : methods)
        if (!kMethods.count(m))
            throw ConfigError("unknown method '" + m + "'");
    if (std::count(methods.begin(), methods.end(), "robust") && alpha_grid.empty())
        throw ConfigError("robust method needs a non-empty alpha grid");
    for (double a : alpha_grid)
        if (!(a > 0.0 && a <= 1.0))
            throw ConfigError("alpha values must lie in (0,1]");
    if (eval.n_per_state < 1 || eval.horizon < 1)
        throw ConfigError("evaluation parameters must be positive");
    if (threads < 1)
        throw ConfigError("threads must be positive");
    irl.validate();
}

TabularMdp build_environment(const ExperimentConfig& cfg, double eps) {
    if (cfg.env_preset == "constructive")
        return make_constructive(eps);
    return make_noisy(make_preset(cfg.env_preset, cfg.grid_size, cfg.env_seed), eps);
}

ReturnEstimate evaluate_policy(const TabularMdp& mdp, const StochasticPolicy& policy, const EvalMode& mode,
                               std::uint64_t seed) {
    if (!mode.monte_carlo)
        return ReturnEstimate{expected_return(mdp, policy), 0.0};

    const int ns = mdp.n_states();
    const Vector r = mdp.reward_vector();
    const Matrix k = policy_kernel(mdp, policy);
    Matrix cdf(ns, ns);
    for (int s = 0; s < ns; ++s) {
        double acc = 0.0;
        for (int s2 = 0; s2 < ns; ++s2)
            cdf(s, s2) = (acc += k(s, s2));
    }
    Vector p0_cdf(ns);
    double acc = 0.0;
    for (int s = 0; s < ns; ++s)
        p0_cdf(s) = (acc += mdp.p0()(s));

    auto draw = [ns](const auto& row, double u) {
        const double x = u * row(ns - 1);
        for (int s = 0; s < ns - 1; ++s)
            if (x < row(s))
                return s;
        return ns - 1;
    };

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const long n = static_cast<long>(mode.n_per_state) * ns;
    const double g = mdp.gamma();
    double mean = 0.0, m2 = 0.0;
    for (long i = 0; i < n; ++i) {
        int s = draw(p0_cdf, unif(rng));
        double ret = 0.0, disc = 1.0;
        for (int t = 0; t < mode.horizon; ++t) {
            ret += disc * r(s);
            disc *= g;
            s = draw(cdf.row(s), unif(rng));
        }
        const double d = ret - mean;
        mean += d / static_cast<double>(i + 1);
        m2 += d * (ret - mean);
    }
    return ReturnEstimate{mean, n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0};
}

void sort_rows(std::vector<ResultRow>& rows) {
    auto key = [](const ResultRow& r) {
        return std::make_tuple(r.env, r.eps_e, r.eps_l, r.method, r.alpha.has_value(), r.alpha.value_or(0.0),
                               r.seed);
    };
    std::stable_sort(rows.begin(), rows.end(), [&](const ResultRow& a, const ResultRow& b) { return key(a) < key(b); });
}

void mark_best_alpha(std::vector<ResultRow>& rows) {
    std::map<std::tuple<std::string, double, double, std::uint64_t>, std::size_t> best;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& r = rows[i];
        r.best_alpha = false;
        if (r.method != "robust" || !r.error.empty())
            continue;
        auto k = std::make_tuple(r.env, r.eps_e, r.eps_l, r.seed);
        auto it = best.find(k);
        if (it == best.end() || r.return_mean > rows[it->second].return_mean)
            best[k] = i;
    }
    for (const auto& [k, i] : best)
        rows[i].best_alpha = true;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<Task> tasks;
    for (double ee : cfg.eps_e_grid)
        for (double el : cfg.eps_l_grid)
            for (const auto& m : cfg.methods) {
                if (m == "robust") {
                    for (double a : cfg.alpha_grid)
                        tasks.push_back(Task{ee, el, m, a});
                } else {
                    tasks.push_back(Task{ee, el, m, std::nullopt});
                }
            }

    std::vector<std::vector<ResultRow>> per_task(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++)
            per_task[i] = run_task(cfg, tasks[i]);
    };
    const int n_workers = std::max(1, std::min<int>(cfg.threads, static_cast<int>(tasks.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }

    std::vector<ResultRow> rows;
    for (auto& v : per_task)
        for (auto& r : v)
            rows.push_back(std::move(r));
    sort_rows(rows);
    mark_best_alpha(rows);
    return rows;
}

ResultFormat parse_format(const std::string& name) {
    if (name == "csv")
        return ResultFormat::kCsv;
    if (name == "json")
        return ResultFormat::kJson;
    throw ConfigError("format must be 'csv' or 'json'");
}

std::string format_results(std::vector<ResultRow> rows, ResultFormat format) {
    sort_rows(rows);
    if (format == ResultFormat::kJson) {
        Json arr = Json::array();
        for (const auto& r : rows) {
            Json o;
            o["env"] = r.env;
            o["eps_e"] = round12(r.eps_e);
            o["eps_l"] = round12(r.eps_l);
            o["alpha"] = r.alpha ? Json(round12(*r.alpha)) : Json(nullptr);
            o["method"] = r.method;
            o["seed"] = r.seed;
            o["return_mean"] = round12(r.return_mean);
            o["return_sd"] = round12(r.return_sd);
            o["d_dyn"] = round12(r.d_dyn);
            o["thm1_bound"] = round12(r.thm1_bound);
            o["l1_mismatch"] = round12(r.l1_mismatch);
            o["wall_ms"] = round12(r.wall_ms);
            o["best_alpha"] = r.best_alpha;
            o["error"] = r.error;
            arr.push_back(std::move(o));
        }
        return arr.dump(2) + "\n";
    }
    std::ostringstream out;
    out << kHeader << "\n";
    for (const auto& r : rows) {
        out << csv_field(r.env) << ',' << format_number(r.eps_e) << ',' << format_number(r.eps_l) << ','
            << (r.alpha ? format_number(*r.alpha) : "") << ',' << csv_field(r.method) << ',' << r.seed << ','
            << format_number(r.return_mean) << ',' << format_number(r.return_sd) << ',' << format_number(r.d_dyn)
            << ',' << format_number(r.thm1_bound) << ',' << format_number(r.l1_mismatch) << ','
            << format_number(r.wall_ms) << ',' << (r.best_alpha ? 1 : 0) << ',' << csv_field(r.error) << "\n";
    }
    return out.str();
}

std::vector<ResultRow> parse_results(const std::string& text, ResultFormat format) {
    std::vector<ResultRow> rows;
    if (format == ResultFormat::kJson) {
        const Json arr = Json::parse(text);
        for (const auto& o : arr) {
            ResultRow r;
            r.env = o.at("env").get<std::string>();
            r.eps_e = o.at("eps_e").get<double>();
            r.eps_l = o.at("eps_l").get<double>();
            if (!o.at("alpha").is_null())
                r.alpha = o.at("alpha").get<double>();
            r.method = o.at("method").get<std::string>();
            r.seed = o.at("seed").get<std::uint64_t>();
            r.return_mean = o.at("return_mean").get<double>();
            r.return_sd = o.at("return_sd").get<double>();
            r.d_dyn = o.at("d_dyn").get<double>();
            r.thm1_bound = o.at("thm1_bound").get<double>();
            r.l1_mismatch = o.at("l1_mismatch").get<double>();
            r.wall_ms = o.at("wall_ms").get<double>();
            r.best_alpha = o.at("best_alpha").get<bool>();
            r.error = o.at("error").get<std::string>();
            rows.push_back(std::move(r));
        }
        return rows;
    }
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kHeader)
        throw ConfigError("results CSV has an unexpected header");
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        auto f = split_csv_line(line);
        if (f.size() != 14)
            throw ConfigError("results CSV row has " + std::to_string(f.size()) + " fields");
        ResultRow r;
        r.env = f[0];
        r.eps_e = to_double(f[1]);
        r.eps_l = to_double(f[2]);
        if (!f[3].empty())
            r.alpha = to_double(f[3]);
        r.method = f[4];
        r.seed = std::stoull(f[5]);
        r.return_mean = to_double(f[6]);
        r.return_sd = to_double(f[7]);
        r.d_dyn = to_double(f[8]);
        r.thm1_bound = to_double(f[9]);
        r.l1_mismatch = to_double(f[10]);
        r.wall_ms = to_double(f[11]);
        r.best_alpha = f[12] == "1";
        r.error = f[13];
        rows.push_back(std::move(r));
    }
    return rows;
}

void emit_results(const std::vector<ResultRow>& rows, const std::string& path, ResultFormat format) {
    write_text_file(path, format_results(rows, format));
}

} // namespace robirl
