#include "lenstp/config.hpp"

#include <fstream>

#include "lenstp/errors.hpp"

namespace lenstp {

namespace {

const Json* find(const Json& j, const std::string& key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

template <typename T>
T get_required(const Json& j, const std::string& context, const std::string& key) {
    const Json* v = find(j, key);
    if (!v) throw ConfigError(context + ": missing required key '" + key + "'");
    try {
        return v->get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(context + "." + key + ": " + e.what());
    }
}

template <typename T>
T get_optional(const Json& j, const std::string& context, const std::string& key, T fallback) {
    const Json* v = find(j, key);
    if (!v) return fallback;
    try {
        return v->get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(context + "." + key + ": " + e.what());
    }
}

IsotopyStep parse_step(const Json& j, int index) {
    const std::string ctx = "isotopy[" + std::to_string(index) + "]";
    if (!j.is_object()) throw ConfigError(ctx + ": expected an object");
    const std::string kind = get_required<std::string>(j, ctx, "kind");
    IsotopyStep step;
    step.duration = get_optional<double>(j, ctx, "duration", 1.0);
    if (!std::isfinite(step.duration))
        throw ConfigError(ctx + ".duration: must be finite");
    if (kind == "diagonal") {
        step.hamiltonian =
            HamiltonianTerm::diagonal(get_required<std::vector<double>>(j, ctx, "coefficients"));
    } else if (kind == "resonant") {
        const double eps = get_required<double>(j, ctx, "epsilon");
        std::vector<double> phase =
            get_optional<std::vector<double>>(j, ctx, "phase", {1.0, 0.0});
        if (phase.size() != 2) throw ConfigError(ctx + ".phase: expected [re, im]");
        step.hamiltonian = HamiltonianTerm::resonant(
            eps, Complex(phase[0], phase[1]), get_required<std::vector<int>>(j, ctx, "a"),
            get_required<std::vector<int>>(j, ctx, "b"));
    } else {
        throw ConfigError(ctx + ".kind: unknown kind '" + kind +
                          "' (expected 'diagonal' or 'resonant')");
    }
    return step;
}

} // namespace

RunConfig RunConfig::from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object at top level");
    RunConfig cfg;

    const Json* setting = find(j, "setting");
    if (!setting) throw ConfigError("config: missing required key 'setting'");
    cfg.setting.n = get_required<int>(*setting, "setting", "n");
    cfg.setting.k = get_required<int>(*setting, "setting", "k");
    cfg.setting.weights = get_required<std::vector<int>>(*setting, "setting", "weights");

    const Json* isotopy = find(j, "isotopy");
    if (!isotopy) throw ConfigError("config: missing required key 'isotopy'");
    if (!isotopy->is_array()) throw ConfigError("config.isotopy: expected an array");
    for (std::size_t i = 0; i < isotopy->size(); ++i)
        cfg.isotopy.push_back(parse_step((*isotopy)[i], static_cast<int>(i)));

    if (const Json* d = find(j, "decomposition")) {
        cfg.theta = get_optional<double>(*d, "decomposition", "theta", cfg.theta);
        cfg.sample_points =
            get_optional<int>(*d, "decomposition", "sample_points", cfg.sample_points);
        cfg.max_substeps =
            get_optional<int>(*d, "decomposition", "max_substeps", cfg.max_substeps);
        if (!(cfg.theta > 0.0 && cfg.theta < 1.0))
            throw ConfigError("config.decomposition.theta: must lie in (0, 1)");
    }

    if (const Json* s = find(j, "solver")) {
        cfg.solver.sphere_samples =
            get_optional<int>(*s, "solver", "sphere_samples", cfg.solver.sphere_samples);
        cfg.solver.tau_samples =
            get_optional<int>(*s, "solver", "tau_samples", cfg.solver.tau_samples);
        cfg.solver.newton_tolerance =
            get_optional<double>(*s, "solver", "newton_tolerance", cfg.solver.newton_tolerance);
        cfg.solver.hit_residual =
            get_optional<double>(*s, "solver", "hit_residual", cfg.solver.hit_residual);
        cfg.solver.cluster_tolerance = get_optional<double>(*s, "solver", "cluster_tolerance",
                                                            cfg.solver.cluster_tolerance);
        cfg.solver.max_iterations =
            get_optional<int>(*s, "solver", "max_iterations", cfg.solver.max_iterations);
        cfg.solver.seed = get_optional<std::uint64_t>(*s, "solver", "seed", cfg.solver.seed);
    }

    if (const Json* g = find(j, "genfun")) {
        cfg.elementary_tolerance =
            get_optional<double>(*g, "genfun", "newton_tolerance", cfg.elementary_tolerance);
        cfg.elementary_max_iterations = get_optional<int>(*g, "genfun", "newton_max_iterations",
                                                          cfg.elementary_max_iterations);
        cfg.genfun.sphere_samples =
            get_optional<int>(*g, "genfun", "sphere_samples", cfg.genfun.sphere_samples);
        cfg.genfun.tau_samples =
            get_optional<int>(*g, "genfun", "tau_samples", cfg.genfun.tau_samples);
        std::vector<double> window = get_optional<std::vector<double>>(
            *g, "genfun", "t_window", {cfg.genfun.t_min, cfg.genfun.t_max});
        if (window.size() != 2 || !(window[0] < window[1]))
            throw ConfigError("config.genfun.t_window: expected [t_min, t_max] with t_min < t_max");
        cfg.genfun.t_min = window[0];
        cfg.genfun.t_max = window[1];
    }

    cfg.validate();
    return cfg;
}

RunConfig RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return from_json(j);
}

void RunConfig::validate() const {
    setting.validate();
    for (std::size_t i = 0; i < isotopy.size(); ++i) {
        const HamiltonianTerm& term = isotopy[i].hamiltonian;
        if (term.dimension() != setting.n)
            throw ConfigError("isotopy[" + std::to_string(i) + "] (" + term.describe() +
                              "): dimension does not match setting.n = " +
                              std::to_string(setting.n));
        const int defect = term.invariance_defect(setting);
        if (defect != 0)
            throw ConfigError("isotopy[" + std::to_string(i) + "] (" + term.describe() +
                              "): invariance congruence fails, sum (a_j - b_j) w_j = " +
                              std::to_string(defect) + " != 0 (mod " +
                              std::to_string(setting.k) + ")");
    }
    if (!(genfun.t_min > -1.0 && genfun.t_max < 3.0))
        throw ConfigError("config.genfun.t_window: must lie inside (-1, 3)");
}

Json RunConfig::echo_json() const {
    Json steps = Json::array();
    for (const IsotopyStep& s : isotopy) {
        Json step;
        if (s.hamiltonian.kind == HamiltonianTerm::Kind::Diagonal) {
            step["kind"] = "diagonal";
            step["coefficients"] = s.hamiltonian.coefficients;
        } else {
            step["kind"] = "resonant";
            step["epsilon"] = s.hamiltonian.epsilon;
            step["phase"] = {s.hamiltonian.phase.real(), s.hamiltonian.phase.imag()};
            step["a"] = s.hamiltonian.a;
            step["b"] = s.hamiltonian.b;
        }
        step["duration"] = s.duration;
        steps.push_back(std::move(step));
    }
    return Json{{"setting", {{"n", setting.n}, {"k", setting.k}, {"weights", setting.weights}}},
                {"isotopy", steps},
                {"decomposition",
                 {{"theta", theta},
                  {"sample_points", sample_points},
                  {"max_substeps", max_substeps}}},
                {"solver",
                 {{"sphere_samples", solver.sphere_samples},
                  {"tau_samples", solver.tau_samples},
                  {"newton_tolerance", solver.newton_tolerance},
                  {"hit_residual", solver.hit_residual},
                  {"cluster_tolerance", solver.cluster_tolerance},
                  {"max_iterations", solver.max_iterations},
                  {"seed", solver.seed}}},
                {"genfun",
                 {{"newton_tolerance", elementary_tolerance},
                  {"newton_max_iterations", elementary_max_iterations},
                  {"t_window", {genfun.t_min, genfun.t_max}},
                  {"sphere_samples", genfun.sphere_samples},
                  {"tau_samples", genfun.tau_samples}}}};
}

} // namespace lenstp
