#include "chords/config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "chords/rng.hpp"
#include "chords/schedule.hpp"

namespace chords {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ConfigError(path, message);
}

void require_keys(const json& obj, const std::string& path,
                  const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            fail(path + "." + it.key(), "unknown key");
        }
    }
}

const json& get_required(const json& obj, const std::string& path, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "required key is missing");
    return *it;
}

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
}

std::uint64_t as_u64(const json& v, const std::string& path) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        fail(path, "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

std::vector<double> as_double_array(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

CoefSpec parse_coef(const json& v, const std::string& path) {
    CoefSpec c;
    if (v.is_number()) {
        c.kind = "const";
        c.value = v.get<double>();
        return c;
    }
    if (!v.is_object()) fail(path, "expected a number or an object");
    c.kind = as_string(get_required(v, path, "kind"), path + ".kind");
    if (c.kind == "const") {
        require_keys(v, path, {"kind", "value"});
        c.value = as_number(get_required(v, path, "value"), path + ".value");
    } else if (c.kind == "linear") {
        require_keys(v, path, {"kind", "a", "b"});
        c.a = as_number(get_required(v, path, "a"), path + ".a");
        c.b = as_number(get_required(v, path, "b"), path + ".b");
    } else {
        fail(path + ".kind", "expected \"const\" or \"linear\"");
    }
    return c;
}

GaussianMixture parse_mixture(const json& v, const std::string& path);

GaussianMixture mixture_from_file(const std::string& file, const std::string& path) {
    std::ifstream in(file);
    if (!in) fail(path, "cannot open mixture file: " + file);
    json v;
    try {
        in >> v;
    } catch (const json::exception& e) {
        fail(path, "mixture file is not valid JSON: " + std::string(e.what()));
    }
    return parse_mixture(v, path + "(" + file + ")");
}

GaussianMixture parse_mixture(const json& v, const std::string& path) {
    if (!v.is_object()) fail(path, "expected an object");
    if (v.contains("file")) {
        require_keys(v, path, {"file"});
        return mixture_from_file(as_string(v["file"], path + ".file"), path + ".file");
    }
    if (v.contains("preset")) {
        require_keys(v, path, {"preset", "components", "radius", "sigma"});
        std::string preset = as_string(v["preset"], path + ".preset");
        if (preset != "ring" && preset != "ring8") {
            fail(path + ".preset", "unknown preset (expected \"ring\" or \"ring8\")");
        }
        int components = v.contains("components")
                             ? as_int(v["components"], path + ".components")
                             : 8;
        double radius = v.contains("radius") ? as_number(v["radius"], path + ".radius") : 2.0;
        double sigma = v.contains("sigma") ? as_number(v["sigma"], path + ".sigma") : 0.35;
        try {
            return ring_mixture(components, radius, sigma);
        } catch (const std::invalid_argument& e) {
            fail(path, e.what());
        }
    }
    require_keys(v, path, {"weights", "means", "covs"});
    std::vector<double> w =
        as_double_array(get_required(v, path, "weights"), path + ".weights");
    const json& means_j = get_required(v, path, "means");
    const json& covs_j = get_required(v, path, "covs");
    if (!means_j.is_array() || !covs_j.is_array()) {
        fail(path, "means and covs must be arrays");
    }
    std::vector<Latent> means;
    for (std::size_t i = 0; i < means_j.size(); ++i) {
        means.push_back(as_double_array(means_j[i], path + ".means[" + std::to_string(i) + "]"));
    }
    std::vector<std::vector<double>> covs;
    for (std::size_t i = 0; i < covs_j.size(); ++i) {
        covs.push_back(as_double_array(covs_j[i], path + ".covs[" + std::to_string(i) + "]"));
    }
    if (means.empty()) fail(path + ".means", "need at least one component");
    int D = static_cast<int>(means[0].size());
    try {
        return GaussianMixture(D, std::move(w), std::move(means), std::move(covs));
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
}

FieldSpec parse_field(const json& v, const std::string& path) {
    if (!v.is_object()) fail(path, "expected an object");
    FieldSpec f;
    f.kind = as_string(get_required(v, path, "kind"), path + ".kind");
    if (f.kind == "linear") {
        require_keys(v, path, {"kind", "lambda", "dim"});
        if (v.contains("lambda")) f.lambda = as_number(v["lambda"], path + ".lambda");
        f.dim = v.contains("dim") ? as_int(v["dim"], path + ".dim") : 1;
    } else if (f.kind == "mlp") {
        require_keys(v, path, {"kind", "seed", "dim", "width", "depth"});
        if (v.contains("seed")) f.seed = as_u64(v["seed"], path + ".seed");
        f.dim = v.contains("dim") ? as_int(v["dim"], path + ".dim") : 16;
        if (v.contains("width")) f.width = as_int(v["width"], path + ".width");
        if (v.contains("depth")) f.depth = as_int(v["depth"], path + ".depth");
    } else if (f.kind == "gmm_flow") {
        require_keys(v, path, {"kind", "mixture"});
        if (v.contains("mixture")) {
            f.mixture = parse_mixture(v["mixture"], path + ".mixture");
        } else {
            f.mixture = ring_mixture();
        }
        f.dim = f.mixture->dim;
    } else if (f.kind == "pf_ode") {
        require_keys(v, path, {"kind", "f_coef", "g_coef", "eps"});
        f.f_coef = parse_coef(get_required(v, path, "f_coef"), path + ".f_coef");
        f.g_coef = parse_coef(get_required(v, path, "g_coef"), path + ".g_coef");
        f.eps = std::make_shared<FieldSpec>(
            parse_field(get_required(v, path, "eps"), path + ".eps"));
        f.dim = f.eps->dim;
    } else {
        fail(path + ".kind", "unknown field kind (expected linear, mlp, gmm_flow, or pf_ode)");
    }
    if (f.dim < 1) fail(path + ".dim", "dimension must be >= 1");
    return f;
}

SequenceSpec parse_sequence(const json& v, const std::string& path) {
    if (!v.is_object()) fail(path, "expected an object");
    SequenceSpec s;
    s.kind = as_string(get_required(v, path, "kind"), path + ".kind");
    if (s.kind == "paper_default" || s.kind == "uniform") {
        require_keys(v, path, {"kind"});
    } else if (s.kind == "optimal") {
        require_keys(v, path, {"kind", "speedup"});
        s.speedup = as_number(get_required(v, path, "speedup"), path + ".speedup");
    } else if (s.kind == "explicit") {
        require_keys(v, path, {"kind", "indices"});
        const json& idx = get_required(v, path, "indices");
        if (!idx.is_array()) fail(path + ".indices", "expected an array of integers");
        for (std::size_t i = 0; i < idx.size(); ++i) {
            s.indices.push_back(as_int(idx[i], path + ".indices[" + std::to_string(i) + "]"));
        }
    } else {
        fail(path + ".kind",
             "unknown sequence kind (expected paper_default, optimal, uniform, or explicit)");
    }
    return s;
}

RunConfig parse_run(const json& v, const std::string& path) {
    if (!v.is_object()) fail(path, "expected an object");
    require_keys(v, path,
                 {"id", "method", "field", "grid", "sequence", "cores", "picard", "parareal",
                  "termination", "seeds", "x0", "out_dir", "workers", "verify_executors"});
    RunConfig c;
    if (v.contains("id")) c.id = as_string(v["id"], path + ".id");
    c.method = as_string(get_required(v, path, "method"), path + ".method");
    if (c.method != "sequential" && c.method != "picard" && c.method != "parareal" &&
        c.method != "chords") {
        fail(path + ".method", "unknown method");
    }
    c.field = parse_field(get_required(v, path, "field"), path + ".field");

    const json& grid = get_required(v, path, "grid");
    if (!grid.is_object()) fail(path + ".grid", "expected an object");
    if (grid.contains("times")) {
        require_keys(grid, path + ".grid", {"times"});
        c.times = as_double_array(grid["times"], path + ".grid.times");
        c.N = static_cast<int>(c.times->size()) - 1;
    } else {
        require_keys(grid, path + ".grid", {"N"});
        c.N = as_int(get_required(grid, path + ".grid", "N"), path + ".grid.N");
        if (c.N < 1) fail(path + ".grid.N", "N must be >= 1");
    }

    if (v.contains("sequence")) c.sequence = parse_sequence(v["sequence"], path + ".sequence");
    if (v.contains("cores")) {
        c.cores = as_int(v["cores"], path + ".cores");
        if (c.cores < 1) fail(path + ".cores", "cores must be >= 1");
    }

    if (v.contains("picard")) {
        const json& p = v["picard"];
        if (!p.is_object()) fail(path + ".picard", "expected an object");
        require_keys(p, path + ".picard", {"window", "tol"});
        if (p.contains("window")) c.picard_window = as_int(p["window"], path + ".picard.window");
        if (p.contains("tol")) c.picard_tol = as_number(p["tol"], path + ".picard.tol");
    }
    if (v.contains("parareal")) {
        const json& p = v["parareal"];
        if (!p.is_object()) fail(path + ".parareal", "expected an object");
        require_keys(p, path + ".parareal", {"coarse_points", "max_iters"});
        if (p.contains("coarse_points")) {
            c.parareal_coarse = as_int(p["coarse_points"], path + ".parareal.coarse_points");
        }
        if (p.contains("max_iters")) {
            c.parareal_iters = as_int(p["max_iters"], path + ".parareal.max_iters");
        }
    }

    if (v.contains("termination")) {
        const json& t = v["termination"];
        if (!t.is_object()) fail(path + ".termination", "expected an object");
        std::string mode = as_string(get_required(t, path + ".termination", "mode"),
                                     path + ".termination.mode");
        if (mode == "fixed_core") {
            require_keys(t, path + ".termination", {"mode", "target_core"});
            c.term_mode = TerminationCriterion::Mode::fixed_core;
            if (t.contains("target_core")) {
                c.target_core = as_int(t["target_core"], path + ".termination.target_core");
            }
        } else if (mode == "residual") {
            require_keys(t, path + ".termination", {"mode", "tau"});
            c.term_mode = TerminationCriterion::Mode::residual;
            if (t.contains("tau")) c.tau = as_number(t["tau"], path + ".termination.tau");
            if (!(c.tau > 0.0)) fail(path + ".termination.tau", "tau must be positive");
        } else {
            fail(path + ".termination.mode", "expected \"fixed_core\" or \"residual\"");
        }
    }

    if (v.contains("seeds")) {
        const json& s = v["seeds"];
        c.seeds.clear();
        if (s.is_array()) {
            for (std::size_t i = 0; i < s.size(); ++i) {
                c.seeds.push_back(as_u64(s[i], path + ".seeds[" + std::to_string(i) + "]"));
            }
        } else if (s.is_object()) {
            require_keys(s, path + ".seeds", {"master", "count"});
            std::uint64_t master =
                as_u64(get_required(s, path + ".seeds", "master"), path + ".seeds.master");
            int count = as_int(get_required(s, path + ".seeds", "count"), path + ".seeds.count");
            if (count < 1) fail(path + ".seeds.count", "count must be >= 1");
            for (int i = 0; i < count; ++i) {
                c.seeds.push_back(split_seed(master, static_cast<std::uint64_t>(i)));
            }
        } else {
            fail(path + ".seeds", "expected an array or {master, count}");
        }
        if (c.seeds.empty()) fail(path + ".seeds", "need at least one seed");
    }

    if (v.contains("x0")) {
        const json& x = v["x0"];
        if (x.is_string()) {
            c.x0_kind = x.get<std::string>();
            if (c.x0_kind != "gauss" && c.x0_kind != "ones") {
                fail(path + ".x0", "expected \"gauss\", \"ones\", or an array");
            }
        } else if (x.is_array()) {
            c.x0_kind = "explicit";
            c.x0_values = as_double_array(x, path + ".x0");
        } else {
            fail(path + ".x0", "expected \"gauss\", \"ones\", or an array");
        }
    }

    if (v.contains("out_dir")) c.out_dir = as_string(v["out_dir"], path + ".out_dir");
    if (v.contains("workers")) {
        c.workers = as_int(v["workers"], path + ".workers");
        if (c.workers < 0) fail(path + ".workers", "workers must be >= 0");
    }
    if (v.contains("verify_executors")) {
        if (!v["verify_executors"].is_boolean()) {
            fail(path + ".verify_executors", "expected a boolean");
        }
        c.verify_executors = v["verify_executors"].get<bool>();
    }

    // cross-field validation that does not need construction
    if (c.method == "chords") {
        if (c.cores > c.N) {
            fail(path + ".sequence", "cannot host " + std::to_string(c.cores) +
                                         " cores on a grid with N=" + std::to_string(c.N));
        }
        if (c.sequence.kind == "explicit" &&
            static_cast<int>(c.sequence.indices.size()) != c.cores) {
            fail(path + ".sequence.indices", "explicit sequence must list one index per core");
        }
    }
    if (c.method == "picard") {
        int P = c.picard_window > 0 ? c.picard_window : c.cores;
        if (P > c.N) fail(path + ".picard.window", "window exceeds the number of steps");
    }
    return c;
}

json parse_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        fail(origin, std::string("invalid JSON: ") + e.what());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("$", "cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    return parse_run(parse_text(json_text, "$"), "$");
}

std::vector<RunConfig> parse_sweep_config(const std::string& json_text) {
    json v = parse_text(json_text, "$");
    if (!v.is_array()) fail("$", "sweep config must be a JSON array of run configs");
    std::vector<RunConfig> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::string path = "$[" + std::to_string(i) + "]";
        out.push_back(parse_run(v[i], path));
        if (out.back().id.empty()) out.back().id = std::to_string(i);
    }
    if (out.empty()) fail("$", "sweep config must contain at least one run");
    return out;
}

RunConfig load_run_config(const std::string& path) {
    return parse_run_config(read_file(path));
}

std::vector<RunConfig> load_sweep_config(const std::string& path) {
    return parse_sweep_config(read_file(path));
}

DriftField build_field(const FieldSpec& spec) {
    if (spec.kind == "linear") return linear_field(spec.lambda, spec.dim);
    if (spec.kind == "mlp") return mlp_field(spec.seed, spec.dim, spec.width, spec.depth);
    if (spec.kind == "gmm_flow") {
        return gmm_flow_field(spec.mixture ? *spec.mixture : ring_mixture());
    }
    if (spec.kind == "pf_ode") {
        auto make_coef = [](const CoefSpec& c) -> std::function<double(double)> {
            if (c.kind == "linear") {
                return [a = c.a, b = c.b](double t) { return a + b * t; };
            }
            return [v = c.value](double) { return v; };
        };
        return pf_ode_field(make_coef(spec.f_coef), make_coef(spec.g_coef),
                            build_field(*spec.eps));
    }
    throw ConfigError("$.field.kind", "unknown field kind: " + spec.kind);
}

TimeGrid build_grid(const RunConfig& config) {
    if (config.times) {
        try {
            return TimeGrid(*config.times);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("$.grid.times", e.what());
        }
    }
    return uniform_grid(config.N);
}

InitSequence build_sequence(const RunConfig& config, const TimeGrid& grid) {
    const SequenceSpec& s = config.sequence;
    try {
        if (s.kind == "paper_default") {
            if (grid.N == 50) return default_sequence(config.cores, grid.N);
            // reuse the published shape on rescaled grids
            return scale_sequence(default_sequence(config.cores, 50), 50, grid.N);
        }
        if (s.kind == "optimal") {
            return discretize_sequence(optimal_continuous_sequence(s.speedup, config.cores),
                                       grid);
        }
        if (s.kind == "uniform") return uniform_sequence(config.cores, grid.N);
        if (s.kind == "explicit") {
            InitSequence seq(s.indices);
            if (seq.at(seq.cores()) >= grid.N) {
                throw std::invalid_argument("explicit indices must stay below N");
            }
            return seq;
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError("$.sequence", e.what());
    }
    throw ConfigError("$.sequence.kind", "unknown sequence kind: " + s.kind);
}

TerminationCriterion build_termination(const RunConfig& config, int K) {
    if (config.term_mode == TerminationCriterion::Mode::residual) {
        return TerminationCriterion::residual_mode(config.tau);
    }
    int target = config.target_core > 0 ? config.target_core : K;
    if (target < 1 || target > K) {
        throw ConfigError("$.termination.target_core", "target core out of range");
    }
    return TerminationCriterion::fixed_core_mode(target);
}

Latent draw_x0(const RunConfig& config, int dim, std::uint64_t seed) {
    if (config.x0_kind == "ones") return Latent(static_cast<std::size_t>(dim), 1.0);
    if (config.x0_kind == "explicit") {
        if (static_cast<int>(config.x0_values.size()) != dim) {
            throw ConfigError("$.x0", "explicit x0 dimension does not match the field");
        }
        return config.x0_values;
    }
    SplitMix64 rng(seed);
    Latent x(static_cast<std::size_t>(dim));
    for (double& v : x) v = rng.next_normal();
    return x;
}

Executor select_executor(const RunConfig& config) {
    if (config.verify_executors) return Executor::verify;
    if (config.workers == 1) return Executor::reference;
    return Executor::parallel;
}

}  // namespace chords
