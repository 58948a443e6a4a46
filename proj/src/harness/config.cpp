#include "qprobe/harness/config.hpp"

#include "qprobe/errors.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>

namespace qprobe::harness {

using nlohmann::json;

namespace {

void fail(const std::string& what) { throw ParameterError("config: " + what); }

// Rejects keys outside `allowed`; `where` names the section in diagnostics.
void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : obj.items())
        if (!ok.count(item.key())) fail("unknown key '" + item.key() + "' in " + where);
}

double get_number(const json& obj, const char* key, double fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(where + "." + key + " must be a number");
    return v.get<double>();
}

std::uint64_t get_unsigned(const json& obj, const char* key, std::uint64_t fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    const bool ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    if (!ok) fail(where + "." + key + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

// Repetitions: a number or the string "inf".
double parse_repetitions(const json& v, const std::string& where) {
    if (v.is_string() && v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    if (!v.is_number()) fail(where + " must be a number or \"inf\"");
    return v.get<double>();
}

json repetitions_to_json(double r) {
    if (std::isinf(r)) return "inf";
    return r;
}

std::vector<double> get_number_list(const json& obj, const char* key, const std::string& where,
                                    bool allow_inf = false) {
    if (!obj.contains(key)) fail(where + "." + key + " is required");
    const json& v = obj.at(key);
    if (!v.is_array()) fail(where + "." + key + " must be an array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (allow_inf) {
            out.push_back(parse_repetitions(e, where + "." + key));
        } else {
            if (!e.is_number()) fail(where + "." + key + " entries must be numbers");
            out.push_back(e.get<double>());
        }
    }
    return out;
}

SweepAxis parse_axis(const std::string& name) {
    if (name == "omega_z") return SweepAxis::omega_z;
    if (name == "nbar") return SweepAxis::nbar;
    if (name == "gamma") return SweepAxis::gamma;
    if (name == "r") return SweepAxis::r;
    if (name == "t_max") return SweepAxis::t_max;
    fail("unknown sweep axis '" + name + "'");
    return SweepAxis::omega_z;
}

constexpr double kMHz = 1e6;
constexpr double kKHz = 1e3;

}  // namespace

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::omega_z: return "omega_z";
        case SweepAxis::nbar: return "nbar";
        case SweepAxis::gamma: return "gamma";
        case SweepAxis::r: return "r";
        case SweepAxis::t_max: return "t_max";
    }
    return "?";
}

std::string to_string(NoiseModel noise) {
    switch (noise) {
        case NoiseModel::none: return "none";
        case NoiseModel::gaussian: return "gaussian";
        case NoiseModel::binomial: return "binomial";
    }
    return "?";
}

NoiseModel parse_noise(const std::string& name) {
    if (name == "none") return NoiseModel::none;
    if (name == "gaussian") return NoiseModel::gaussian;
    if (name == "binomial") return NoiseModel::binomial;
    fail("unknown noise model '" + name + "'");
    return NoiseModel::none;
}

void RunConfig::validate() const {
    model_params().validate();
    if (!(tau() > 0.0 && std::isfinite(tau()))) fail("time unit tau is undefined; set model.tau_reference_kHz");
    if (!(grid.t_max_tau > 0.0)) fail("grid.t_max_tau must be positive");
    if (grid.samples < 2) fail("grid.samples must be at least 2");
    qpn.validate();
    if (!(truth.multiplier > 0.0 && truth.check_multiplier > 0.0 && truth.tolerance > 0.0))
        fail("truth settings must be positive");
    if (bias) {
        if (bias->gamma_tau.empty() || bias->r.empty()) fail("bias grids must be non-empty");
        for (double g : bias->gamma_tau)
            if (!(g > 0.0)) fail("bias.gamma_tau entries must be positive");
        for (double r : bias->r)
            if (!(r >= 1.0)) fail("bias.r entries must be at least 1");
    }
    if (sweep) {
        if (sweep->values.empty()) fail("sweep.values must be non-empty");
        if (sweep->axis != SweepAxis::t_max && sweep->t_max_tau.empty()) fail("sweep.t_max_tau must be non-empty");
        for (double t : sweep->t_max_tau)
            if (!(t > 0.0)) fail("sweep.t_max_tau entries must be positive");
    }
}

ModelParams RunConfig::model_params() const {
    ModelParams p;
    p.omega_z = kTwoPi * model.omega_z_MHz * kMHz;
    p.omega_E = kTwoPi * model.omega_E_MHz * kMHz;
    p.Omega = kTwoPi * model.Omega_kHz * kKHz;
    p.eta = model.eta;
    p.nbar = model.nbar;
    p.n_cut = model.n_cut;
    p.n_pad = model.n_pad;
    return p;
}

double RunConfig::tau() const {
    const double ref_kHz = model.tau_reference_kHz > 0.0 ? model.tau_reference_kHz : model.Omega_kHz;
    return 1.0 / (ref_kHz * kKHz);
}

double RunConfig::reference_rate() const {
    return static_cast<double>(grid.samples - 1) / (grid.t_max_tau * tau());
}

TimeGrid RunConfig::time_grid() const { return TimeGrid::uniform(grid.t_max_tau * tau(), grid.samples); }

TrueValueOptions RunConfig::truth_options() const {
    return TrueValueOptions{reference_rate(), truth.multiplier, truth.check_multiplier, truth.tolerance};
}

RunConfig default_config() {
    RunConfig c;
    c.qpn.seed = c.seed;
    return c;
}

RunConfig config_from_json(const json& j) {
    check_keys(j, "config", {"model", "grid", "qpn", "truth", "bias", "sweep", "output_dir", "seed"});
    RunConfig c = default_config();

    if (j.contains("model")) {
        const json& m = j.at("model");
        check_keys(m, "model",
                   {"omega_z_MHz", "omega_E_MHz", "Omega_kHz", "tau_reference_kHz", "eta", "nbar", "n_cut", "n_pad"});
        c.model.omega_z_MHz = get_number(m, "omega_z_MHz", c.model.omega_z_MHz, "model");
        c.model.omega_E_MHz = get_number(m, "omega_E_MHz", c.model.omega_E_MHz, "model");
        c.model.Omega_kHz = get_number(m, "Omega_kHz", c.model.Omega_kHz, "model");
        c.model.tau_reference_kHz = get_number(m, "tau_reference_kHz", c.model.tau_reference_kHz, "model");
        c.model.eta = get_number(m, "eta", c.model.eta, "model");
        c.model.nbar = get_number(m, "nbar", c.model.nbar, "model");
        c.model.n_cut = static_cast<int>(get_unsigned(m, "n_cut", static_cast<std::uint64_t>(c.model.n_cut), "model"));
        c.model.n_pad = static_cast<int>(get_unsigned(m, "n_pad", static_cast<std::uint64_t>(c.model.n_pad), "model"));
    }
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        check_keys(g, "grid", {"t_max_tau", "samples"});
        c.grid.t_max_tau = get_number(g, "t_max_tau", c.grid.t_max_tau, "grid");
        c.grid.samples = get_unsigned(g, "samples", c.grid.samples, "grid");
    }
    if (j.contains("qpn")) {
        const json& q = j.at("qpn");
        check_keys(q, "qpn", {"r", "noise", "k_series", "k_measure", "resample_iterations"});
        if (q.contains("r")) c.qpn.r = parse_repetitions(q.at("r"), "qpn.r");
        if (q.contains("noise")) {
            if (!q.at("noise").is_string()) fail("qpn.noise must be a string");
            c.qpn.noise = parse_noise(q.at("noise").get<std::string>());
        }
        c.qpn.k_series = get_unsigned(q, "k_series", c.qpn.k_series, "qpn");
        c.qpn.k_measure = get_unsigned(q, "k_measure", c.qpn.k_measure, "qpn");
        c.qpn.resample_iterations = get_unsigned(q, "resample_iterations", c.qpn.resample_iterations, "qpn");
    }
    if (j.contains("truth")) {
        const json& t = j.at("truth");
        check_keys(t, "truth", {"multiplier", "check_multiplier", "tolerance"});
        c.truth.multiplier = get_number(t, "multiplier", c.truth.multiplier, "truth");
        c.truth.check_multiplier = get_number(t, "check_multiplier", c.truth.check_multiplier, "truth");
        c.truth.tolerance = get_number(t, "tolerance", c.truth.tolerance, "truth");
    }
    if (j.contains("bias")) {
        const json& b = j.at("bias");
        check_keys(b, "bias", {"gamma_tau", "r", "method"});
        BiasSpec spec;
        spec.gamma_tau = get_number_list(b, "gamma_tau", "bias");
        spec.r = get_number_list(b, "r", "bias", true);
        if (b.contains("method")) {
            const json& m = b.at("method");
            if (m == "grid") {
                spec.method = BiasMethod::grid;
            } else if (m == "postselect") {
                spec.method = BiasMethod::postselect;
            } else {
                fail("bias.method must be \"grid\" or \"postselect\"");
            }
        }
        c.bias = spec;
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        check_keys(s, "sweep", {"axis", "values", "t_max_tau"});
        SweepSpec spec;
        if (!s.contains("axis") || !s.at("axis").is_string()) fail("sweep.axis must be a string");
        spec.axis = parse_axis(s.at("axis").get<std::string>());
        spec.values = get_number_list(s, "values", "sweep", spec.axis == SweepAxis::r);
        if (s.contains("t_max_tau")) spec.t_max_tau = get_number_list(s, "t_max_tau", "sweep");
        c.sweep = spec;
    }
    if (j.contains("output_dir")) {
        if (!j.at("output_dir").is_string()) fail("output_dir must be a string");
        c.output_dir = j.at("output_dir").get<std::string>();
    }
    c.seed = get_unsigned(j, "seed", c.seed, "config");
    c.qpn.seed = c.seed;
    c.validate();
    return c;
}

json config_to_json(const RunConfig& c) {
    json j;
    j["model"] = {{"omega_z_MHz", c.model.omega_z_MHz}, {"omega_E_MHz", c.model.omega_E_MHz},
                  {"Omega_kHz", c.model.Omega_kHz},     {"tau_reference_kHz", c.model.tau_reference_kHz},
                  {"eta", c.model.eta},                 {"nbar", c.model.nbar},
                  {"n_cut", c.model.n_cut},             {"n_pad", c.model.n_pad}};
    j["grid"] = {{"t_max_tau", c.grid.t_max_tau}, {"samples", c.grid.samples}};
    j["qpn"] = {{"r", repetitions_to_json(c.qpn.r)},
                {"noise", to_string(c.qpn.noise)},
                {"k_series", c.qpn.k_series},
                {"k_measure", c.qpn.k_measure},
                {"resample_iterations", c.qpn.resample_iterations}};
    j["truth"] = {{"multiplier", c.truth.multiplier},
                  {"check_multiplier", c.truth.check_multiplier},
                  {"tolerance", c.truth.tolerance}};
    if (c.bias) {
        json rs = json::array();
        for (double r : c.bias->r) rs.push_back(repetitions_to_json(r));
        j["bias"] = {{"gamma_tau", c.bias->gamma_tau},
                     {"r", rs},
                     {"method", c.bias->method == BiasMethod::grid ? "grid" : "postselect"}};
    }
    if (c.sweep) {
        json values = json::array();
        for (double v : c.sweep->values) values.push_back(repetitions_to_json(v));
        j["sweep"] = {{"axis", to_string(c.sweep->axis)}, {"values", values}, {"t_max_tau", c.sweep->t_max_tau}};
    }
    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed;
    return j;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("config: cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParameterError(std::string("config: ") + e.what());
    }
    return config_from_json(j);
}

std::string canonical_config(const RunConfig& config) {
    // where the results go does not change what they are
    json j = config_to_json(config);
    j.erase("output_dir");
    return j.dump();
}

std::string config_hash(const RunConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_config(config)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

}  // namespace qprobe::harness
