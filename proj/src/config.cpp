#include "mmck/config.hpp"

#include "mmck/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace mmck {

using nlohmann::json;

namespace {

// Pulls values out of one object while tracking which keys were consumed;
// leftovers are configuration errors (no silent typos).
class Section {
public:
    Section(const json& root, const std::string& name) : name_(name) {
        if (root.contains(name)) {
            if (!root.at(name).is_object())
                throw config_error("config: section '" + name + "' must be an object");
            j_ = root.at(name);
        }
    }

    template <typename T>
    T get(const std::string& key, T def) {
        used_.insert(key);
        if (!j_.contains(key)) return def;
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw config_error("config: bad value for " + name_ + "." + key + ": " + e.what());
        }
    }

    json raw(const std::string& key, const json& def) {
        used_.insert(key);
        return j_.contains(key) ? j_.at(key) : def;
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!used_.contains(key))
                throw config_error("config: unknown key '" + name_ + "." + key + "'");
    }

private:
    json j_ = json::object();
    std::string name_;
    std::set<std::string> used_;
};

std::vector<double> get_vector(const json& v, const std::string& where) {
    if (!v.is_array()) throw config_error("config: " + where + " must be an array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw config_error("config: " + where + " must hold numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<It2Gaussian> build_mfs(const std::vector<double>& centers,
                                   const std::vector<double>& sl,
                                   const std::vector<double>& su, const std::string& input) {
    if (centers.size() != sl.size() || centers.size() != su.size())
        throw config_error("config: fis arrays for input '" + input + "' differ in length");
    std::vector<It2Gaussian> mfs;
    for (std::size_t i = 0; i < centers.size(); ++i)
        mfs.push_back({centers[i], sl[i], su[i]});
    return mfs;
}

} // namespace

Config load_config(const json& j) {
    if (!j.is_object()) throw config_error("config: root must be an object");
    const std::set<std::string> sections = {"plant",    "fractional", "controller", "fis",
                                            "scenario", "woa",        "output"};
    for (const auto& [key, value] : j.items())
        if (!sections.contains(key))
            throw config_error("config: unknown section '" + key + "'");

    Config c;
    c.fingerprint_source = j.dump();

    Section scen(j, "scenario");
    Scenario& sc = c.scenario;
    sc.duration = scen.get("duration", 2.0);
    sc.dt_sim = scen.get("dt_sim", 2e-5);
    sc.dt_ctrl = scen.get("dt_ctrl", 1e-4);
    sc.id_ref = scen.get("id_ref", 10.0);
    sc.iq_ref = scen.get("iq_ref", 0.0);
    sc.thd_window_cycles = scen.get("thd_window_cycles", 5);
    sc.seed = scen.get<std::uint64_t>("seed", 1);
    const json prof = scen.raw("vdc_profile", json::array({json::array({0.0, 450.0})}));
    sc.vdc_profile.clear();
    for (const auto& pt : prof) {
        const auto v = get_vector(pt, "scenario.vdc_profile entry");
        if (v.size() != 2) throw config_error("config: vdc_profile entries are [t, V] pairs");
        sc.vdc_profile.emplace_back(v[0], v[1]);
    }
    const bool use_power_refs = scen.get("use_power_refs", false);
    const double p_ref = scen.get("p_ref", 0.0);
    const double q_ref = scen.get("q_ref", 0.0);
    scen.finish();
    const double vdc0 = vdc_at(sc.vdc_profile, 0.0);

    Section plant(j, "plant");
    sc.plant.n_cells = plant.get("n_cells", 4);
    sc.plant.arm_inductance = plant.get("arm_inductance", 5e-3);
    sc.plant.arm_resistance = plant.get("arm_resistance", 0.1);
    sc.plant.cell_capacitance = plant.get("cell_capacitance", 2e-3);
    sc.plant.grid_freq = 2.0 * std::numbers::pi * plant.get("grid_freq_hz", 50.0);
    sc.plant.grid_amplitude = plant.get("grid_amplitude", 0.35 * vdc0);
    sc.plant.vdc = vdc0;
    sc.balance_sorting = plant.get("balance_sorting", false);
    plant.finish();

    if (use_power_refs) {
        const Dq refs = power_to_current_refs(p_ref, q_ref, sc.plant.grid_amplitude);
        sc.id_ref = refs.d;
        sc.iq_ref = refs.q;
    }

    Section frac(j, "fractional");
    sc.fractional.n_filter = frac.get("n_filter", 20);
    sc.fractional.omega_b = frac.get("omega_b", 1e-3);
    sc.fractional.omega_h = frac.get("omega_h", 1e3);
    frac.finish();

    Section ctrl(j, "controller");
    const std::string type = ctrl.get<std::string>("type", "fopi");
    if (type == "fopi") sc.kind = ControllerKind::fopi;
    else if (type == "fofpi") sc.kind = ControllerKind::fofpi;
    else throw config_error("config: controller.type must be 'fopi' or 'fofpi'");
    sc.fopi_d = {ctrl.get("kp_d", 2.0), ctrl.get("ki_d", 40.0), ctrl.get("alpha_d", 0.9)};
    sc.fopi_q = {ctrl.get("kp_q", 2.0), ctrl.get("ki_q", 40.0), ctrl.get("alpha_q", 0.9)};
    sc.u_max = ctrl.get("u_max", 0.0);
    sc.tau_d_factor = ctrl.get("tau_d_factor", 10.0);
    ctrl.finish();

    const double i_rated = std::abs(sc.id_ref) > 1e-9 ? std::abs(sc.id_ref) : 10.0;
    Section fis(j, "fis");
    {
        It2Fis f;
        const json c3 = json::array({-1.0, 0.0, 1.0});
        const json sl3 = json::array({0.36, 0.36, 0.36});
        const json su3 = json::array({0.6, 0.6, 0.6});
        f.input_mfs[0] = build_mfs(get_vector(fis.raw("centers_e", c3), "fis.centers_e"),
                                   get_vector(fis.raw("sigma_lower_e", sl3), "fis.sigma_lower_e"),
                                   get_vector(fis.raw("sigma_upper_e", su3), "fis.sigma_upper_e"),
                                   "e");
        f.input_mfs[1] = build_mfs(get_vector(fis.raw("centers_de", c3), "fis.centers_de"),
                                   get_vector(fis.raw("sigma_lower_de", sl3), "fis.sigma_lower_de"),
                                   get_vector(fis.raw("sigma_upper_de", su3), "fis.sigma_upper_de"),
                                   "de");
        const std::size_t m = f.rule_count();
        f.theta_kp = get_vector(fis.raw("theta_kp", json(std::vector<double>(m, sc.fopi_d.kp))),
                                "fis.theta_kp");
        f.theta_ki = get_vector(fis.raw("theta_ki", json(std::vector<double>(m, sc.fopi_d.ki))),
                                "fis.theta_ki");
        f.blend_m = fis.get("blend_m", 0.5);
        f.input_scales[0] = fis.get("e_scale", 1.0 / i_rated);
        f.input_scales[1] = fis.get("de_scale", sc.dt_ctrl / (0.1 * i_rated));
        f.validate();
        sc.fis_d = f;
        sc.fis_q = f;
    }
    fis.finish();

    Section woa(j, "woa");
    c.woa.params.pop_size = woa.get("pop_size", 30);
    c.woa.params.max_iter = woa.get("max_iter", 100);
    c.woa.params.spiral_b = woa.get("spiral_b", 1.0);
    c.woa.params.seed = woa.get<std::uint64_t>("seed", 1);
    c.woa.params.threads = woa.get("threads", 0);
    const std::string target = woa.get<std::string>("target", type);
    if (target == "fopi") c.woa.target = ControllerKind::fopi;
    else if (target == "fofpi") c.woa.target = ControllerKind::fofpi;
    else throw config_error("config: woa.target must be 'fopi' or 'fofpi'");
    c.woa.tune_vdc_levels =
        get_vector(woa.raw("tune_vdc_levels", json::array()), "woa.tune_vdc_levels");
    c.woa.warm_start_fopi =
        get_vector(woa.raw("warm_start_fopi", json::array()), "woa.warm_start_fopi");
    if (!c.woa.warm_start_fopi.empty() && c.woa.warm_start_fopi.size() != kFopiDim)
        throw config_error("config: woa.warm_start_fopi must have 6 entries");
    for (const auto& g : woa.raw("init_guesses", json::array()))
        c.woa.params.init_guesses.push_back(get_vector(g, "woa.init_guesses entry"));
    woa.finish();
    c.woa.params.bounds = default_bounds(c.woa.target);

    Section out(j, "output");
    c.output.directory = out.get<std::string>("directory", "out");
    c.output.plots = out.get("plots", false);
    c.output.log_decimation = out.get("log_decimation", 1);
    out.finish();
    if (c.output.log_decimation < 1)
        throw config_error("config: output.log_decimation must be >= 1");

    c.scenario.validate();
    return c;
}

json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open config file: " + path);
    try {
        return json::parse(f, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw config_error("config parse error in " + path + ": " + e.what());
    }
}

Config load_config_file(const std::string& path) { return load_config(read_json_file(path)); }

void apply_override(json& j, const std::string& key_eq_value) {
    const auto eq = key_eq_value.find('=');
    if (eq == std::string::npos)
        throw config_error("--set expects key.path=value, got: " + key_eq_value);
    const std::string path = key_eq_value.substr(0, eq);
    const std::string value = key_eq_value.substr(eq + 1);

    json* node = &j;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string part = path.substr(start, dot - start);
        if (part.empty()) throw config_error("--set: empty path component in " + path);
        if (dot == std::string::npos) {
            json parsed = json::parse(value, nullptr, false);
            (*node)[part] = parsed.is_discarded() ? json(value) : parsed;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

std::uint64_t config_fingerprint(const Config& c) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : c.fingerprint_source) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

TuningSpec make_tuning_spec(const Config& c) {
    TuningSpec spec;
    spec.target = c.woa.target;
    spec.i_nominal = std::abs(c.scenario.id_ref) > 1e-9 ? std::abs(c.scenario.id_ref) : 10.0;
    if (c.woa.tune_vdc_levels.empty()) {
        spec.scenarios.push_back(c.scenario);
    } else {
        const double vdc0 = vdc_at(c.scenario.vdc_profile, 0.0);
        for (double v : c.woa.tune_vdc_levels) {
            Scenario sc = c.scenario;
            sc.vdc_profile = {{0.0, v}};
            sc.plant.vdc = v;
            sc.plant.grid_amplitude = c.scenario.plant.grid_amplitude * (v / vdc0);
            spec.scenarios.push_back(sc);
        }
    }
    return spec;
}

} // namespace mmck
