// Batch front end: simulate | tune | thd | bode | compare.
// Exit codes: 0 success, 1 configuration error, 2 simulation fault.

#include "mmck/config.hpp"
#include "mmck/errors.hpp"
#include "mmck/fracorder.hpp"
#include "mmck/signals.hpp"
#include "mmck/simkit.hpp"
#include "mmck/tuning.hpp"
#include "mmck/woa.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> overrides;
    bool plots = false;
    std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool config_required = true) {
    auto* copt = cmd->add_option("--config", o.config_path, "config file (JSON)");
    if (config_required) copt->required();
    cmd->add_option("--out-dir", o.out_dir, "output directory (overrides config)");
    cmd->add_option("--set", o.overrides, "override a config leaf, key.path=value")
        ->take_all();
    cmd->add_flag("--plots", o.plots, "emit SVG plots next to the CSV");
    cmd->add_option("--seed", o.seed, "override scenario and WOA seeds");
}

mmck::Config load(const CommonOpts& o) {
    json j = o.config_path.empty() ? json::object() : mmck::read_json_file(o.config_path);
    for (const auto& ov : o.overrides) mmck::apply_override(j, ov);
    if (o.seed >= 0) {
        j["scenario"]["seed"] = o.seed;
        j["woa"]["seed"] = o.seed;
    }
    mmck::Config c = mmck::load_config(j);
    if (!o.out_dir.empty()) c.output.directory = o.out_dir;
    if (o.plots) c.output.plots = true;
    return c;
}

std::string fp_hex(std::uint64_t fp) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fp));
    return buf;
}

void print_summary(std::ostream& os, const mmck::RunSummary& s, const mmck::RunLog& log) {
    os << "faulted: " << (s.faulted ? "yes" : "no") << "\n";
    if (log.fault)
        os << "fault_t: " << log.fault->t << "\nfault_what: " << log.fault->what << "\n";
    if (s.thd_ll) {
        os << "thd_ll_ratio: " << s.thd_ll->thd << "\n"
           << "thd_ll_percent: " << 100.0 * s.thd_ll->thd << "\n"
           << "fundamental_amplitude_v: " << s.thd_ll->fundamental_amplitude << "\n";
    } else {
        os << "thd_ll_ratio: degenerate\n";
    }
    os << "id_tracking_rms_a: " << s.id_tracking_rms << "\n"
       << "iq_tracking_rms_a: " << s.iq_tracking_rms << "\n"
       << "kp_d_range: [" << s.kp_d_min << ", " << s.kp_d_max << "]\n"
       << "ki_d_range: [" << s.ki_d_min << ", " << s.ki_d_max << "]\n"
       << "max_abs_i_phase_a: " << log.max_abs_i_phase << "\n"
       << "energy_residual_j: "
       << (log.energy_final - log.energy_initial) -
              (log.int_p_dc - log.int_p_loss - log.int_p_ac)
       << "\n";
}

int cmd_simulate(const CommonOpts& o) {
    const mmck::Config c = load(o);
    fs::create_directories(c.output.directory);
    const std::string fp = fp_hex(mmck::config_fingerprint(c));

    const mmck::RunLog log = mmck::run_scenario(c.scenario);
    const mmck::RunSummary sum = mmck::summarize(log, c.scenario);

    const fs::path base = fs::path(c.output.directory);
    mmck::write_csv(log, (base / ("run_" + fp + ".csv")).string(), c.output.log_decimation);
    {
        std::ofstream f(base / ("summary_" + fp + ".txt"));
        f << "fingerprint: " << fp << "\nlog_fingerprint: " << fp_hex(log.fingerprint) << "\n";
        print_summary(f, sum, log);
    }
    if (c.output.plots) {
        mmck::write_svg_plot(log, {"v_ll_ab", "v_ll_bc", "v_ll_ca"}, "line-line voltage",
                             (base / ("vll_" + fp + ".svg")).string());
        mmck::write_svg_plot(log, {"i_d", "i_q", "id_ref", "iq_ref"}, "dq currents",
                             (base / ("idq_" + fp + ".svg")).string());
        mmck::write_svg_plot(log, {"kp_d", "ki_d", "kp_q", "ki_q"}, "scheduled gains",
                             (base / ("gains_" + fp + ".svg")).string());
    }
    print_summary(std::cout, sum, log);
    return log.fault ? 2 : 0;
}

json best_params_fragment(const std::vector<double>& x, mmck::ControllerKind target) {
    json frag;
    if (target == mmck::ControllerKind::fopi) {
        frag["controller"] = {{"type", "fopi"},   {"kp_d", x[0]},    {"ki_d", x[1]},
                              {"alpha_d", x[2]},  {"kp_q", x[3]},    {"ki_q", x[4]},
                              {"alpha_q", x[5]}};
        return frag;
    }
    const double alpha = x[37];
    frag["controller"] = {{"type", "fofpi"}, {"alpha_d", alpha}, {"alpha_q", alpha}};
    auto triplets = [&](std::size_t base, int field) {
        json arr = json::array();
        for (int mf = 0; mf < 3; ++mf) arr.push_back(x[base + 3 * mf + field]);
        return arr;
    };
    frag["fis"] = {{"centers_e", triplets(0, 0)},       {"sigma_lower_e", triplets(0, 1)},
                   {"sigma_upper_e", triplets(0, 2)},   {"centers_de", triplets(9, 0)},
                   {"sigma_lower_de", triplets(9, 1)},  {"sigma_upper_de", triplets(9, 2)},
                   {"theta_kp", std::vector<double>(x.begin() + 18, x.begin() + 27)},
                   {"theta_ki", std::vector<double>(x.begin() + 27, x.begin() + 36)},
                   {"blend_m", x[36]}};
    // repair the serialized fragment the same way the decoder does
    for (const char* in : {"e", "de"}) {
        auto& sl = frag["fis"][std::string("sigma_lower_") + in];
        auto& su = frag["fis"][std::string("sigma_upper_") + in];
        for (int mf = 0; mf < 3; ++mf)
            if (sl[mf].get<double>() > su[mf].get<double>()) std::swap(sl[mf], su[mf]);
    }
    return frag;
}

int cmd_tune(const CommonOpts& o) {
    mmck::Config c = load(o);
    fs::create_directories(c.output.directory);
    const std::string fp = fp_hex(mmck::config_fingerprint(c));

    mmck::TuningSpec spec = mmck::make_tuning_spec(c);
    mmck::WoaParams wp = c.woa.params;
    if (spec.target == mmck::ControllerKind::fofpi && !c.woa.warm_start_fopi.empty())
        wp.init_guesses.push_back(mmck::fofpi_vector_from_fopi(c.woa.warm_start_fopi));

    const fs::path base = fs::path(c.output.directory);
    std::ofstream conv(base / ("convergence_" + fp + ".csv"));
    conv << "iter,best_fitness,mean_fitness,elapsed_s\n";
    char line[128];
    const auto result = mmck::optimize(
        [&](const std::vector<double>& x) { return mmck::evaluate_candidate(x, spec); }, wp,
        [&](const mmck::ConvergencePoint& cp) {
            std::snprintf(line, sizeof line, "%d,%.12g,%.12g,%.3f\n", cp.iter, cp.best_f,
                          cp.mean_f, cp.elapsed_s);
            conv << line;
            std::cerr << "iter " << cp.iter << " best " << cp.best_f << "\n";
        });

    const json frag = best_params_fragment(result.best_x, spec.target);
    std::ofstream best(base / ("best_params_" + fp + ".json"));
    best << frag.dump(2) << "\n";
    std::cout << "best_fitness: " << result.best_f << "\nbest_params: " << frag.dump() << "\n";
    return 0;
}

int cmd_thd(const std::string& csv_path, double f0, int column, int max_harmonic) {
    std::ifstream f(csv_path);
    if (!f) throw mmck::config_error("cannot open " + csv_path);
    std::string lineStr;
    std::vector<double> t, x;
    bool first = true;
    while (std::getline(f, lineStr)) {
        if (lineStr.empty()) continue;
        std::stringstream ss(lineStr);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            first = false;
            try {
                std::stod(cells.at(0));
            } catch (...) {
                continue; // header row
            }
        }
        if (static_cast<int>(cells.size()) <= column)
            throw mmck::config_error("thd: CSV row has too few columns");
        t.push_back(std::stod(cells[0]));
        x.push_back(std::stod(cells[static_cast<std::size_t>(column)]));
    }
    if (t.size() < 3) throw mmck::config_error("thd: need at least 3 samples");
    const double fs = 1.0 / ((t.back() - t.front()) / static_cast<double>(t.size() - 1));

    const mmck::ThdReport rep = mmck::thd(x, fs, f0, max_harmonic);
    json out = {{"f0_hz", rep.f0},
                {"sample_rate_hz", fs},
                {"fundamental_amplitude", rep.fundamental_amplitude},
                {"thd_ratio", rep.thd},
                {"thd_percent", 100.0 * rep.thd},
                {"harmonic_amplitudes", rep.harmonic_amplitudes}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_bode(double alpha, int n_filter, double wb, double wh, const std::string& out_path) {
    const mmck::FracOperator op = mmck::design_oustaloup(alpha, n_filter, wb, wh);
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw mmck::config_error("cannot open " + out_path);
        os = &file;
    }
    *os << "omega_rad_s,magnitude_db,phase_deg\n";
    const int points = 400;
    const double lw = std::log10(wb), hw = std::log10(wh);
    for (int i = 0; i <= points; ++i) {
        const double w = std::pow(10.0, lw + (hw - lw) * i / points);
        const auto g = mmck::frequency_response(op, w);
        *os << w << "," << 20.0 * std::log10(std::abs(g)) << ","
            << std::arg(g) * 180.0 / std::numbers::pi << "\n";
    }
    return 0;
}

int cmd_compare(const CommonOpts& oa, const CommonOpts& ob) {
    const mmck::Config a = load(oa);
    const mmck::Config b = load(ob);

    // a comparison is only meaningful on the identical scenario
    auto scenario_key = [](const mmck::Config& c) {
        json j = json::parse(c.fingerprint_source);
        return json{{"plant", j.value("plant", json::object())},
                    {"scenario", j.value("scenario", json::object())}}
            .dump();
    };
    if (scenario_key(a) != scenario_key(b))
        throw mmck::config_error("compare: scenario/plant blocks differ between configs");

    const mmck::RunLog la = mmck::run_scenario(a.scenario);
    const mmck::RunLog lb = mmck::run_scenario(b.scenario);
    const mmck::RunSummary sa = mmck::summarize(la, a.scenario);
    const mmck::RunSummary sb = mmck::summarize(lb, b.scenario);

    auto row = [](const char* name, const mmck::RunSummary& s) {
        std::printf("%-10s  thd=%-12s  thd%%=%-10s\n", name,
                    s.thd_ll ? std::to_string(s.thd_ll->thd).c_str() : "degenerate",
                    s.thd_ll ? std::to_string(100.0 * s.thd_ll->thd).c_str() : "-");
    };
    std::printf("%-10s  %-17s %-15s\n", "config", "thd(ratio)", "thd(percent)");
    row("A", sa);
    row("B", sb);
    if (sa.thd_ll && sb.thd_ll)
        std::printf("winner: %s\n", sa.thd_ll->thd <= sb.thd_ll->thd ? "A" : "B");
    else
        std::printf("winner: n/a (degenerate report)\n");
    return (la.fault || lb.fault) ? 2 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MMC closed-loop simulation and controller tuning toolkit"};
    app.require_subcommand(1);

    CommonOpts sim_opts, tune_opts, cmp_a, cmp_b;

    auto* sim = app.add_subcommand("simulate", "run a closed-loop scenario");
    add_common(sim, sim_opts);

    auto* tune = app.add_subcommand("tune", "WOA-tune the selected controller");
    add_common(tune, tune_opts);

    std::string thd_csv;
    double thd_f0 = 50.0;
    int thd_col = 1, thd_maxh = 50;
    auto* thd = app.add_subcommand("thd", "harmonic analysis of a (t,value) CSV");
    thd->add_option("csv", thd_csv, "input CSV path")->required();
    thd->add_option("--f0", thd_f0, "fundamental frequency [Hz]");
    thd->add_option("--column", thd_col, "value column index (0 = time)");
    thd->add_option("--max-harmonic", thd_maxh, "highest harmonic order");

    double b_alpha = 0.5, b_wb = 1e-3, b_wh = 1e3;
    int b_nf = 20;
    std::string b_out;
    auto* bode = app.add_subcommand("bode", "frequency response CSV of the s^alpha design");
    bode->add_option("--alpha", b_alpha, "fractional exponent");
    bode->add_option("--n-filter", b_nf, "half-order N_f");
    bode->add_option("--omega-b", b_wb, "low band edge [rad/s]");
    bode->add_option("--omega-h", b_wh, "high band edge [rad/s]");
    bode->add_option("--out", b_out, "write CSV here instead of stdout");

    auto* cmp = app.add_subcommand("compare", "run two configs on the same scenario");
    cmp->add_option("--config-a", cmp_a.config_path, "first config")->required();
    cmp->add_option("--config-b", cmp_b.config_path, "second config")->required();
    cmp->add_option("--out-dir", cmp_a.out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(sim_opts);
        if (tune->parsed()) return cmd_tune(tune_opts);
        if (thd->parsed()) return cmd_thd(thd_csv, thd_f0, thd_col, thd_maxh);
        if (bode->parsed()) return cmd_bode(b_alpha, b_nf, b_wb, b_wh, b_out);
        if (cmp->parsed()) {
            cmp_b.out_dir = cmp_a.out_dir;
            return cmd_compare(cmp_a, cmp_b);
        }
    } catch (const mmck::simulation_fault& e) {
        std::cerr << "simulation fault at t=" << e.t << ": " << e.what() << "\n";
        return 2;
    } catch (const mmck::config_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const mmck::analysis_error& e) {
        std::cerr << "analysis error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
