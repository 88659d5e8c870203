// Command-line front end: build and inspect dictionaries, fit and check
// correlation-decay constants, audit separations, build/verify certificates,
// run the l1 solvers, and drive the experiment harness.
//
// Exit codes: 0 success, 2 a checked assertion failed (invalid certificate,
// unmet separation, failed condition check, demo outside tolerance),
// 3 solver did not converge.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "snl/certificate.hpp"
#include "snl/correlation.hpp"
#include "snl/dictionary_io.hpp"
#include "snl/experiments.hpp"
#include "snl/heat.hpp"
#include "snl/kernels.hpp"
#include "snl/separation.hpp"
#include "snl/solver.hpp"

using nlohmann::json;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw snl::io_error("cannot open config: " + path);
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw snl::parse_error("bad JSON in " + path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw snl::io_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw snl::io_error("write failed: " + path);
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

snl::HeatModelConfig heat_from_json(const json& j) {
    snl::HeatModelConfig h;
    h.fd_size = j.value("fd_size", h.fd_size);
    h.final_time = j.value("final_time", h.final_time);
    h.time_steps = j.value("time_steps", h.time_steps);
    h.n_sensors = j.value("n_sensors", h.n_sensors);
    h.m_grid = j.value("m_grid", h.m_grid);
    h.c_min = j.value("c_min", h.c_min);
    h.c_max = j.value("c_max", h.c_max);
    h.bump_width = j.value("bump_width", h.bump_width);
    h.bump_center = j.value("bump_center", h.bump_center);
    return h;
}

snl::SolverConfig solver_from_json(const json& j) {
    snl::SolverConfig s;
    s.feas_tol = j.value("feas_tol", s.feas_tol);
    s.gap_tol = j.value("gap_tol", s.gap_tol);
    s.max_iterations = j.value("max_iterations", s.max_iterations);
    s.check_every = j.value("check_every", s.check_every);
    s.polish_support_cap = j.value("polish_support_cap", s.polish_support_cap);
    return s;
}

// model config: {"model": "gaussian"|"ricker"|"fourier"|"heat", ...}
snl::Dictionary dictionary_from_config(const json& cfg) {
    const std::string model = cfg.value("model", "gaussian");
    if (model == "heat")
        return snl::heat_dictionary(heat_from_json(cfg.value("heat", cfg)));
    if (model == "fourier") {
        const int m = cfg.value("m_grid", 101);
        const int nt = cfg.value("n_times", 64);
        const auto grid =
            snl::ParameterGrid::uniform(cfg.value("grid_lo", 0.0),
                                        cfg.value("grid_hi", 0.99), m);
        return snl::fourier_dictionary(grid, Eigen::VectorXd::LinSpaced(nt, 0, nt - 1),
                                       cfg.value("window", true));
    }
    const double width = cfg.value("width", 1.0);
    const auto grid = snl::ParameterGrid::uniform(cfg.value("grid_lo", -5.0),
                                                  cfg.value("grid_hi", 5.0),
                                                  cfg.value("m_grid", 201));
    const auto samples =
        snl::default_samples(grid, width, cfg.value("sample_spacing", 0.1));
    if (model == "gaussian")
        return snl::gaussian_dictionary(snl::KernelSpec::gaussian(width, samples), grid);
    if (model == "ricker")
        return snl::ricker_dictionary(snl::KernelSpec::ricker(width, samples), grid);
    throw snl::bad_config("unknown model '" + model + "'");
}

Eigen::VectorXd load_vector(const std::string& path) {
    const Eigen::MatrixXd m = snl::read_csv_matrix(path);
    if (m.cols() == 1) return m.col(0);
    if (m.rows() == 1) return m.row(0).transpose();
    throw snl::parse_error("expected a single row or column of numbers in " + path);
}

json constants_to_json(const snl::DecayConstants& c) {
    json j;
    j["near_width"] = c.near_width;
    j["decay_offset"] = c.decay_offset;
    j["decay_scale"] = c.decay_scale;
    j["gamma"] = c.gamma;
    j["C"] = {{c.C(0, 0), c.C(0, 1), c.C(0, 2)}, {c.C(1, 0), c.C(1, 1), c.C(1, 2)}};
    j["algebraic_enforced"] = c.algebraic_enforced;
    return j;
}

snl::DecayConstants constants_from_json(const json& j) {
    snl::DecayConstants c;
    c.near_width = j.at("near_width").get<std::vector<double>>();
    c.decay_offset = j.at("decay_offset").get<std::vector<double>>();
    c.decay_scale = j.at("decay_scale").get<std::vector<double>>();
    const auto g = j.at("gamma").get<std::vector<double>>();
    if (g.size() != 4) throw snl::parse_error("gamma must have 4 entries");
    for (int i = 0; i < 4; ++i) c.gamma[i] = g[i];
    const auto C = j.at("C").get<std::vector<std::vector<double>>>();
    if (C.size() != 2 || C[0].size() != 3 || C[1].size() != 3)
        throw snl::parse_error("C must be 2x3");
    for (int q = 0; q < 2; ++q)
        for (int r = 0; r < 3; ++r) c.C(q, r) = C[q][r];
    c.algebraic_enforced = j.value("algebraic_enforced", false);
    return c;
}

json check_to_json(const snl::ConditionCheck& c) {
    return {{"pass", c.pass}, {"margin", c.margin}};
}

std::vector<snl::CorrelationProfile> profiles_at(const snl::Dictionary& dict,
                                                 const std::vector<int>& centers) {
    if (centers.empty()) throw snl::bad_config("need at least one center");
    std::vector<snl::CorrelationProfile> profs;
    for (int c : centers) profs.push_back(snl::correlation_profile(dict, c));
    return profs;
}

void write_solution(const std::string& prefix, const snl::Dictionary& dict,
                    const snl::L1Solution& sol) {
    std::vector<std::vector<double>> rows;
    for (int j = 0; j < dict.m(); ++j)
        rows.push_back({dict.grid.point1(j), sol.x[j]});
    snl::write_csv_table(prefix + ".csv", {"theta", "x"}, rows);
    json rep;
    rep["objective"] = sol.objective;
    rep["residual"] = sol.residual;
    rep["gap"] = sol.gap;
    rep["iterations"] = sol.iterations;
    rep["converged"] = sol.converged;
    rep["certified"] = sol.certified;
    write_json(prefix + ".json", rep);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse recovery toolkit for separable nonlinear models"};
    app.require_subcommand(1);
    int rc = 0;

    // ---- dict -----------------------------------------------------------
    auto* dict_cmd = app.add_subcommand("dict", "build or inspect dictionaries");
    dict_cmd->require_subcommand(1);
    {
        auto* build = dict_cmd->add_subcommand("build", "build a model dictionary");
        auto cfg_path = std::make_shared<std::string>();
        auto out_path = std::make_shared<std::string>();
        build->add_option("--config", *cfg_path, "model config JSON")->required();
        build->add_option("--out", *out_path, "output CSV path")->required();
        build->callback([cfg_path, out_path] {
            const auto dict = dictionary_from_config(load_json(*cfg_path));
            snl::save_dictionary(dict, *out_path);
            std::cout << "wrote " << dict.n() << "x" << dict.m() << " dictionary ("
                      << dict.provenance << ") to " << *out_path << "\n";
        });

        auto* load = dict_cmd->add_subcommand("load", "load and summarize a dictionary");
        auto in_path = std::make_shared<std::string>();
        auto summary_path = std::make_shared<std::string>();
        load->add_option("--in", *in_path, "dictionary CSV path")->required();
        load->add_option("--summary", *summary_path, "optional JSON summary path");
        load->callback([in_path, summary_path] {
            const auto dict = snl::load_dictionary(*in_path);
            json j;
            j["n"] = dict.n();
            j["m"] = dict.m();
            j["dim"] = dict.p();
            j["provenance"] = dict.provenance;
            std::cout << j.dump(2) << "\n";
            if (!summary_path->empty()) write_json(*summary_path, j);
        });
    }

    // ---- corr -----------------------------------------------------------
    auto* corr_cmd = app.add_subcommand("corr", "correlation-decay constants");
    corr_cmd->require_subcommand(1);
    {
        auto* fit = corr_cmd->add_subcommand("fit", "fit decay constants at centers");
        auto dict_path = std::make_shared<std::string>();
        auto centers = std::make_shared<std::vector<int>>();
        auto near = std::make_shared<std::vector<double>>();
        auto offset = std::make_shared<std::vector<double>>();
        auto scale = std::make_shared<std::vector<double>>();
        auto out_path = std::make_shared<std::string>();
        fit->add_option("--dict", *dict_path, "dictionary CSV")->required();
        fit->add_option("--centers", *centers, "grid indices")->required()->delimiter(',');
        fit->add_option("--near", *near, "near-region half widths")->delimiter(',');
        fit->add_option("--offset", *offset, "decay offsets")->delimiter(',');
        fit->add_option("--scale", *scale, "decay scales (fitted when omitted)")
            ->delimiter(',');
        fit->add_option("--out", *out_path, "output constants JSON")->required();
        fit->callback([=] {
            const auto dict = snl::load_dictionary(*dict_path);
            const auto profs = profiles_at(dict, *centers);
            const auto constants =
                near->empty() ? snl::fit_decay_constants(profs)
                              : snl::fit_decay_constants(profs, *near, *offset, *scale);
            write_json(*out_path, constants_to_json(constants));
            std::cout << constants_to_json(constants).dump(2) << "\n";
        });

        auto* check = corr_cmd->add_subcommand("check", "check conditions at centers");
        auto cdict = std::make_shared<std::string>();
        auto ccenters = std::make_shared<std::vector<int>>();
        auto cconst = std::make_shared<std::string>();
        auto cout_path = std::make_shared<std::string>();
        check->add_option("--dict", *cdict, "dictionary CSV")->required();
        check->add_option("--centers", *ccenters, "grid indices")->required()->delimiter(',');
        check->add_option("--constants", *cconst, "constants JSON")->required();
        check->add_option("--out", *cout_path, "output report JSON");
        check->callback([=, &rc] {
            const auto dict = snl::load_dictionary(*cdict);
            const auto constants = constants_from_json(load_json(*cconst));
            json out = json::array();
            bool all = true;
            for (size_t i = 0; i < ccenters->size(); ++i) {
                const auto prof = snl::correlation_profile(dict, (*ccenters)[i]);
                const size_t slot = constants.near_width.size() == 1 ? 0 : i;
                const auto rep = snl::check_conditions(prof, constants, slot);
                json jr;
                jr["center"] = (*ccenters)[i];
                jr["near_curvature"] = check_to_json(rep.near_curvature);
                jr["near_cross"] = check_to_json(rep.near_cross);
                jr["bounded_value"] = check_to_json(rep.bounded_value);
                jr["bounded_slope"] = check_to_json(rep.bounded_slope);
                for (int q = 0; q < 2; ++q)
                    for (int r = 0; r < 3; ++r)
                        jr["decay"][q][r] = check_to_json(rep.decay[q][r]);
                jr["all_pass"] = rep.all_pass();
                all = all && rep.all_pass();
                out.push_back(jr);
            }
            std::cout << out.dump(2) << "\n";
            if (!cout_path->empty()) write_json(*cout_path, out);
            if (!all) rc = 2;
        });
    }

    // ---- sep ------------------------------------------------------------
    auto* sep_cmd = app.add_subcommand("sep", "separation audits");
    sep_cmd->require_subcommand(1);
    {
        auto* audit = sep_cmd->add_subcommand("audit", "audit a support separation");
        auto thetas = std::make_shared<std::vector<double>>();
        auto const_path = std::make_shared<std::string>();
        auto sigma_hat = std::make_shared<std::vector<double>>();
        auto out_path = std::make_shared<std::string>();
        audit->add_option("--thetas", *thetas, "support points")->required()->delimiter(',');
        audit->add_option("--constants", *const_path, "constants JSON")->required();
        audit->add_option("--sigma-hat", *sigma_hat, "per-source envelope scales")
            ->delimiter(',');
        audit->add_option("--out", *out_path, "output report JSON");
        audit->callback([=, &rc] {
            const auto constants = constants_from_json(load_json(*const_path));
            Eigen::VectorXd th(thetas->size()), sh(sigma_hat->size());
            for (size_t i = 0; i < thetas->size(); ++i) th[i] = (*thetas)[i];
            for (size_t i = 0; i < sigma_hat->size(); ++i) sh[i] = (*sigma_hat)[i];
            const auto rep = snl::separation_report(th, constants, sh);
            json j;
            j["delta_sep"] = rep.delta_sep;
            if (sh.size() > 0) j["delta_corr"] = rep.delta_corr;
            j["delta_achieved"] = rep.delta_achieved;
            j["delta_required"] = rep.delta_required;
            j["satisfied"] = rep.satisfied;
            std::cout << j.dump(2) << "\n";
            if (!out_path->empty()) write_json(*out_path, j);
            if (!rep.satisfied) rc = 2;
        });
    }

    // ---- cert -----------------------------------------------------------
    auto* cert_cmd = app.add_subcommand("cert", "dual certificates");
    cert_cmd->require_subcommand(1);
    {
        auto dict_path = std::make_shared<std::string>();
        auto support = std::make_shared<std::vector<int>>();
        auto signs = std::make_shared<std::vector<double>>();
        auto out_prefix = std::make_shared<std::string>();
        auto* build = cert_cmd->add_subcommand("build", "solve the interpolation system");
        build->add_option("--dict", *dict_path, "dictionary CSV")->required();
        build->add_option("--support", *support, "grid indices")->required()->delimiter(',');
        build->add_option("--signs", *signs, "sign pattern")->required()->delimiter(',');
        build->add_option("--out", *out_prefix, "output path prefix")->required();
        build->callback([=] {
            const auto dict = snl::load_dictionary(*dict_path);
            Eigen::VectorXd sg(signs->size());
            for (size_t i = 0; i < signs->size(); ++i) sg[i] = (*signs)[i];
            const auto cert = snl::build_certificate(dict, *support, sg);
            std::vector<std::vector<double>> rows;
            for (int j = 0; j < dict.m(); ++j)
                rows.push_back({dict.grid.point1(j), cert.Q[j], cert.Q1[j], cert.Q2[j]});
            snl::write_csv_table(*out_prefix + "_curves.csv", {"eta", "Q", "Q1", "Q2"},
                                 rows);
            json j;
            j["support"] = cert.support;
            j["alpha"] = std::vector<double>(cert.alpha.data(),
                                             cert.alpha.data() + cert.alpha.size());
            j["beta"] = std::vector<double>(cert.beta.data(),
                                            cert.beta.data() + cert.beta.size());
            j["value_residual"] = cert.value_residual;
            j["slope_residual"] = cert.slope_residual;
            j["condition"] = cert.condition;
            write_json(*out_prefix + ".json", j);
            std::cout << "wrote " << *out_prefix << ".json and " << *out_prefix
                      << "_curves.csv\n";
        });

        auto vdict = std::make_shared<std::string>();
        auto vsupport = std::make_shared<std::vector<int>>();
        auto vsigns = std::make_shared<std::vector<double>>();
        auto vnear = std::make_shared<std::vector<double>>();
        auto vmargin = std::make_shared<double>(1e-6);
        auto vout = std::make_shared<std::string>();
        auto* verify = cert_cmd->add_subcommand("verify", "build and verify a certificate");
        verify->add_option("--dict", *vdict, "dictionary CSV")->required();
        verify->add_option("--support", *vsupport, "grid indices")->required()->delimiter(',');
        verify->add_option("--signs", *vsigns, "sign pattern")->required()->delimiter(',');
        verify->add_option("--near", *vnear, "near-region radii")->required()->delimiter(',');
        verify->add_option("--margin", *vmargin, "strict-bound margin");
        verify->add_option("--out", *vout, "output report JSON");
        verify->callback([=, &rc] {
            const auto dict = snl::load_dictionary(*vdict);
            Eigen::VectorXd sg(vsigns->size());
            for (size_t i = 0; i < vsigns->size(); ++i) sg[i] = (*vsigns)[i];
            const auto cert = snl::build_certificate(dict, *vsupport, sg);
            const auto rep = snl::verify_certificate(dict, cert, *vnear, *vmargin);
            json j;
            j["valid"] = rep.valid;
            j["interpolation_ok"] = rep.interpolation_ok;
            j["bounded_ok"] = rep.bounded_ok;
            j["concave_ok"] = rep.concave_ok;
            j["max_abs_off_near"] = rep.max_abs_off_near;
            j["worst_location"] = rep.worst_location;
            j["max_aligned_curvature"] = rep.max_aligned_curvature;
            j["refined"] = rep.refined;
            j["refined_max_abs"] = rep.refined_max_abs;
            std::cout << j.dump(2) << "\n";
            if (!vout->empty()) write_json(*vout, j);
            if (!rep.valid) rc = 2;
        });
    }

    // ---- solve ----------------------------------------------------------
    auto* solve_cmd = app.add_subcommand("solve", "l1 recovery programs");
    solve_cmd->require_subcommand(1);
    {
        auto dict_path = std::make_shared<std::string>();
        auto data_path = std::make_shared<std::string>();
        auto cfg_path = std::make_shared<std::string>();
        auto out_prefix = std::make_shared<std::string>();
        auto* bp = solve_cmd->add_subcommand("bp", "equality-constrained basis pursuit");
        bp->add_option("--dict", *dict_path, "dictionary CSV")->required();
        bp->add_option("--data", *data_path, "measurement CSV (one row or column)")
            ->required();
        bp->add_option("--config", *cfg_path, "solver config JSON");
        bp->add_option("--out", *out_prefix, "output path prefix")->required();
        bp->callback([=, &rc] {
            const auto dict = snl::load_dictionary(*dict_path);
            const auto y = load_vector(*data_path);
            const auto cfg =
                cfg_path->empty() ? snl::SolverConfig{} : solver_from_json(load_json(*cfg_path));
            const auto sol = snl::solve_bp_equality(dict, y, cfg);
            write_solution(*out_prefix, dict, sol);
            std::cout << "objective " << sol.objective << ", residual " << sol.residual
                      << ", " << (sol.converged ? "converged" : "NOT CONVERGED") << "\n";
            if (!sol.converged) rc = 3;
        });

        auto ddict = std::make_shared<std::string>();
        auto ddata = std::make_shared<std::string>();
        auto dcfg = std::make_shared<std::string>();
        auto dxi = std::make_shared<double>(0.0);
        auto dout = std::make_shared<std::string>();
        auto* bpdn = solve_cmd->add_subcommand("bpdn", "noise-relaxed basis pursuit");
        bpdn->add_option("--dict", *ddict, "dictionary CSV")->required();
        bpdn->add_option("--data", *ddata, "measurement CSV")->required();
        bpdn->add_option("--xi", *dxi, "residual-norm bound")->required();
        bpdn->add_option("--config", *dcfg, "solver config JSON");
        bpdn->add_option("--out", *dout, "output path prefix")->required();
        bpdn->callback([=, &rc] {
            const auto dict = snl::load_dictionary(*ddict);
            const auto y = load_vector(*ddata);
            const auto cfg =
                dcfg->empty() ? snl::SolverConfig{} : solver_from_json(load_json(*dcfg));
            const auto sol = snl::solve_bp_denoise(dict, y, *dxi, cfg);
            write_solution(*dout, dict, sol);
            std::cout << "objective " << sol.objective << ", residual " << sol.residual
                      << ", " << (sol.converged ? "converged" : "NOT CONVERGED") << "\n";
            if (!sol.converged) rc = 3;
        });
    }

    // ---- exp ------------------------------------------------------------
    auto* exp_cmd = app.add_subcommand("exp", "experiment harness");
    exp_cmd->require_subcommand(1);
    {
        auto hcfg = std::make_shared<std::string>();
        auto hout = std::make_shared<std::string>();
        auto hpatterns = std::make_shared<int>(128);
        auto* heat = exp_cmd->add_subcommand("heat", "heat phase-transition sweep");
        heat->add_option("--config", *hcfg, "sweep config JSON");
        heat->add_option("--out", *hout, "output CSV path")->required();
        heat->add_option("--patterns", *hpatterns, "cap on enumerated sign patterns");
        heat->callback([=] {
            snl::PhaseTransitionConfig config;
            config.max_patterns = *hpatterns;
            if (!hcfg->empty()) {
                const json j = load_json(*hcfg);
                if (j.contains("heat")) config.heat = heat_from_json(j["heat"]);
                if (j.contains("solver")) config.solver = solver_from_json(j["solver"]);
                config.n_sources = j.value("n_sources", config.n_sources);
                if (j.contains("dilations"))
                    config.dilations = j["dilations"].get<std::vector<double>>();
                else if (j.contains("n_dilations"))
                    config.dilations = snl::detail::log_spaced(
                        j["n_dilations"].get<int>(), j.value("dilation_lo", 0.01),
                        j.value("dilation_hi", 1.0));
                if (j.contains("layouts")) {
                    config.layouts.clear();
                    for (const auto& name : j["layouts"]) {
                        if (name == "uniform")
                            config.layouts.push_back(snl::SupportLayout::uniform);
                        else if (name == "clustered")
                            config.layouts.push_back(snl::SupportLayout::clustered);
                        else
                            throw snl::bad_config("unknown layout in config");
                    }
                }
                const std::string policy = j.value("signs", "fixed");
                if (policy == "all")
                    config.signs = snl::SignPolicy::all_patterns;
                else if (policy != "fixed")
                    throw snl::bad_config("signs must be 'fixed' or 'all'");
                config.max_patterns = j.value("max_patterns", config.max_patterns);
                config.success_relative =
                    j.value("success_relative", config.success_relative);
                config.failure_absolute =
                    j.value("failure_absolute", config.failure_absolute);
            }
            const auto diagram = snl::run_heat_phase_transition(config);
            write_text(*hout, diagram.to_csv());
            json summary;
            for (const auto* layout : {"uniform", "clustered"}) {
                const auto th = diagram.first_success(layout);
                if (!th.found) continue;
                summary[layout] = {{"dilation", th.dilation},
                                   {"delta_sep", th.delta_sep},
                                   {"delta_corr", th.delta_corr}};
            }
            write_json(*hout + ".json", summary);
            std::cout << diagram.to_csv();
        });

        auto ncfg = std::make_shared<std::string>();
        auto nout = std::make_shared<std::string>();
        auto* noise = exp_cmd->add_subcommand("noise", "noisy deconvolution demo");
        noise->add_option("--config", *ncfg, "demo config JSON");
        noise->add_option("--out", *nout, "output path prefix")->required();
        noise->callback([=, &rc] {
            snl::NoiseDemoConfig config;
            if (!ncfg->empty()) {
                const json j = load_json(*ncfg);
                config.grid_lo = j.value("grid_lo", config.grid_lo);
                config.grid_hi = j.value("grid_hi", config.grid_hi);
                config.m_grid = j.value("m_grid", config.m_grid);
                config.kernel_width = j.value("width", config.kernel_width);
                config.sample_spacing = j.value("sample_spacing", config.sample_spacing);
                if (j.contains("spike_positions"))
                    config.spike_positions =
                        j["spike_positions"].get<std::vector<double>>();
                if (j.contains("spike_coefficients"))
                    config.spike_coefficients =
                        j["spike_coefficients"].get<std::vector<double>>();
                config.snr_db = j.value("snr_db", config.snr_db);
                config.n_seeds = j.value("n_seeds", config.n_seeds);
                config.seed = j.value("seed", config.seed);
                if (j.contains("solver")) config.solver = solver_from_json(j["solver"]);
            }
            const auto rep = snl::run_noise_demo(config);
            write_text(*nout + "_trials.csv", rep.to_csv());
            write_text(*nout + "_estimate.csv", rep.estimate_csv());
            json j;
            j["all_trials_within"] = rep.all_trials_within;
            j["n_trials"] = rep.trials.size();
            write_json(*nout + ".json", j);
            std::cout << rep.to_csv();
            if (!rep.all_trials_within) rc = 2;
        });

        auto ccfg = std::make_shared<std::string>();
        auto cout_prefix = std::make_shared<std::string>();
        auto* cdemo = exp_cmd->add_subcommand("cert-demo", "certificate demo artifacts");
        cdemo->add_option("--config", *ccfg, "demo config JSON");
        cdemo->add_option("--out", *cout_prefix, "output path prefix")->required();
        cdemo->callback([=, &rc] {
            snl::CertificateDemoConfig config;
            if (!ccfg->empty()) {
                const json j = load_json(*ccfg);
                config.model = j.value("model", config.model);
                if (j.contains("heat")) config.heat = heat_from_json(j["heat"]);
                config.grid_lo = j.value("grid_lo", config.grid_lo);
                config.grid_hi = j.value("grid_hi", config.grid_hi);
                config.m_grid = j.value("m_grid", config.m_grid);
                config.kernel_width = j.value("width", config.kernel_width);
                config.sample_spacing = j.value("sample_spacing", config.sample_spacing);
                if (j.contains("support"))
                    config.support = j["support"].get<std::vector<int>>();
                if (j.contains("signs"))
                    config.signs = j["signs"].get<std::vector<double>>();
                if (j.contains("near_widths"))
                    config.near_widths = j["near_widths"].get<std::vector<double>>();
            }
            const auto res = snl::run_certificate_demo(config);
            write_text(*cout_prefix + "_curves.csv", res.curves_csv());
            write_text(*cout_prefix + "_report.txt", res.report_text());
            std::cout << res.report_text();
            if (!res.report.valid) rc = 2;
        });

        auto aout = std::make_shared<std::string>();
        auto* audit = exp_cmd->add_subcommand("theorem-audit",
                                              "reproduce the reference separation bound");
        audit->add_option("--out", *aout, "output report JSON");
        audit->callback([=, &rc] {
            const auto rep = snl::audit_theorem_constants();
            std::cout << rep.to_text();
            if (!aout->empty()) {
                json j;
                j["log_term"] = rep.required.log_term;
                j["lambda1"] = rep.required.lambda1;
                j["lambda2"] = rep.required.lambda2;
                j["required_delta"] = rep.required.delta_req;
                j["absolute_separation"] = rep.required.absolute;
                j["reference"] = rep.reference;
                j["deviation"] = rep.deviation;
                j["within_tolerance"] = rep.within_tolerance;
                j["product_residual1"] = rep.product_residual1;
                j["product_residual2"] = rep.product_residual2;
                write_json(*aout, j);
            }
            if (!rep.within_tolerance) rc = 2;
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const snl::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
