#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "snl/experiments.hpp"
#include "testutil.hpp"

using namespace snl;

TEST_CASE("experiments: theorem-constant audit", "[experiments]") {
    const auto rep = audit_theorem_constants();
    // frozen values, hand-computed from the reference constants
    REQUIRE(rep.required.log_term == Catch::Approx(3.12483).margin(5e-4));
    REQUIRE(rep.required.lambda1 == Catch::Approx(5.84174).margin(5e-4));
    REQUIRE(rep.required.lambda2 == Catch::Approx(6.57576).margin(5e-4));
    REQUIRE(rep.required.lambda2 > rep.required.lambda1);
    REQUIRE(rep.required.lambda1 > rep.required.log_term);
    REQUIRE(rep.required.delta_req == rep.required.lambda2);
    REQUIRE(rep.required.absolute == Catch::Approx(rep.required.delta_req).margin(1e-12));
    REQUIRE(rep.deviation < 0.05);
    REQUIRE(rep.within_tolerance);
    REQUIRE(rep.product_residual1 < 1e-3);
    REQUIRE(rep.product_residual2 < 1e-3);
    REQUIRE(rep.to_text().find("PASS") != std::string::npos);

    // the reference amplitude table already satisfies both product identities,
    // so enforcement must not touch it
    const auto c = gaussian_reference_constants();
    REQUIRE((enforce_algebraic(c.C) - c.C).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("experiments: trial configuration validation", "[experiments]") {
    TrialConfig config;
    config.dilation = 1.5;
    REQUIRE_THROWS_AS(config.validate(), bad_config);
    config.dilation = 0.0;
    REQUIRE_THROWS_AS(config.validate(), bad_config);
    config.dilation = 0.5;
    config.success_relative = 0.0;
    REQUIRE_THROWS_AS(config.validate(), bad_config);
    config.success_relative = 3e-5;
    REQUIRE_NOTHROW(config.validate());
}

TEST_CASE("experiments: layout construction", "[experiments]") {
    SECTION("uniform positions span the dilated range") {
        const auto pts = detail::layout_positions(SupportLayout::uniform, 5, 0.5, 0.9);
        REQUIRE(pts.size() == 5);
        REQUIRE(pts.front() == Catch::Approx(-0.225).margin(1e-15));
        REQUIRE(pts.back() == Catch::Approx(0.225).margin(1e-15));
        REQUIRE(pts[2] == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("clustered layout keeps cluster centers and shrinks the spacing") {
        const auto full = detail::layout_positions(SupportLayout::clustered, 7, 1.0, 0.9);
        const auto tight = detail::layout_positions(SupportLayout::clustered, 7, 0.1, 0.9);
        REQUIRE(full.size() == 7);
        REQUIRE(full[1] == Catch::Approx(-0.4).margin(1e-15));
        REQUIRE(full[3] == Catch::Approx(0.0).margin(1e-15));
        REQUIRE(full[5] == Catch::Approx(0.4).margin(1e-15));
        REQUIRE(full[2] - full[1] == Catch::Approx(0.018).margin(1e-15));
        REQUIRE(tight[2] - tight[1] == Catch::Approx(0.0018).margin(1e-15));
        REQUIRE(tight[5] == Catch::Approx(0.4).margin(1e-15));
        REQUIRE_THROWS_AS(detail::layout_positions(SupportLayout::clustered, 5, 1.0, 0.9),
                          bad_config);
    }
    SECTION("snapping keeps sources on distinct cells") {
        const auto grid = ParameterGrid::uniform(0, 1, 11);
        const auto idx = detail::snap_to_distinct_cells(grid, {0.5, 0.5, 0.5});
        REQUIRE(idx == std::vector<int>{4, 5, 6});
        const auto tiny = ParameterGrid::uniform(0, 1, 2);
        REQUIRE_THROWS_AS(detail::snap_to_distinct_cells(tiny, {0.5, 0.5, 0.5}),
                          bad_config);
    }
    SECTION("log-spaced sweep endpoints") {
        const auto d = detail::log_spaced(3, 0.01, 1.0);
        REQUIRE(d.size() == 3);
        REQUIRE(d[0] == Catch::Approx(0.01).margin(1e-15));
        REQUIRE(d[1] == Catch::Approx(0.1).margin(1e-12));
        REQUIRE(d[2] == Catch::Approx(1.0).margin(1e-15));
        PhaseTransitionConfig defaults;
        REQUIRE(defaults.dilations.size() == 24);
        REQUIRE(defaults.dilations.front() == Catch::Approx(0.01).margin(1e-15));
        REQUIRE(defaults.dilations.back() == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("experiments: recovery trial on the Gaussian model", "[experiments]") {
    const auto dict = testutil::gaussian_dict(-5, 5, 201, 1.0, 0.1);
    TrialConfig config;
    config.model = "gaussian";
    config.layout = SupportLayout::uniform;
    config.dilation = 1.0;

    const auto row = run_recovery_trial(dict, config, 3);
    REQUIRE(row.layout == "uniform");
    // sources at -4.5, 0, 4.5 land exactly on grid cells
    REQUIRE(row.delta_sep == Catch::Approx(4.5).margin(1e-12));
    // unit-width Gaussian correlations have envelope scale sqrt(2)
    REQUIRE(row.delta_corr == Catch::Approx(4.5 / std::sqrt(2.0)).margin(5e-3));
    REQUIRE(row.status == "success");
    REQUIRE(row.success_any);
    REQUIRE(row.success_all);
    REQUIRE(row.relative_error < 3e-5);

    // determinism: the same trial reproduces the identical row
    const auto again = run_recovery_trial(dict, config, 3);
    REQUIRE(again.relative_error == row.relative_error);
    REQUIRE(again.delta_corr == row.delta_corr);
    REQUIRE(again.status == row.status);
}

TEST_CASE("experiments: heat phase-transition smoke sweep", "[experiments]") {
    PhaseTransitionConfig config;
    config.heat.fd_size = 200;
    config.heat.time_steps = 48;
    config.heat.n_sensors = 60;
    config.heat.m_grid = 101;
    config.n_sources = 3;
    config.layouts = {SupportLayout::uniform};
    config.dilations = {0.02, 1.0};
    config.signs = SignPolicy::all_patterns;

    const auto diagram = run_heat_phase_transition(config);
    REQUIRE(diagram.rows.size() == 2);
    for (const auto& row : diagram.rows) {
        if (row.success_all) REQUIRE(row.success_any);
        REQUIRE(row.layout == "uniform");
    }
    // fully dilated: sources ~45 cells apart, every sign pattern recovers
    const auto& wide = diagram.rows[1];
    REQUIRE(wide.dilation == 1.0);
    REQUIRE(wide.success_all);
    REQUIRE(wide.status == "success");
    // collapsed onto adjacent cells: at least one sign pattern must fail
    const auto& tight = diagram.rows[0];
    REQUIRE(tight.dilation == 0.02);
    REQUIRE_FALSE(tight.success_all);
    REQUIRE(tight.status != "success");
    REQUIRE(tight.delta_sep < wide.delta_sep);

    // the CSV round-trips the sweep deterministically
    const auto csv = diagram.to_csv();
    REQUIRE(csv.rfind("layout,dilation,delta_sep,delta_corr", 0) == 0);
    REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 3);
    REQUIRE(run_heat_phase_transition(config).to_csv() == csv);

    const auto th = diagram.first_success("uniform");
    REQUIRE(th.found);
    REQUIRE(th.dilation == 1.0);
    REQUIRE_FALSE(diagram.first_success("clustered").found);
}

TEST_CASE("experiments: mass clustering", "[experiments]") {
    const auto grid = ParameterGrid::uniform(0, 19, 20);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(20);
    x[3] = 0.5;
    x[4] = 1.0;
    x[10] = -0.8;

    const auto clusters = mass_clusters(x, grid, 0.01, 3);
    REQUIRE(clusters.size() == 2);
    REQUIRE(clusters[0].center == Catch::Approx((0.5 * 3 + 1.0 * 4) / 1.5).margin(1e-12));
    REQUIRE(clusters[0].sign == 1.0);
    REQUIRE(clusters[0].first_index == 3);
    REQUIRE(clusters[0].last_index == 4);
    REQUIRE(clusters[1].center == Catch::Approx(10.0).margin(1e-12));
    REQUIRE(clusters[1].sign == -1.0);

    // a wide-enough gap setting merges the bumps into one cluster
    REQUIRE(mass_clusters(x, grid, 0.01, 7).size() == 1);
    REQUIRE(mass_clusters(Eigen::VectorXd::Zero(20), grid, 0.01, 3).empty());
}

TEST_CASE("experiments: noise demo", "[experiments]") {
    NoiseDemoConfig config;
    config.n_seeds = 3;

    SECTION("noiseless run reduces to exact recovery") {
        config.snr_db = std::numeric_limits<double>::infinity();
        config.n_seeds = 1;
        const auto rep = run_noise_demo(config);
        REQUIRE(rep.trials.size() == 1);
        REQUIRE(rep.trials[0].noise_norm == 0.0);
        REQUIRE(rep.all_trials_within);
        for (double off : rep.trials[0].spike_offsets_cells) REQUIRE(off < 1e-6);
    }
    SECTION("calibrated noise keeps every spike localized") {
        const auto rep = run_noise_demo(config);
        REQUIRE(rep.trials.size() == 3);
        const double expected_norm =
            (ricker_dictionary(
                 KernelSpec::ricker(1.0, default_samples(
                                             ParameterGrid::uniform(-5, 5, 201), 1.0, 0.1)),
                 ParameterGrid::uniform(-5, 5, 201))
                 .columns *
             rep.truth)
                .norm() /
            std::pow(10.0, config.snr_db / 20.0);
        for (const auto& t : rep.trials) {
            REQUIRE(t.converged);
            REQUIRE(t.noise_norm == Catch::Approx(expected_norm).epsilon(1e-12));
            REQUIRE(t.spike_offsets_cells.size() == 4);
            REQUIRE(t.all_within);
        }
        REQUIRE(rep.all_trials_within);

        // summary and estimate CSVs are well-formed and deterministic
        const auto csv = rep.to_csv();
        REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 4);
        const auto est = rep.estimate_csv();
        REQUIRE(est.rfind("theta,truth,estimate", 0) == 0);
        REQUIRE(std::count(est.begin(), est.end(), '\n') == 202);
        REQUIRE(run_noise_demo(config).to_csv() == csv);
    }
    SECTION("validation") {
        config.spike_coefficients.pop_back();
        REQUIRE_THROWS_AS(run_noise_demo(config), bad_config);
    }
}

TEST_CASE("experiments: certificate demo", "[experiments]") {
    SECTION("Gaussian demo interpolates the sign pattern") {
        CertificateDemoConfig config;
        config.model = "gaussian";
        config.m_grid = 301;
        const auto res = run_certificate_demo(config);
        // default support {m/6, m/2, 5m/6} with alternating signs
        REQUIRE(res.certificate.alpha.size() == 3);
        REQUIRE(res.certificate.Q[150] == Catch::Approx(-1.0).margin(1e-8));
        REQUIRE(res.certificate.Q[50] == Catch::Approx(1.0).margin(1e-8));
        REQUIRE(res.report.interpolation_ok);

        const auto csv = res.curves_csv();
        REQUIRE(csv.rfind("eta,Q,value_0,value_1,value_2,slope_0", 0) == 0);
        REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 302);
        REQUIRE(res.report_text().find("interpolation: ok") != std::string::npos);
    }
    SECTION("heat demo produces a valid certificate") {
        CertificateDemoConfig config;
        config.model = "heat";
        config.heat.fd_size = 401;
        config.heat.time_steps = 64;
        config.heat.n_sensors = 101;
        config.heat.m_grid = 51;
        const auto res = run_certificate_demo(config);
        REQUIRE(res.report.valid);
        REQUIRE(res.report_text().find("VALID") != std::string::npos);
        const auto csv = res.curves_csv();
        REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 52);
    }
    SECTION("an unseparated support is reported invalid") {
        CertificateDemoConfig config;
        config.model = "gaussian";
        config.m_grid = 301;
        config.support = {148, 152};  // a sixth of a width apart
        config.signs = {1.0, -1.0};
        const auto res = run_certificate_demo(config);
        REQUIRE_FALSE(res.report.valid);
        REQUIRE(res.report_text().find("INVALID") != std::string::npos);
        REQUIRE(std::isfinite(res.report.worst_location));
    }
    SECTION("unknown model is rejected") {
        CertificateDemoConfig config;
        config.model = "wavelet";
        REQUIRE_THROWS_AS(run_certificate_demo(config), bad_config);
    }
}
