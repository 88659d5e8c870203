#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "snl/certificate.hpp"
#include "snl/heat.hpp"
#include "snl/kernels.hpp"
#include "testutil.hpp"

using namespace snl;

namespace {

Eigen::VectorXd signs_of(std::initializer_list<double> v) {
    Eigen::VectorXd out(v.size());
    int i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

Dictionary reference_gaussian() { return testutil::gaussian_dict(-6, 6, 601, 1.0, 0.1); }

}  // namespace

TEST_CASE("certificate: single source has trivial coefficients", "[certificate]") {
    const auto dict = reference_gaussian();
    const auto cert = build_certificate(dict, {300}, signs_of({1.0}));
    REQUIRE(cert.alpha[0] == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(std::abs(cert.beta(0, 0)) < 1e-10);
    REQUIRE(cert.value_residual < 1e-12);
    REQUIRE(cert.slope_residual < 1e-10);
    // the correlation function of the certificate is the pair correlation
    REQUIRE((cert.Q - cert.profiles[0].rho00).lpNorm<Eigen::Infinity>() < 1e-10);
    REQUIRE((cert.dual - dict.columns.col(300)).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("certificate: interpolation is exact for finite-difference models", "[certificate]") {
    HeatModelConfig config;
    config.fd_size = 401;
    config.time_steps = 64;
    config.n_sensors = 101;
    config.m_grid = 51;
    const auto dict = heat_dictionary(config);
    const auto cert = build_certificate(dict, {10, 25, 40}, signs_of({1.0, -1.0, 1.0}));
    // the system keeps the measured mixed-block self terms, so the solved
    // certificate interpolates to solver precision even though the
    // derivative columns are finite differences
    REQUIRE(cert.value_residual < 1e-10);
    REQUIRE(cert.slope_residual < 1e-8);
}

TEST_CASE("certificate: dual vector reproduces the correlation function", "[certificate]") {
    const auto dict = reference_gaussian();
    const auto cert = build_certificate(dict, {100, 300, 500}, signs_of({1.0, -1.0, 1.0}));
    REQUIRE((cert.Q - dict.columns.transpose() * cert.dual).lpNorm<Eigen::Infinity>() < 1e-10);
    REQUIRE((cert.Q1 - dict.d1(0).transpose() * cert.dual).lpNorm<Eigen::Infinity>() < 1e-9);
    REQUIRE((cert.Q2 - dict.d2(0).transpose() * cert.dual).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("certificate: coefficients obey the interpolation bounds", "[certificate]") {
    const auto dict = reference_gaussian();
    const std::vector<int> support = {100, 300, 500};  // four widths apart
    const auto cert = build_certificate(dict, support, signs_of({1.0, -1.0, 1.0}));
    std::vector<CorrelationProfile> profs;
    for (int c : support) profs.push_back(correlation_profile(dict, c));
    const auto constants = fit_decay_constants(profs, {1.0}, {0.0}, {1.0});

    // worst-case measured tail sums at the support
    Eigen::Matrix<double, 2, 3> sums = Eigen::Matrix<double, 2, 3>::Zero();
    for (size_t i = 0; i < profs.size(); ++i)
        sums = sums.cwiseMax(empirical_epsilons(profs, static_cast<int>(i), support[i]));
    const auto eb =
        empirical_interpolation_bounds(sums(0, 0), sums(0, 1), sums(1, 0), sums(1, 1));
    REQUIRE(eb.solvable);
    REQUIRE(cert.alpha.lpNorm<Eigen::Infinity>() <= eb.alpha_bound);
    REQUIRE(cert.beta.lpNorm<Eigen::Infinity>() <= eb.beta_bound);
    REQUIRE((cert.alpha - cert.signs).lpNorm<Eigen::Infinity>() <= eb.alpha_dev_bound);

    // and the closed-form counterparts dominate the measured ones
    const auto sb = schur_bounds(4.0, constants);
    REQUIRE(cert.alpha.lpNorm<Eigen::Infinity>() <= sb.alpha_bound);
    REQUIRE(cert.beta.lpNorm<Eigen::Infinity>() <= sb.beta_bound);
    for (int i = 0; i < 3; ++i) REQUIRE(cert.signs[i] * cert.alpha[i] >= sb.alpha_lb);
}

TEST_CASE("certificate: negating the sign pattern negates everything", "[certificate]") {
    const auto dict = reference_gaussian();
    const auto plus = build_certificate(dict, {150, 300, 480}, signs_of({1.0, -1.0, 1.0}));
    const auto minus = build_certificate(dict, {150, 300, 480}, signs_of({-1.0, 1.0, -1.0}));
    REQUIRE((plus.alpha + minus.alpha).lpNorm<Eigen::Infinity>() == 0.0);
    REQUIRE((plus.beta + minus.beta).lpNorm<Eigen::Infinity>() == 0.0);
    REQUIRE((plus.Q + minus.Q).lpNorm<Eigen::Infinity>() == 0.0);
    REQUIRE((plus.dual + minus.dual).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("certificate: support order does not matter", "[certificate]") {
    const auto dict = reference_gaussian();
    const auto sorted = build_certificate(dict, {150, 300, 480}, signs_of({1.0, -1.0, 1.0}));
    const auto shuffled = build_certificate(dict, {480, 150, 300}, signs_of({1.0, 1.0, -1.0}));
    REQUIRE(sorted.support == shuffled.support);
    REQUIRE((sorted.signs - shuffled.signs).lpNorm<Eigen::Infinity>() == 0.0);
    REQUIRE((sorted.Q - shuffled.Q).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("certificate: input validation", "[certificate]") {
    const auto dict = reference_gaussian();
    REQUIRE_THROWS_AS(build_certificate(dict, {}, Eigen::VectorXd()), empty_support);
    REQUIRE_THROWS_AS(build_certificate(dict, {10, 10}, signs_of({1.0, 1.0})),
                      duplicate_support_point);
    REQUIRE_THROWS_AS(build_certificate(dict, {-1}, signs_of({1.0})), support_off_grid);
    REQUIRE_THROWS_AS(build_certificate(dict, {601}, signs_of({1.0})), support_off_grid);
    REQUIRE_THROWS_AS(build_certificate(dict, {10}, signs_of({0.5})), bad_config);
    REQUIRE_THROWS_AS(build_certificate(dict, {10, 20}, signs_of({1.0})), dimension_mismatch);
}

TEST_CASE("certificate: duplicated columns make the system singular", "[certificate]") {
    Dictionary dict;
    dict.grid = ParameterGrid::uniform(0, 3, 4);
    dict.columns.resize(5, 4);
    dict.columns.col(0) = Eigen::VectorXd::Unit(5, 0);
    Eigen::VectorXd mix(5);
    mix << 0.6, 0.8, 0, 0, 0;
    dict.columns.col(1) = mix;
    dict.columns.col(2) = Eigen::VectorXd::Unit(5, 0);
    dict.columns.col(3) = Eigen::VectorXd::Unit(5, 1);
    dict.sample_locations = Eigen::VectorXd::LinSpaced(5, 0, 4);
    attach_fd_derivatives(dict);
    REQUIRE_THROWS_AS(build_certificate(dict, {0, 2}, signs_of({1.0, 1.0})), system_singular);
}

TEST_CASE("certificate: interpolation system structure", "[certificate]") {
    const auto dict = reference_gaussian();
    const std::vector<int> support = {100, 300, 500};
    const auto signs = signs_of({1.0, -1.0, 1.0});
    std::vector<CorrelationProfile> profs;
    for (int c : support) profs.push_back(correlation_profile(dict, c));
    const auto sys = build_interpolation_system(profs, support, signs);

    REQUIRE(sys.k == 3);
    REQUIRE(sys.matrix.rows() == 6);
    REQUIRE((sys.rhs.head(3) - signs).lpNorm<Eigen::Infinity>() == 0.0);
    REQUIRE(sys.rhs.tail(3).lpNorm<Eigen::Infinity>() == 0.0);
    // unit self-correlations on the value diagonal
    for (int i = 0; i < 3; ++i)
        REQUIRE(sys.matrix(i, i) == Catch::Approx(1.0).margin(1e-12));
    // analytic derivative columns are orthogonal to their own column, so the
    // measured mixed-block self terms are tiny
    for (int i = 0; i < 3; ++i) REQUIRE(std::abs(sys.matrix(i, 3 + i)) < 1e-10);
    // the accessor exposes the idealized zero-diagonal blocks
    for (int q = 0; q < 2; ++q)
        for (int r = 0; r < 2; ++r)
            REQUIRE(sys.block(q, r).diagonal().lpNorm<Eigen::Infinity>() == 0.0);
    REQUIRE(sys.block(0, 0)(0, 1) == Catch::Approx(profs[1].rho00[100]).margin(1e-15));
}

TEST_CASE("certificate: verification of a clean single source", "[certificate]") {
    const auto dict = reference_gaussian();
    const auto cert = build_certificate(dict, {300}, signs_of({1.0}));
    const auto rep = verify_certificate(dict, cert, {1.0});
    REQUIRE(rep.interpolation_ok);
    REQUIRE(rep.bounded_ok);
    REQUIRE(rep.concave_ok);
    REQUIRE(rep.valid);
    // comfortable margin: the off-near maximum is the pair correlation at the
    // near-region edge
    REQUIRE(rep.max_abs_off_near < 0.8);
    REQUIRE(rep.refined);  // analytic model, so the sub-grid sweep ran
    REQUIRE(rep.refined_max_abs < 0.8);
    REQUIRE(rep.max_aligned_curvature < 0.0);
}

TEST_CASE("certificate: verification flags clustered opposite signs", "[certificate]") {
    const auto dict = reference_gaussian();
    // two sources a fifth of a width apart with opposite signs
    const auto cert = build_certificate(dict, {300, 310}, signs_of({1.0, -1.0}));
    const auto rep = verify_certificate(dict, cert, {1.0});
    REQUIRE(rep.interpolation_ok);  // the solve itself is fine
    REQUIRE_FALSE(rep.valid);       // but the landscape cannot be certified
}

TEST_CASE("certificate: verification flags broken interpolation", "[certificate]") {
    const auto dict = reference_gaussian();
    auto cert = build_certificate(dict, {300}, signs_of({1.0}));
    cert.value_residual = 1e-3;
    REQUIRE_FALSE(verify_certificate(dict, cert, {1.0}).valid);
    cert.value_residual = 0.0;
    cert.slope_residual = 1e-3;
    REQUIRE_FALSE(verify_certificate(dict, cert, {1.0}).valid);
}

TEST_CASE("certificate: heat model certificate verifies on the grid", "[certificate]") {
    HeatModelConfig config;
    config.fd_size = 401;
    config.time_steps = 64;
    config.n_sensors = 101;
    config.m_grid = 51;
    const auto dict = heat_dictionary(config);
    const auto cert = build_certificate(dict, {10, 25, 40}, signs_of({1.0, 1.0, 1.0}));
    // near regions of one grid cell: the kernels decorrelate within a cell
    const auto rep = verify_certificate(dict, cert, {0.005});
    REQUIRE(rep.interpolation_ok);
    REQUIRE(rep.valid);
    REQUIRE_FALSE(rep.refined);  // no analytic evaluator for the FD model
}

TEST_CASE("certificate: empirical tail sums at a point", "[certificate]") {
    const auto dict = reference_gaussian();
    const std::vector<int> support = {100, 300, 500};
    std::vector<CorrelationProfile> profs;
    for (int c : support) profs.push_back(correlation_profile(dict, c));
    const auto eps = empirical_epsilons(profs, 1, 300);
    REQUIRE(eps(0, 0) ==
            Catch::Approx(std::abs(profs[0].rho00[300]) + std::abs(profs[2].rho00[300]))
                .margin(1e-15));
    REQUIRE(eps(1, 2) == Catch::Approx(std::abs(profs[0].rho_hat(1, 2, 300)) +
                                       std::abs(profs[2].rho_hat(1, 2, 300)))
                             .margin(1e-15));
}

TEST_CASE("certificate: triangle-inequality audit", "[certificate]") {
    const auto dict = reference_gaussian();

    SECTION("the audit holds pointwise for any solved certificate") {
        const auto cert = build_certificate(dict, {150, 300, 450}, signs_of({1.0, -1.0, 1.0}));
        const auto audit = certificate_bound_audit(cert, {1.0});
        REQUIRE(audit.value_bound_holds);
        REQUIRE(audit.curvature_bound_holds);
        REQUIRE(audit.worst_value_slack >= -1e-9);
        REQUIRE(audit.worst_curvature_slack >= -1e-9);
        // three widths is under what the envelope needs: it cannot certify
        // |Q| < 1 everywhere off the near regions at this separation
        REQUIRE(audit.max_value_rhs > 1.0);
    }
    SECTION("in the proven regime the envelope itself stays below one") {
        // two sources seven widths apart: separation above the threshold
        const auto cert = build_certificate(dict, {0, 350}, signs_of({1.0, -1.0}));
        const auto audit = certificate_bound_audit(cert, {1.0});
        REQUIRE(audit.value_bound_holds);
        REQUIRE(audit.curvature_bound_holds);
        REQUIRE(audit.max_value_rhs < 1.0);
        REQUIRE(audit.max_curvature_rhs < 0.0);
        REQUIRE(audit.curvature_points_skipped == 0);
    }
}

TEST_CASE("certificate: planar dictionary", "[certificate]") {
    const double width = 1.0;
    const auto grid = ParameterGrid::uniform2(-3, 3, 31, -3, 3, 31);
    Eigen::MatrixXd sensors(17 * 17, 2);
    {
        const Eigen::VectorXd ax = Eigen::VectorXd::LinSpaced(17, -4, 4);
        int r = 0;
        for (int b = 0; b < 17; ++b)
            for (int a = 0; a < 17; ++a) sensors.row(r++) << ax[a], ax[b];
    }
    const auto dict = gaussian_dictionary_2d(width, sensors, grid);
    const int m0 = 31;
    auto flat = [&](int i, int j) { return i + m0 * j; };

    SECTION("single source is trivial") {
        const auto cert = build_certificate_2d(dict, {flat(15, 15)}, signs_of({1.0}));
        REQUIRE(cert.alpha[0] == Catch::Approx(1.0).margin(1e-10));
        REQUIRE(cert.beta.cwiseAbs().maxCoeff() < 1e-8);
        REQUIRE(cert.value_residual < 1e-10);
        REQUIRE(cert.slope_residual < 1e-8);
    }
    SECTION("two distant sources stay bounded") {
        const auto cert =
            build_certificate_2d(dict, {flat(5, 5), flat(25, 25)}, signs_of({1.0, -1.0}));
        REQUIRE(cert.value_residual < 1e-8);
        REQUIRE(cert.slope_residual < 1e-6);
        const auto rep = verify_certificate(dict, cert, {1.0});
        REQUIRE(rep.valid);
        REQUIRE(rep.max_abs_off_near < 1.0 - 1e-6);
    }
    SECTION("three sources interpolate to solver precision") {
        const auto cert = build_certificate_2d(
            dict, {flat(5, 5), flat(15, 20), flat(25, 8)}, signs_of({1.0, -1.0, 1.0}));
        REQUIRE(cert.value_residual < 1e-8);
        REQUIRE(cert.slope_residual < 1e-6);
    }
    SECTION("collinear sensors degenerate the derivative directions") {
        Eigen::MatrixXd line(25, 2);
        const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(25, -3, 3);
        for (int i = 0; i < 25; ++i) line.row(i) << t[i], t[i];
        const auto small_grid = ParameterGrid::uniform2(-1, 1, 5, -1, 1, 5);
        const auto bad = gaussian_dictionary_2d(width, line, small_grid);
        REQUIRE_THROWS_AS(build_certificate_2d(bad, {2 + 5 * 2}, signs_of({1.0})),
                          degenerate_directions);
    }
}

TEST_CASE("certificate: sign pattern enumeration", "[certificate]") {
    const auto patterns = all_sign_patterns(3);
    REQUIRE(patterns.size() == 8);
    REQUIRE((patterns[0] - Eigen::VectorXd::Ones(3)).lpNorm<Eigen::Infinity>() == 0.0);
    for (const auto& p : patterns)
        for (int i = 0; i < 3; ++i) REQUIRE(std::abs(p[i]) == 1.0);
    // all patterns distinct
    for (size_t a = 0; a < patterns.size(); ++a)
        for (size_t b = a + 1; b < patterns.size(); ++b)
            REQUIRE((patterns[a] - patterns[b]).lpNorm<Eigen::Infinity>() > 0.0);
    REQUIRE_THROWS_AS(all_sign_patterns(0), bad_config);
    REQUIRE_THROWS_AS(all_sign_patterns(21), bad_config);
}
