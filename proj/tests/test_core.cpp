#include <catch2/catch_amalgamated.hpp>

#include "snl/core.hpp"
#include "snl/kernels.hpp"
#include "testutil.hpp"

using namespace snl;

TEST_CASE("synthesize: single clean spike reproduces a column", "[core]") {
    const auto dict = testutil::gaussian_dict(-3, 3, 61);
    const auto measure = AtomicMeasure::from_1d({dict.grid.point1(17)}, Eigen::VectorXd::Ones(1));
    const auto mv = synthesize_measurements(dict, measure, 0.0);
    REQUIRE((mv.y - dict.columns.col(17)).lpNorm<Eigen::Infinity>() == 0.0);
    REQUIRE(mv.noise_level == 0.0);
}

TEST_CASE("synthesize: three ricker wavelets superpose", "[core]") {
    const auto dict = testutil::ricker_dict(0, 1, 101, 0.05, 0.005);
    Eigen::VectorXd c(3);
    c << 1.0, 2.0, 0.5;
    const auto measure = AtomicMeasure::from_1d({0.3, 0.5, 0.7}, c);
    const auto mv = synthesize_measurements(dict, measure, 0.0);
    const Eigen::VectorXd x = embed_on_grid(measure, dict.grid);
    REQUIRE((mv.y - dict.columns * x).lpNorm<Eigen::Infinity>() == 0.0);
    // the strongest wavelet dominates: peak response sits near 0.5
    int imax;
    mv.y.cwiseAbs().maxCoeff(&imax);
    const double peak_at = dict.sample_locations(imax, 0);
    REQUIRE(std::abs(peak_at - 0.5) < 0.05);
}

TEST_CASE("synthesize: noise norm is calibrated exactly", "[core]") {
    const auto dict = testutil::gaussian_dict(-3, 3, 61);
    const auto measure = AtomicMeasure::from_1d({0.0, 1.5}, Eigen::VectorXd::Ones(2));
    const auto clean = synthesize_measurements(dict, measure, 0.0);
    const auto noisy = synthesize_measurements(dict, measure, 0.1, 42);
    REQUIRE(std::abs((noisy.y - clean.y).norm() - 0.1) < 1e-12);
    // same seed, same draw
    const auto again = synthesize_measurements(dict, measure, 0.1, 42);
    REQUIRE((noisy.y - again.y).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("synthesize: off-grid support rejected", "[core]") {
    const auto dict = testutil::gaussian_dict(-3, 3, 61);
    const auto measure = AtomicMeasure::from_1d({0.051}, Eigen::VectorXd::Ones(1));
    REQUIRE_THROWS_AS(synthesize_measurements(dict, measure, 0.0), support_off_grid);
}

TEST_CASE("normalize: unit columns with tangent derivatives pass through", "[core]") {
    Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(4, 2);
    raw(0, 0) = 1.0;
    raw(1, 1) = 1.0;
    Eigen::MatrixXd d1 = Eigen::MatrixXd::Zero(4, 2);
    d1(2, 0) = 0.7;
    d1(3, 1) = -0.2;
    const auto grid = ParameterGrid::uniform(0, 1, 2);
    const auto dict = normalize_columns(raw, {d1}, {}, grid, Eigen::VectorXd::Zero(4), "unit");
    REQUIRE((dict.columns - raw).lpNorm<Eigen::Infinity>() == 0.0);
    REQUIRE((dict.d1() - d1).lpNorm<Eigen::Infinity>() < 1e-15);
}

TEST_CASE("normalize: scaling raw data by 7 changes nothing", "[core]") {
    const auto grid = ParameterGrid::uniform(-1, 1, 21);
    const auto spec = KernelSpec::gaussian(1.0, default_samples(grid, 1.0, 0.1));
    const auto base = gaussian_dictionary(spec, grid);

    // rebuild the raw model by hand, scale everything by 7
    const auto& s = spec.sample_locations;
    const int n = static_cast<int>(s.size());
    Eigen::MatrixXd raw(n, grid.size()), rd1(n, grid.size()), rd2(n, grid.size());
    for (int j = 0; j < grid.size(); ++j) {
        for (int i = 0; i < n; ++i) {
            const double t = grid.point1(j) - s[i];
            const double g = std::exp(-t * t / 2.0);
            raw(i, j) = 7.0 * g;
            rd1(i, j) = 7.0 * (-t * g);
            rd2(i, j) = 7.0 * ((t * t - 1.0) * g);
        }
    }
    const auto scaled = normalize_columns(raw, {rd1}, {rd2}, grid, s, "scaled");
    REQUIRE((scaled.columns - base.columns).lpNorm<Eigen::Infinity>() < 1e-13);
    REQUIRE((scaled.d1() - base.d1()).lpNorm<Eigen::Infinity>() < 1e-12);
    REQUIRE((scaled.d2() - base.d2()).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("normalize: degenerate column rejected", "[core]") {
    Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(3, 2);
    raw(0, 0) = 1.0;  // second column is all zeros
    const auto grid = ParameterGrid::uniform(0, 1, 2);
    REQUIRE_THROWS_AS(normalize_columns(raw, {}, {}, grid, Eigen::VectorXd::Zero(3)),
                      degenerate_column);
}

TEST_CASE("dictionary invariants: normalization and derivative tangency", "[core]") {
    const auto dict = testutil::gaussian_dict(-4, 4, 81);
    for (int j = 0; j < dict.m(); ++j) {
        REQUIRE(std::abs(dict.columns.col(j).norm() - 1.0) < 1e-10);
        REQUIRE(std::abs(dict.d1().col(j).dot(dict.columns.col(j))) < 5e-6);
    }
}

TEST_CASE("extract_support basics", "[core]") {
    const auto grid = ParameterGrid::uniform(0, 1, 11);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(11);
    x[4] = 1.0;
    const auto measure = extract_support(x, grid, 1e-6);
    REQUIRE(measure.k() == 1);
    REQUIRE(measure.point1(0) == Catch::Approx(0.4).margin(1e-15));
    REQUIRE(measure.coefficients()[0] == 1.0);

    REQUIRE_THROWS_AS(extract_support(Eigen::VectorXd::Zero(11), grid, 1e-6), empty_support);

    // threshold is strict: entries equal to it are dropped
    Eigen::VectorXd t = Eigen::VectorXd::Zero(11);
    t[2] = 0.5;
    t[7] = 1.0;
    REQUIRE(extract_support(t, grid, 0.5).k() == 1);
    REQUIRE(default_support_threshold(t) == Catch::Approx(1e-6).margin(1e-18));
}

TEST_CASE("recovery_error values", "[core]") {
    const auto grid = ParameterGrid::uniform(0, 1, 11);
    Eigen::VectorXd c = Eigen::VectorXd::Ones(7);
    const auto truth =
        AtomicMeasure::from_1d({0.0, 0.1, 0.2, 0.5, 0.7, 0.9, 1.0}, c);
    const Eigen::VectorXd x_true = embed_on_grid(truth, grid);

    auto err = recovery_error(truth, x_true, grid);
    REQUIRE(err.absolute_l2 == 0.0);
    REQUIRE(err.relative_l2 == 0.0);

    // reference norm of a 7-spike unit train
    REQUIRE(x_true.norm() == Catch::Approx(2.6457513110645906).margin(1e-12));

    Eigen::VectorXd x_pert = x_true;
    x_pert[5] += 1e-3;
    err = recovery_error(truth, x_pert, grid);
    REQUIRE(err.absolute_l2 == Catch::Approx(1e-3).margin(1e-15));
    REQUIRE(err.relative_l2 == Catch::Approx(1e-3 / 2.6457513110645906).margin(1e-15));
}

TEST_CASE("synthesize then extract round trip at zero threshold", "[core]") {
    const auto grid = ParameterGrid::uniform(-2, 2, 41);
    Eigen::VectorXd c(3);
    c << 0.5, -1.25, 2.0;
    const auto measure = AtomicMeasure::from_1d({-1.0, 0.3, 1.7}, c);
    const Eigen::VectorXd x = embed_on_grid(measure, grid);
    const auto back = extract_support(x, grid, 0.0);
    REQUIRE(back.k() == 3);
    REQUIRE((back.coefficients() - measure.coefficients()).lpNorm<Eigen::Infinity>() == 0.0);
    // support comes back at the snapped grid points, one ulp off the request
    REQUIRE(back.grid_indices(grid) == measure.grid_indices(grid, 1e-9));
}

TEST_CASE("atomic measure validation and ordering", "[core]") {
    Eigen::VectorXd c(2);
    c << 1.0, 2.0;
    const auto m = AtomicMeasure::from_1d({0.7, -0.2}, c);
    REQUIRE(m.point1(0) == -0.2);  // sorted ascending
    REQUIRE(m.coefficients()[0] == 2.0);

    REQUIRE_THROWS_AS(AtomicMeasure::from_1d({0.1, 0.1}, c), duplicate_support_point);
    Eigen::VectorXd bad(2);
    bad << 1.0, 0.0;
    REQUIRE_THROWS_AS(AtomicMeasure::from_1d({0.1, 0.2}, bad), bad_config);
}
