#ifndef SNL_CORE_HPP
#define SNL_CORE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <utility>

#include "errors.hpp"
#include "grid.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace snl {

// coefficient vector on the grid with the measure's c_i at matching indices
inline Eigen::VectorXd embed_on_grid(const AtomicMeasure& measure, const ParameterGrid& grid,
                                     double tol = 1e-12) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(grid.size());
    const auto idx = measure.grid_indices(grid, tol);
    for (int i = 0; i < measure.k(); ++i) x[idx[i]] += measure.coefficients()[i];
    return x;
}

inline MeasurementVector synthesize_measurements(const Dictionary& dict,
                                                 const AtomicMeasure& measure,
                                                 double noise_norm = 0.0,
                                                 std::uint64_t seed = 20240901) {
    if (noise_norm < 0) throw bad_config("noise_norm must be nonnegative");
    const Eigen::VectorXd x = embed_on_grid(measure, dict.grid);
    MeasurementVector out;
    out.y = dict.columns * x;
    out.noise_level = noise_norm;
    out.seed = seed;
    if (noise_norm > 0) {
        Rng rng(seed);
        Eigen::VectorXd z = rng.normal_vector(dict.n());
        const double nz = z.norm();
        if (nz == 0.0) throw non_finite_value("degenerate noise draw");
        out.y += (noise_norm / nz) * z;
    }
    return out;
}

namespace detail {

// derivatives of theta -> u(theta)/||u(theta)|| from raw derivatives, column-wise
struct NormalizedColumn {
    Eigen::VectorXd g;    // u/N
    Eigen::VectorXd g1;   // first derivative along one coordinate
};

inline void quotient_rule_first(const Eigen::VectorXd& u, const Eigen::VectorXd& u1, double N,
                                Eigen::Ref<Eigen::VectorXd> out) {
    const double a = u.dot(u1);
    out = u1 / N - u * (a / (N * N * N));
}

inline void quotient_rule_second(const Eigen::VectorXd& u, const Eigen::VectorXd& ua,
                                 const Eigen::VectorXd& ub, const Eigen::VectorXd& uab, double N,
                                 Eigen::Ref<Eigen::VectorXd> out) {
    const double N3 = N * N * N;
    const double da = u.dot(ua);
    const double db = u.dot(ub);
    const double ab = ua.dot(ub) + u.dot(uab);
    out = uab / N - (ua * db + ub * da + u * ab) / N3 + u * (3.0 * da * db / (N3 * N * N));
}

}  // namespace detail

// Scale columns to unit norm and push the scaling through the derivative
// matrices so they stay derivatives of the normalized map. raw_deriv2 may be
// empty; in 2D it is {d11, d22, d12}.
inline Dictionary normalize_columns(const Eigen::MatrixXd& raw,
                                    const std::vector<Eigen::MatrixXd>& raw_deriv1,
                                    const std::vector<Eigen::MatrixXd>& raw_deriv2,
                                    ParameterGrid grid, Eigen::MatrixXd sample_locations,
                                    std::string provenance = "") {
    const int n = static_cast<int>(raw.rows());
    const int m = static_cast<int>(raw.cols());
    if (grid.size() != m) throw dimension_mismatch("grid size does not match column count");
    for (const auto& d : raw_deriv1)
        if (d.rows() != n || d.cols() != m) throw dimension_mismatch("deriv1 shape mismatch");
    for (const auto& d : raw_deriv2)
        if (d.rows() != n || d.cols() != m) throw dimension_mismatch("deriv2 shape mismatch");

    Dictionary dict;
    dict.grid = std::move(grid);
    dict.sample_locations = std::move(sample_locations);
    dict.provenance = std::move(provenance);
    dict.columns.resize(n, m);
    dict.deriv1.assign(raw_deriv1.size(), Eigen::MatrixXd(n, m));
    dict.deriv2.assign(raw_deriv2.size(), Eigen::MatrixXd(n, m));

    const int p = static_cast<int>(raw_deriv1.size());
    for (int j = 0; j < m; ++j) {
        const Eigen::VectorXd u = raw.col(j);
        const double N = u.norm();
        if (!std::isfinite(N)) throw non_finite_value("raw column is not finite");
        if (N < 1e-14) throw degenerate_column("raw column norm underflows");
        dict.columns.col(j) = u / N;
        for (int l = 0; l < p; ++l) {
            Eigen::VectorXd out(n);
            detail::quotient_rule_first(u, raw_deriv1[l].col(j), N, out);
            dict.deriv1[l].col(j) = out;
        }
        if (!raw_deriv2.empty()) {
            Eigen::VectorXd out(n);
            if (p == 1) {
                detail::quotient_rule_second(u, raw_deriv1[0].col(j), raw_deriv1[0].col(j),
                                             raw_deriv2[0].col(j), N, out);
                dict.deriv2[0].col(j) = out;
            } else {
                detail::quotient_rule_second(u, raw_deriv1[0].col(j), raw_deriv1[0].col(j),
                                             raw_deriv2[0].col(j), N, out);
                dict.deriv2[0].col(j) = out;
                detail::quotient_rule_second(u, raw_deriv1[1].col(j), raw_deriv1[1].col(j),
                                             raw_deriv2[1].col(j), N, out);
                dict.deriv2[1].col(j) = out;
                detail::quotient_rule_second(u, raw_deriv1[0].col(j), raw_deriv1[1].col(j),
                                             raw_deriv2[2].col(j), N, out);
                dict.deriv2[2].col(j) = out;
            }
        }
    }
    return dict;
}

// Central finite differences of the (already normalized) column map across
// the parameter grid, one-sided at the boundary columns. Used for models with
// no analytic parameter derivative (PDE columns, loaded matrices). The true
// derivative of a unit-norm column map is orthogonal to the column, so the
// tangential component of the difference quotient (which can dominate when a
// column is barely resolved by the grid) is projected out; the second
// difference keeps its tangential part, which is genuinely nonzero.
inline void attach_fd_derivatives(Dictionary& dict) {
    if (dict.p() != 1) throw bad_config("finite-difference derivatives are 1D only");
    const int n = dict.n(), m = dict.m();
    if (m < 3) throw bad_config("need at least 3 columns for second differences");
    const double h = dict.grid.spacing(0);
    const Eigen::MatrixXd& c = dict.columns;
    Eigen::MatrixXd d1(n, m), d2(n, m);
    for (int j = 1; j + 1 < m; ++j) {
        d1.col(j) = (c.col(j + 1) - c.col(j - 1)) / (2.0 * h);
        d2.col(j) = (c.col(j + 1) - 2.0 * c.col(j) + c.col(j - 1)) / (h * h);
    }
    d1.col(0) = (c.col(1) - c.col(0)) / h;
    d1.col(m - 1) = (c.col(m - 1) - c.col(m - 2)) / h;
    d2.col(0) = (c.col(2) - 2.0 * c.col(1) + c.col(0)) / (h * h);
    d2.col(m - 1) = (c.col(m - 1) - 2.0 * c.col(m - 2) + c.col(m - 3)) / (h * h);
    for (int j = 0; j < m; ++j) d1.col(j) -= c.col(j).dot(d1.col(j)) * c.col(j);
    dict.deriv1 = {std::move(d1)};
    dict.deriv2 = {std::move(d2)};
}

inline double default_support_threshold(const Eigen::VectorXd& x) {
    return 1e-6 * x.cwiseAbs().maxCoeff();
}

inline AtomicMeasure extract_support(const Eigen::VectorXd& x, const ParameterGrid& grid,
                                     double threshold) {
    if (threshold < 0) throw bad_config("threshold must be nonnegative");
    if (x.size() != grid.size()) throw dimension_mismatch("vector length != grid size");
    std::vector<int> idx;
    for (int j = 0; j < x.size(); ++j)
        if (std::abs(x[j]) > threshold) idx.push_back(j);
    if (idx.empty()) throw empty_support("no entry exceeds the threshold");
    Eigen::MatrixXd support(idx.size(), grid.dim());
    Eigen::VectorXd coeff(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) {
        support.row(i) = grid.point(idx[i]).transpose();
        coeff[i] = x[idx[i]];
    }
    return AtomicMeasure(std::move(support), std::move(coeff));
}

struct RecoveryError {
    double relative_l2 = 0.0;
    double absolute_l2 = 0.0;
};

inline RecoveryError recovery_error(const AtomicMeasure& truth, const Eigen::VectorXd& estimate,
                                    const ParameterGrid& grid) {
    const Eigen::VectorXd x_true = embed_on_grid(truth, grid);
    if (estimate.size() != x_true.size())
        throw dimension_mismatch("estimate length != grid size");
    RecoveryError err;
    err.absolute_l2 = (x_true - estimate).norm();
    err.relative_l2 = err.absolute_l2 / x_true.norm();
    return err;
}

}  // namespace snl

#endif
