#ifndef SNL_CERTIFICATE_HPP
#define SNL_CERTIFICATE_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "correlation.hpp"
#include "errors.hpp"
#include "separation.hpp"
#include "types.hpp"

namespace snl {

// Dual certificate: a vector q in sample space whose correlation function
// Q(theta) = q . phi(theta) interpolates a sign pattern on the support with
// zero slope there. Built from value/slope coefficient pairs (alpha, beta).
struct Certificate {
    std::vector<int> support;  // grid indices, ascending
    Eigen::VectorXd thetas;    // support parameters (first coordinate for p=2)
    Eigen::MatrixXd points;    // k x p support locations
    Eigen::VectorXd signs;
    Eigen::VectorXd alpha;
    Eigen::MatrixXd beta;      // k x p slope coefficients
    Eigen::VectorXd dual;      // q, length n
    Eigen::VectorXd Q;         // over the grid
    Eigen::VectorXd Q1, Q2;    // first/second derivative samples (p=1 only)
    double value_residual = 0;
    double slope_residual = 0;
    double condition = 0;
    std::vector<CorrelationProfile> profiles;  // per support center (p=1 only)
};

struct InterpolationSystem {
    Eigen::MatrixXd matrix;  // (p+1)k x (p+1)k
    Eigen::VectorXd rhs;     // (signs, 0)
    int k = 0;

    // off-diagonal correlation block for (q, r); the idealized diagonal (one
    // on the value/slope self-terms, zero on the mixed terms) is restored by
    // the assembled matrix
    Eigen::MatrixXd block(int q, int r) const {
        Eigen::MatrixXd b = matrix.block(q * k, r * k, k, k);
        b.diagonal().setZero();
        return b;
    }
};

namespace detail {

inline void validate_signs(const Eigen::VectorXd& signs) {
    for (int i = 0; i < signs.size(); ++i)
        if (std::abs(signs[i]) != 1.0) throw bad_config("sign pattern entries must be +1 or -1");
}

inline std::vector<int> sorted_support(std::vector<int> support, Eigen::VectorXd& signs,
                                       int grid_size) {
    if (support.empty()) throw empty_support("certificate needs at least one support point");
    if (static_cast<int>(support.size()) != signs.size())
        throw dimension_mismatch("one sign per support point");
    std::vector<int> order(support.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return support[a] < support[b]; });
    std::vector<int> sorted;
    Eigen::VectorXd s(signs.size());
    for (size_t i = 0; i < order.size(); ++i) {
        sorted.push_back(support[order[i]]);
        s[static_cast<int>(i)] = signs[order[i]];
    }
    for (size_t i = 0; i + 1 < sorted.size(); ++i)
        if (sorted[i] == sorted[i + 1])
            throw duplicate_support_point("support points must be distinct");
    for (int idx : sorted)
        if (idx < 0 || idx >= grid_size) throw support_off_grid("support index outside the grid");
    signs = s;
    return sorted;
}

inline double condition_estimate(const Eigen::MatrixXd& M) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const double smin = svd.singularValues().tail(1)(0);
    const double smax = svd.singularValues()(0);
    return smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
}

}  // namespace detail

// Assemble the interpolation equations Q(theta_i) = xi_i, Q'(theta_i) = 0 in
// the (alpha, beta) unknowns. Entries are the measured normalized
// correlations, including the tiny self-terms of the mixed blocks that an
// analytic dictionary makes exactly zero; keeping them makes the solved
// certificate interpolate exactly even for finite-difference derivatives.
inline InterpolationSystem build_interpolation_system(
    const std::vector<CorrelationProfile>& profiles, const std::vector<int>& support,
    const Eigen::VectorXd& signs) {
    const int k = static_cast<int>(support.size());
    InterpolationSystem sys;
    sys.k = k;
    sys.matrix.resize(2 * k, 2 * k);
    sys.rhs = Eigen::VectorXd::Zero(2 * k);
    sys.rhs.head(k) = signs;
    for (int i = 0; i < k; ++i) {
        const int gi = support[i];
        for (int j = 0; j < k; ++j) {
            sys.matrix(i, j) = profiles[j].rho_hat(0, 0, gi);
            sys.matrix(i, k + j) = profiles[j].rho_hat(1, 0, gi);
            sys.matrix(k + i, j) = profiles[j].rho_hat(0, 1, gi);
            sys.matrix(k + i, k + j) = profiles[j].rho_hat(1, 1, gi);
        }
    }
    return sys;
}

inline Certificate build_certificate(const Dictionary& dict, std::vector<int> support,
                                     Eigen::VectorXd signs) {
    if (dict.p() != 1) throw bad_config("use build_certificate_2d for planar dictionaries");
    detail::validate_signs(signs);
    support = detail::sorted_support(std::move(support), signs, dict.m());
    const int k = static_cast<int>(support.size());

    Certificate cert;
    cert.support = support;
    cert.signs = signs;
    cert.thetas.resize(k);
    cert.points.resize(k, 1);
    for (int i = 0; i < k; ++i) {
        cert.thetas[i] = dict.grid.point1(support[i]);
        cert.points(i, 0) = cert.thetas[i];
        cert.profiles.push_back(correlation_profile(dict, support[i]));
    }

    InterpolationSystem sys = build_interpolation_system(cert.profiles, support, signs);
    cert.condition = detail::condition_estimate(sys.matrix);
    if (cert.condition > 1e12)
        throw system_singular("interpolation system is numerically singular");
    const Eigen::VectorXd sol = sys.matrix.partialPivLu().solve(sys.rhs);
    cert.alpha = sol.head(k);
    cert.beta = sol.tail(k);

    const int m = dict.m();
    cert.Q = Eigen::VectorXd::Zero(m);
    cert.Q1 = Eigen::VectorXd::Zero(m);
    cert.Q2 = Eigen::VectorXd::Zero(m);
    cert.dual = Eigen::VectorXd::Zero(dict.n());
    for (int j = 0; j < k; ++j) {
        const auto& prof = cert.profiles[j];
        const double b = cert.beta(j, 0);
        cert.Q += cert.alpha[j] * prof.rho00 + (b / prof.normalizer1) * prof.rho10;
        cert.Q1 += cert.alpha[j] * prof.rho01 + (b / prof.normalizer1) * prof.rho11;
        cert.Q2 += cert.alpha[j] * prof.rho02 + (b / prof.normalizer1) * prof.rho12;
        cert.dual += cert.alpha[j] * dict.columns.col(support[j]) +
                     (b / prof.normalizer1) * dict.d1(0).col(support[j]);
    }
    cert.value_residual = 0;
    cert.slope_residual = 0;
    for (int i = 0; i < k; ++i) {
        cert.value_residual =
            std::max(cert.value_residual, std::abs(cert.Q[support[i]] - signs[i]));
        cert.slope_residual = std::max(cert.slope_residual, std::abs(cert.Q1[support[i]]));
    }
    return cert;
}

inline Certificate build_certificate_2d(const Dictionary& dict, std::vector<int> support,
                                        Eigen::VectorXd signs) {
    if (dict.p() != 2) throw bad_config("build_certificate_2d needs a planar dictionary");
    detail::validate_signs(signs);
    support = detail::sorted_support(std::move(support), signs, dict.m());
    const int k = static_cast<int>(support.size());
    const Eigen::MatrixXd& da = dict.d1(0);
    const Eigen::MatrixXd& db = dict.d1(1);

    Certificate cert;
    cert.support = support;
    cert.signs = signs;
    cert.thetas.resize(k);
    cert.points.resize(k, 2);
    Eigen::VectorXd na(k), nb(k);
    for (int i = 0; i < k; ++i) {
        const Eigen::VectorXd pt = dict.grid.point(support[i]);
        cert.points.row(i) = pt.transpose();
        cert.thetas[i] = pt[0];
        na[i] = da.col(support[i]).squaredNorm();
        nb[i] = db.col(support[i]).squaredNorm();
        if (na[i] < 1e-12 || nb[i] < 1e-12)
            throw degenerate_sensitivity("a partial-derivative column is numerically zero");
        const double parallel = std::abs(da.col(support[i]).dot(db.col(support[i]))) /
                                std::sqrt(na[i] * nb[i]);
        if (parallel > 0.999)
            throw degenerate_directions("sensitivity directions are nearly parallel");
    }

    // unknowns: alpha (k), then slope coefficients per coordinate (k each)
    Eigen::MatrixXd M(3 * k, 3 * k);
    for (int i = 0; i < k; ++i) {
        const int si = support[i];
        for (int j = 0; j < k; ++j) {
            const int sj = support[j];
            const Eigen::VectorXd phj = dict.columns.col(sj);
            M(i, j) = dict.columns.col(si).dot(phj);
            M(i, k + j) = da.col(sj).dot(dict.columns.col(si)) / na[j];
            M(i, 2 * k + j) = db.col(sj).dot(dict.columns.col(si)) / nb[j];
            M(k + i, j) = phj.dot(da.col(si));
            M(k + i, k + j) = da.col(sj).dot(da.col(si)) / na[j];
            M(k + i, 2 * k + j) = db.col(sj).dot(da.col(si)) / nb[j];
            M(2 * k + i, j) = phj.dot(db.col(si));
            M(2 * k + i, k + j) = da.col(sj).dot(db.col(si)) / na[j];
            M(2 * k + i, 2 * k + j) = db.col(sj).dot(db.col(si)) / nb[j];
        }
    }
    cert.condition = detail::condition_estimate(M);
    if (cert.condition > 1e12)
        throw system_singular("interpolation system is numerically singular");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(3 * k);
    rhs.head(k) = signs;
    const Eigen::VectorXd sol = M.partialPivLu().solve(rhs);
    cert.alpha = sol.head(k);
    cert.beta.resize(k, 2);
    cert.beta.col(0) = sol.segment(k, k);
    cert.beta.col(1) = sol.tail(k);

    cert.dual = Eigen::VectorXd::Zero(dict.n());
    for (int j = 0; j < k; ++j)
        cert.dual += cert.alpha[j] * dict.columns.col(support[j]) +
                     (cert.beta(j, 0) / na[j]) * da.col(support[j]) +
                     (cert.beta(j, 1) / nb[j]) * db.col(support[j]);
    cert.Q = dict.columns.transpose() * cert.dual;

    cert.value_residual = 0;
    cert.slope_residual = 0;
    for (int i = 0; i < k; ++i) {
        cert.value_residual =
            std::max(cert.value_residual, std::abs(cert.Q[support[i]] - signs[i]));
        const double ga = da.col(support[i]).dot(cert.dual);
        const double gb = db.col(support[i]).dot(cert.dual);
        cert.slope_residual = std::max(cert.slope_residual, std::hypot(ga, gb));
    }
    return cert;
}

struct VerificationReport {
    bool interpolation_ok = false;
    double value_residual = 0;
    double slope_residual = 0;
    bool bounded_ok = false;          // |Q| < 1 - margin outside all near regions
    double max_abs_off_near = 0;
    double worst_location = std::numeric_limits<double>::quiet_NaN();
    bool concave_ok = false;          // sign-aligned curvature negative near support (p=1)
    double max_aligned_curvature = -std::numeric_limits<double>::infinity();
    bool refined = false;             // analytic refinement pass ran
    double refined_max_abs = 0;
    bool valid = false;
};

// Check the three certificate conditions on the grid: exact interpolation,
// |Q| bounded away from one outside the near regions, and strict sign-aligned
// concavity inside them (scalar parameters only). When the dictionary carries
// an analytic evaluator, the bounded check is repeated on a grid refined by
// `refine` between nodes.
inline VerificationReport verify_certificate(const Dictionary& dict, const Certificate& cert,
                                             std::vector<double> near_widths,
                                             double margin = 1e-6, int refine = 4) {
    const size_t k = cert.support.size();
    near_widths = detail::broadcast(std::move(near_widths), k, "near_widths");

    VerificationReport rep;
    rep.value_residual = cert.value_residual;
    rep.slope_residual = cert.slope_residual;
    rep.interpolation_ok = cert.value_residual <= 1e-8 && cert.slope_residual <= 1e-6;

    const int p = dict.p();
    auto near_center = [&](const Eigen::VectorXd& pt) {
        for (size_t i = 0; i < k; ++i) {
            if ((pt - cert.points.row(static_cast<int>(i)).transpose()).norm() <=
                near_widths[i])
                return static_cast<int>(i);
        }
        return -1;
    };

    rep.max_abs_off_near = 0;
    bool have_off_near = false;
    for (int j = 0; j < dict.m(); ++j) {
        const Eigen::VectorXd pt = dict.grid.point(j);
        if (near_center(pt) >= 0) continue;
        have_off_near = true;
        if (std::abs(cert.Q[j]) > rep.max_abs_off_near) {
            rep.max_abs_off_near = std::abs(cert.Q[j]);
            rep.worst_location = pt[0];
        }
    }
    rep.bounded_ok = !have_off_near || rep.max_abs_off_near < 1.0 - margin;

    if (p == 1) {
        rep.concave_ok = true;
        for (size_t i = 0; i < k; ++i) {
            for (int j : detail::near_indices(cert.profiles[i].etas, cert.thetas[i],
                                              near_widths[i])) {
                const double aligned = cert.signs[i] * cert.Q2[j];
                rep.max_aligned_curvature = std::max(rep.max_aligned_curvature, aligned);
                if (!(aligned < 0)) rep.concave_ok = false;
            }
        }
    } else {
        rep.concave_ok = true;  // curvature analysis not performed for planar grids
    }

    if (dict.evaluator && refine > 1 && p == 1) {
        rep.refined = true;
        rep.refined_max_abs = 0;
        const Eigen::VectorXd& ax = dict.grid.axis(0);
        Eigen::VectorXd pt(1);
        for (int j = 0; j + 1 < ax.size(); ++j) {
            for (int t = 1; t < refine; ++t) {
                const double theta = ax[j] + (ax[j + 1] - ax[j]) * t / refine;
                pt[0] = theta;
                if (near_center(pt) >= 0) continue;
                const double val = std::abs(cert.dual.dot(dict.evaluator(pt)));
                rep.refined_max_abs = std::max(rep.refined_max_abs, val);
            }
        }
        rep.bounded_ok = rep.bounded_ok && rep.refined_max_abs < 1.0 - margin;
    }

    rep.valid = rep.interpolation_ok && rep.bounded_ok && rep.concave_ok;
    return rep;
}

// Tail sums at one grid point: for each derivative order pair, the sum of
// absolute normalized correlations over all support centers except `exclude`.
inline Eigen::Matrix<double, 2, 3> empirical_epsilons(
    const std::vector<CorrelationProfile>& profiles, int exclude, int grid_index) {
    Eigen::Matrix<double, 2, 3> eps = Eigen::Matrix<double, 2, 3>::Zero();
    for (size_t j = 0; j < profiles.size(); ++j) {
        if (static_cast<int>(j) == exclude) continue;
        for (int q = 0; q < 2; ++q)
            for (int r = 0; r < 3; ++r)
                eps(q, r) += std::abs(profiles[j].rho_hat(q, r, grid_index));
    }
    return eps;
}

struct BoundAudit {
    bool value_bound_holds = true;       // |Q| under its triangle bound off near regions
    double worst_value_slack = std::numeric_limits<double>::infinity();
    double max_value_rhs = 0;            // largest bound value off near regions
    bool curvature_bound_holds = true;   // aligned curvature under its bound in near regions
    double worst_curvature_slack = std::numeric_limits<double>::infinity();
    double max_curvature_rhs = -std::numeric_limits<double>::infinity();
    int curvature_points_skipped = 0;    // near points where the curvature precondition failed
};

// Pointwise audit of the triangle-inequality envelopes implied by the solved
// coefficient norms: |Q| against the value bound outside near regions (taking
// the tightest center), and sign-aligned curvature against its bound inside
// each near region (only where the center's own curvature is nonpositive).
inline BoundAudit certificate_bound_audit(const Certificate& cert,
                                          const std::vector<double>& near_widths_in) {
    if (cert.profiles.empty()) throw bad_config("bound audit needs a scalar-parameter certificate");
    const size_t k = cert.support.size();
    const auto near_widths = detail::broadcast(near_widths_in, k, "near_widths");
    const double a_norm = cert.alpha.lpNorm<Eigen::Infinity>();
    const double b_norm = cert.beta.lpNorm<Eigen::Infinity>();
    const double dev = (cert.alpha - cert.signs).lpNorm<Eigen::Infinity>();
    const Eigen::VectorXd& etas = cert.profiles[0].etas;
    const double tol = 1e-9;

    BoundAudit audit;
    for (int j = 0; j < etas.size(); ++j) {
        int owner = -1;
        for (size_t i = 0; i < k; ++i)
            if (std::abs(etas[j] - cert.thetas[i]) <= near_widths[i]) owner = static_cast<int>(i);

        if (owner < 0) {
            double rhs = std::numeric_limits<double>::infinity();
            for (size_t i = 0; i < k; ++i) {
                const auto eps = empirical_epsilons(cert.profiles, static_cast<int>(i), j);
                const auto& prof = cert.profiles[i];
                rhs = std::min(rhs, a_norm * (std::abs(prof.rho00[j]) + eps(0, 0)) +
                                        b_norm * (std::abs(prof.rho_hat(1, 0, j)) + eps(1, 0)));
            }
            const double slack = rhs - std::abs(cert.Q[j]);
            audit.worst_value_slack = std::min(audit.worst_value_slack, slack);
            audit.max_value_rhs = std::max(audit.max_value_rhs, rhs);
            if (slack < -tol) audit.value_bound_holds = false;
        } else {
            const auto& prof = cert.profiles[owner];
            if (prof.rho_hat(0, 2, j) > 0) {
                ++audit.curvature_points_skipped;
                continue;
            }
            const auto eps = empirical_epsilons(cert.profiles, owner, j);
            const double rhs = (1.0 - dev) * prof.rho_hat(0, 2, j) +
                               b_norm * std::abs(prof.rho_hat(1, 2, j)) + a_norm * eps(0, 2) +
                               b_norm * eps(1, 2);
            const double slack = rhs - cert.signs[owner] * cert.Q2[j];
            audit.worst_curvature_slack = std::min(audit.worst_curvature_slack, slack);
            audit.max_curvature_rhs = std::max(audit.max_curvature_rhs, rhs);
            if (slack < -tol) audit.curvature_bound_holds = false;
        }
    }
    return audit;
}

// all 2^k sign assignments, +1 first
inline std::vector<Eigen::VectorXd> all_sign_patterns(int k) {
    if (k < 1 || k > 20) throw bad_config("sign-pattern enumeration supports 1..20 sources");
    std::vector<Eigen::VectorXd> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << k); ++mask) {
        Eigen::VectorXd s(k);
        for (int i = 0; i < k; ++i) s[i] = (mask >> i) & 1 ? -1.0 : 1.0;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace snl

#endif
