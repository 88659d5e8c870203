#ifndef SNL_SEPARATION_HPP
#define SNL_SEPARATION_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "correlation.hpp"
#include "errors.hpp"

namespace snl {

// raw minimum separation: smallest pairwise distance between sources
inline double delta_sep(Eigen::VectorXd thetas) {
    if (thetas.size() < 2) throw need_two_points("separation needs at least two sources");
    std::sort(thetas.data(), thetas.data() + thetas.size());
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < thetas.size(); ++i) best = std::min(best, thetas[i + 1] - thetas[i]);
    return best;
}

// correlation-aware separation: pairwise distance divided by the wider of the
// two Gaussian envelope scales
inline double delta_corr(const Eigen::VectorXd& thetas, const Eigen::VectorXd& sigma_hat) {
    if (thetas.size() < 2) throw need_two_points("separation needs at least two sources");
    if (sigma_hat.size() != thetas.size())
        throw dimension_mismatch("need one envelope scale per source");
    for (int i = 0; i < sigma_hat.size(); ++i)
        if (!(sigma_hat[i] > 0)) throw bad_config("envelope scales must be positive");
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < thetas.size(); ++i)
        for (int j = i + 1; j < thetas.size(); ++j)
            best = std::min(best, std::abs(thetas[i] - thetas[j]) /
                                      std::max(sigma_hat[i], sigma_hat[j]));
    return best;
}

struct SeparationReport {
    double delta_sep = std::numeric_limits<double>::quiet_NaN();
    double delta_corr = std::numeric_limits<double>::quiet_NaN();
    Eigen::MatrixXd distances;  // pairwise generalized distances, zero diagonal
    double delta_achieved = std::numeric_limits<double>::quiet_NaN();
    double delta_required = std::numeric_limits<double>::quiet_NaN();
    bool satisfied = false;
};

// Generalized pairwise distances (|theta_i-theta_j| - D_i - D_j)/max(s_i,s_j)
// for sorted sources; the achieved separation divides each distance by the
// index gap |i-j|, so non-adjacent pairs can bind.
inline SeparationReport generalized_separation(Eigen::VectorXd thetas,
                                               const DecayConstants& constants) {
    if (thetas.size() < 2) throw need_two_points("separation needs at least two sources");
    std::sort(thetas.data(), thetas.data() + thetas.size());
    const size_t k = static_cast<size_t>(thetas.size());
    const auto D = detail::broadcast(constants.decay_offset, k, "decay_offset");
    const auto S = detail::broadcast(constants.decay_scale, k, "decay_scale");

    SeparationReport rep;
    rep.delta_sep = delta_sep(thetas);
    rep.distances = Eigen::MatrixXd::Zero(k, k);
    rep.delta_achieved = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < k; ++i) {
        for (size_t j = i + 1; j < k; ++j) {
            const double d =
                (std::abs(thetas[i] - thetas[j]) - D[i] - D[j]) / std::max(S[i], S[j]);
            if (d <= 0)
                throw overlapping_decay_regions("decay regions of two sources overlap");
            rep.distances(i, j) = rep.distances(j, i) = d;
            rep.delta_achieved = std::min(rep.delta_achieved, d / double(j - i));
        }
    }
    return rep;
}

// Positive root in Delta of the quadratic tail-mass inequality
// (2a+c)x^2 + bx < c with x = exp(-Delta/2).
inline double quadineq_delta(double a, double b, double c) {
    if (!(a > 0) || !(b > 0) || !(c > 0)) throw bad_config("quadratic inequality needs a,b,c > 0");
    const double disc = b * b + 4.0 * (2.0 * a + c) * c;
    return 2.0 * std::log(2.0 * (2.0 * a + c) / (-b + std::sqrt(disc)));
}

struct RequiredDelta {
    double delta_req = 0;  // separation needed in generalized-distance units
    double lambda1 = 0;    // off-support magnitude branch
    double lambda2 = 0;    // near-region curvature branch
    double log_term = 0;   // interpolation invertibility branch
    double absolute = 0;   // 2*max(D) + delta_req*max(sigma), parameter units
};

inline RequiredDelta required_delta(const DecayConstants& constants) {
    const auto& C = constants.C;
    const auto& g = constants.gamma;
    const double tol = 1e-3;
    if (constants.product_residual1() > tol || constants.product_residual2() > tol)
        throw algebraic_violated("amplitude products are inconsistent; enforce them first");
    if (!(g[2] < 1.0)) throw gamma2_not_less_than_one("flatness level gamma2 must be < 1");

    RequiredDelta out;
    out.log_term = std::log(1.0 + 2.0 * (C(0, 0) + C(1, 1)));
    out.lambda1 = quadineq_delta(2.0 * C(0, 0) + C(1, 1) - C(1, 1) * g[2] + C(0, 1) * g[3],
                                 C(0, 0), 1.0 - g[2]);
    out.lambda2 = quadineq_delta((2.0 * C(0, 0) + C(1, 1)) * g[0] + C(0, 2) + C(0, 1) * g[1],
                                 C(0, 2), g[0]);
    out.delta_req = std::max({out.log_term, out.lambda1, out.lambda2});
    const double maxD =
        *std::max_element(constants.decay_offset.begin(), constants.decay_offset.end());
    const double maxS =
        *std::max_element(constants.decay_scale.begin(), constants.decay_scale.end());
    out.absolute = 2.0 * maxD + out.delta_req * maxS;
    return out;
}

struct SchurBounds {
    double s = 0;            // geometric tail mass 2e^{-Delta}/(1-e^{-Delta})
    double alpha_bound = 0;  // upper bound on the value-coefficient sup norm
    double beta_bound = 0;   // upper bound on the slope-coefficient sup norm
    double alpha_lb = 0;     // lower bound on min_i xi_i * alpha_i
    Eigen::Matrix<double, 2, 3> eps_bound;  // tail-sum bounds C(q,r)*s
};

inline SchurBounds schur_bounds(double delta, const DecayConstants& constants) {
    const auto& C = constants.C;
    if (!(delta > std::log(1.0 + 2.0 * (C(0, 0) + C(1, 1)))))
        throw separation_too_small("separation below the invertibility threshold");
    SchurBounds out;
    const double e = std::exp(-delta);
    out.s = 2.0 * e / (1.0 - e);
    const double den = 1.0 - (C(0, 0) + C(1, 1)) * out.s;
    out.alpha_bound = (1.0 - C(1, 1) * out.s) / den;
    out.beta_bound = C(0, 1) * out.s / den;
    out.alpha_lb = (1.0 - (2.0 * C(0, 0) + C(1, 1)) * out.s) / den;
    out.eps_bound = C * out.s;
    return out;
}

// Interpolation-solvability bounds from measured tail sums at the support
// (eps(q,r) = max_i of the excluded-center absolute correlation sums).
struct EmpiricalInterpolationBounds {
    bool solvable = false;
    double c = 0;
    double alpha_bound = 0;
    double beta_bound = 0;
    double alpha_dev_bound = 0;  // bound on ||alpha - xi||_inf
};

inline EmpiricalInterpolationBounds empirical_interpolation_bounds(double e00, double e01,
                                                                   double e10, double e11) {
    EmpiricalInterpolationBounds out;
    if (!(e11 < 1)) return out;
    out.c = e00 + e10 * e01 / (1.0 - e11);
    if (!(out.c < 1)) return out;
    out.solvable = true;
    out.alpha_bound = 1.0 / (1.0 - out.c);
    out.beta_bound = (e01 / (1.0 - e11)) / (1.0 - out.c);
    out.alpha_dev_bound = out.c / (1.0 - out.c);
    return out;
}

struct ClusterTailBound {
    double on_support = 0;   // bound at a support point
    double off_support = 0;  // bound anywhere past the decay offsets
};

inline ClusterTailBound cluster_tail_bound(double delta, double amplitude) {
    if (!(delta > 0) || !(amplitude > 0)) throw bad_config("need positive separation and amplitude");
    const double e = std::exp(-delta);
    const double s = 2.0 * e / (1.0 - e);
    const double x = std::exp(-delta / 2.0);
    return {amplitude * s, amplitude * (x + s)};
}

// Full audit: raw, correlation-aware, and generalized separations against the
// required threshold. sigma_hat may be empty to skip delta_corr.
inline SeparationReport separation_report(const Eigen::VectorXd& thetas,
                                          const DecayConstants& constants,
                                          const Eigen::VectorXd& sigma_hat = {}) {
    SeparationReport rep = generalized_separation(thetas, constants);
    if (sigma_hat.size() > 0) rep.delta_corr = delta_corr(thetas, sigma_hat);
    rep.delta_required = required_delta(constants).delta_req;
    rep.satisfied = rep.delta_achieved > rep.delta_required;
    return rep;
}

}  // namespace snl

#endif
