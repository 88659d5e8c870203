#ifndef SNL_CORRELATION_HPP
#define SNL_CORRELATION_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "types.hpp"

namespace snl {

// Correlations of one support-centered feature column against the whole
// dictionary: rho(q, r)[j] is the inner product of the q-th derivative column
// at the center with the r-th derivative column at grid point j. Normalized
// variants divide by the squared norm of the center's q-th derivative column
// (q = 0 columns are unit-norm already).
struct CorrelationProfile {
    int center = 0;
    double theta = 0.0;
    double normalizer1 = 0.0;  // squared norm of the center's first-derivative column
    Eigen::VectorXd etas;      // grid axis the profile is sampled on
    Eigen::VectorXd rho00, rho01, rho02, rho10, rho11, rho12;

    const Eigen::VectorXd& rho(int q, int r) const {
        if (q == 0) return r == 0 ? rho00 : (r == 1 ? rho01 : rho02);
        return r == 0 ? rho10 : (r == 1 ? rho11 : rho12);
    }
    double rho_hat(int q, int r, int j) const {
        return rho(q, r)[j] / (q == 1 ? normalizer1 : 1.0);
    }
    Eigen::VectorXd rho_hat(int q, int r) const {
        return rho(q, r) / (q == 1 ? normalizer1 : 1.0);
    }
};

inline CorrelationProfile correlation_profile(const Dictionary& dict, int center) {
    if (dict.p() != 1) throw bad_config("correlation profiles are defined for scalar parameters");
    if (center < 0 || center >= dict.m()) throw bad_config("profile center is off the grid");
    const Eigen::MatrixXd& d1 = dict.d1(0);
    const Eigen::MatrixXd& d2 = dict.d2(0);

    CorrelationProfile prof;
    prof.center = center;
    prof.theta = dict.grid.point1(center);
    prof.etas = dict.grid.axis(0);
    prof.normalizer1 = d1.col(center).squaredNorm();
    if (prof.normalizer1 < 1e-12)
        throw degenerate_sensitivity("first-derivative column is numerically zero at the center");

    const Eigen::VectorXd phi0 = dict.columns.col(center);
    const Eigen::VectorXd phi1 = d1.col(center);
    prof.rho00 = dict.columns.transpose() * phi0;
    prof.rho01 = d1.transpose() * phi0;
    prof.rho02 = d2.transpose() * phi0;
    prof.rho10 = dict.columns.transpose() * phi1;
    prof.rho11 = d1.transpose() * phi1;
    prof.rho12 = d2.transpose() * phi1;
    return prof;
}

// Envelope description of a profile set: per-center region geometry plus
// shared curvature/flatness levels (gamma) and tail amplitudes (C).
//   near region   |eta - theta| <= near_width:   rho_hat(0,2) <= -gamma[0],
//                                                |rho_hat(1,2)| <= gamma[1]
//   outside near  |eta - theta| >  near_width:   |rho| <= gamma[2] < 1,
//                                                |rho_hat(1,0)| <= gamma[3]
//   tail          |eta - theta| >  decay_offset: |rho_hat(q,r)| <=
//                      C(q,r) * exp(-(|eta - theta| - decay_offset)/decay_scale)
struct DecayConstants {
    std::vector<double> near_width;    // per center
    std::vector<double> decay_offset;  // per center
    std::vector<double> decay_scale;   // per center
    std::array<double, 4> gamma{};
    Eigen::Matrix<double, 2, 3> C;
    bool algebraic_enforced = false;

    // relative mismatch of the two amplitude product identities
    double product_residual1() const {
        return std::abs(C(0, 1) * C(1, 0) - C(0, 0) * C(1, 1)) /
               std::max(C(0, 1) * C(1, 0), C(0, 0) * C(1, 1));
    }
    double product_residual2() const {
        return std::abs(C(0, 1) * C(1, 2) - C(1, 1) * C(0, 2)) /
               std::max(C(0, 1) * C(1, 2), C(1, 1) * C(0, 2));
    }
};

namespace detail {

// grid indices at distance (lo, hi] from theta; hi < 0 means no upper limit
inline std::vector<int> band_indices(const Eigen::VectorXd& etas, double theta, double lo,
                                     double hi) {
    const double tol = 1e-9 * (1.0 + std::abs(lo));
    std::vector<int> idx;
    for (int j = 0; j < etas.size(); ++j) {
        const double d = std::abs(etas[j] - theta);
        if (d > lo + tol && (hi < 0 || d <= hi + tol)) idx.push_back(j);
    }
    return idx;
}

inline std::vector<int> near_indices(const Eigen::VectorXd& etas, double theta, double n_width) {
    const double tol = 1e-9 * (1.0 + std::abs(n_width));
    std::vector<int> idx;
    for (int j = 0; j < etas.size(); ++j)
        if (std::abs(etas[j] - theta) <= n_width + tol) idx.push_back(j);
    return idx;
}

inline std::vector<double> broadcast(std::vector<double> v, size_t k, const char* what) {
    if (v.size() == 1) v.assign(k, v[0]);
    if (v.size() != k) throw bad_config(std::string(what) + ": need 1 or one-per-center values");
    return v;
}

}  // namespace detail

// Scale the amplitude matrix so that C01*C10 = C00*C11 and C01*C12 = C11*C02.
// Adjustments only ever increase entries, so every envelope that held before
// still holds. Identities already within 1e-3 relative are left untouched.
inline Eigen::Matrix<double, 2, 3> enforce_algebraic(Eigen::Matrix<double, 2, 3> C) {
    const double lhs1 = C(0, 1) * C(1, 0);
    const double rhs1 = C(0, 0) * C(1, 1);
    if (std::abs(lhs1 - rhs1) > 1e-3 * std::max(lhs1, rhs1)) {
        const double f = std::sqrt(std::max(lhs1, rhs1) / std::min(lhs1, rhs1));
        if (lhs1 < rhs1) {
            C(0, 1) *= f;
            C(1, 0) *= f;
        } else {
            C(0, 0) *= f;
            C(1, 1) *= f;
        }
    }
    const double lhs2 = C(0, 1) * C(1, 2);
    const double rhs2 = C(1, 1) * C(0, 2);
    if (std::abs(lhs2 - rhs2) > 1e-3 * std::max(lhs2, rhs2)) {
        const double cross = C(1, 1) * C(0, 2) / C(0, 1);
        if (cross > C(1, 2)) {
            C(1, 2) = cross;
        } else {
            C(0, 2) = C(0, 1) * C(1, 2) / C(1, 1);
        }
    }
    return C;
}

inline void enforce_algebraic(DecayConstants& constants) {
    constants.C = enforce_algebraic(constants.C);
    constants.algebraic_enforced = true;
}

// Fit the tightest envelope constants over a profile set. near_width and
// decay_offset are modelling choices (scalar = shared across centers);
// decay_scale may be supplied or, if empty, fitted per center by least squares
// on log|rho| over the tail.
inline DecayConstants fit_decay_constants(const std::vector<CorrelationProfile>& profiles,
                                          std::vector<double> near_width,
                                          std::vector<double> decay_offset,
                                          std::vector<double> decay_scale = {}) {
    if (profiles.empty()) throw bad_config("need at least one correlation profile");
    const size_t k = profiles.size();
    DecayConstants out;
    out.near_width = detail::broadcast(std::move(near_width), k, "near_width");
    out.decay_offset = detail::broadcast(std::move(decay_offset), k, "decay_offset");
    const bool fit_scale = decay_scale.empty();
    if (!fit_scale) out.decay_scale = detail::broadcast(std::move(decay_scale), k, "decay_scale");
    for (size_t i = 0; i < k; ++i) {
        if (out.near_width[i] <= 0 || out.decay_offset[i] < 0)
            throw bad_config("near_width must be positive and decay_offset nonnegative");
    }

    double g0 = std::numeric_limits<double>::infinity();
    double g1 = 0, g2 = 0, g3 = 0;
    Eigen::Matrix<double, 2, 3> C = Eigen::Matrix<double, 2, 3>::Zero();
    if (fit_scale) out.decay_scale.resize(k);

    for (size_t i = 0; i < k; ++i) {
        const auto& prof = profiles[i];
        const auto near = detail::near_indices(prof.etas, prof.theta, out.near_width[i]);
        const auto far = detail::band_indices(prof.etas, prof.theta, out.near_width[i], -1);
        const auto tail = detail::band_indices(prof.etas, prof.theta, out.decay_offset[i], -1);
        if (near.empty() || tail.empty())
            throw bad_config("profile grid does not reach the requested regions");

        for (int j : near) {
            g0 = std::min(g0, -prof.rho_hat(0, 2, j));
            g1 = std::max(g1, std::abs(prof.rho_hat(1, 2, j)));
        }
        for (int j : far) {
            g2 = std::max(g2, std::abs(prof.rho00[j]));
            g3 = std::max(g3, std::abs(prof.rho_hat(1, 0, j)));
        }

        if (fit_scale) {
            // least squares for 1/scale in log|rho| = -(dist - offset)/scale
            double num = 0, den = 0;
            for (int j : tail) {
                const double a = std::abs(prof.rho00[j]);
                if (a < 1e-12) continue;
                const double w = std::abs(prof.etas[j] - prof.theta) - out.decay_offset[i];
                num -= w * std::log(a);
                den += w * w;
            }
            if (den == 0 || num <= 0) throw no_decay("correlation tail is not decaying");
            out.decay_scale[i] = den / num;
        }
        if (out.decay_scale[i] <= 0) throw bad_config("decay_scale must be positive");

        for (int j : tail) {
            const double dist = std::abs(prof.etas[j] - prof.theta);
            const double grow = std::exp((dist - out.decay_offset[i]) / out.decay_scale[i]);
            for (int q = 0; q < 2; ++q)
                for (int r = 0; r < 3; ++r)
                    C(q, r) = std::max(C(q, r), std::abs(prof.rho_hat(q, r, j)) * grow);
        }
    }

    if (g0 <= 0)
        throw near_region_not_concave("correlation is not strictly concave on a near region");
    if (g2 >= 1.0 - 1e-12)
        throw gamma2_not_less_than_one("correlation does not drop below 1 outside near regions");
    out.gamma = {g0, g1, g2, g3};
    out.C = C;
    enforce_algebraic(out);
    return out;
}

// Default modelling choices: near_width from the half-width at |rho| = 0.5,
// shrunk if needed until the near region is strictly concave; decay_offset
// equal to near_width; decay_scale fitted.
inline DecayConstants fit_decay_constants(const std::vector<CorrelationProfile>& profiles) {
    std::vector<double> widths;
    for (const auto& prof : profiles) {
        double w = prof.etas[prof.etas.size() - 1] - prof.etas[0];
        for (int j = 0; j < prof.etas.size(); ++j)
            if (std::abs(prof.rho00[j]) < 0.5)
                w = std::min(w, std::abs(prof.etas[j] - prof.theta));
        const double h = prof.etas[1] - prof.etas[0];
        while (w > 2 * h) {
            bool concave = true;
            for (int j : detail::near_indices(prof.etas, prof.theta, w))
                concave = concave && prof.rho_hat(0, 2, j) < 0;
            if (concave) break;
            w *= 0.75;
        }
        widths.push_back(w);
    }
    return fit_decay_constants(profiles, widths, widths);
}

struct ConditionCheck {
    bool pass = false;
    double margin = 0.0;  // smallest slack over the region; negative = violated
};

struct ConditionReport {
    ConditionCheck near_curvature;       // rho_hat(0,2) <= -gamma0 on the near region
    ConditionCheck near_cross;           // |rho_hat(1,2)| <= gamma1 on the near region
    ConditionCheck bounded_value;        // |rho| <= gamma2 outside the near region
    ConditionCheck bounded_slope;        // |rho_hat(1,0)| <= gamma3 outside the near region
    ConditionCheck decay[2][3];          // tail envelopes, amplitude scale
    bool all_pass() const {
        bool ok = near_curvature.pass && near_cross.pass && bounded_value.pass &&
                  bounded_slope.pass;
        for (int q = 0; q < 2; ++q)
            for (int r = 0; r < 3; ++r) ok = ok && decay[q][r].pass;
        return ok;
    }
};

// Evaluate every envelope inequality for one profile against the constants;
// slot selects the per-center geometry inside the constants.
inline ConditionReport check_conditions(const CorrelationProfile& prof,
                                        const DecayConstants& constants, size_t slot = 0) {
    if (slot >= constants.near_width.size()) throw bad_config("bad per-center slot");
    const double N = constants.near_width[slot];
    const double D = constants.decay_offset[slot];
    const double S = constants.decay_scale[slot];
    const auto near = detail::near_indices(prof.etas, prof.theta, N);
    const auto far = detail::band_indices(prof.etas, prof.theta, N, -1);
    const auto tail = detail::band_indices(prof.etas, prof.theta, D, -1);

    const double inf = std::numeric_limits<double>::infinity();
    ConditionReport rep;
    rep.near_curvature.margin = inf;
    rep.near_cross.margin = inf;
    rep.bounded_value.margin = inf;
    rep.bounded_slope.margin = inf;
    for (int j : near) {
        rep.near_curvature.margin =
            std::min(rep.near_curvature.margin, -prof.rho_hat(0, 2, j) - constants.gamma[0]);
        rep.near_cross.margin =
            std::min(rep.near_cross.margin, constants.gamma[1] - std::abs(prof.rho_hat(1, 2, j)));
    }
    for (int j : far) {
        rep.bounded_value.margin =
            std::min(rep.bounded_value.margin, constants.gamma[2] - std::abs(prof.rho00[j]));
        rep.bounded_slope.margin =
            std::min(rep.bounded_slope.margin, constants.gamma[3] - std::abs(prof.rho_hat(1, 0, j)));
    }
    for (int q = 0; q < 2; ++q)
        for (int r = 0; r < 3; ++r) rep.decay[q][r].margin = inf;
    for (int j : tail) {
        const double dist = std::abs(prof.etas[j] - prof.theta);
        const double grow = std::exp((dist - D) / S);
        for (int q = 0; q < 2; ++q)
            for (int r = 0; r < 3; ++r)
                rep.decay[q][r].margin = std::min(
                    rep.decay[q][r].margin,
                    constants.C(q, r) - std::abs(prof.rho_hat(q, r, j)) * grow);
    }

    rep.near_curvature.pass = rep.near_curvature.margin >= 0;
    rep.near_cross.pass = rep.near_cross.margin >= 0;
    rep.bounded_value.pass = rep.bounded_value.margin >= 0;
    rep.bounded_slope.pass = rep.bounded_slope.margin >= 0;
    for (int q = 0; q < 2; ++q)
        for (int r = 0; r < 3; ++r) rep.decay[q][r].pass = rep.decay[q][r].margin >= 0;
    return rep;
}

// Scale of the tightest Gaussian exp(-d^2 / (2 sigma^2)) dominating the
// profile pointwise on the grid; points with rho <= 0 impose no constraint.
inline double gaussian_envelope_sigma(const CorrelationProfile& prof) {
    double best = 0.0;
    for (int j = 0; j < prof.etas.size(); ++j) {
        const double rho = prof.rho00[j];
        if (rho <= 0 || rho >= 1.0 - 1e-12) continue;
        const double d = std::abs(prof.etas[j] - prof.theta);
        if (d == 0) continue;
        best = std::max(best, d / std::sqrt(2.0 * std::log(1.0 / rho)));
    }
    return best;
}

}  // namespace snl

#endif
