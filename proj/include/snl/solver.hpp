#ifndef SNL_SOLVER_HPP
#define SNL_SOLVER_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "types.hpp"

namespace snl {

struct SolverConfig {
    double feas_tol = 1e-9;  // on ||Ax - y|| / ||y||
    double gap_tol = 1e-8;   // relative duality gap
    int max_iterations = 200000;
    int check_every = 50;
    int polish_support_cap = 64;  // largest support size eligible for certified polish

    void validate() const {
        if (!(feas_tol > 0) || !(gap_tol > 0) || max_iterations < 1 || check_every < 1)
            throw bad_config("solver tolerances and iteration limits must be positive");
    }
};

struct L1Solution {
    Eigen::VectorXd x;
    double objective = 0;
    double residual = 0;  // ||Ax - y||, original scale
    double gap = 0;       // relative optimality-gap estimate
    int iterations = 0;
    bool converged = false;
    bool certified = false;  // an exact complementary dual certificate was found
    Eigen::VectorXd dual;    // nu with ||A^T nu||_inf <= 1 (+1e-9), unit-norm data scale
};

namespace detail {

// largest singular value of A by power iteration on A^T A, deterministic start
inline double operator_norm(const Eigen::MatrixXd& A) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(A.cols());
    v.normalize();
    double lambda = 0;
    for (int it = 0; it < 300; ++it) {
        Eigen::VectorXd w = A.transpose() * (A * v);
        const double next = w.norm();
        if (next == 0) return 0;
        w /= next;
        const bool settled = std::abs(next - lambda) <= 1e-6 * next;
        lambda = next;
        v = w;
        if (settled) break;
    }
    return std::sqrt(lambda) * (1.0 + 1e-4);
}

inline Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t) {
    return v.unaryExpr([t](double a) { return a > t ? a - t : (a < -t ? a + t : 0.0); });
}

struct PolishResult {
    bool ok = false;
    Eigen::VectorXd x;
    Eigen::VectorXd nu;
};

// Try to certify optimality of the support suggested by the iterate: solve the
// restricted equality problem exactly and build the complementary dual vector.
inline PolishResult polish_support(const Eigen::MatrixXd& A, const Eigen::VectorXd& y_hat,
                                   const std::vector<int>& S, double feas_tol) {
    PolishResult res;
    const int n = static_cast<int>(A.rows());
    const int s = static_cast<int>(S.size());
    if (s == 0 || s > n) return res;

    Eigen::MatrixXd As(n, s);
    for (int i = 0; i < s; ++i) As.col(i) = A.col(S[i]);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(As);
    Eigen::MatrixXd R = qr.matrixQR().topRows(s).triangularView<Eigen::Upper>();
    for (int i = 0; i < s; ++i)
        if (std::abs(R(i, i)) < 1e-12) return res;  // rank-deficient support

    Eigen::VectorXd xs = qr.solve(y_hat);
    if ((As * xs - y_hat).norm() > feas_tol) return res;
    Eigen::VectorXd signs(s);
    for (int i = 0; i < s; ++i) {
        if (xs[i] == 0) return res;
        signs[i] = xs[i] > 0 ? 1.0 : -1.0;
    }
    // nu = As (As^T As)^{-1} signs, via the thin QR factors
    Eigen::VectorXd w = R.transpose().triangularView<Eigen::Lower>().solve(signs);
    Eigen::VectorXd nu = qr.householderQ() *
                         (Eigen::VectorXd(n) << w, Eigen::VectorXd::Zero(n - s)).finished();

    if ((A.transpose() * nu).lpNorm<Eigen::Infinity>() > 1.0 + 1e-9) return res;

    res.ok = true;
    res.x = Eigen::VectorXd::Zero(A.cols());
    for (int i = 0; i < s; ++i) res.x[S[i]] = xs[i];
    res.nu = nu;
    return res;
}

// primal-dual splitting for the equality-constrained program
inline L1Solution primal_dual_l1(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                                 const SolverConfig& config) {
    config.validate();
    if (A.rows() != y.size()) throw dimension_mismatch("measurement size does not match rows");
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(A.cols());

    L1Solution out;
    out.x = Eigen::VectorXd::Zero(m);
    out.dual = Eigen::VectorXd::Zero(n);
    const double ynorm = y.norm();
    if (ynorm == 0) {
        out.converged = true;
        out.certified = true;
        return out;
    }
    const Eigen::VectorXd y_hat = y / ynorm;

    const double L = operator_norm(A);
    if (L == 0) throw bad_config("dictionary has no energy");
    const double tau = 0.99 / L;
    const double sigma = 0.99 / L;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd xbar = x;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);

    auto finish = [&](const Eigen::VectorXd& xh, const Eigen::VectorXd& nu, double gap,
                      bool converged, bool certified, int iterations) {
        out.x = ynorm * xh;
        out.objective = out.x.lpNorm<1>();
        out.residual = (A * xh - y_hat).norm() * ynorm;
        out.gap = gap;
        out.converged = converged;
        out.certified = certified;
        out.iterations = iterations;
        out.dual = nu;
    };

    int it = 0;
    while (it < config.max_iterations) {
        const int burst = std::min(config.check_every, config.max_iterations - it);
        for (int b = 0; b < burst; ++b) {
            z += sigma * (A * xbar - y_hat);
            Eigen::VectorXd xn = soft_threshold(x - tau * (A.transpose() * z), tau);
            xbar = 2.0 * xn - x;
            x = xn;
        }
        it += burst;

        // certified polish on the current sparsity pattern
        const double xmax = x.lpNorm<Eigen::Infinity>();
        if (xmax > 0) {
            std::vector<int> S;
            for (int j = 0; j < m; ++j)
                if (std::abs(x[j]) > 1e-6 * xmax) S.push_back(j);
            if (static_cast<int>(S.size()) <= config.polish_support_cap) {
                const auto pol = polish_support(A, y_hat, S, config.feas_tol);
                if (pol.ok) {
                    finish(pol.x, pol.nu, 0.0, true, true, it);
                    return out;
                }
            }
        }

        // feasibility + duality-gap stopping test on the raw iterate; the
        // saddle-point dual variable tends to the negative of the max-form
        // dual vector
        const double feas = (A * x - y_hat).norm();
        if (feas <= config.feas_tol) {
            Eigen::VectorXd nu = -z;
            const double dmax = (A.transpose() * nu).lpNorm<Eigen::Infinity>();
            if (dmax > 1.0) nu /= dmax;
            const double gap = (x.lpNorm<1>() - nu.dot(y_hat)) / std::max(1.0, x.lpNorm<1>());
            if (gap <= config.gap_tol) {
                finish(x, nu, std::max(gap, 0.0), true, false, it);
                return out;
            }
        }
    }

    Eigen::VectorXd nu = -z;
    const double dmax = (A.transpose() * nu).lpNorm<Eigen::Infinity>();
    if (dmax > 1.0) nu /= dmax;
    const double gap =
        (x.lpNorm<1>() - nu.dot(y_hat)) / std::max(1.0, x.lpNorm<1>());
    finish(x, nu, gap, false, false, it);
    return out;
}

struct LassoSolve {
    Eigen::VectorXd x;
    Eigen::VectorXd residual;  // A x - y_hat
    Eigen::VectorXd jump;      // A_S G^{-1} s, the in-span residual direction (exact only)
    bool exact = false;        // stationarity certified on the active support
    int iterations = 0;
};

// Exact active-set refinement of an approximate penalized solution: exactly
// saturated correlations and large coordinates propose the active set, the
// worst sign-violating atom leaves, the worst stationarity violator joins,
// and the loop ends when the full optimality test holds to machine precision.
// Seeding must stay lean: near-duplicate neighbor columns all sit close to
// saturation and flooding them in makes the restricted system singular.
inline bool lasso_polish(const Eigen::MatrixXd& A, const Eigen::VectorXd& y_hat,
                         double lambda, const Eigen::VectorXd& x_approx, int support_cap,
                         LassoSolve& out) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(A.cols());
    Eigen::VectorXd c = A.transpose() * (A * x_approx - y_hat);
    const double xmax = x_approx.lpNorm<Eigen::Infinity>();
    std::vector<int> S;
    std::vector<double> sg;
    std::vector<char> active(m, 0);
    for (int j = 0; j < m; ++j) {
        const bool hot = std::abs(c[j]) >= lambda * (1.0 - 1e-9);
        const bool big = xmax > 0 && std::abs(x_approx[j]) > 1e-6 * xmax;
        if (!hot && !big) continue;
        S.push_back(j);
        sg.push_back(x_approx[j] != 0 ? (x_approx[j] > 0 ? 1.0 : -1.0)
                                      : (c[j] > 0 ? -1.0 : 1.0));
        active[j] = 1;
    }
    for (int pass = 0; pass < 64; ++pass) {
        const int s = static_cast<int>(S.size());
        if (s > support_cap || s > n) return false;
        Eigen::VectorXd xs, r;
        Eigen::MatrixXd As(n, s);
        Eigen::LDLT<Eigen::MatrixXd> gram;
        if (s > 0) {
            Eigen::VectorXd signs(s);
            for (int i = 0; i < s; ++i) {
                As.col(i) = A.col(S[i]);
                signs[i] = sg[i];
            }
            const Eigen::MatrixXd G = As.transpose() * As;
            gram.compute(G);
            if (gram.info() != Eigen::Success) return false;
            const Eigen::VectorXd b = As.transpose() * y_hat - lambda * signs;
            xs = gram.solve(b);
            xs += gram.solve(b - G * xs);  // one refinement step for sharp supports
            int worst = -1;
            double worst_v = 0;
            for (int i = 0; i < s; ++i) {
                const double v = xs[i] * sg[i];
                if (v <= 0 && (worst < 0 || v < worst_v)) {
                    worst = i;
                    worst_v = v;
                }
            }
            if (worst >= 0) {
                active[S[worst]] = 0;
                S.erase(S.begin() + worst);
                sg.erase(sg.begin() + worst);
                continue;
            }
            r = As * xs - y_hat;
        } else {
            r = -y_hat;
        }
        c = A.transpose() * r;
        // full stationarity audit: on-support correlations must equal the
        // penalty times the sign, everything else must stay below the penalty
        for (int i = 0; i < s; ++i)
            if (std::abs(c[S[i]] + lambda * sg[i]) > lambda * 1e-9 + 1e-14) return false;
        int add = -1;
        double add_v = lambda * (1.0 + 1e-9) + 1e-14;
        for (int j = 0; j < m; ++j) {
            if (active[j] || std::abs(c[j]) <= add_v) continue;
            add = j;
            add_v = std::abs(c[j]);
        }
        if (add >= 0) {
            S.push_back(add);
            sg.push_back(c[add] > 0 ? -1.0 : 1.0);
            active[add] = 1;
            continue;
        }
        out.x = Eigen::VectorXd::Zero(m);
        for (int i = 0; i < s; ++i) out.x[S[i]] = xs[i];
        out.residual = r;
        if (s > 0) {
            Eigen::VectorXd signs(s);
            for (int i = 0; i < s; ++i) signs[i] = sg[i];
            out.jump = As * gram.solve(signs);
        } else {
            out.jump = Eigen::VectorXd::Zero(n);
        }
        out.exact = true;
        return true;
    }
    return false;
}

// Solve of the penalized problem
//   min 1/2 ||A x - y||^2 + lambda ||x||_1
// by accelerated proximal gradient, attempting an exact active-set polish
// before every burst; the polish usually certifies immediately under a warm
// start and turns the whole solve into one restricted linear solve.
inline LassoSolve lasso_point(const Eigen::MatrixXd& A, const Eigen::VectorXd& y_hat,
                              double lambda, double lipschitz, Eigen::VectorXd x0,
                              int max_iters, int check_every, int support_cap) {
    const double step = 1.0 / lipschitz;
    LassoSolve out;
    Eigen::VectorXd x = std::move(x0);
    Eigen::VectorXd v = x;
    double momentum = 1.0;
    int it = 0;
    while (true) {
        if (lasso_polish(A, y_hat, lambda, x, support_cap, out)) {
            out.iterations = it;
            return out;
        }
        if (it >= max_iters) break;
        const int burst = std::min(check_every, max_iters - it);
        for (int b = 0; b < burst; ++b) {
            const Eigen::VectorXd grad = A.transpose() * (A * v - y_hat);
            Eigen::VectorXd xn = soft_threshold(v - step * grad, step * lambda);
            const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
            v = xn + ((momentum - 1.0) / next) * (xn - x);
            x = xn;
            momentum = next;
        }
        it += burst;
    }
    out.x = x;
    out.residual = A * x - y_hat;
    out.iterations = it;
    return out;
}

// Ball-constrained denoising via the penalized path. Every exactly solved
// penalty gives a dual-feasible vector nu = -r/lambda, and penalties whose
// residual lands inside the ball give feasible primals, so the duality gap is
// squeezed from both sides. On a fixed support the residual norm is an
// explicit quadratic in the penalty, which lets each exact round jump
// straight to the penalty whose residual sits on the ball boundary; a
// bisection bracket safeguards the jumps.
inline L1Solution bpdn_homotopy(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                                double xi_bound, const SolverConfig& config) {
    config.validate();
    if (A.rows() != y.size()) throw dimension_mismatch("measurement size does not match rows");
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(A.cols());

    L1Solution out;
    out.x = Eigen::VectorXd::Zero(m);
    out.dual = Eigen::VectorXd::Zero(n);
    const double ynorm = y.norm();
    if (ynorm == 0) {
        out.converged = true;
        out.certified = true;
        return out;
    }
    const Eigen::VectorXd y_hat = y / ynorm;
    const double xi_hat = xi_bound / ynorm;
    if (xi_hat >= 1.0) {  // zero is feasible, and nothing beats objective zero
        out.converged = true;
        out.certified = true;
        out.residual = ynorm;
        return out;
    }

    const double L = operator_norm(A);
    if (L == 0) throw bad_config("dictionary has no energy");
    const double L2 = L * L;

    double lo = 0.0;
    double hi = (A.transpose() * y_hat).lpNorm<Eigen::Infinity>();
    double lambda = 0.5 * hi;
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(m);
    bool have_primal = false;
    Eigen::VectorXd x_best, nu_best = Eigen::VectorXd::Zero(n);
    double obj_best = std::numeric_limits<double>::infinity();
    double dual_best = -std::numeric_limits<double>::infinity();
    double resid_best = 0, gap = std::numeric_limits<double>::infinity();
    int spent = 0;
    const int base_budget = std::max(5000, config.max_iterations / 20);
    int budget = base_budget;
    int stale = 0;

    for (int round = 0; round < 128 && spent < config.max_iterations; ++round) {
        if (!(lambda > 0)) break;
        auto sol = lasso_point(A, y_hat, lambda, L2, warm,
                               std::min(budget, config.max_iterations - spent),
                               config.check_every, std::min(config.polish_support_cap, n));
        spent += std::max(sol.iterations, 1);
        warm = sol.x;
        const double rn = sol.residual.norm();

        Eigen::VectorXd nu = -sol.residual / lambda;
        const double dmax = (A.transpose() * nu).lpNorm<Eigen::Infinity>();
        if (dmax > 1.0) nu /= dmax;
        const double dual = nu.dot(y_hat) - xi_hat * nu.norm();
        if (dual > dual_best) {
            dual_best = dual;
            nu_best = nu;
        }

        if (rn <= xi_hat + config.feas_tol) {
            const double obj = sol.x.lpNorm<1>();
            if (!have_primal || obj < obj_best) {
                have_primal = true;
                obj_best = obj;
                x_best = sol.x;
                resid_best = rn;
            }
        }

        // only exact solves are trusted to move the bracket; a sloppy iterate
        // may still settle a clear-cut side, and after repeated ambiguous
        // retries its best guess has to stand so the search can move on
        if (sol.exact) {
            (rn <= xi_hat ? lo : hi) = lambda;
            budget = base_budget;
            stale = 0;
        } else if (rn > xi_hat + 1e-6) {
            hi = lambda;
        } else if (rn < xi_hat - 1e-6) {
            lo = lambda;
        } else {
            budget = std::min(budget * 2, config.max_iterations);
            if (++stale >= 3) {
                (rn <= xi_hat ? lo : hi) = lambda;
                stale = 0;
            }
        }

        if (have_primal) {
            gap = (obj_best - dual_best) / std::max(1.0, obj_best);
            if (gap <= config.gap_tol) {
                out.x = ynorm * x_best;
                out.objective = out.x.lpNorm<1>();
                out.residual = resid_best * ynorm;
                out.gap = std::max(gap, 0.0);
                out.converged = true;
                out.iterations = spent;
                out.dual = nu_best;
                return out;
            }
        }

        double next = 0.5 * (lo + hi);
        if (sol.exact) {
            // residual norm on the final support is sqrt(u^2 + lambda^2 w^2);
            // aim the next penalty at the ball boundary
            const double w2 = sol.jump.squaredNorm();
            if (w2 > 0) {
                const double t2 = lambda * lambda + (xi_hat * xi_hat - rn * rn) / w2;
                if (t2 > 0) {
                    const double cand = std::sqrt(t2);
                    if (cand > lo && cand < hi) next = cand;
                }
            }
        }
        lambda = next;
    }

    if (have_primal) {
        out.x = ynorm * x_best;
        out.objective = out.x.lpNorm<1>();
        out.residual = resid_best * ynorm;
    } else {
        out.x = ynorm * warm;
        out.objective = out.x.lpNorm<1>();
        out.residual = (A * warm - y_hat).norm() * ynorm;
    }
    out.gap = gap;
    out.iterations = spent;
    out.dual = nu_best;
    return out;
}

}  // namespace detail

inline L1Solution solve_bp_equality(const Dictionary& dict, const Eigen::VectorXd& y,
                                    const SolverConfig& config = {}) {
    return detail::primal_dual_l1(dict.columns, y, config);
}

inline L1Solution solve_bp_denoise(const Dictionary& dict, const Eigen::VectorXd& y,
                                   double xi_bound, const SolverConfig& config = {}) {
    if (xi_bound < 0) throw bad_config("noise bound must be nonnegative");
    if (xi_bound == 0) return detail::primal_dual_l1(dict.columns, y, config);
    return detail::bpdn_homotopy(dict.columns, y, xi_bound, config);
}

// Exhaustive reference solver for tiny instances: enumerate every full-rank
// column subset of size rank(A) and take the best exactly-feasible basic
// solution, which is where the l1 optimum of a feasible bounded program lives.
inline L1Solution brute_force_oracle(const Dictionary& dict, const Eigen::VectorXd& y,
                                     int k_max = 3) {
    const Eigen::MatrixXd& A = dict.columns;
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(A.cols());
    if (m > 14 || k_max > 3) throw problem_too_large("oracle is for m <= 14, k_max <= 3");
    if (y.size() != n) throw dimension_mismatch("measurement size does not match rows");

    L1Solution out;
    out.x = Eigen::VectorXd::Zero(m);
    out.converged = true;
    out.certified = true;
    out.dual = Eigen::VectorXd::Zero(n);
    if (y.norm() == 0) return out;
    const double tol = 1e-9 * std::max(1.0, y.norm());

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    if ((A * cod.solve(y) - y).norm() > tol)
        throw infeasible_problem("no coefficient vector reproduces the data");
    const int rank = static_cast<int>(cod.rank());

    double best = std::numeric_limits<double>::infinity();
    std::vector<int> subset(rank);
    // iterate over all size-rank index subsets in lexicographic order
    for (int i = 0; i < rank; ++i) subset[i] = i;
    while (true) {
        Eigen::MatrixXd As(n, rank);
        for (int i = 0; i < rank; ++i) As.col(i) = A.col(subset[i]);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(As);
        if (qr.rank() == rank) {
            const Eigen::VectorXd xs = qr.solve(y);
            if ((As * xs - y).norm() <= tol) {
                const double obj = xs.lpNorm<1>();
                if (obj < best - 1e-15) {
                    best = obj;
                    out.x.setZero();
                    for (int i = 0; i < rank; ++i) out.x[subset[i]] = xs[i];
                }
            }
        }
        int pos = rank - 1;
        while (pos >= 0 && subset[pos] == m - rank + pos) --pos;
        if (pos < 0) break;
        ++subset[pos];
        for (int i = pos + 1; i < rank; ++i) subset[i] = subset[i - 1] + 1;
    }
    if (!std::isfinite(best))
        throw infeasible_problem("no basic solution reproduces the data");
    out.objective = best;
    out.residual = (A * out.x - y).norm();
    return out;
}

// single-component least-squares landscape: residual energy after the best
// scaling of each candidate column
inline Eigen::VectorXd nls_landscape(const Dictionary& dict, const Eigen::VectorXd& y) {
    if (y.size() != dict.n()) throw dimension_mismatch("measurement size does not match rows");
    const Eigen::VectorXd corr = dict.columns.transpose() * y;
    return Eigen::VectorXd::Constant(dict.m(), y.squaredNorm()) - corr.array().square().matrix();
}

// interior indices that are strictly below both neighbors
inline std::vector<int> grid_local_minima(const Eigen::VectorXd& values) {
    std::vector<int> idx;
    for (int j = 1; j + 1 < values.size(); ++j)
        if (values[j] < values[j - 1] && values[j] < values[j + 1]) idx.push_back(j);
    return idx;
}

}  // namespace snl

#endif
