#ifndef SNL_HEAT_HPP
#define SNL_HEAT_HPP

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "core.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "types.hpp"

namespace snl {

// Source localization model: du/dt = d/dx(c(x) du/dx) on [-0.5, 0.5] with
// zero-flux boundaries, measured at n sensor locations at time T.
struct HeatModelConfig {
    int fd_size = 1000;       // spatial FD nodes across [-0.5, 0.5]
    double final_time = 1e-4;
    int time_steps = 128;
    int n_sensors = 100;      // regular sensor grid
    int m_grid = 1000;        // parameter grid size
    double c_min = 0.05;
    double c_max = 1.0;
    double bump_width = 0.15;
    double bump_center = 0.0;

    void validate() const {
        if (!(final_time > 0)) throw bad_config("final_time must be positive");
        if (fd_size < n_sensors) throw bad_config("fd_size must be >= n_sensors");
        if (!(c_min > 0)) throw bad_config("c_min must be positive");
        if (c_max < c_min) throw bad_config("c_max must be >= c_min");
        if (!(bump_width > 0)) throw bad_config("bump_width must be positive");
        if (time_steps < 1 || n_sensors < 2 || m_grid < 3) throw bad_config("bad heat sizes");
    }
};

inline double conductivity_profile(const HeatModelConfig& config, double theta) {
    const double d = theta - config.bump_center;
    return config.c_min + (config.c_max - config.c_min) *
                              std::exp(-d * d / (2.0 * config.bump_width * config.bump_width));
}

namespace detail {

// Tridiagonal factorization with reusable forward coefficients (the implicit
// matrix is the same for every time step and every column).
struct Tridiag {
    Eigen::VectorXd sub, diag, sup;   // original bands
    Eigen::VectorXd w, dd;            // elimination multipliers, modified diagonal

    void factor() {
        const int n = static_cast<int>(diag.size());
        w.resize(n);
        dd.resize(n);
        dd[0] = diag[0];
        if (dd[0] == 0.0) throw system_singular("zero pivot in tridiagonal factorization");
        for (int i = 1; i < n; ++i) {
            w[i] = sub[i] / dd[i - 1];
            dd[i] = diag[i] - w[i] * sup[i - 1];
            if (dd[i] == 0.0) throw system_singular("zero pivot in tridiagonal factorization");
        }
    }

    void solve_in_place(Eigen::VectorXd& d) const {
        const int n = static_cast<int>(diag.size());
        for (int i = 1; i < n; ++i) d[i] -= w[i] * d[i - 1];
        d[n - 1] /= dd[n - 1];
        for (int i = n - 2; i >= 0; --i) d[i] = (d[i] - sup[i] * d[i + 1]) / dd[i];
    }

    // y = T x for the matrix with these bands
    Eigen::VectorXd multiply(const Eigen::VectorXd& x) const {
        const int n = static_cast<int>(diag.size());
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            double v = diag[i] * x[i];
            if (i > 0) v += sub[i] * x[i - 1];
            if (i + 1 < n) v += sup[i] * x[i + 1];
            y[i] = v;
        }
        return y;
    }
};

struct HeatOperator {
    Eigen::VectorXd nodes;   // FD nodes
    double h;
    Eigen::VectorXd face;    // harmonic-mean face conductivities, face[i] between nodes i,i+1
    Tridiag implicit_mat;    // I - (dt/2) L, shared by the CN and startup steps
    Tridiag explicit_mat;    // I + (dt/2) L
    double dt;

    // conservative flux form of L applied through the bands:
    // (L u)_i = (face_i (u_{i+1}-u_i) - face_{i-1} (u_i-u_{i-1})) / h^2,
    // zero flux through both walls
    static HeatOperator build(const HeatModelConfig& config) {
        HeatOperator op;
        const int M = config.fd_size;
        op.nodes = Eigen::VectorXd::LinSpaced(M, -0.5, 0.5);
        op.h = 1.0 / (M - 1);
        op.face.resize(M - 1);
        for (int i = 0; i + 1 < M; ++i) {
            const double ca = conductivity_profile(config, op.nodes[i]);
            const double cb = conductivity_profile(config, op.nodes[i + 1]);
            op.face[i] = 2.0 * ca * cb / (ca + cb);
        }
        op.dt = config.final_time / config.time_steps;
        const double r = 0.5 * op.dt / (op.h * op.h);

        auto bands = [&](double sign, Tridiag& t) {
            t.sub = Eigen::VectorXd::Zero(M);
            t.sup = Eigen::VectorXd::Zero(M);
            t.diag = Eigen::VectorXd::Ones(M);
            for (int i = 0; i < M; ++i) {
                const double al = (i > 0) ? op.face[i - 1] : 0.0;
                const double ar = (i + 1 < M) ? op.face[i] : 0.0;
                t.diag[i] = 1.0 + sign * r * (al + ar);
                if (i > 0) t.sub[i] = -sign * r * al;
                if (i + 1 < M) t.sup[i] = -sign * r * ar;
            }
        };
        bands(+1.0, op.implicit_mat);
        bands(-1.0, op.explicit_mat);
        op.implicit_mat.factor();
        return op;
    }

    // evolve to final time; optionally record h*sum(u) after every step
    void evolve(Eigen::VectorXd& u, int time_steps, std::vector<double>* mass_trace) const {
        auto record = [&] {
            if (mass_trace) mass_trace->push_back(h * u.sum());
        };
        record();
        // two backward-Euler half-steps smooth the Dirac initial data before
        // Crank-Nicolson takes over; both stages share the implicit matrix
        for (int s = 0; s < 2; ++s) {
            implicit_mat.solve_in_place(u);
            record();
        }
        for (int s = 1; s < time_steps; ++s) {
            u = explicit_mat.multiply(u);
            implicit_mat.solve_in_place(u);
            record();
        }
    }

    Eigen::VectorXd dirac(double theta) const {
        const int M = static_cast<int>(nodes.size());
        int j = static_cast<int>(std::lround((theta + 0.5) / h));
        j = std::min(std::max(j, 0), M - 1);
        Eigen::VectorXd u = Eigen::VectorXd::Zero(M);
        u[j] = 1.0 / h;
        return u;
    }

    double sample(const Eigen::VectorXd& u, double x) const {
        const int M = static_cast<int>(nodes.size());
        const double pos = (x + 0.5) / h;
        int j = static_cast<int>(std::floor(pos));
        j = std::min(std::max(j, 0), M - 2);
        const double t = pos - j;
        return (1.0 - t) * u[j] + t * u[j + 1];
    }
};

}  // namespace detail

struct HeatColumnTrace {
    Eigen::VectorXd u_final;      // on FD nodes
    Eigen::VectorXd fd_nodes;
    std::vector<double> mass;     // h*sum(u) after every step, starting at t=0
};

inline HeatColumnTrace heat_column_with_trace(const HeatModelConfig& config, double source) {
    config.validate();
    const auto op = detail::HeatOperator::build(config);
    HeatColumnTrace out;
    out.u_final = op.dirac(source);
    op.evolve(out.u_final, config.time_steps, &out.mass);
    out.fd_nodes = op.nodes;
    return out;
}

inline Dictionary heat_dictionary(const HeatModelConfig& config) {
    config.validate();
    const auto op = detail::HeatOperator::build(config);
    const ParameterGrid grid = ParameterGrid::uniform(-0.5, 0.5, config.m_grid);
    const Eigen::VectorXd sensors = Eigen::VectorXd::LinSpaced(config.n_sensors, -0.5, 0.5);

    Dictionary dict;
    dict.grid = grid;
    dict.sample_locations = sensors;
    dict.provenance = "heat(T=" + std::to_string(config.final_time) +
                      ",c=[" + std::to_string(config.c_min) + "," + std::to_string(config.c_max) +
                      "],w=" + std::to_string(config.bump_width) + ")";
    dict.columns.resize(config.n_sensors, config.m_grid);
    for (int j = 0; j < config.m_grid; ++j) {
        Eigen::VectorXd u = op.dirac(grid.point1(j));
        op.evolve(u, config.time_steps, nullptr);
        for (int i = 0; i < config.n_sensors; ++i) dict.columns(i, j) = op.sample(u, sensors[i]);
        const double norm = dict.columns.col(j).norm();
        if (norm < 1e-14) throw degenerate_column("heat column norm underflows");
        dict.columns.col(j) /= norm;
    }
    attach_fd_derivatives(dict);
    return dict;
}

}  // namespace snl

#endif
