#ifndef SNL_KERNELS_HPP
#define SNL_KERNELS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "core.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "types.hpp"

namespace snl {

enum class KernelKind { gaussian, ricker, fourier };

struct KernelSpec {
    KernelKind kind = KernelKind::gaussian;
    double width = 1.0;
    Eigen::VectorXd sample_locations;

    static KernelSpec gaussian(double width, Eigen::VectorXd samples) {
        return {KernelKind::gaussian, width, std::move(samples)};
    }
    static KernelSpec ricker(double width, Eigen::VectorXd samples) {
        return {KernelKind::ricker, width, std::move(samples)};
    }
};

// default sampling: uniform with the given spacing, covering the grid with a
// 3*width margin on both sides
inline Eigen::VectorXd default_samples(const ParameterGrid& grid, double width, double spacing) {
    const double lo = grid.axis(0)[0] - 3.0 * width;
    const double hi = grid.axis(0)[grid.axis_size(0) - 1] + 3.0 * width;
    const int n = static_cast<int>(std::ceil((hi - lo) / spacing)) + 1;
    return Eigen::VectorXd::LinSpaced(n, lo, hi);
}

namespace detail {

template <typename F0, typename F1, typename F2>
Dictionary pointwise_kernel_dictionary(const KernelSpec& spec, const ParameterGrid& grid,
                                       F0 f0, F1 f1, F2 f2, const std::string& provenance) {
    if (spec.width <= 0) throw bad_config("kernel width must be positive");
    const auto& s = spec.sample_locations;
    const int n = static_cast<int>(s.size());
    if (n < 2) throw bad_config("kernel needs at least 2 samples");
    const int m = grid.size();

    Eigen::MatrixXd raw(n, m), rd1(n, m), rd2(n, m);
    for (int j = 0; j < m; ++j) {
        const double theta = grid.point1(j);
        double closest = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            const double t = theta - s[i];
            closest = std::min(closest, std::abs(t));
            raw(i, j) = f0(t);
            rd1(i, j) = f1(t);
            rd2(i, j) = f2(t);
        }
        if (closest > 12.0 * spec.width)
            throw degenerate_column("all samples are more than 12 widths from a grid point");
    }
    Dictionary dict = normalize_columns(raw, {rd1}, {rd2}, grid, s, provenance);
    dict.evaluator = [s, f0](const Eigen::VectorXd& theta) {
        Eigen::VectorXd u(s.size());
        for (int i = 0; i < s.size(); ++i) u[i] = f0(theta[0] - s[i]);
        return Eigen::VectorXd(u / u.norm());
    };
    return dict;
}

}  // namespace detail

inline Dictionary gaussian_dictionary(const KernelSpec& spec, const ParameterGrid& grid) {
    if (spec.kind != KernelKind::gaussian) throw bad_config("spec.kind must be gaussian");
    const double w2 = spec.width * spec.width;
    auto f0 = [w2](double t) { return std::exp(-t * t / (2.0 * w2)); };
    auto f1 = [w2, f0](double t) { return -(t / w2) * f0(t); };
    auto f2 = [w2, f0](double t) { return (-1.0 / w2 + t * t / (w2 * w2)) * f0(t); };
    return detail::pointwise_kernel_dictionary(spec, grid, f0, f1, f2,
                                               "gaussian(width=" + std::to_string(spec.width) + ")");
}

inline Dictionary ricker_dictionary(const KernelSpec& spec, const ParameterGrid& grid) {
    if (spec.kind != KernelKind::ricker) throw bad_config("spec.kind must be ricker");
    const double w2 = spec.width * spec.width;
    // columns sample K(s - theta); as a function of t = theta - s the kernel is
    // even, so K and K'' keep their form and the odd K' flips sign
    auto K = [w2](double t) { return (1.0 - t * t / w2) * std::exp(-t * t / (2.0 * w2)); };
    auto f1 = [w2](double t) {
        return -(t / w2) * (3.0 - t * t / w2) * std::exp(-t * t / (2.0 * w2));
    };
    auto f2 = [w2](double t) {
        const double tau = t * t / w2;
        return (1.0 / w2) * (-3.0 + 6.0 * tau - tau * tau) * std::exp(-tau / 2.0);
    };
    return detail::pointwise_kernel_dictionary(spec, grid, K, f1, f2,
                                               "ricker(width=" + std::to_string(spec.width) + ")");
}

// Complex exponentials exp(-i 2 pi theta t) over frequencies theta in [0,1),
// realified by stacking real and imaginary parts. Sample times default to n
// consecutive values centered at zero so that plain inner products reduce to
// the Dirichlet kernel. Optional cosine window tapers the sample weights.
inline Dictionary fourier_dictionary(const ParameterGrid& frequency_grid,
                                     const Eigen::VectorXd& sample_times, bool window) {
    const int nt = static_cast<int>(sample_times.size());
    if (nt < 2) throw bad_config("fourier dictionary needs at least 2 sample times");
    const int m = frequency_grid.size();
    for (int j = 0; j < m; ++j) {
        const double f = frequency_grid.point1(j);
        if (f < 0.0 || f >= 1.0) throw bad_config("frequencies must lie in [0,1)");
    }
    const double tspan = sample_times[nt - 1] - sample_times[0];
    const double tmid = 0.5 * (sample_times[nt - 1] + sample_times[0]);
    Eigen::VectorXd wgt(nt);
    for (int i = 0; i < nt; ++i) {
        wgt[i] = window ? std::cos(M_PI * (sample_times[i] - tmid) / (tspan + 1.0)) : 1.0;
    }

    const double two_pi = 6.283185307179586476925286766559;
    Eigen::MatrixXd raw(2 * nt, m), rd1(2 * nt, m), rd2(2 * nt, m);
    for (int j = 0; j < m; ++j) {
        const double theta = frequency_grid.point1(j);
        for (int i = 0; i < nt; ++i) {
            const double t = sample_times[i];
            const double a = two_pi * theta * t;
            const double c = std::cos(a), s = std::sin(a);
            const double d = two_pi * t;
            raw(i, j) = wgt[i] * c;
            raw(nt + i, j) = -wgt[i] * s;
            rd1(i, j) = -wgt[i] * d * s;
            rd1(nt + i, j) = -wgt[i] * d * c;
            rd2(i, j) = -wgt[i] * d * d * c;
            rd2(nt + i, j) = wgt[i] * d * d * s;
        }
    }
    Eigen::MatrixXd locations(2 * nt, 1);
    locations.col(0) << sample_times, sample_times;
    return normalize_columns(raw, {rd1}, {rd2}, frequency_grid, locations,
                             window ? "fourier(window=cos)" : "fourier(window=none)");
}

// Separable 2D Gaussian bumps over a tensor grid; sensors are rows of
// `sensors` (n x 2). Used by the 2D certificate path.
inline Dictionary gaussian_dictionary_2d(double width, const Eigen::MatrixXd& sensors,
                                         const ParameterGrid& grid) {
    if (grid.dim() != 2) throw bad_config("gaussian_dictionary_2d needs a 2D grid");
    if (width <= 0) throw bad_config("kernel width must be positive");
    if (sensors.cols() != 2) throw bad_config("sensors must be n x 2");
    const int n = static_cast<int>(sensors.rows());
    const int m = grid.size();
    const double w2 = width * width;

    Eigen::MatrixXd raw(n, m), d1a(n, m), d1b(n, m), d2aa(n, m), d2bb(n, m), d2ab(n, m);
    for (int j = 0; j < m; ++j) {
        const Eigen::VectorXd th = grid.point(j);
        for (int i = 0; i < n; ++i) {
            const double ta = th[0] - sensors(i, 0);
            const double tb = th[1] - sensors(i, 1);
            const double g = std::exp(-(ta * ta + tb * tb) / (2.0 * w2));
            raw(i, j) = g;
            d1a(i, j) = -(ta / w2) * g;
            d1b(i, j) = -(tb / w2) * g;
            d2aa(i, j) = (-1.0 / w2 + ta * ta / (w2 * w2)) * g;
            d2bb(i, j) = (-1.0 / w2 + tb * tb / (w2 * w2)) * g;
            d2ab(i, j) = (ta * tb / (w2 * w2)) * g;
        }
    }
    Dictionary dict = normalize_columns(raw, {d1a, d1b}, {d2aa, d2bb, d2ab}, grid, sensors,
                                        "gaussian2d(width=" + std::to_string(width) + ")");
    dict.evaluator = [sensors, w2](const Eigen::VectorXd& th) {
        Eigen::VectorXd u(sensors.rows());
        for (int i = 0; i < sensors.rows(); ++i) {
            const double ta = th[0] - sensors(i, 0);
            const double tb = th[1] - sensors(i, 1);
            u[i] = std::exp(-(ta * ta + tb * tb) / (2.0 * w2));
        }
        return Eigen::VectorXd(u / u.norm());
    };
    return dict;
}

}  // namespace snl

#endif
