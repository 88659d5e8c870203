#ifndef SNL_EXPERIMENTS_HPP
#define SNL_EXPERIMENTS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "certificate.hpp"
#include "correlation.hpp"
#include "errors.hpp"
#include "heat.hpp"
#include "kernels.hpp"
#include "rng.hpp"
#include "separation.hpp"
#include "solver.hpp"
#include "types.hpp"

namespace snl {

enum class SupportLayout { uniform, clustered };
enum class SignPolicy { fixed, all_patterns };

inline const char* layout_name(SupportLayout l) {
    return l == SupportLayout::uniform ? "uniform" : "clustered";
}

// One synthetic recovery trial: which model, how the sources are laid out, how
// much the layout is shrunk toward the center, and what counts as success.
struct TrialConfig {
    std::string model = "heat";
    SupportLayout layout = SupportLayout::uniform;
    double dilation = 1.0;
    SignPolicy signs = SignPolicy::fixed;
    SolverConfig solver;
    double success_relative = 3e-5;  // relative l2 below this is a success
    double failure_absolute = 9e-3;  // absolute l2 above this is a failure
    unsigned seed = 0;

    void validate() const {
        if (!(dilation > 0.0) || dilation > 1.0)
            throw bad_config("dilation must lie in (0, 1]");
        if (!(success_relative > 0) || !(failure_absolute > 0))
            throw bad_config("success thresholds must be positive");
        solver.validate();
    }
};

namespace detail {

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::vector<double> log_spaced(int count, double lo, double hi) {
    if (count < 1 || !(lo > 0) || !(hi >= lo)) throw bad_config("bad sweep range");
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 1.0 : double(i) / (count - 1);
        out[i] = lo * std::pow(hi / lo, t);
    }
    return out;
}

// desired source positions before grid snapping; `range` is the span the
// fully dilated layout occupies, centered on zero
inline std::vector<double> layout_positions(SupportLayout layout, int n_sources,
                                            double dilation, double range) {
    if (n_sources < 2) throw bad_config("layouts need at least 2 sources");
    std::vector<double> pts;
    if (layout == SupportLayout::uniform) {
        const double half = 0.5 * range * dilation;
        for (int i = 0; i < n_sources; ++i)
            pts.push_back(-half + 2.0 * half * i / (n_sources - 1));
    } else {
        // one central source and two 3-clusters near the ends of the domain;
        // only the intra-cluster spacing shrinks with the dilation factor
        if (n_sources != 7)
            throw bad_config("the clustered layout is defined for 7 sources");
        const double center = range * 4.0 / 9.0;
        const double s = 0.02 * dilation * range;
        pts = {-center - s, -center, -center + s, 0.0, center - s, center, center + s};
    }
    return pts;
}

// snap each position to the nearest free grid cell so planted sources stay
// distinct even when the layout shrinks below the grid resolution
inline std::vector<int> snap_to_distinct_cells(const ParameterGrid& grid,
                                               const std::vector<double>& pts) {
    std::set<int> used;
    std::vector<int> out;
    const int m = grid.size();
    for (double p : pts) {
        const int j0 = grid.nearest_index(Eigen::VectorXd::Constant(1, p));
        int pick = -1;
        for (int r = 0; pick < 0 && r < m; ++r) {
            if (j0 - r >= 0 && !used.count(j0 - r))
                pick = j0 - r;
            else if (j0 + r < m && !used.count(j0 + r))
                pick = j0 + r;
        }
        if (pick < 0) throw bad_config("more sources than grid cells");
        used.insert(pick);
        out.push_back(pick);
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<Eigen::VectorXd> patterns_for(SignPolicy policy, int k, int cap) {
    if (policy == SignPolicy::fixed) return {Eigen::VectorXd::Ones(k)};
    auto all = all_sign_patterns(k);
    if (static_cast<int>(all.size()) > cap) all.resize(cap);
    return all;
}

}  // namespace detail

struct PhaseRow {
    std::string layout;
    double dilation = 0;
    double delta_sep = std::numeric_limits<double>::quiet_NaN();
    double delta_corr = std::numeric_limits<double>::quiet_NaN();
    bool success_any = false;
    bool success_all = false;
    double relative_error = std::numeric_limits<double>::quiet_NaN();
    double absolute_error = std::numeric_limits<double>::quiet_NaN();
    std::string status;  // success | failure | ambiguous | an error note
};

// One planted-recovery trial on a prebuilt dictionary: lay the sources out,
// snap them to distinct grid cells, solve the equality program for each sign
// pattern the policy asks for, and report worst-case errors plus the raw and
// correlation-scaled separations of the planted support.
inline PhaseRow run_recovery_trial(const Dictionary& dict, const TrialConfig& config,
                                   int n_sources = 7, int max_patterns = 128) {
    config.validate();
    const double domain =
        dict.grid.axis(0)[dict.grid.axis_size(0) - 1] - dict.grid.axis(0)[0];
    const double range = 0.9 * domain;  // keep sources clear of the boundary

    PhaseRow row;
    row.layout = layout_name(config.layout);
    row.dilation = config.dilation;

    const auto pts =
        detail::layout_positions(config.layout, n_sources, config.dilation, range);
    const auto support = detail::snap_to_distinct_cells(dict.grid, pts);
    const int k = static_cast<int>(support.size());

    Eigen::VectorXd thetas(k), sigma_hat(k);
    for (int i = 0; i < k; ++i) {
        thetas[i] = dict.grid.point1(support[i]);
        sigma_hat[i] = gaussian_envelope_sigma(correlation_profile(dict, support[i]));
    }
    row.delta_sep = delta_sep(thetas);
    row.delta_corr = delta_corr(thetas, sigma_hat);

    bool any = false, all = true;
    double worst_rel = 0, worst_abs = 0;
    for (const auto& pattern : detail::patterns_for(config.signs, k, max_patterns)) {
        Eigen::VectorXd planted = Eigen::VectorXd::Zero(dict.m());
        for (int i = 0; i < k; ++i) planted[support[i]] = pattern[i];
        const auto sol =
            solve_bp_equality(dict, (dict.columns * planted).eval(), config.solver);
        const double abs_err = (sol.x - planted).norm();
        const double rel_err = abs_err / planted.norm();
        worst_rel = std::max(worst_rel, rel_err);
        worst_abs = std::max(worst_abs, abs_err);
        const bool ok = sol.converged && rel_err < config.success_relative;
        any = any || ok;
        all = all && ok;
    }
    row.success_any = any;
    row.success_all = all;
    row.relative_error = worst_rel;
    row.absolute_error = worst_abs;
    row.status = worst_rel < config.success_relative    ? "success"
                 : worst_abs > config.failure_absolute ? "failure"
                                                       : "ambiguous";
    return row;
}

struct PhaseDiagram {
    std::vector<PhaseRow> rows;

    std::string to_csv() const {
        std::ostringstream os;
        os << "layout,dilation,delta_sep,delta_corr,success_any,success_all,"
              "relative_error,absolute_error,status\n";
        for (const auto& r : rows) {
            os << r.layout << ',' << detail::format_number(r.dilation) << ','
               << detail::format_number(r.delta_sep) << ','
               << detail::format_number(r.delta_corr) << ',' << (r.success_any ? 1 : 0)
               << ',' << (r.success_all ? 1 : 0) << ','
               << detail::format_number(r.relative_error) << ','
               << detail::format_number(r.absolute_error) << ',' << r.status << '\n';
        }
        return os.str();
    }

    // first dilation at which a layout succeeds, and the delta values there
    struct Threshold {
        bool found = false;
        double dilation = std::numeric_limits<double>::quiet_NaN();
        double delta_sep = std::numeric_limits<double>::quiet_NaN();
        double delta_corr = std::numeric_limits<double>::quiet_NaN();
    };
    Threshold first_success(const std::string& layout) const {
        Threshold th;
        for (const auto& r : rows) {
            if (r.layout != layout || !r.success_all) continue;
            if (!th.found || r.dilation < th.dilation) {
                th.found = true;
                th.dilation = r.dilation;
                th.delta_sep = r.delta_sep;
                th.delta_corr = r.delta_corr;
            }
        }
        return th;
    }
};

struct PhaseTransitionConfig {
    HeatModelConfig heat;
    SolverConfig solver;
    int n_sources = 7;
    std::vector<SupportLayout> layouts = {SupportLayout::uniform, SupportLayout::clustered};
    std::vector<double> dilations = detail::log_spaced(24, 0.01, 1.0);
    SignPolicy signs = SignPolicy::fixed;
    int max_patterns = 128;
    double success_relative = 3e-5;
    double failure_absolute = 9e-3;

    PhaseTransitionConfig() {
        solver.gap_tol = 1e-7;
        solver.max_iterations = 60000;
    }

    void validate() const {
        if (n_sources < 2) throw bad_config("need at least 2 sources");
        if (dilations.empty()) throw bad_config("empty dilation sweep");
        for (double d : dilations)
            if (!(d > 0) || d > 1.0) throw bad_config("dilation must lie in (0, 1]");
        if (!(success_relative > 0) || !(failure_absolute > 0) || max_patterns < 1)
            throw bad_config("success thresholds and pattern cap must be positive");
        heat.validate();
        solver.validate();
    }
};

// Sweep dilation factors for each support layout on the heat model. Per-row
// failures are recorded in the status column instead of aborting the sweep.
inline PhaseDiagram run_heat_phase_transition(const PhaseTransitionConfig& config) {
    config.validate();
    const auto dict = heat_dictionary(config.heat);

    PhaseDiagram diagram;
    for (const auto layout : config.layouts) {
        for (const double dilation : config.dilations) {
            TrialConfig trial;
            trial.model = "heat";
            trial.layout = layout;
            trial.dilation = dilation;
            trial.signs = config.signs;
            trial.solver = config.solver;
            trial.success_relative = config.success_relative;
            trial.failure_absolute = config.failure_absolute;
            try {
                diagram.rows.push_back(run_recovery_trial(dict, trial, config.n_sources,
                                                          config.max_patterns));
            } catch (const error& e) {
                PhaseRow row;
                row.layout = layout_name(layout);
                row.dilation = dilation;
                row.status = std::string("error: ") + e.what();
                diagram.rows.push_back(row);
            }
        }
    }
    return diagram;
}

struct NoiseDemoConfig {
    double grid_lo = -5.0;
    double grid_hi = 5.0;
    int m_grid = 201;
    double kernel_width = 1.0;
    double sample_spacing = 0.1;
    std::vector<double> spike_positions = {-3.1, -0.9, 1.1, 3.0};
    std::vector<double> spike_coefficients = {1.0, -0.8, 1.2, 0.9};
    double snr_db = 20.7;
    int n_seeds = 10;
    unsigned seed = 20260815;
    SolverConfig solver;
    double mass_threshold = 1e-2;      // relative to max |x|, for clustering
    int cluster_gap_cells = 3;         // index gap that starts a new cluster
    double center_tolerance_cells = 2.0;

    void validate() const {
        if (m_grid < 2 || !(grid_hi > grid_lo)) throw bad_config("bad parameter grid");
        if (!(kernel_width > 0) || !(sample_spacing > 0))
            throw bad_config("kernel width and sample spacing must be positive");
        if (spike_positions.empty() ||
            spike_positions.size() != spike_coefficients.size())
            throw bad_config("need matching spike positions and coefficients");
        if (n_seeds < 1 || cluster_gap_cells < 1 || !(mass_threshold > 0) ||
            !(center_tolerance_cells > 0))
            throw bad_config("bad noise-demo parameters");
        solver.validate();
    }
};

struct MassCluster {
    double center = 0;  // |x|-weighted mean parameter
    double mass = 0;
    double sign = 0;
    int first_index = 0;
    int last_index = 0;
};

// contiguous runs (up to gap_cells) of entries above threshold*max|x|
inline std::vector<MassCluster> mass_clusters(const Eigen::VectorXd& x,
                                              const ParameterGrid& grid,
                                              double threshold, int gap_cells) {
    std::vector<MassCluster> out;
    const double cutoff = threshold * x.lpNorm<Eigen::Infinity>();
    if (!(cutoff > 0)) return out;
    int prev = -1;
    for (int j = 0; j < x.size(); ++j) {
        if (std::abs(x[j]) <= cutoff) continue;
        if (prev < 0 || j - prev > gap_cells) {
            out.emplace_back();
            out.back().first_index = j;
        }
        auto& c = out.back();
        c.center += std::abs(x[j]) * grid.point1(j);
        c.mass += std::abs(x[j]);
        c.sign += x[j];
        c.last_index = j;
        prev = j;
    }
    for (auto& c : out) {
        c.center /= c.mass;
        c.sign = c.sign > 0 ? 1.0 : -1.0;
    }
    return out;
}

struct NoiseTrial {
    unsigned seed = 0;
    double noise_norm = 0;
    bool converged = false;
    std::vector<double> spike_offsets_cells;  // per true spike, matched-cluster offset
    bool all_within = false;
};

struct NoiseDemoReport {
    std::vector<NoiseTrial> trials;
    bool all_trials_within = true;
    Eigen::VectorXd grid_points, truth, last_estimate;  // from the final seed

    std::string to_csv() const {
        std::ostringstream os;
        os << "seed,noise_norm,converged,max_offset_cells,all_within\n";
        for (const auto& t : trials) {
            double worst = 0;
            for (double o : t.spike_offsets_cells) worst = std::max(worst, o);
            os << t.seed << ',' << detail::format_number(t.noise_norm) << ','
               << (t.converged ? 1 : 0) << ',' << detail::format_number(worst) << ','
               << (t.all_within ? 1 : 0) << '\n';
        }
        return os.str();
    }

    std::string estimate_csv() const {
        std::ostringstream os;
        os << "theta,truth,estimate\n";
        for (int j = 0; j < grid_points.size(); ++j)
            os << detail::format_number(grid_points[j]) << ','
               << detail::format_number(truth[j]) << ','
               << detail::format_number(last_estimate[j]) << '\n';
        return os.str();
    }
};

// Plant spikes on the Ricker-kernel grid, add norm-calibrated noise at the
// configured SNR, solve the denoise program with the exact noise norm, and
// check every true spike has a recovered mass cluster of matching sign whose
// weighted center lands within the cell tolerance.
inline NoiseDemoReport run_noise_demo(const NoiseDemoConfig& config) {
    config.validate();
    const auto grid = ParameterGrid::uniform(config.grid_lo, config.grid_hi, config.m_grid);
    const auto dict = ricker_dictionary(
        KernelSpec::ricker(config.kernel_width,
                           default_samples(grid, config.kernel_width,
                                           config.sample_spacing)),
        grid);
    const double cell =
        (config.grid_hi - config.grid_lo) / (config.m_grid - 1);

    const int k = static_cast<int>(config.spike_positions.size());
    Eigen::VectorXd planted = Eigen::VectorXd::Zero(dict.m());
    std::vector<int> true_idx(k);
    for (int i = 0; i < k; ++i) {
        true_idx[i] =
            grid.nearest_index(Eigen::VectorXd::Constant(1, config.spike_positions[i]));
        if (planted[true_idx[i]] != 0) throw duplicate_support_point("spikes collide");
        planted[true_idx[i]] = config.spike_coefficients[i];
    }
    const Eigen::VectorXd clean = dict.columns * planted;
    const double target_noise = clean.norm() / std::pow(10.0, config.snr_db / 20.0);

    NoiseDemoReport report;
    report.grid_points.resize(dict.m());
    for (int j = 0; j < dict.m(); ++j) report.grid_points[j] = grid.point1(j);
    report.truth = planted;

    for (int trial = 0; trial < config.n_seeds; ++trial) {
        NoiseTrial t;
        t.seed = config.seed + static_cast<unsigned>(trial);
        Rng rng(t.seed);
        Eigen::VectorXd z = rng.normal_vector(static_cast<int>(clean.size()));
        z *= target_noise / z.norm();
        t.noise_norm = z.norm();

        const auto sol =
            solve_bp_denoise(dict, (clean + z).eval(), t.noise_norm, config.solver);
        t.converged = sol.converged;

        const auto clusters = mass_clusters(sol.x, grid, config.mass_threshold,
                                            config.cluster_gap_cells);
        t.all_within = sol.converged;
        for (int i = 0; i < k; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : clusters) {
                if (c.sign * config.spike_coefficients[i] <= 0) continue;
                best = std::min(best,
                                std::abs(c.center - grid.point1(true_idx[i])) / cell);
            }
            t.spike_offsets_cells.push_back(best);
            if (!(best <= config.center_tolerance_cells)) t.all_within = false;
        }
        report.all_trials_within = report.all_trials_within && t.all_within;
        report.last_estimate = sol.x;
        report.trials.push_back(std::move(t));
    }
    return report;
}

struct CertificateDemoConfig {
    std::string model = "heat";  // gaussian | ricker | heat
    HeatModelConfig heat;
    double grid_lo = -6.0;
    double grid_hi = 6.0;
    int m_grid = 601;
    double kernel_width = 1.0;
    double sample_spacing = 0.1;
    std::vector<int> support;     // defaults chosen per model when empty
    std::vector<double> signs;    // defaults to alternating +1/-1
    std::vector<double> near_widths;
};

struct CertificateDemoResult {
    Certificate certificate;
    VerificationReport report;
    Eigen::VectorXd grid_points;

    // the certificate curve next to its per-source value/slope components
    std::string curves_csv() const {
        const int k = static_cast<int>(certificate.alpha.size());
        std::ostringstream os;
        os << "eta,Q";
        for (int i = 0; i < k; ++i) os << ",value_" << i;
        for (int i = 0; i < k; ++i) os << ",slope_" << i;
        os << '\n';
        for (int j = 0; j < grid_points.size(); ++j) {
            os << detail::format_number(grid_points[j]) << ','
               << detail::format_number(certificate.Q[j]);
            for (int i = 0; i < k; ++i)
                os << ','
                   << detail::format_number(certificate.alpha[i] *
                                            certificate.profiles[i].rho00[j]);
            for (int i = 0; i < k; ++i)
                os << ','
                   << detail::format_number(certificate.beta(i, 0) /
                                            certificate.profiles[i].normalizer1 *
                                            certificate.profiles[i].rho10[j]);
            os << '\n';
        }
        return os.str();
    }

    std::string report_text() const {
        std::ostringstream os;
        os << "interpolation: " << (report.interpolation_ok ? "ok" : "FAILED")
           << " (value residual " << detail::format_number(report.value_residual)
           << ", slope residual " << detail::format_number(report.slope_residual)
           << ")\n";
        os << "bounded off near regions: " << (report.bounded_ok ? "ok" : "FAILED")
           << " (max |Q| " << detail::format_number(report.max_abs_off_near)
           << " at eta " << detail::format_number(report.worst_location) << ")\n";
        os << "concave on near regions: " << (report.concave_ok ? "ok" : "FAILED")
           << " (max aligned curvature "
           << detail::format_number(report.max_aligned_curvature) << ")\n";
        if (report.refined)
            os << "sub-grid sweep: max |Q| "
               << detail::format_number(report.refined_max_abs) << '\n';
        os << "certificate " << (report.valid ? "VALID" : "INVALID") << '\n';
        return os.str();
    }
};

inline CertificateDemoResult run_certificate_demo(const CertificateDemoConfig& config) {
    Dictionary dict;
    std::vector<int> support = config.support;
    std::vector<double> near = config.near_widths;
    if (config.model == "heat") {
        dict = heat_dictionary(config.heat);
        // the correlation stays concave only within a fraction of the kernel
        // width; size the near regions off the narrowest (slowest) kernel
        if (near.empty())
            near = {0.25 * std::sqrt(4.0 * config.heat.c_min * config.heat.final_time)};
    } else if (config.model == "gaussian" || config.model == "ricker") {
        const auto grid =
            ParameterGrid::uniform(config.grid_lo, config.grid_hi, config.m_grid);
        const auto samples =
            default_samples(grid, config.kernel_width, config.sample_spacing);
        dict = config.model == "gaussian"
                   ? gaussian_dictionary(
                         KernelSpec::gaussian(config.kernel_width, samples), grid)
                   : ricker_dictionary(
                         KernelSpec::ricker(config.kernel_width, samples), grid);
        if (near.empty()) near = {config.kernel_width};
    } else {
        throw bad_config("unknown model '" + config.model + "'");
    }
    if (support.empty())
        support = {dict.m() / 6, dict.m() / 2, (5 * dict.m()) / 6};
    Eigen::VectorXd signs(support.size());
    if (config.signs.empty()) {
        for (size_t i = 0; i < support.size(); ++i) signs[i] = i % 2 == 0 ? 1.0 : -1.0;
    } else {
        if (config.signs.size() != support.size())
            throw dimension_mismatch("one sign per support point");
        for (size_t i = 0; i < support.size(); ++i) signs[i] = config.signs[i];
    }

    CertificateDemoResult result;
    result.certificate = build_certificate(dict, support, signs);
    result.report = verify_certificate(dict, result.certificate, near);
    result.grid_points.resize(dict.m());
    for (int j = 0; j < dict.m(); ++j) result.grid_points[j] = dict.grid.point1(j);
    return result;
}

// Reference envelope constants for the unit-width Gaussian correlation model
// (near width 1, no decay offset, unit decay scale). The audit feeds them
// through the separation pipeline, which should land at the known minimum
// separation of about 6.6.
inline DecayConstants gaussian_reference_constants() {
    DecayConstants c;
    c.near_width = {1.0};
    c.decay_offset = {0.0};
    c.decay_scale = {1.0};
    c.gamma = {0.185, 0.983, 0.788, 0.868};
    c.C << 2.818, 3.348, 4.200, 6.786, 8.060, 10.113;
    return c;
}

struct TheoremConstantsReport {
    DecayConstants constants;
    double product_residual1 = 0;
    double product_residual2 = 0;
    RequiredDelta required;
    double reference = 6.6;
    double deviation = 0;
    bool within_tolerance = false;

    std::string to_text() const {
        std::ostringstream os;
        os << "product residuals: " << detail::format_number(product_residual1) << ", "
           << detail::format_number(product_residual2) << '\n';
        os << "log term: " << detail::format_number(required.log_term) << '\n';
        os << "lambda1:  " << detail::format_number(required.lambda1) << '\n';
        os << "lambda2:  " << detail::format_number(required.lambda2) << '\n';
        os << "required separation: " << detail::format_number(required.delta_req)
           << '\n';
        os << "absolute separation: " << detail::format_number(required.absolute)
           << " (reference " << detail::format_number(reference) << ", deviation "
           << detail::format_number(deviation) << ")\n";
        os << (within_tolerance ? "PASS" : "FAIL") << '\n';
        return os.str();
    }
};

inline TheoremConstantsReport audit_theorem_constants() {
    TheoremConstantsReport rep;
    rep.constants = gaussian_reference_constants();
    rep.product_residual1 = rep.constants.product_residual1();
    rep.product_residual2 = rep.constants.product_residual2();
    rep.required = required_delta(rep.constants);
    rep.deviation = std::abs(rep.required.absolute - rep.reference);
    rep.within_tolerance = rep.deviation < 0.05;
    return rep;
}

}  // namespace snl

#endif
