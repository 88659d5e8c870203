#ifndef SNL_TYPES_HPP
#define SNL_TYPES_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"

namespace snl {

// Sparse signed measure: k support points (rows of `support`) with nonzero
// coefficients. 1D supports are kept sorted ascending, 2D lexicographically,
// so certificate and separation code can rely on the ordering.
class AtomicMeasure {
  public:
    AtomicMeasure(Eigen::MatrixXd support, Eigen::VectorXd coefficients) {
        if (support.rows() == 0) throw empty_support("measure needs at least one spike");
        if (support.rows() != coefficients.size())
            throw dimension_mismatch("support/coefficient count mismatch");
        if (support.cols() < 1 || support.cols() > 2)
            throw bad_config("support must live in R^1 or R^2");
        const int k = static_cast<int>(support.rows());
        std::vector<int> order(k);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            for (int l = 0; l < support.cols(); ++l) {
                if (support(a, l) != support(b, l)) return support(a, l) < support(b, l);
            }
            return false;
        });
        support_.resize(k, support.cols());
        coefficients_.resize(k);
        for (int i = 0; i < k; ++i) {
            support_.row(i) = support.row(order[i]);
            coefficients_[i] = coefficients[order[i]];
            if (coefficients_[i] == 0.0) throw bad_config("coefficients must be nonzero");
            if (i > 0 && (support_.row(i) - support_.row(i - 1)).norm() == 0.0)
                throw duplicate_support_point("support points must be distinct");
        }
    }

    static AtomicMeasure from_1d(const std::vector<double>& points,
                                 const Eigen::VectorXd& coefficients) {
        Eigen::MatrixXd s(points.size(), 1);
        for (size_t i = 0; i < points.size(); ++i) s(i, 0) = points[i];
        return AtomicMeasure(std::move(s), coefficients);
    }

    int k() const { return static_cast<int>(support_.rows()); }
    int dim() const { return static_cast<int>(support_.cols()); }
    const Eigen::MatrixXd& support() const { return support_; }
    const Eigen::VectorXd& coefficients() const { return coefficients_; }
    double point1(int i) const { return support_(i, 0); }

    std::vector<int> grid_indices(const ParameterGrid& grid, double tol = 1e-12) const {
        std::vector<int> idx(k());
        for (int i = 0; i < k(); ++i) idx[i] = grid.index_of(support_.row(i).transpose(), tol);
        return idx;
    }

  private:
    Eigen::MatrixXd support_;
    Eigen::VectorXd coefficients_;
};

// Normalized feature matrix over a parameter grid with derivative matrices of
// the normalized column map. deriv1 has one matrix per coordinate; deriv2 is
// {d2} in 1D and {d11, d22, d12} in 2D, and may be empty when a model cannot
// provide second derivatives.
struct Dictionary {
    // one row per matrix row; 1 column for scalar sample locations (2 for 2D
    // sensor positions)
    Eigen::MatrixXd sample_locations;
    ParameterGrid grid;
    Eigen::MatrixXd columns;
    std::vector<Eigen::MatrixXd> deriv1;
    std::vector<Eigen::MatrixXd> deriv2;
    std::string provenance;
    // analytic models can evaluate a normalized column at off-grid parameters,
    // which certificate verification uses for sub-grid sweeps
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> evaluator;

    int n() const { return static_cast<int>(columns.rows()); }
    int m() const { return static_cast<int>(columns.cols()); }
    int p() const { return grid.dim(); }

    const Eigen::MatrixXd& d1(int l = 0) const {
        if (deriv1.empty()) throw missing_derivatives("dictionary has no first derivatives");
        return deriv1[l];
    }
    const Eigen::MatrixXd& d2(int which = 0) const {
        if (deriv2.empty()) throw missing_derivatives("dictionary has no second derivatives");
        return deriv2[which];
    }
};

struct MeasurementVector {
    Eigen::VectorXd y;
    double noise_level = 0.0;
    std::uint64_t seed = 0;
};

}  // namespace snl

#endif
