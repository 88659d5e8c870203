#ifndef SNL_GRID_HPP
#define SNL_GRID_HPP

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "errors.hpp"

namespace snl {

// Uniform parameter grid in 1 or 2 dimensions. 2D grids are tensor grids;
// flattened indices run with axis 0 fastest: j = j0 + m0*j1.
class ParameterGrid {
  public:
    ParameterGrid() = default;

    explicit ParameterGrid(Eigen::VectorXd axis) { init({std::move(axis)}); }

    ParameterGrid(Eigen::VectorXd axis0, Eigen::VectorXd axis1) {
        init({std::move(axis0), std::move(axis1)});
    }

    static ParameterGrid uniform(double lo, double hi, int m) {
        if (m < 2 || !(hi > lo)) throw empty_grid("grid needs m >= 2 and hi > lo");
        Eigen::VectorXd ax = Eigen::VectorXd::LinSpaced(m, lo, hi);
        return ParameterGrid(std::move(ax));
    }

    static ParameterGrid uniform2(double lo0, double hi0, int m0, double lo1, double hi1, int m1) {
        if (m0 < 2 || m1 < 2 || !(hi0 > lo0) || !(hi1 > lo1))
            throw empty_grid("tensor grid needs m >= 2 and hi > lo per axis");
        return ParameterGrid(Eigen::VectorXd::LinSpaced(m0, lo0, hi0),
                             Eigen::VectorXd::LinSpaced(m1, lo1, hi1));
    }

    int dim() const { return static_cast<int>(axes_.size()); }
    int size() const { return total_; }
    int axis_size(int l) const { return static_cast<int>(axes_[l].size()); }
    const Eigen::VectorXd& axis(int l = 0) const { return axes_[l]; }
    double spacing(int l = 0) const { return spacing_[l]; }

    // flattened point, as a dim-length vector
    Eigen::VectorXd point(int j) const {
        Eigen::VectorXd p(dim());
        if (dim() == 1) {
            p[0] = axes_[0][j];
        } else {
            const int m0 = axis_size(0);
            p[0] = axes_[0][j % m0];
            p[1] = axes_[1][j / m0];
        }
        return p;
    }

    double point1(int j) const { return axes_[0][j]; }

    // nearest flattened index to p
    int nearest_index(const Eigen::VectorXd& p) const {
        if (p.size() != dim()) throw dimension_mismatch("point dim does not match grid dim");
        int idx = nearest_on_axis(0, p[0]);
        if (dim() == 2) idx += axis_size(0) * nearest_on_axis(1, p[1]);
        return idx;
    }

    // index of a point that must coincide with a grid node
    int index_of(const Eigen::VectorXd& p, double tol = 1e-12) const {
        const int j = nearest_index(p);
        if ((point(j) - p).lpNorm<Eigen::Infinity>() > tol)
            throw support_off_grid("point is not on the grid");
        return j;
    }

  private:
    void init(std::vector<Eigen::VectorXd> axes) {
        axes_ = std::move(axes);
        total_ = 1;
        for (const auto& ax : axes_) {
            const int m = static_cast<int>(ax.size());
            if (m < 2) throw empty_grid("grid axis needs at least 2 nodes");
            const double h = (ax[m - 1] - ax[0]) / (m - 1);
            if (!(h > 0)) throw empty_grid("grid axis must be strictly increasing");
            for (int i = 0; i + 1 < m; ++i) {
                const double step = ax[i + 1] - ax[i];
                if (!(step > 0)) throw empty_grid("grid axis must be strictly increasing");
                if (std::abs(step - h) > 1e-6 * h)
                    throw bad_config("grid axis must be uniformly spaced");
            }
            spacing_.push_back(h);
            total_ *= m;
        }
    }

    int nearest_on_axis(int l, double v) const {
        const auto& ax = axes_[l];
        const int m = static_cast<int>(ax.size());
        int j = static_cast<int>(std::lround((v - ax[0]) / spacing_[l]));
        if (j < 0) j = 0;
        if (j > m - 1) j = m - 1;
        // guard against rounding at non-tiny distances
        if (j > 0 && std::abs(ax[j - 1] - v) < std::abs(ax[j] - v)) --j;
        if (j < m - 1 && std::abs(ax[j + 1] - v) < std::abs(ax[j] - v)) ++j;
        return j;
    }

    std::vector<Eigen::VectorXd> axes_;
    std::vector<double> spacing_;
    int total_ = 0;
};

}  // namespace snl

#endif
