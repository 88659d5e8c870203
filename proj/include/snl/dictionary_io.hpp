#ifndef SNL_DICTIONARY_IO_HPP
#define SNL_DICTIONARY_IO_HPP

#include <Eigen/Dense>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "core.hpp"
#include "csv.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "types.hpp"

namespace snl {

// Dictionary file format: a CSV matrix (rows = samples, columns = grid
// points) plus a JSON sidecar <csv path>.json holding the grid axes, sample
// locations, and provenance.

inline std::string sidecar_path(const std::string& csv_path) { return csv_path + ".json"; }

inline void save_dictionary(const Dictionary& dict, const std::string& csv_path) {
    write_csv_matrix(csv_path, dict.columns);
    nlohmann::json meta;
    meta["dim"] = dict.p();
    for (int l = 0; l < dict.p(); ++l) {
        std::vector<double> ax(dict.grid.axis(l).data(),
                               dict.grid.axis(l).data() + dict.grid.axis_size(l));
        meta["axes"].push_back(ax);
    }
    for (Eigen::Index i = 0; i < dict.sample_locations.rows(); ++i) {
        if (dict.sample_locations.cols() == 1) {
            meta["sample_locations"].push_back(dict.sample_locations(i, 0));
        } else {
            meta["sample_locations"].push_back(
                std::vector<double>{dict.sample_locations(i, 0), dict.sample_locations(i, 1)});
        }
    }
    meta["provenance"] = dict.provenance;
    std::ofstream out(sidecar_path(csv_path));
    if (!out) throw io_error("cannot open for writing: " + sidecar_path(csv_path));
    out << meta.dump(2) << '\n';
}

inline Dictionary load_dictionary(const std::string& csv_path) {
    Eigen::MatrixXd raw = read_csv_matrix(csv_path);
    nlohmann::json meta;
    {
        std::ifstream in(sidecar_path(csv_path));
        if (!in) throw io_error("missing sidecar: " + sidecar_path(csv_path));
        try {
            in >> meta;
        } catch (const nlohmann::json::exception& e) {
            throw parse_error(std::string("bad sidecar JSON: ") + e.what());
        }
    }

    const int dim = meta.at("dim").get<int>();
    if (dim != 1 && dim != 2) throw parse_error("sidecar dim must be 1 or 2");
    std::vector<Eigen::VectorXd> axes;
    for (const auto& ax : meta.at("axes")) {
        Eigen::VectorXd v(ax.size());
        for (size_t i = 0; i < ax.size(); ++i) v[i] = ax[i].get<double>();
        axes.push_back(std::move(v));
    }
    if (static_cast<int>(axes.size()) != dim) throw parse_error("axes count != dim");
    ParameterGrid grid = (dim == 1) ? ParameterGrid(axes[0]) : ParameterGrid(axes[0], axes[1]);
    if (grid.size() != raw.cols())
        throw dimension_mismatch("CSV column count does not match grid size");

    const auto& locs = meta.at("sample_locations");
    if (static_cast<Eigen::Index>(locs.size()) != raw.rows())
        throw dimension_mismatch("CSV row count does not match sample_locations");
    const int loc_dim = locs.empty() || !locs[0].is_array() ? 1 : static_cast<int>(locs[0].size());
    Eigen::MatrixXd samples(raw.rows(), loc_dim);
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
        if (loc_dim == 1) {
            samples(i, 0) = locs[i].get<double>();
        } else {
            for (int l = 0; l < loc_dim; ++l) samples(i, l) = locs[i][l].get<double>();
        }
    }

    Dictionary dict;
    dict.grid = std::move(grid);
    dict.sample_locations = std::move(samples);
    dict.provenance = meta.value("provenance", std::string("loaded:") + csv_path);
    dict.columns = std::move(raw);
    for (int j = 0; j < dict.m(); ++j) {
        const double norm = dict.columns.col(j).norm();
        if (norm < 1e-14) throw degenerate_column("loaded column norm underflows");
        dict.columns.col(j) /= norm;
    }
    if (dim == 1 && dict.m() >= 3) attach_fd_derivatives(dict);
    return dict;
}

}  // namespace snl

#endif
