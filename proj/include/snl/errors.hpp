#ifndef SNL_ERRORS_HPP
#define SNL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace snl {

struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

#define SNL_DEFINE_ERROR(name)                                      \
    struct name : error {                                           \
        explicit name(const std::string& msg) : error(msg) {}       \
    }

SNL_DEFINE_ERROR(dimension_mismatch);
SNL_DEFINE_ERROR(empty_grid);
SNL_DEFINE_ERROR(support_off_grid);
SNL_DEFINE_ERROR(duplicate_support_point);
SNL_DEFINE_ERROR(empty_support);
SNL_DEFINE_ERROR(zero_norm_column);
SNL_DEFINE_ERROR(degenerate_column);
SNL_DEFINE_ERROR(degenerate_sensitivity);
SNL_DEFINE_ERROR(non_finite_value);
SNL_DEFINE_ERROR(need_two_points);
SNL_DEFINE_ERROR(separation_too_small);
SNL_DEFINE_ERROR(algebraic_violated);
SNL_DEFINE_ERROR(gamma2_not_less_than_one);
SNL_DEFINE_ERROR(near_region_not_concave);
SNL_DEFINE_ERROR(no_decay);
SNL_DEFINE_ERROR(system_singular);
SNL_DEFINE_ERROR(ill_conditioned_system);
SNL_DEFINE_ERROR(degenerate_directions);
SNL_DEFINE_ERROR(overlapping_decay_regions);
SNL_DEFINE_ERROR(infeasible_problem);
SNL_DEFINE_ERROR(problem_too_large);
SNL_DEFINE_ERROR(missing_derivatives);
SNL_DEFINE_ERROR(bad_config);
SNL_DEFINE_ERROR(io_error);
SNL_DEFINE_ERROR(parse_error);

#undef SNL_DEFINE_ERROR

}  // namespace snl

#endif
