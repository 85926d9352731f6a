#pragma once

#include "ttoi/tt.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace ttoi {

/// Lower bound applied to ||Y - X(r)||^2 before taking its logarithm.
inline constexpr double kResidualFloor = 1e-300;

struct BicResult {
    Ranks ranks;
    double score = 0.0;
    double residual_sq = 0.0;  ///< ||Y - X(r)||_F^2 as measured
    double residual_floor = kResidualFloor;
    std::size_t param_count = 0;
    std::vector<std::pair<Ranks, double>> search_log;
};

/// p_1 r_1 + sum_{k=2}^{d-1} p_k r_{k-1} r_k + p_d r_{d-1}
std::size_t tt_param_count(const Dims& dims, const Ranks& ranks);

/// (prod p_k) log(max(residual_sq, floor)) + param_count * sum log p_k
double bic_value(const Dims& dims, std::size_t param_count, double residual_sq, double floor);

/// Fit floor actually used for a given data tensor: kResidualFloor raised to
/// the level where a perfect fit is indistinguishable from rounding error.
double bic_residual_floor(const DenseTensor& y);

/// Runs TTOI at `ranks` and evaluates the criterion.
BicResult bic_score(const DenseTensor& y, const Ranks& ranks, const TtoiOptions& options = {});

enum class SearchStrategy {
    automatic,   ///< exhaustive when the box has <= 1024 points, greedy otherwise
    exhaustive,  ///< every feasible point of [1, r_max]^{d-1}
    greedy,      ///< coordinate descent from (1, ..., 1), two full sweeps
};

struct SelectOptions {
    SearchStrategy strategy = SearchStrategy::automatic;
    TtoiOptions ttoi;
};

/// Minimizes the criterion over the rank box [1, r_max]. Infeasible points in
/// the box are skipped. Ties go to the smaller parameter count, then to the
/// lexicographically smaller rank tuple.
BicResult select_ranks(const DenseTensor& y, const Ranks& r_max, const SelectOptions& options = {});

}  // namespace ttoi
