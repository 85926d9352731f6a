#pragma once

// High-order Markov chains with low-TT-rank transition tensors.
//
// States are 0-based here; files and the CLI use 1-based labels.
// A chain of order d-1 on p states has transition tensor P of shape (p, ..., p)
// (d modes) with P[i_1, ..., i_d] = P(X_{t+d} = i_d | X_{t+1} = i_1, ..., X_{t+d-1} = i_{d-1}),
// so every mode-d fiber is a probability vector.

#include "ttoi/tt.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ttoi {

struct MarkovModel {
    std::size_t states = 0;
    std::size_t order = 0;  ///< d - 1
    DenseTensor transition;

    std::size_t tensor_order() const noexcept { return order + 1; }
};

struct Trajectory {
    std::vector<std::uint32_t> states;  ///< 0-based
};

/// Checks nonnegativity and unit fiber sums within `tol`; throws ArgumentError.
void validate_transition(const DenseTensor& p, double tol = 1e-12);

/// Largest |sum of a mode-d fiber - 1| over all prefixes.
double max_fiber_sum_error(const DenseTensor& p);

/// Transition tensor ⟦G_1, G_2, ..., G_d⟧ from standard-normal cores whose
/// rows are normalized in absolute value, so every fiber is a distribution
/// and the TT-ranks are at most `ranks`.
MarkovModel generate_aggregatable(std::size_t p, std::size_t d, const Ranks& ranks, std::uint64_t seed);

/// N = n_steps states: the first d-1 uniform on [p], the rest drawn from the
/// fiber of the preceding d-1 states.
Trajectory sample_trajectory(const MarkovModel& model, std::size_t n_steps, std::uint64_t seed);

/// Counts over all overlapping windows of length d, normalized per prefix;
/// prefixes never followed by a state get the uniform fiber 1/p.
DenseTensor empirical_from_trajectory(const Trajectory& trajectory, std::size_t p, std::size_t d);

/// Fiber-wise frequencies of n independent next-state draws per prefix.
DenseTensor empirical_generative(const MarkovModel& model, std::size_t n, std::uint64_t seed);

/// Euclidean projection onto {x >= 0, sum x = 1} by sort and threshold.
std::vector<double> simplex_project(std::span<const double> v);

/// Projects every mode-d fiber of `t` onto the simplex, in place.
void project_fibers(DenseTensor& t);

/// One-step TTOI: t_max = 1, epsilon = 0.
TtoiOptions default_markov_options();

struct TransitionEstimate {
    DenseTensor projected;      ///< P^, fibers on the simplex
    DenseTensor unprojected;    ///< P^(1), the TTOI output before projection
    TtoiDiagnostics diagnostics;
};

/// TTOI (default one iteration) on an empirical transition tensor followed by
/// simplex projection of every mode-d fiber.
TransitionEstimate estimate_transition(const DenseTensor& empirical, const Ranks& ranks,
                                       TtoiOptions options = default_markov_options());

}  // namespace ttoi
