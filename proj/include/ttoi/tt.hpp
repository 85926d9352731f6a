#pragma once

// Tensor-train container, TT-SVD initialization and the TTOI refinement.

#include "ttoi/linalg.hpp"
#include "ttoi/tensor.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace ttoi {

/// X_{i_1...i_d} = G_1[i_1,:] G_2[:,i_2,:] ... G_{d-1}[:,i_{d-1},:] G_d[i_d,:]^T
///
/// The first core is p_1 x r_1, the last is p_d x r_{d-1}, and the middle cores
/// are order-3 tensors of shape (r_{k-1}, p_k, r_k). Because storage is
/// mode-1-fastest, a middle core's buffer is also its (r_{k-1} p_k) x r_k
/// left unfolding.
class TTTensor {
public:
    TTTensor(Matrix first, std::vector<DenseTensor> middle, Matrix last);

    std::size_t order() const noexcept { return middle_.size() + 2; }
    Dims dims() const;
    /// (r_1, ..., r_{d-1})
    Ranks ranks() const;

    const Matrix& first() const noexcept { return first_; }
    const Matrix& last() const noexcept { return last_; }
    /// Middle core for mode k, 2 <= k <= d-1.
    const DenseTensor& middle(std::size_t k) const { return middle_.at(k - 2); }
    const std::vector<DenseTensor>& middles() const noexcept { return middle_; }

    /// (r_{k-1} p_k) x r_k left unfolding of core k, 1 <= k <= d-1.
    Matrix left_unfolding(std::size_t k) const;

private:
    Matrix first_;
    std::vector<DenseTensor> middle_;
    Matrix last_;
};

/// Dense tensor represented by the train, by a left-to-right sweep.
DenseTensor contract(const TTTensor& x);

/// Builds the train whose middle cores are reshaped from left-orthonormal
/// factors U_k ((r_{k-1} p_k) x r_k), with an explicit first and last core.
TTTensor tt_from_left_factors(const Matrix& first, const std::vector<Matrix>& middle_factors,
                              const Matrix& last, const Dims& dims);

/// Builds the train ⟦V_1, V_2, ..., V_d⟧ from right factors V_k ((p_k r_k) x r_{k-1}),
/// 2 <= k <= d, and the p_1 x r_1 first core V_1.
TTTensor tt_from_right_factors(const Matrix& first, const std::vector<Matrix>& right_factors,
                               const Dims& dims);

/// Checks 1 <= r_k <= min(r_{k-1} p_k, p_{k+1} r_{k+1}) with r_0 = r_d = 1,
/// which also bounds r_k by both sides of [X]_k. Throws ArgumentError.
void validate_ranks(const Dims& dims, const Ranks& ranks);
bool ranks_feasible(const Dims& dims, const Ranks& ranks);

struct SvdFlags {
    bool gap_degenerate = false;
    bool rank_padded = false;
    bool power_not_converged = false;

    void merge(const FrameDiagnostics& d)
    {
        gap_degenerate = gap_degenerate || d.gap_degenerate;
        rank_padded = rank_padded || d.rank_padded;
        power_not_converged = power_not_converged || (d.power_iteration && !d.converged);
    }
};

/// Per-iteration TTOI state. Even iterations (0 = TT-SVD, then forward
/// updates) carry left frames and residuals; odd iterations (backward
/// updates) carry right frames and V_1.
struct TtoiState {
    int iteration = 0;
    Dims dims;
    Ranks ranks;

    std::vector<Matrix> left_frames;   ///< U_1 ... U_{d-1}; U_k is (r_{k-1} p_k) x r_k
    std::vector<Matrix> residuals;     ///< R~_1 ... R~_{d-1}; R~_k is r_k x (p_{k+1}...p_d)
    std::vector<Matrix> right_frames;  ///< V_2 ... V_d; V_k is (p_k r_k) x r_{k-1}
    Matrix v1;                         ///< V_1 = [Y]_1 V_prod, p_1 x r_1

    std::optional<DenseTensor> estimate;  ///< X^(t), present when materialized
    double estimate_sq_norm = 0.0;        ///< ||X^(t)||_F^2 from the compressed factors
    double data_sq_norm = 0.0;            ///< ||Y||_F^2
    /// ||Y||^2 - ||X^(s)||^2 for s = 0..t
    std::vector<double> objective_trace;
    SvdFlags svd_flags;

    bool backward_stage() const noexcept { return iteration % 2 == 1; }
};

struct TtSvdResult {
    TtoiState state;
    TTTensor cores;
};

/// TT-SVD initialization. With materialize = false the dense X^(0) is not formed.
TtSvdResult tt_svd(const DenseTensor& y, const Ranks& ranks, bool materialize = true);

/// Backward half-iteration; `previous` must be at an even iteration.
TtoiState backward_update(const DenseTensor& y, const TtoiState& previous, bool materialize = true);

/// Forward half-iteration; `previous` must be at an odd iteration.
TtoiState forward_update(const DenseTensor& y, const TtoiState& previous, bool materialize = true);

/// TT cores whose contraction is X^(t) for the given state.
TTTensor extract_cores(const TtoiState& state);

struct TtoiOptions {
    /// Stop once ||X^(t)||^2 - ||X^(t-1)||^2 <= epsilon. Unset means 1e-6 ||Y||^2.
    std::optional<double> epsilon;
    int t_max = 10;
    /// Keep a dense copy of every iterate X^(0..t) in the diagnostics.
    bool keep_iterates = false;
};

struct TtoiDiagnostics {
    int iterations = 0;  ///< final t
    bool stopped_by_tolerance = false;
    double epsilon = 0.0;
    double data_sq_norm = 0.0;
    std::vector<double> objective_trace;       ///< ||Y||^2 - ||X^(t)||^2, t = 0..iterations
    std::vector<double> estimate_sq_norms;     ///< ||X^(t)||^2, t = 0..iterations
    std::vector<DenseTensor> iterates;         ///< only with keep_iterates
    SvdFlags svd_flags;
};

struct TtoiResult {
    TTTensor cores;
    DenseTensor estimate;
    TtoiDiagnostics diagnostics;
};

/// Tensor-train orthogonal iteration: TT-SVD followed by alternating
/// backward (odd t) and forward (even t) updates.
TtoiResult ttoi(const DenseTensor& y, const Ranks& ranks, const TtoiOptions& options = {});

struct RankReport {
    Ranks ranks;
    bool degenerate = false;  ///< tensor is numerically zero
};

/// r_k = #{ sigma_i([X]_k) > tol * sigma_1([X]_k) }, k = 1..d-1.
RankReport tt_ranks_of(const DenseTensor& x, double tol);

}  // namespace ttoi
