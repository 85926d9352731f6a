#pragma once

#include "ttoi/tensor.hpp"

#include <cstddef>
#include <cstdint>

namespace ttoi {

enum class FrameSide { left, right };

struct FrameDiagnostics {
    /// sigma_r and sigma_{r+1} coincide (within 1e-12 sigma_1): the subspace is
    /// not unique and any valid frame was returned.
    bool gap_degenerate = false;
    /// Fewer than r numerically nonzero singular values; trailing columns are a
    /// deterministic orthonormal completion.
    bool rank_padded = false;
    bool power_iteration = false;
    int iterations = 0;
    bool converged = true;
};

/// p x r matrix with orthonormal columns, tagged with the side of the SVD it
/// came from.
struct OrthonormalFrame {
    Matrix basis;
    FrameSide side = FrameSide::left;
    Vector singular_values;  ///< leading r singular values of the source matrix
    FrameDiagnostics diagnostics;

    Eigen::Index dim() const noexcept { return basis.rows(); }
    Eigen::Index rank() const noexcept { return basis.cols(); }
};

struct SvdOptions {
    /// Matrices whose smaller side is at most this use a dense QR + Jacobi SVD;
    /// larger ones use block power iteration.
    Eigen::Index dense_threshold = 64;
    double tolerance = 1e-10;
    int max_iterations = 300;
    std::uint64_t seed = 0x7470u;
};

/// Leading r left singular vectors (SVD_r^L). Requires 1 <= r <= min(rows, cols).
OrthonormalFrame svd_left(const Eigen::Ref<const Matrix>& a, std::size_t r, const SvdOptions& options = {});

/// Leading r right singular vectors (SVD_r^R); svd_left of the transpose.
OrthonormalFrame svd_right(const Eigen::Ref<const Matrix>& a, std::size_t r, const SvdOptions& options = {});

/// ||sin Theta(U, V)|| = sqrt(1 - s_r^2(U^T V)) for two p x r frames.
double sin_theta(const Eigen::Ref<const Matrix>& u, const Eigen::Ref<const Matrix>& v);
double sin_theta(const OrthonormalFrame& u, const OrthonormalFrame& v);

/// s_min(A) = s_{min(rows, cols)}(A).
double smallest_singular_value(const Eigen::Ref<const Matrix>& a);

/// All min(rows, cols) singular values in non-increasing order.
Vector singular_values(const Eigen::Ref<const Matrix>& a);

/// Flip each column so its largest-magnitude entry (lowest index on ties) is positive.
void apply_sign_convention(Matrix& frame);

}  // namespace ttoi
