#pragma once

// Dense tensors and the sequential matricization algebra used by TT-SVD and
// TTOI.
//
// Storage is mode-1-fastest: entry (i_1, ..., i_d) (0-based) lives at
//   i_1 + p_1 * (i_2 + p_2 * (i_3 + ...)).
// With Eigen's column-major matrices this makes every sequential unfolding
// [X]_k, and every reshape between (q1 x q2 q3) and (q1 q2 x q3), a pure
// reinterpretation of the same buffer.

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace ttoi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Dims = std::vector<std::size_t>;
using Ranks = std::vector<std::size_t>;

using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

/// Product of `dims[first, last)`, throwing ResourceError on 64-bit overflow
/// or when the result is not addressable by Eigen's index type.
std::size_t checked_product(std::span<const std::size_t> dims, std::size_t first = 0,
                            std::size_t last = static_cast<std::size_t>(-1));

class DenseTensor {
public:
    /// Zero tensor of the given shape. Requires at least one mode and all
    /// dimensions >= 1.
    explicit DenseTensor(Dims dims);
    DenseTensor(Dims dims, std::vector<double> data);

    /// Order-2 tensor holding a copy of `m`.
    static DenseTensor from_matrix(const Eigen::Ref<const Matrix>& m);

    std::size_t order() const noexcept { return dims_.size(); }
    const Dims& dims() const noexcept { return dims_; }
    std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    /// Linear offset of a 0-based multi-index.
    std::size_t offset(std::span<const std::size_t> index) const;

    double& operator()(std::span<const std::size_t> index) { return data_[offset(index)]; }
    double operator()(std::span<const std::size_t> index) const { return data_[offset(index)]; }
    double& at(std::initializer_list<std::size_t> index);
    double at(std::initializer_list<std::size_t> index) const;

    /// Zero-copy view of [X]_k as a (p_1...p_k) x (p_{k+1}...p_d) matrix.
    /// k = d gives a single column.
    ConstMatrixMap unfolding(std::size_t k) const;
    MatrixMap unfolding(std::size_t k);

    double squared_norm() const noexcept;
    double frobenius_norm() const noexcept;

    friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

private:
    Dims dims_;
    std::vector<double> data_;
};

/// Copy of the k-th sequential unfolding, 1 <= k <= d-1 (for d = 1 only k = 1
/// is accepted and yields a 1 x p_1 row).
Matrix sequential_unfold(const DenseTensor& t, std::size_t k);

/// Inverse of sequential_unfold: requires m to be (p_1...p_k) x (p_{k+1}...p_d).
DenseTensor fold(const Eigen::Ref<const Matrix>& m, const Dims& dims, std::size_t k);

/// vec(X) in the mode-1-fastest order.
std::vector<double> vectorize(const DenseTensor& t);

/// Reshape between A (q1 x q2 q3) and A~ (q1 q2 x q3), either direction.
/// The shape pair must factor accordingly; throws ArgumentError otherwise.
Matrix reshape_matrix(const Eigen::Ref<const Matrix>& a, std::size_t rows, std::size_t cols);

/// Explicit Kronecker product. Intended for oracles and small problems.
Matrix kronecker(const Eigen::Ref<const Matrix>& u, const Eigen::Ref<const Matrix>& v);

/// The (i^2 j) x j realignment matrix A^{(i,j)} that maps [T]_i to [T]_j.
Matrix realignment_matrix(std::size_t i, std::size_t j);

/// (prod ⊗ I_p) * b without forming the Kronecker product.
/// prod is P x r, b is (p r) x c; the result is (P p) x c.
Matrix kron_identity_right(const Eigen::Ref<const Matrix>& prod, const Eigen::Ref<const Matrix>& b,
                           std::size_t p);

/// a * (prod ⊗ I_p) without forming the Kronecker product.
/// a is m x (p P), prod is P x r; the result is m x (p r).
Matrix times_kron_identity(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& prod,
                           std::size_t p);

struct ForwardProducts {
    std::vector<Matrix> s;        ///< S_1 ... S_{d-1}
    std::vector<Matrix> s_tilde;  ///< S~_1 ... S~_{d-1}
};

struct BackwardProducts {
    std::vector<Matrix> w;        ///< W_1 ... W_{d-1} (index k-1)
    std::vector<Matrix> w_tilde;  ///< W~_1 ... W~_{d-1} (index k-1)
};

/// Forward sequential multiplication: S_1 = [T]_1, S~_k = M_k^T S_k and
/// S_{k+1} = Reshape(S~_k, r_k p_{k+1}, p_{k+2}...p_d).
/// factors[k-1] = M_k with shape (r_{k-1} p_k) x r_k, k = 1..d-1.
ForwardProducts forward_sequential_multiply(const DenseTensor& t, std::span<const Matrix> factors);

/// Backward sequential multiplication: W_{d-1} = [T]_{d-1}, W~_k = W_k B_{k+1}
/// and W_{k-1} = Reshape(W~_k, p_1...p_{k-1}, p_k r_k).
/// factors[k-2] = B_k with shape (p_k r_k) x r_{k-1}, k = 2..d.
BackwardProducts backward_sequential_multiply(const DenseTensor& t, std::span<const Matrix> factors);

}  // namespace ttoi
