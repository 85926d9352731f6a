#include "ttoi/tensor.hpp"

#include "ttoi/errors.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace ttoi {

namespace {

std::string shape_string(Eigen::Index rows, Eigen::Index cols)
{
    return std::to_string(rows) + "x" + std::to_string(cols);
}

void require_mode_range(std::size_t k, std::size_t lo, std::size_t hi, const char* what)
{
    if (k < lo || k > hi) {
        throw ArgumentError(std::string(what) + ": mode count " + std::to_string(k) + " outside [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
}

}  // namespace

std::size_t checked_product(std::span<const std::size_t> dims, std::size_t first, std::size_t last)
{
    last = std::min(last, dims.size());
    std::size_t prod = 1;
    for (std::size_t i = first; i < last; ++i) {
        const std::size_t d = dims[i];
        if (d != 0 && prod > std::numeric_limits<std::size_t>::max() / d) {
            throw ResourceError("dimension product overflows 64 bits");
        }
        prod *= d;
    }
    if (prod > static_cast<std::size_t>(std::numeric_limits<Eigen::Index>::max())) {
        throw ResourceError("dimension product exceeds addressable size");
    }
    return prod;
}

DenseTensor::DenseTensor(Dims dims) : dims_(std::move(dims))
{
    if (dims_.empty()) throw ArgumentError("tensor must have at least one mode");
    for (std::size_t p : dims_) {
        if (p == 0) throw ArgumentError("tensor dimensions must be positive");
    }
    data_.assign(checked_product(dims_), 0.0);
}

DenseTensor::DenseTensor(Dims dims, std::vector<double> data) : DenseTensor(std::move(dims))
{
    if (data.size() != data_.size()) {
        throw ArgumentError("tensor data length " + std::to_string(data.size()) +
                            " does not match dimension product " + std::to_string(data_.size()));
    }
    data_ = std::move(data);
}

DenseTensor DenseTensor::from_matrix(const Eigen::Ref<const Matrix>& m)
{
    DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    MatrixMap(t.data_.data(), m.rows(), m.cols()) = m;
    return t;
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const
{
    if (index.size() != dims_.size()) throw ArgumentError("index arity does not match tensor order");
    std::size_t off = 0;
    for (std::size_t k = dims_.size(); k-- > 0;) {
        if (index[k] >= dims_[k]) throw ArgumentError("tensor index out of range");
        off = off * dims_[k] + index[k];
    }
    return off;
}

double& DenseTensor::at(std::initializer_list<std::size_t> index)
{
    return (*this)(std::span<const std::size_t>(index.begin(), index.size()));
}

double DenseTensor::at(std::initializer_list<std::size_t> index) const
{
    return (*this)(std::span<const std::size_t>(index.begin(), index.size()));
}

ConstMatrixMap DenseTensor::unfolding(std::size_t k) const
{
    require_mode_range(k, 1, order(), "unfolding");
    const auto rows = static_cast<Eigen::Index>(checked_product(dims_, 0, k));
    return ConstMatrixMap(data_.data(), rows, static_cast<Eigen::Index>(size()) / rows);
}

MatrixMap DenseTensor::unfolding(std::size_t k)
{
    require_mode_range(k, 1, order(), "unfolding");
    const auto rows = static_cast<Eigen::Index>(checked_product(dims_, 0, k));
    return MatrixMap(data_.data(), rows, static_cast<Eigen::Index>(size()) / rows);
}

double DenseTensor::squared_norm() const noexcept
{
    return Eigen::Map<const Vector>(data_.data(), static_cast<Eigen::Index>(data_.size())).squaredNorm();
}

double DenseTensor::frobenius_norm() const noexcept
{
    return std::sqrt(squared_norm());
}

Matrix sequential_unfold(const DenseTensor& t, std::size_t k)
{
    require_mode_range(k, 1, std::max<std::size_t>(t.order() - 1, 1), "sequential_unfold");
    if (t.order() == 1) return ConstMatrixMap(t.data().data(), 1, static_cast<Eigen::Index>(t.size()));
    return t.unfolding(k);
}

DenseTensor fold(const Eigen::Ref<const Matrix>& m, const Dims& dims, std::size_t k)
{
    DenseTensor t(dims);
    if (dims.size() == 1) {
        if (static_cast<std::size_t>(m.size()) != t.size() || (m.rows() != 1 && m.cols() != 1)) {
            throw ArgumentError("fold: vector of length " + std::to_string(t.size()) + " expected, got " +
                                shape_string(m.rows(), m.cols()));
        }
        std::copy(m.data(), m.data() + m.size(), t.data().begin());
        return t;
    }
    require_mode_range(k, 1, dims.size() - 1, "fold");
    const auto rows = static_cast<Eigen::Index>(checked_product(dims, 0, k));
    const auto cols = static_cast<Eigen::Index>(checked_product(dims, k));
    if (m.rows() != rows || m.cols() != cols) {
        throw ArgumentError("fold: expected " + shape_string(rows, cols) + " matrix, got " +
                            shape_string(m.rows(), m.cols()));
    }
    t.unfolding(k) = m;
    return t;
}

std::vector<double> vectorize(const DenseTensor& t)
{
    return {t.data().begin(), t.data().end()};
}

Matrix reshape_matrix(const Eigen::Ref<const Matrix>& a, std::size_t rows, std::size_t cols)
{
    const auto r = static_cast<Eigen::Index>(rows);
    const auto c = static_cast<Eigen::Index>(cols);
    const bool widen_rows = r > 0 && r % a.rows() == 0 && c > 0 && a.cols() % c == 0 &&
                            a.cols() / c == r / a.rows();
    const bool widen_cols = c > 0 && c % a.cols() == 0 && r > 0 && a.rows() % r == 0 &&
                            a.rows() / r == c / a.cols();
    if (!widen_rows && !widen_cols) {
        throw ArgumentError("reshape: " + shape_string(a.rows(), a.cols()) + " cannot be reshaped to " +
                            shape_string(r, c));
    }
    Matrix out(r, c);
    // Column-major storage makes both directions a reinterpretation, but
    // Eigen::Ref may carry an outer stride, so copy column by column.
    Eigen::Index pos = 0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i, ++pos) out.data()[pos] = a(i, j);
    }
    return out;
}

Matrix kronecker(const Eigen::Ref<const Matrix>& u, const Eigen::Ref<const Matrix>& v)
{
    const std::size_t dims[] = {static_cast<std::size_t>(u.rows()), static_cast<std::size_t>(v.rows()),
                                static_cast<std::size_t>(u.cols()), static_cast<std::size_t>(v.cols())};
    checked_product(dims);
    Matrix out(u.rows() * v.rows(), u.cols() * v.cols());
    for (Eigen::Index a = 0; a < u.rows(); ++a) {
        for (Eigen::Index b = 0; b < u.cols(); ++b) {
            out.block(a * v.rows(), b * v.cols(), v.rows(), v.cols()) = u(a, b) * v;
        }
    }
    return out;
}

Matrix realignment_matrix(std::size_t i, std::size_t j)
{
    if (i == 0 || j == 0) throw ArgumentError("realignment_matrix: sizes must be positive");
    const std::size_t dims[] = {i, i, j};
    const std::size_t rows = checked_product(dims);
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(j));
    // Block row `blk` of column l holds e_{i l + blk} of R^{ij} (0-based).
    for (std::size_t l = 0; l < j; ++l) {
        for (std::size_t blk = 0; blk < i; ++blk) {
            a(static_cast<Eigen::Index>(blk * i * j + i * l + blk), static_cast<Eigen::Index>(l)) = 1.0;
        }
    }
    return a;
}

Matrix kron_identity_right(const Eigen::Ref<const Matrix>& prod, const Eigen::Ref<const Matrix>& b,
                           std::size_t p)
{
    const auto pp = static_cast<Eigen::Index>(p);
    if (pp == 0 || b.rows() != pp * prod.cols()) {
        throw ArgumentError("kron_identity_right: factor has " + std::to_string(b.rows()) +
                            " rows, expected " + std::to_string(pp * prod.cols()));
    }
    Matrix out(prod.rows() * pp, b.cols());
    Matrix slab(pp, prod.cols());
    for (Eigen::Index col = 0; col < b.cols(); ++col) {
        for (Eigen::Index c = 0; c < prod.cols(); ++c) slab.col(c) = b.col(col).segment(c * pp, pp);
        MatrixMap(out.col(col).data(), pp, prod.rows()).noalias() = slab * prod.transpose();
    }
    return out;
}

Matrix times_kron_identity(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& prod,
                           std::size_t p)
{
    const auto pp = static_cast<Eigen::Index>(p);
    if (pp == 0 || a.cols() != pp * prod.rows()) {
        throw ArgumentError("times_kron_identity: left operand has " + std::to_string(a.cols()) +
                            " columns, expected " + std::to_string(pp * prod.rows()));
    }
    Matrix contiguous;
    const double* base = a.data();
    if (a.outerStride() != a.rows()) {
        contiguous = a;
        base = contiguous.data();
    }
    const ConstMatrixMap stacked(base, a.rows() * pp, prod.rows());
    Matrix out(a.rows(), pp * prod.cols());
    MatrixMap(out.data(), a.rows() * pp, prod.cols()).noalias() = stacked * prod;
    return out;
}

ForwardProducts forward_sequential_multiply(const DenseTensor& t, std::span<const Matrix> factors)
{
    const std::size_t d = t.order();
    if (d < 2) throw ArgumentError("forward_sequential_multiply: tensor order must be >= 2");
    if (factors.size() != d - 1) {
        throw ArgumentError("forward_sequential_multiply: expected " + std::to_string(d - 1) + " factors");
    }
    const Dims& p = t.dims();
    ForwardProducts out;
    Matrix s = t.unfolding(1);
    std::size_t r_prev = 1;
    for (std::size_t k = 1; k <= d - 1; ++k) {
        const Matrix& m = factors[k - 1];
        if (static_cast<std::size_t>(m.rows()) != r_prev * p[k - 1]) {
            throw ArgumentError("forward_sequential_multiply: factor " + std::to_string(k) + " has " +
                                std::to_string(m.rows()) + " rows, expected " +
                                std::to_string(r_prev * p[k - 1]));
        }
        Matrix s_tilde = m.transpose() * s;
        out.s.push_back(std::move(s));
        if (k < d - 1) {
            const auto rk = static_cast<Eigen::Index>(m.cols());
            s = ConstMatrixMap(s_tilde.data(), rk * static_cast<Eigen::Index>(p[k]),
                               s_tilde.size() / (rk * static_cast<Eigen::Index>(p[k])));
        }
        r_prev = static_cast<std::size_t>(m.cols());
        out.s_tilde.push_back(std::move(s_tilde));
    }
    return out;
}

BackwardProducts backward_sequential_multiply(const DenseTensor& t, std::span<const Matrix> factors)
{
    const std::size_t d = t.order();
    if (d < 2) throw ArgumentError("backward_sequential_multiply: tensor order must be >= 2");
    if (factors.size() != d - 1) {
        throw ArgumentError("backward_sequential_multiply: expected " + std::to_string(d - 1) + " factors");
    }
    const Dims& p = t.dims();
    BackwardProducts out;
    out.w.resize(d - 1);
    out.w_tilde.resize(d - 1);
    Matrix w = t.unfolding(d - 1);
    std::size_t r_next = 1;  // r_{k+1}
    for (std::size_t k = d - 1; k >= 1; --k) {
        const Matrix& b = factors[k - 1];  // B_{k+1}
        if (static_cast<std::size_t>(b.rows()) != p[k] * r_next || w.cols() != b.rows()) {
            throw ArgumentError("backward_sequential_multiply: factor " + std::to_string(k + 1) + " has " +
                                std::to_string(b.rows()) + " rows, expected " +
                                std::to_string(p[k] * r_next));
        }
        Matrix w_tilde = w * b;
        out.w[k - 1] = std::move(w);
        if (k > 1) {
            const auto rows = w_tilde.rows() / static_cast<Eigen::Index>(p[k - 1]);
            w = ConstMatrixMap(w_tilde.data(), rows, w_tilde.size() / rows);
        }
        r_next = static_cast<std::size_t>(b.cols());
        out.w_tilde[k - 1] = std::move(w_tilde);
    }
    return out;
}

}  // namespace ttoi
