#include "ttoi/linalg.hpp"

#include "ttoi/errors.hpp"
#include "ttoi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ttoi {

namespace {

struct Leading {
    Matrix u;
    Vector sigma;
};

Matrix thin_q(const Matrix& a)
{
    Eigen::HouseholderQR<Matrix> qr(a);
    return qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
}

// Reduce to a small square triangular factor by Householder QR, then run a
// one-sided Jacobi SVD on it.
Leading dense_leading_left(const Eigen::Ref<const Matrix>& a, Eigen::Index r)
{
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    if (m <= n) {
        Eigen::HouseholderQR<Matrix> qr(a.transpose());
        const Matrix rt = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>().transpose();
        Eigen::JacobiSVD<Matrix> svd(rt, Eigen::ComputeFullU);
        return {svd.matrixU().leftCols(r), svd.singularValues()};
    }
    Eigen::HouseholderQR<Matrix> qr(a);
    const Matrix upper = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<Matrix> svd(upper, Eigen::ComputeFullU);
    const Matrix q = qr.householderQ() * Matrix::Identity(m, n);
    return {q * svd.matrixU().leftCols(r), svd.singularValues()};
}

Leading power_leading_left(const Eigen::Ref<const Matrix>& a, Eigen::Index r, const SvdOptions& options,
                           FrameDiagnostics& diag)
{
    const Eigen::Index m = a.rows();
    const Eigen::Index block = std::min<Eigen::Index>(std::min(m, a.cols()), r + std::max<Eigen::Index>(r, 8));
    Rng rng(options.seed);
    Matrix q(m, block);
    for (Eigen::Index j = 0; j < block; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) q(i, j) = rng.normal();
    }
    q = thin_q(q);

    diag.power_iteration = true;
    diag.converged = false;
    Leading best;
    Matrix previous;
    for (int it = 1; it <= options.max_iterations; ++it) {
        q = thin_q(a * (a.transpose() * q));
        const Matrix projected = q.transpose() * a;
        Leading ritz = dense_leading_left(projected, r);
        best.u = q * ritz.u;
        best.sigma = std::move(ritz.sigma);
        diag.iterations = it;
        if (it > 1 && sin_theta(best.u, previous) <= options.tolerance) {
            diag.converged = true;
            break;
        }
        previous = best.u;
    }
    return best;
}

void complete_frame(Matrix& u, Eigen::Index keep)
{
    const Eigen::Index m = u.rows();
    Eigen::Index candidate = 0;
    for (Eigen::Index col = keep; col < u.cols(); ++col) {
        for (; candidate < m; ++candidate) {
            Vector v = Vector::Unit(m, candidate);
            for (int pass = 0; pass < 2; ++pass) {
                v -= u.leftCols(col) * (u.leftCols(col).transpose() * v);
            }
            const double norm = v.norm();
            if (norm > 0.5) {
                u.col(col) = v / norm;
                ++candidate;
                break;
            }
        }
    }
}

void require_finite(const Eigen::Ref<const Matrix>& a, const char* what)
{
    if (!a.allFinite()) throw NumericError(std::string(what) + ": matrix has non-finite entries");
}

}  // namespace

void apply_sign_convention(Matrix& frame)
{
    for (Eigen::Index j = 0; j < frame.cols(); ++j) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < frame.rows(); ++i) {
            const double v = std::abs(frame(i, j));
            if (v > best) {
                best = v;
                arg = i;
            }
        }
        if (frame.rows() > 0 && frame(arg, j) < 0.0) frame.col(j) *= -1.0;
    }
}

OrthonormalFrame svd_left(const Eigen::Ref<const Matrix>& a, std::size_t r, const SvdOptions& options)
{
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    const auto rank = static_cast<Eigen::Index>(r);
    if (rank < 1 || rank > std::min(m, n)) {
        throw ArgumentError("svd: rank " + std::to_string(r) + " outside [1, " +
                            std::to_string(std::min(m, n)) + "] for a " + std::to_string(m) + "x" +
                            std::to_string(n) + " matrix");
    }
    require_finite(a, "svd");

    OrthonormalFrame frame;
    frame.side = FrameSide::left;
    Leading lead = std::min(m, n) <= options.dense_threshold
                       ? dense_leading_left(a, rank)
                       : power_leading_left(a, rank, options, frame.diagnostics);

    const double s1 = lead.sigma.size() > 0 ? lead.sigma(0) : 0.0;
    const double zero_tol = static_cast<double>(std::max(m, n)) * std::numeric_limits<double>::epsilon() * s1;
    Eigen::Index nonzero = 0;
    while (nonzero < rank && s1 > 0.0 && lead.sigma(nonzero) > zero_tol) ++nonzero;
    if (nonzero < rank) {
        frame.diagnostics.rank_padded = true;
        complete_frame(lead.u, nonzero);
    } else if (rank < lead.sigma.size() && lead.sigma(rank - 1) - lead.sigma(rank) <= 1e-12 * s1) {
        frame.diagnostics.gap_degenerate = true;
    }
    apply_sign_convention(lead.u);
    frame.basis = std::move(lead.u);
    frame.singular_values = lead.sigma.head(std::min<Eigen::Index>(rank, lead.sigma.size()));
    return frame;
}

OrthonormalFrame svd_right(const Eigen::Ref<const Matrix>& a, std::size_t r, const SvdOptions& options)
{
    const Matrix at = a.transpose();
    OrthonormalFrame frame = svd_left(at, r, options);
    frame.side = FrameSide::right;
    return frame;
}

double sin_theta(const Eigen::Ref<const Matrix>& u, const Eigen::Ref<const Matrix>& v)
{
    if (u.rows() != v.rows() || u.cols() != v.cols()) {
        throw ArgumentError("sin_theta: frames must have identical shapes");
    }
    if (u.cols() == 0) return 0.0;
    // sqrt(1 - s_r^2(U^T V)) equals the spectral norm of (I - U U^T) V for
    // orthonormal frames of equal width; the latter keeps small angles accurate.
    const Matrix residual = v - u * (u.transpose() * v);
    Eigen::JacobiSVD<Matrix> svd(residual);
    return std::clamp(svd.singularValues()(0), 0.0, 1.0);
}

double sin_theta(const OrthonormalFrame& u, const OrthonormalFrame& v)
{
    return sin_theta(u.basis, v.basis);
}

Vector singular_values(const Eigen::Ref<const Matrix>& a)
{
    require_finite(a, "singular_values");
    if (a.size() == 0) return {};
    return dense_leading_left(a, 0).sigma;
}

double smallest_singular_value(const Eigen::Ref<const Matrix>& a)
{
    const Vector s = singular_values(a);
    return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

}  // namespace ttoi
