#include "ttoi/tt.hpp"

#include "ttoi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ttoi {

namespace {

std::size_t as_size(Eigen::Index i)
{
    return static_cast<std::size_t>(i);
}

Eigen::Index as_index(std::size_t i)
{
    return static_cast<Eigen::Index>(i);
}

std::string ranks_string(const Ranks& ranks)
{
    std::string s;
    for (std::size_t i = 0; i < ranks.size(); ++i) s += (i ? "," : "") + std::to_string(ranks[i]);
    return s;
}

DenseTensor middle_core(const Matrix& left_unfolding, std::size_t r_prev, std::size_t p, std::size_t r_next)
{
    if (as_size(left_unfolding.rows()) != r_prev * p || as_size(left_unfolding.cols()) != r_next) {
        throw ArgumentError("core factor has shape " + std::to_string(left_unfolding.rows()) + "x" +
                            std::to_string(left_unfolding.cols()) + ", expected " +
                            std::to_string(r_prev * p) + "x" + std::to_string(r_next));
    }
    return DenseTensor({r_prev, p, r_next},
                       std::vector<double>(left_unfolding.data(), left_unfolding.data() + left_unfolding.size()));
}

// Slice G[:, i, :] of a middle core as an r_{k-1} x r_k matrix.
Eigen::Map<const Matrix, 0, Eigen::OuterStride<>> core_slice(const DenseTensor& core, std::size_t i)
{
    const auto r_prev = as_index(core.dim(0));
    const auto p = as_index(core.dim(1));
    return {core.data().data() + as_index(i) * r_prev, r_prev, as_index(core.dim(2)),
            Eigen::OuterStride<>(r_prev * p)};
}

std::vector<Matrix> right_products(const std::vector<Matrix>& right_frames, const Dims& p)
{
    // prods[k] = B^{(R)}_{prod,k} = (V_d ⊗ I) ... (V_{k+1} ⊗ I_{p_k}) V_k, stored for k = 2..d.
    const std::size_t d = p.size();
    std::vector<Matrix> prods(d + 1);
    prods[d] = right_frames[d - 2];
    for (std::size_t k = d - 1; k >= 2; --k) {
        prods[k] = kron_identity_right(prods[k + 1], right_frames[k - 2], p[k - 1]);
    }
    return prods;
}

void finish_state(TtoiState& state, const TtoiState* previous, bool materialize)
{
    if (previous != nullptr) {
        state.objective_trace = previous->objective_trace;
        state.svd_flags.gap_degenerate |= previous->svd_flags.gap_degenerate;
        state.svd_flags.rank_padded |= previous->svd_flags.rank_padded;
        state.svd_flags.power_not_converged |= previous->svd_flags.power_not_converged;
    }
    state.objective_trace.push_back(state.data_sq_norm - state.estimate_sq_norm);
    if (materialize) state.estimate = contract(extract_cores(state));
}

void require_same_problem(const DenseTensor& y, const TtoiState& state)
{
    if (y.dims() != state.dims) throw ArgumentError("tensor shape does not match the TTOI state");
}

}  // namespace

TTTensor::TTTensor(Matrix first, std::vector<DenseTensor> middle, Matrix last)
    : first_(std::move(first)), middle_(std::move(middle)), last_(std::move(last))
{
    if (first_.rows() < 1 || first_.cols() < 1 || last_.rows() < 1 || last_.cols() < 1) {
        throw ArgumentError("TT cores must be non-empty");
    }
    std::size_t r_prev = as_size(first_.cols());
    for (std::size_t i = 0; i < middle_.size(); ++i) {
        const DenseTensor& core = middle_[i];
        if (core.order() != 3 || core.dim(0) != r_prev) {
            throw ArgumentError("TT core " + std::to_string(i + 2) + " does not chain with its predecessor");
        }
        r_prev = core.dim(2);
    }
    if (as_size(last_.cols()) != r_prev) {
        throw ArgumentError("last TT core has " + std::to_string(last_.cols()) + " columns, expected " +
                            std::to_string(r_prev));
    }
}

Dims TTTensor::dims() const
{
    Dims dims{as_size(first_.rows())};
    for (const DenseTensor& core : middle_) dims.push_back(core.dim(1));
    dims.push_back(as_size(last_.rows()));
    return dims;
}

Ranks TTTensor::ranks() const
{
    Ranks ranks{as_size(first_.cols())};
    for (const DenseTensor& core : middle_) ranks.push_back(core.dim(2));
    return ranks;
}

Matrix TTTensor::left_unfolding(std::size_t k) const
{
    if (k == 1) return first_;
    const DenseTensor& core = middle(k);
    return ConstMatrixMap(core.data().data(), as_index(core.dim(0) * core.dim(1)), as_index(core.dim(2)));
}

DenseTensor contract(const TTTensor& x)
{
    const Dims dims = x.dims();
    Matrix left = x.first();
    for (const DenseTensor& core : x.middles()) {
        const auto rows = left.rows();
        Matrix next(rows * as_index(core.dim(1)), as_index(core.dim(2)));
        for (std::size_t i = 0; i < core.dim(1); ++i) {
            next.middleRows(as_index(i) * rows, rows).noalias() = left * core_slice(core, i);
        }
        left = std::move(next);
    }
    DenseTensor out(dims);
    out.unfolding(dims.size() - 1).noalias() = left * x.last().transpose();
    return out;
}

TTTensor tt_from_left_factors(const Matrix& first, const std::vector<Matrix>& middle_factors, const Matrix& last,
                              const Dims& dims)
{
    if (dims.size() != middle_factors.size() + 2) throw ArgumentError("factor count does not match tensor order");
    std::vector<DenseTensor> middle;
    std::size_t r_prev = as_size(first.cols());
    for (std::size_t k = 2; k + 1 <= dims.size(); ++k) {
        const Matrix& u = middle_factors[k - 2];
        middle.push_back(middle_core(u, r_prev, dims[k - 1], as_size(u.cols())));
        r_prev = as_size(u.cols());
    }
    return TTTensor(first, std::move(middle), last);
}

TTTensor tt_from_right_factors(const Matrix& first, const std::vector<Matrix>& right_factors, const Dims& dims)
{
    const std::size_t d = dims.size();
    if (right_factors.size() + 1 != d) throw ArgumentError("factor count does not match tensor order");
    std::vector<DenseTensor> middle;
    for (std::size_t k = 2; k <= d - 1; ++k) {
        const Matrix& v = right_factors[k - 2];  // (p_k r_k) x r_{k-1}
        const std::size_t r_prev = as_size(v.cols());
        const std::size_t p = dims[k - 1];
        if (as_size(v.rows()) % p != 0) throw ArgumentError("right factor rows not divisible by p_k");
        const Matrix vt = v.transpose();  // r_{k-1} x (p_k r_k), reshaped in place
        middle.push_back(DenseTensor({r_prev, p, as_size(v.rows()) / p},
                                     std::vector<double>(vt.data(), vt.data() + vt.size())));
    }
    return TTTensor(first, std::move(middle), right_factors.back());
}

bool ranks_feasible(const Dims& dims, const Ranks& ranks)
{
    const std::size_t d = dims.size();
    if (d < 2 || ranks.size() != d - 1) return false;
    for (std::size_t k = 1; k <= d - 1; ++k) {
        const std::size_t r = ranks[k - 1];
        const std::size_t r_prev = k == 1 ? 1 : ranks[k - 2];
        const std::size_t r_next = k == d - 1 ? 1 : ranks[k];
        if (r < 1 || r > r_prev * dims[k - 1] || r > dims[k] * r_next) return false;
    }
    return true;
}

void validate_ranks(const Dims& dims, const Ranks& ranks)
{
    if (dims.size() < 2) throw ArgumentError("TT decomposition needs a tensor of order >= 2");
    if (ranks.size() != dims.size() - 1) {
        throw ArgumentError("expected " + std::to_string(dims.size() - 1) + " TT-ranks, got " +
                            std::to_string(ranks.size()));
    }
    if (!ranks_feasible(dims, ranks)) {
        throw ArgumentError("infeasible TT-ranks (" + ranks_string(ranks) +
                            "): need 1 <= r_k <= min(r_{k-1} p_k, p_{k+1} r_{k+1})");
    }
}

TtSvdResult tt_svd(const DenseTensor& y, const Ranks& ranks, bool materialize)
{
    validate_ranks(y.dims(), ranks);
    const Dims& p = y.dims();
    const std::size_t d = p.size();

    TtoiState state;
    state.iteration = 0;
    state.dims = p;
    state.ranks = ranks;
    state.data_sq_norm = y.squared_norm();

    for (std::size_t k = 1; k <= d - 1; ++k) {
        // R_k is [Y]_1 for k = 1 and the reshaped previous residual otherwise.
        const ConstMatrixMap r_k = k == 1 ? y.unfolding(1)
                                          : ConstMatrixMap(state.residuals.back().data(),
                                                           as_index(ranks[k - 2] * p[k - 1]),
                                                           state.residuals.back().size() /
                                                               as_index(ranks[k - 2] * p[k - 1]));
        OrthonormalFrame frame = svd_left(r_k, ranks[k - 1]);
        state.svd_flags.merge(frame.diagnostics);
        Matrix residual = frame.basis.transpose() * r_k;
        state.left_frames.push_back(std::move(frame.basis));
        state.residuals.push_back(std::move(residual));
    }
    state.estimate_sq_norm = state.residuals.back().squaredNorm();
    finish_state(state, nullptr, materialize);
    TTTensor cores = extract_cores(state);
    return {std::move(state), std::move(cores)};
}

TtoiState backward_update(const DenseTensor& y, const TtoiState& previous, bool materialize)
{
    require_same_problem(y, previous);
    if (previous.backward_stage()) {
        throw StateError("backward update needs a state at an even iteration, got t = " +
                         std::to_string(previous.iteration));
    }
    const Dims& p = previous.dims;
    const Ranks& r = previous.ranks;
    const std::size_t d = p.size();

    TtoiState state;
    state.iteration = previous.iteration + 1;
    state.dims = p;
    state.ranks = r;
    state.data_sq_norm = previous.data_sq_norm;
    state.right_frames.resize(d - 1);

    OrthonormalFrame last = svd_right(previous.residuals[d - 2], r[d - 2]);
    state.svd_flags.merge(last.diagnostics);
    Matrix v_prod = last.basis;  // (p_k ... p_d) x r_{k-1}
    state.right_frames[d - 2] = std::move(last.basis);
    for (std::size_t k = d - 1; k >= 2; --k) {
        // R~_{k-1} (V_prod ⊗ I_{p_k}) is r_{k-1} x (p_k r_k).
        const Matrix target = times_kron_identity(previous.residuals[k - 2], v_prod, p[k - 1]);
        OrthonormalFrame frame = svd_right(target, r[k - 2]);
        state.svd_flags.merge(frame.diagnostics);
        v_prod = kron_identity_right(v_prod, frame.basis, p[k - 1]);
        state.right_frames[k - 2] = std::move(frame.basis);
    }
    state.v1 = y.unfolding(1) * v_prod;
    state.estimate_sq_norm = state.v1.squaredNorm();
    finish_state(state, &previous, materialize);
    return state;
}

TtoiState forward_update(const DenseTensor& y, const TtoiState& previous, bool materialize)
{
    require_same_problem(y, previous);
    if (!previous.backward_stage()) {
        throw StateError("forward update needs a state at an odd iteration, got t = " +
                         std::to_string(previous.iteration));
    }
    const Dims& p = previous.dims;
    const Ranks& r = previous.ranks;
    const std::size_t d = p.size();

    TtoiState state;
    state.iteration = previous.iteration + 1;
    state.dims = p;
    state.ranks = r;
    state.data_sq_norm = previous.data_sq_norm;

    const std::vector<Matrix> prods = right_products(previous.right_frames, p);

    OrthonormalFrame first = svd_left(previous.v1, r[0]);
    state.svd_flags.merge(first.diagnostics);
    state.residuals.push_back(first.basis.transpose() * y.unfolding(1));
    state.left_frames.push_back(std::move(first.basis));
    for (std::size_t k = 2; k <= d - 1; ++k) {
        const Matrix& prev_residual = state.residuals.back();
        const auto rows = as_index(r[k - 2] * p[k - 1]);
        const ConstMatrixMap r_k(prev_residual.data(), rows, prev_residual.size() / rows);
        const Matrix target = r_k * prods[k + 1];  // (r_{k-1} p_k) x r_k
        OrthonormalFrame frame = svd_left(target, r[k - 1]);
        state.svd_flags.merge(frame.diagnostics);
        Matrix residual = frame.basis.transpose() * r_k;
        state.left_frames.push_back(std::move(frame.basis));
        state.residuals.push_back(std::move(residual));
    }
    state.estimate_sq_norm = state.residuals.back().squaredNorm();
    finish_state(state, &previous, materialize);
    return state;
}

TTTensor extract_cores(const TtoiState& state)
{
    if (state.backward_stage()) return tt_from_right_factors(state.v1, state.right_frames, state.dims);
    const std::vector<Matrix> middle(state.left_frames.begin() + 1, state.left_frames.end());
    return tt_from_left_factors(state.left_frames.front(), middle, state.residuals.back().transpose(), state.dims);
}

TtoiResult ttoi(const DenseTensor& y, const Ranks& ranks, const TtoiOptions& options)
{
    if (options.t_max < 0) throw ArgumentError("t_max must be >= 0");
    if (options.epsilon && !(*options.epsilon >= 0.0)) throw ArgumentError("epsilon must be >= 0");

    TtoiDiagnostics diag;
    diag.data_sq_norm = y.squared_norm();
    diag.epsilon = options.epsilon.value_or(1e-6 * diag.data_sq_norm);
    // Increments below this are rounding noise in the two norm evaluations.
    const double rounding_floor = 1e-12 * diag.data_sq_norm;

    TtoiState state = tt_svd(y, ranks, options.keep_iterates).state;
    diag.estimate_sq_norms.push_back(state.estimate_sq_norm);
    if (options.keep_iterates) diag.iterates.push_back(*state.estimate);

    for (int t = 1; t <= options.t_max; ++t) {
        TtoiState next = t % 2 == 1 ? backward_update(y, state, options.keep_iterates)
                                    : forward_update(y, state, options.keep_iterates);
        const double increment = next.estimate_sq_norm - state.estimate_sq_norm;
        state = std::move(next);
        diag.estimate_sq_norms.push_back(state.estimate_sq_norm);
        if (options.keep_iterates) diag.iterates.push_back(*state.estimate);
        if (increment <= std::max(diag.epsilon, rounding_floor)) {
            diag.stopped_by_tolerance = true;
            break;
        }
    }

    diag.iterations = state.iteration;
    diag.objective_trace = state.objective_trace;
    diag.svd_flags = state.svd_flags;
    TTTensor cores = extract_cores(state);
    DenseTensor estimate = state.estimate ? std::move(*state.estimate) : contract(cores);
    return {std::move(cores), std::move(estimate), std::move(diag)};
}

RankReport tt_ranks_of(const DenseTensor& x, double tol)
{
    if (!(tol > 0.0 && tol < 1.0)) throw ArgumentError("tt_ranks_of: tol must lie in (0, 1)");
    if (x.order() < 2) throw ArgumentError("tt_ranks_of: tensor order must be >= 2");
    RankReport report;
    for (std::size_t k = 1; k < x.order(); ++k) {
        const Vector s = singular_values(x.unfolding(k));
        std::size_t rank = 0;
        if (s.size() > 0 && s(0) > 0.0) {
            while (as_index(rank) < s.size() && s(as_index(rank)) > tol * s(0)) ++rank;
        } else {
            report.degenerate = true;
        }
        report.ranks.push_back(rank);
    }
    return report;
}

}  // namespace ttoi
