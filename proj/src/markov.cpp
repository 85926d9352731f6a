#include "ttoi/markov.hpp"

#include "ttoi/errors.hpp"
#include "ttoi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ttoi {

namespace {

constexpr std::uint64_t kModelStream = 0x4d4f44454cULL;       // "MODEL"
constexpr std::uint64_t kTrajectoryStream = 0x5452414aULL;    // "TRAJ"
constexpr std::uint64_t kGenerativeStream = 0x47454e45ULL;    // "GENE"

std::size_t prefix_count(const DenseTensor& t)
{
    return t.size() / t.dims().back();
}

// Normalizes |x| over each group of `len` consecutive entries spaced by `stride`.
void normalize_abs(std::vector<double>& values, std::size_t count, std::size_t len, std::size_t stride,
                   const auto& base_of)
{
    for (std::size_t g = 0; g < count; ++g) {
        const std::size_t base = base_of(g);
        double sum = 0.0;
        for (std::size_t j = 0; j < len; ++j) sum += std::abs(values[base + j * stride]);
        for (std::size_t j = 0; j < len; ++j) {
            double& v = values[base + j * stride];
            v = sum > 0.0 ? std::abs(v) / sum : 1.0 / static_cast<double>(len);
        }
    }
}

std::vector<double> gaussian_block(Rng& rng, std::size_t n)
{
    std::vector<double> out(n);
    for (double& v : out) v = rng.normal();
    return out;
}

// Draws an index from a discrete distribution given its running sums. The
// first running sum exceeding u * total always belongs to a positive-mass state.
std::size_t draw_from_cdf(std::span<const double> cdf, double u)
{
    const double target = u * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    if (it != cdf.end()) return static_cast<std::size_t>(it - cdf.begin());
    std::size_t j = cdf.size() - 1;
    while (j > 0 && cdf[j] == cdf[j - 1]) --j;
    return j;
}

std::vector<double> fiber_cdf(const DenseTensor& p, std::size_t prefix)
{
    const std::size_t stride = prefix_count(p);
    const std::size_t states = p.dims().back();
    std::vector<double> cdf(states);
    double acc = 0.0;
    for (std::size_t j = 0; j < states; ++j) {
        acc += std::max(0.0, p.data()[prefix + j * stride]);
        cdf[j] = acc;
    }
    if (!(acc > 0.0)) throw NumericError("transition fiber has no positive mass");
    return cdf;
}

void require_square(const DenseTensor& t, const char* what)
{
    if (t.order() < 2) throw ArgumentError(std::string(what) + ": transition tensor needs order >= 2");
    for (std::size_t k = 1; k < t.order(); ++k) {
        if (t.dim(k) != t.dim(0)) throw ArgumentError(std::string(what) + ": all modes must have p states");
    }
}

}  // namespace

double max_fiber_sum_error(const DenseTensor& p)
{
    const std::size_t stride = prefix_count(p);
    const std::size_t states = p.dims().back();
    double worst = 0.0;
    for (std::size_t prefix = 0; prefix < stride; ++prefix) {
        double sum = 0.0;
        for (std::size_t j = 0; j < states; ++j) sum += p.data()[prefix + j * stride];
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

void validate_transition(const DenseTensor& p, double tol)
{
    for (double v : p.data()) {
        if (!std::isfinite(v) || v < -tol) throw ArgumentError("transition tensor has negative or non-finite entries");
    }
    if (max_fiber_sum_error(p) > tol) throw ArgumentError("transition tensor fibers do not sum to 1");
}

MarkovModel generate_aggregatable(std::size_t p, std::size_t d, const Ranks& ranks, std::uint64_t seed)
{
    if (p < 1 || d < 2) throw ArgumentError("generate_aggregatable: need p >= 1 and d >= 2");
    if (ranks.size() != d - 1 || std::any_of(ranks.begin(), ranks.end(), [](std::size_t r) { return r < 1; })) {
        throw ArgumentError("generate_aggregatable: expected " + std::to_string(d - 1) + " positive ranks");
    }
    Rng rng = Rng::stream(seed, {kModelStream});

    // G_1: p x r_1, rows normalized.
    std::vector<double> first = gaussian_block(rng, p * ranks[0]);
    normalize_abs(first, p, ranks[0], p, [](std::size_t i) { return i; });
    Matrix g1 = ConstMatrixMap(first.data(), static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(ranks[0]));

    // G_k: r_{k-1} x p x r_k, normalized over the last index for each (a, i).
    std::vector<DenseTensor> middle;
    for (std::size_t k = 2; k <= d - 1; ++k) {
        const std::size_t r_prev = ranks[k - 2];
        const std::size_t r_next = ranks[k - 1];
        std::vector<double> core = gaussian_block(rng, r_prev * p * r_next);
        normalize_abs(core, r_prev * p, r_next, r_prev * p, [](std::size_t g) { return g; });
        middle.emplace_back(Dims{r_prev, p, r_next}, std::move(core));
    }

    // G_d: r_{d-1} x p, rows normalized; stored transposed as the p x r_{d-1} last core.
    const std::size_t r_last = ranks[d - 2];
    std::vector<double> last = gaussian_block(rng, r_last * p);
    normalize_abs(last, r_last, p, r_last, [](std::size_t a) { return a; });
    const Matrix gd = ConstMatrixMap(last.data(), static_cast<Eigen::Index>(r_last), static_cast<Eigen::Index>(p));

    const TTTensor train(std::move(g1), std::move(middle), gd.transpose());
    return {p, d - 1, contract(train)};
}

Trajectory sample_trajectory(const MarkovModel& model, std::size_t n_steps, std::uint64_t seed)
{
    const DenseTensor& P = model.transition;
    require_square(P, "sample_trajectory");
    const std::size_t d = P.order();
    const std::size_t p = P.dim(0);
    if (n_steps < d - 1) {
        throw ArgumentError("sample_trajectory: need at least " + std::to_string(d - 1) + " steps");
    }
    const std::size_t stride = prefix_count(P);
    std::vector<std::vector<double>> cdfs(stride);

    Rng rng = Rng::stream(seed, {kTrajectoryStream});
    Trajectory traj;
    traj.states.reserve(n_steps);
    for (std::size_t t = 0; t < d - 1; ++t) traj.states.push_back(static_cast<std::uint32_t>(rng.below(p)));
    for (std::size_t t = d - 1; t < n_steps; ++t) {
        std::size_t prefix = 0;
        for (std::size_t k = d - 1; k-- > 0;) prefix = prefix * p + traj.states[t - (d - 1) + k];
        if (cdfs[prefix].empty()) cdfs[prefix] = fiber_cdf(P, prefix);
        traj.states.push_back(static_cast<std::uint32_t>(draw_from_cdf(cdfs[prefix], rng.uniform())));
    }
    return traj;
}

DenseTensor empirical_from_trajectory(const Trajectory& trajectory, std::size_t p, std::size_t d)
{
    if (p < 1 || d < 2) throw ArgumentError("empirical_from_trajectory: need p >= 1 and d >= 2");
    const auto& x = trajectory.states;
    for (std::uint32_t s : x) {
        if (s >= p) throw ArgumentError("trajectory state " + std::to_string(s + 1) + " outside [1, p]");
    }
    DenseTensor counts(Dims(d, p));
    auto data = counts.data();
    for (std::size_t t = 0; t + d <= x.size(); ++t) {
        std::size_t off = 0;
        for (std::size_t k = d; k-- > 0;) off = off * p + x[t + k];
        data[off] += 1.0;
    }
    const std::size_t stride = prefix_count(counts);
    for (std::size_t prefix = 0; prefix < stride; ++prefix) {
        double total = 0.0;
        for (std::size_t j = 0; j < p; ++j) total += data[prefix + j * stride];
        for (std::size_t j = 0; j < p; ++j) {
            double& v = data[prefix + j * stride];
            v = total > 0.0 ? v / total : 1.0 / static_cast<double>(p);
        }
    }
    return counts;
}

DenseTensor empirical_generative(const MarkovModel& model, std::size_t n, std::uint64_t seed)
{
    const DenseTensor& P = model.transition;
    require_square(P, "empirical_generative");
    if (n < 1) throw ArgumentError("empirical_generative: need n >= 1");
    const std::size_t p = P.dim(0);
    const std::size_t stride = prefix_count(P);
    DenseTensor out(P.dims());
    auto data = out.data();
    for (std::size_t prefix = 0; prefix < stride; ++prefix) {
        Rng rng = Rng::stream(seed, {kGenerativeStream, prefix});
        const std::vector<double> cdf = fiber_cdf(P, prefix);
        std::vector<std::size_t> counts(p, 0);
        for (std::size_t s = 0; s < n; ++s) ++counts[draw_from_cdf(cdf, rng.uniform())];
        for (std::size_t j = 0; j < p; ++j) {
            data[prefix + j * stride] = static_cast<double>(counts[j]) / static_cast<double>(n);
        }
    }
    return out;
}

std::vector<double> simplex_project(std::span<const double> v)
{
    if (v.empty()) throw ArgumentError("simplex_project: empty vector");
    for (double x : v) {
        if (!std::isfinite(x)) throw NumericError("simplex_project: non-finite entry");
    }
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        cumulative += sorted[j];
        const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
        if (sorted[j] - candidate > 0.0) theta = candidate;
    }
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - theta, 0.0);
    return out;
}

void project_fibers(DenseTensor& t)
{
    const std::size_t stride = prefix_count(t);
    const std::size_t states = t.dims().back();
    auto data = t.data();
    std::vector<double> fiber(states);
    for (std::size_t prefix = 0; prefix < stride; ++prefix) {
        for (std::size_t j = 0; j < states; ++j) fiber[j] = data[prefix + j * stride];
        const std::vector<double> projected = simplex_project(fiber);
        for (std::size_t j = 0; j < states; ++j) data[prefix + j * stride] = projected[j];
    }
}

TtoiOptions default_markov_options()
{
    TtoiOptions options;
    options.t_max = 1;
    options.epsilon = 0.0;
    return options;
}

TransitionEstimate estimate_transition(const DenseTensor& empirical, const Ranks& ranks, TtoiOptions options)
{
    require_square(empirical, "estimate_transition");
    validate_transition(empirical, 1e-9);
    TtoiResult fit = ttoi(empirical, ranks, options);
    DenseTensor projected = fit.estimate;
    project_fibers(projected);
    return {std::move(projected), std::move(fit.estimate), std::move(fit.diagnostics)};
}

}  // namespace ttoi
