#include "ttoi/simlab.hpp"

#include "ttoi/errors.hpp"
#include "ttoi/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <optional>

namespace ttoi {

namespace {

constexpr std::uint64_t kCoreStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kMarkovModelStream = 3;
constexpr std::uint64_t kMarkovPathStream = 4;

std::string join(const std::vector<std::size_t>& v, char sep)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += std::to_string(v[i]);
    }
    return out;
}

std::string format_double(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

const char* noise_name(NoiseFamily f)
{
    return f == NoiseFamily::gaussian ? "gaussian" : "uniform";
}

std::vector<double> normals(Rng& rng, std::size_t n)
{
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

Matrix normal_matrix(Rng& rng, std::size_t rows, std::size_t cols)
{
    const std::vector<double> v = normals(rng, rows * cols);
    return ConstMatrixMap(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

double distance(const DenseTensor& a, const DenseTensor& b)
{
    const auto x = a.data();
    const auto y = b.data();
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double diff = x[i] - y[i];
        s += diff * diff;
    }
    return std::sqrt(s);
}

int iterations_for(const std::string& method)
{
    if (method == "ttsvd") return 0;
    if (method == "ttoi1") return 1;
    if (method == "ttoi2") return 2;
    throw ArgumentError("unknown method '" + method + "' (expected ttsvd, ttoi1 or ttoi2)");
}

std::vector<std::pair<std::string, std::string>> spiked_cell(const SpikedModelConfig& c)
{
    return {{"dims", join(c.dims, 'x')},
            {"ranks", join(c.ranks, 'x')},
            {"noise", noise_name(c.noise)},
            {"level", format_double(c.level)}};
}

ExperimentRecord make_record(std::string digest, std::string method,
                             std::vector<std::pair<std::string, std::string>> cell, std::size_t reps)
{
    ExperimentRecord r;
    r.digest = std::move(digest);
    r.method = std::move(method);
    r.cell = std::move(cell);
    r.errors.assign(reps, std::numeric_limits<double>::quiet_NaN());
    r.wall_ms.assign(reps, 0.0);
    r.failures.assign(reps, std::string());
    return r;
}

template <class F>
void timed(ExperimentRecord& record, std::size_t rep, F&& body)
{
    const auto start = std::chrono::steady_clock::now();
    try {
        record.errors[rep] = body();
    } catch (const std::exception& e) {
        record.errors[rep] = std::numeric_limits<double>::quiet_NaN();
        record.failures[rep] = e.what();
        record.failed = true;
    }
    const auto stop = std::chrono::steady_clock::now();
    record.wall_ms[rep] = std::chrono::duration<double, std::milli>(stop - start).count();
}

}  // namespace

void SpikedModelConfig::validate() const
{
    if (dims.size() < 2) throw ArgumentError("spiked model: need at least two modes");
    if (ranks.size() != dims.size() - 1) {
        throw ArgumentError("spiked model: expected " + std::to_string(dims.size() - 1) + " ranks");
    }
    for (std::size_t p : dims) {
        if (p < 1) throw ArgumentError("spiked model: dimensions must be positive");
    }
    for (std::size_t r : ranks) {
        if (r < 1) throw ArgumentError("spiked model: ranks must be positive");
    }
    if (!(level >= 0.0) || !std::isfinite(level)) throw ArgumentError("spiked model: noise level must be >= 0");
    if (replications < 1) throw ArgumentError("spiked model: replications must be >= 1");
    checked_product(dims);
}

std::string SpikedModelConfig::digest() const
{
    return "dims=" + join(dims, 'x') + ";ranks=" + join(ranks, 'x') + ";noise=" + noise_name(noise) +
           ";level=" + format_double(level) + ";seed=" + std::to_string(seed) +
           ";reps=" + std::to_string(replications);
}

SpikedInstance generate_spiked(const SpikedModelConfig& config, std::size_t replication)
{
    config.validate();
    const std::size_t d = config.dims.size();
    const Dims& p = config.dims;
    const Ranks& r = config.ranks;

    Rng cores = Rng::stream(config.seed, {replication, kCoreStream});
    Matrix first = normal_matrix(cores, p[0], r[0]);
    std::vector<DenseTensor> middle;
    for (std::size_t k = 2; k <= d - 1; ++k) {
        middle.emplace_back(Dims{r[k - 2], p[k - 1], r[k - 1]}, normals(cores, r[k - 2] * p[k - 1] * r[k - 1]));
    }
    Matrix last = normal_matrix(cores, p[d - 1], r[d - 2]);
    DenseTensor truth = contract(TTTensor(std::move(first), std::move(middle), std::move(last)));

    Rng noise = Rng::stream(config.seed, {replication, kNoiseStream});
    DenseTensor observed = truth;
    for (double& v : observed.data()) {
        if (config.noise == NoiseFamily::gaussian) {
            v += config.level * noise.normal();
        } else {
            v += config.level * (2.0 * noise.uniform() - 1.0);
        }
    }
    return {std::move(truth), std::move(observed)};
}

void ExperimentRecord::aggregate()
{
    double sum = 0.0;
    std::size_t n = 0;
    for (double e : errors) {
        if (std::isnan(e)) continue;
        sum += e;
        ++n;
    }
    if (n == 0) {
        mean = sd = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double e : errors) {
        if (std::isnan(e)) continue;
        ss += (e - mean) * (e - mean);
    }
    sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
}

std::vector<std::string> spiked_methods()
{
    return {"ttsvd", "ttoi1", "ttoi2"};
}

std::vector<ExperimentRecord> run_spiked_sweep(const std::vector<SpikedModelConfig>& grid,
                                               const std::vector<std::string>& methods)
{
    if (grid.empty()) throw ArgumentError("run_spiked_sweep: empty grid");
    if (methods.empty()) throw ArgumentError("run_spiked_sweep: no methods");
    std::vector<int> iterations;
    for (const std::string& m : methods) iterations.push_back(iterations_for(m));

    std::vector<ExperimentRecord> out;
    for (const SpikedModelConfig& config : grid) {
        config.validate();
        const std::size_t first = out.size();
        for (const std::string& m : methods) {
            out.push_back(make_record(config.digest(), m, spiked_cell(config), config.replications));
        }
        for (std::size_t rep = 0; rep < config.replications; ++rep) {
            std::optional<SpikedInstance> instance;
            std::string generation_error;
            try {
                instance = generate_spiked(config, rep);
            } catch (const std::exception& e) {
                generation_error = e.what();
            }
            for (std::size_t m = 0; m < methods.size(); ++m) {
                ExperimentRecord& record = out[first + m];
                timed(record, rep, [&]() -> double {
                    if (!instance) throw NumericError(generation_error);
                    TtoiOptions options;
                    options.t_max = iterations[m];
                    options.epsilon = 0.0;
                    const TtoiResult fit = ttoi(instance->observed, config.ranks, options);
                    return distance(fit.estimate, instance->truth);
                });
            }
        }
        for (std::size_t m = 0; m < methods.size(); ++m) out[first + m].aggregate();
    }
    return out;
}

std::vector<ExperimentRecord> run_markov_sweep(const MarkovSweepConfig& config)
{
    const std::size_t p = config.states;
    const std::size_t d = config.order;
    if (p < 1 || d < 2) throw ArgumentError("run_markov_sweep: need states >= 1 and order >= 2");
    if (config.ranks.size() != d - 1) {
        throw ArgumentError("run_markov_sweep: expected " + std::to_string(d - 1) + " ranks");
    }
    if (config.lengths.empty()) throw ArgumentError("run_markov_sweep: no trajectory lengths");
    if (config.replications < 1) throw ArgumentError("run_markov_sweep: replications must be >= 1");

    const std::string digest = "states=" + std::to_string(p) + ";order=" + std::to_string(d) +
                               ";ranks=" + join(config.ranks, 'x') + ";seed=" + std::to_string(config.seed) +
                               ";reps=" + std::to_string(config.replications);

    // Records are laid out [length][method].
    std::vector<ExperimentRecord> out;
    for (std::size_t n : config.lengths) {
        std::vector<std::pair<std::string, std::string>> cell = {{"states", std::to_string(p)},
                                                                 {"order", std::to_string(d)},
                                                                 {"ranks", join(config.ranks, 'x')},
                                                                 {"length", std::to_string(n)}};
        out.push_back(make_record(digest, "empirical", cell, config.replications));
        out.push_back(make_record(digest, "ttoi-markov", cell, config.replications));
    }

    for (std::size_t rep = 0; rep < config.replications; ++rep) {
        std::optional<MarkovModel> model;
        std::string model_error;
        try {
            const std::uint64_t model_seed = Rng::stream(config.seed, {rep, kMarkovModelStream}).next_u64();
            model = generate_aggregatable(p, d, config.ranks, model_seed);
        } catch (const std::exception& e) {
            model_error = e.what();
        }
        for (std::size_t li = 0; li < config.lengths.size(); ++li) {
            const std::size_t n = config.lengths[li];
            std::optional<DenseTensor> empirical;
            timed(out[2 * li], rep, [&]() -> double {
                if (!model) throw NumericError(model_error);
                const std::uint64_t path_seed = Rng::stream(config.seed, {rep, kMarkovPathStream, n}).next_u64();
                const Trajectory traj = sample_trajectory(*model, std::max(n, d - 1), path_seed);
                Trajectory trimmed;
                trimmed.states.assign(traj.states.begin(), traj.states.begin() + static_cast<std::ptrdiff_t>(n));
                empirical = empirical_from_trajectory(trimmed, p, d);
                return distance(*empirical, model->transition);
            });
            timed(out[2 * li + 1], rep, [&]() -> double {
                if (!empirical) throw NumericError("empirical estimate unavailable");
                const TransitionEstimate est = estimate_transition(*empirical, config.ranks);
                return distance(est.projected, model->transition);
            });
        }
    }
    for (ExperimentRecord& r : out) r.aggregate();
    return out;
}

std::vector<RankSelectionRecord> run_rank_selection_sweep(const std::vector<SpikedModelConfig>& grid,
                                                          const Ranks& r_max, const SelectOptions& options)
{
    if (grid.empty()) throw ArgumentError("run_rank_selection_sweep: empty grid");
    std::vector<RankSelectionRecord> out;
    for (const SpikedModelConfig& config : grid) {
        config.validate();
        RankSelectionRecord record;
        record.digest = config.digest();
        record.true_ranks = config.ranks;
        record.selected.resize(config.replications);
        record.failures.resize(config.replications);
        std::size_t ok = 0;
        for (std::size_t rep = 0; rep < config.replications; ++rep) {
            try {
                const SpikedInstance instance = generate_spiked(config, rep);
                record.selected[rep] = select_ranks(instance.observed, r_max, options).ranks;
                ++ok;
                if (record.selected[rep] == config.ranks) ++record.hits;
            } catch (const std::exception& e) {
                record.failures[rep] = e.what();
            }
        }
        record.frequency = ok ? static_cast<double>(record.hits) / static_cast<double>(ok) : 0.0;
        out.push_back(std::move(record));
    }
    return out;
}

}  // namespace ttoi
