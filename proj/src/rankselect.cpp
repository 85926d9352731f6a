#include "ttoi/rankselect.hpp"

#include "ttoi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>

namespace ttoi {

std::size_t tt_param_count(const Dims& dims, const Ranks& ranks)
{
    validate_ranks(dims, ranks);
    const std::size_t d = dims.size();
    std::size_t count = dims[0] * ranks[0] + dims[d - 1] * ranks[d - 2];
    for (std::size_t k = 2; k <= d - 1; ++k) count += dims[k - 1] * ranks[k - 2] * ranks[k - 1];
    return count;
}

double bic_value(const Dims& dims, std::size_t param_count, double residual_sq, double floor)
{
    double log_sum = 0.0;
    for (std::size_t p : dims) log_sum += std::log(static_cast<double>(p));
    const double n = static_cast<double>(checked_product(dims));
    return n * std::log(std::max(residual_sq, floor)) + static_cast<double>(param_count) * log_sum;
}

double bic_residual_floor(const DenseTensor& y)
{
    return std::max(kResidualFloor, 1e-24 * y.squared_norm());
}

BicResult bic_score(const DenseTensor& y, const Ranks& ranks, const TtoiOptions& options)
{
    const TtoiResult fit = ttoi(y, ranks, options);
    BicResult result;
    result.ranks = ranks;
    const auto data = y.data();
    const auto est = fit.estimate.data();
    double residual = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double diff = data[i] - est[i];
        residual += diff * diff;
    }
    result.residual_sq = residual;
    result.residual_floor = bic_residual_floor(y);
    result.param_count = tt_param_count(y.dims(), ranks);
    result.score = bic_value(y.dims(), result.param_count, result.residual_sq, result.residual_floor);
    result.search_log.emplace_back(ranks, result.score);
    return result;
}

namespace {

bool better(const BicResult& a, const BicResult& b)
{
    if (a.score != b.score) return a.score < b.score;
    if (a.param_count != b.param_count) return a.param_count < b.param_count;
    return a.ranks < b.ranks;
}

class Search {
public:
    Search(const DenseTensor& y, const TtoiOptions& options) : y_(y), options_(options) {}

    // Evaluates once per point; infeasible points yield nullopt.
    std::optional<BicResult> evaluate(const Ranks& ranks)
    {
        if (!ranks_feasible(y_.dims(), ranks)) return std::nullopt;
        if (auto it = memo_.find(ranks); it != memo_.end()) return it->second;
        BicResult r = bic_score(y_, ranks, options_);
        r.search_log.clear();
        log_.emplace_back(ranks, r.score);
        if (!best_ || better(r, *best_)) best_ = r;
        memo_.emplace(ranks, r);
        return r;
    }

    BicResult finish()
    {
        if (!best_) throw ArgumentError("select_ranks: no feasible rank tuple in the search box");
        BicResult out = *best_;
        out.search_log = std::move(log_);
        return out;
    }

private:
    const DenseTensor& y_;
    const TtoiOptions& options_;
    std::map<Ranks, BicResult> memo_;
    std::vector<std::pair<Ranks, double>> log_;
    std::optional<BicResult> best_;
};

}  // namespace

BicResult select_ranks(const DenseTensor& y, const Ranks& r_max, const SelectOptions& options)
{
    const std::size_t d = y.order();
    if (d < 2) throw ArgumentError("select_ranks: tensor order must be >= 2");
    if (r_max.size() != d - 1) {
        throw ArgumentError("select_ranks: expected " + std::to_string(d - 1) + " maximum ranks");
    }
    if (std::any_of(r_max.begin(), r_max.end(), [](std::size_t r) { return r < 1; })) {
        throw ArgumentError("select_ranks: empty search box");
    }

    double box = 1.0;
    for (std::size_t r : r_max) box *= static_cast<double>(r);
    SearchStrategy strategy = options.strategy;
    if (strategy == SearchStrategy::automatic) {
        strategy = box <= 1024.0 ? SearchStrategy::exhaustive : SearchStrategy::greedy;
    }

    Search search(y, options.ttoi);
    if (strategy == SearchStrategy::exhaustive) {
        Ranks point(d - 1, 1);
        for (;;) {
            search.evaluate(point);
            // Odometer over the box, last mode fastest (lexicographic order).
            std::size_t k = d - 1;
            while (k > 0 && point[k - 1] == r_max[k - 1]) point[--k] = 1;
            if (k == 0) break;
            ++point[k - 1];
        }
        return search.finish();
    }

    Ranks current(d - 1, 1);
    std::optional<BicResult> current_fit = search.evaluate(current);
    for (int sweep = 0; sweep < 2; ++sweep) {
        for (std::size_t k = 0; k < d - 1; ++k) {
            for (std::size_t v = 1; v <= r_max[k]; ++v) {
                Ranks candidate = current;
                candidate[k] = v;
                const std::optional<BicResult> fit = search.evaluate(candidate);
                if (fit && (!current_fit || better(*fit, *current_fit))) {
                    current = candidate;
                    current_fit = fit;
                }
            }
        }
    }
    return search.finish();
}

}  // namespace ttoi
