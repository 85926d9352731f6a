#pragma once

// Monte-Carlo experiments on the spiked TT model Y = X + Z and on low-rank
// Markov chains. Every replication draws from its own counter-addressed
// stream, so results do not depend on evaluation order.

#include "ttoi/markov.hpp"
#include "ttoi/rankselect.hpp"
#include "ttoi/tt.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ttoi {

enum class NoiseFamily { gaussian, uniform };

struct SpikedModelConfig {
    Dims dims;
    Ranks ranks;
    NoiseFamily noise = NoiseFamily::gaussian;
    double level = 1.0;  ///< sigma for gaussian, b for uniform on [-b, b]
    std::uint64_t seed = 0;
    std::size_t replications = 1;

    void validate() const;
    /// Stable text key of every field, used to tag records.
    std::string digest() const;
};

struct SpikedInstance {
    DenseTensor truth;
    DenseTensor observed;
};

/// Cores with i.i.d. standard normal entries, contracted, plus i.i.d. noise.
/// Deterministic in (config.seed, replication).
SpikedInstance generate_spiked(const SpikedModelConfig& config, std::size_t replication);

struct ExperimentRecord {
    std::string digest;
    std::string method;
    std::vector<std::pair<std::string, std::string>> cell;  ///< named cell parameters, in column order
    std::vector<double> errors;                             ///< per replication; NaN where it failed
    std::vector<double> wall_ms;
    std::vector<std::string> failures;                      ///< per replication; empty when it succeeded
    double mean = 0.0;
    double sd = 0.0;  ///< sample standard deviation over successful replications
    bool failed = false;

    /// Recomputes mean and sd from `errors`, ignoring NaN entries.
    void aggregate();
};

/// ttsvd, ttoi1, ttoi2 (TTOI with that many iterations).
std::vector<std::string> spiked_methods();

/// For every configuration, runs each method on identical instances.
std::vector<ExperimentRecord> run_spiked_sweep(const std::vector<SpikedModelConfig>& grid,
                                               const std::vector<std::string>& methods);

struct MarkovSweepConfig {
    std::size_t states = 0;
    std::size_t order = 0;  ///< tensor order d; chain order d - 1
    Ranks ranks;
    std::vector<std::size_t> lengths;
    std::size_t replications = 1;
    std::uint64_t seed = 0;
};

/// Methods "empirical" and "ttoi-markov", one record per (method, length).
/// Replication k uses one model for all lengths.
std::vector<ExperimentRecord> run_markov_sweep(const MarkovSweepConfig& config);

struct RankSelectionRecord {
    std::string digest;
    Ranks true_ranks;
    std::vector<Ranks> selected;  ///< per replication; empty where it failed
    std::vector<std::string> failures;
    std::size_t hits = 0;
    double frequency = 0.0;  ///< hits / successful replications
};

std::vector<RankSelectionRecord> run_rank_selection_sweep(const std::vector<SpikedModelConfig>& grid,
                                                          const Ranks& r_max, const SelectOptions& options = {});

}  // namespace ttoi
