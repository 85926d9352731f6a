#include "commands.hpp"

#include "ttoi/errors.hpp"
#include "ttoi/io.hpp"
#include "ttoi/markov.hpp"
#include "ttoi/rankselect.hpp"
#include "ttoi/simlab.hpp"
#include "ttoi/tt.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ttoi::cli {

namespace {

std::vector<std::string> split(const std::string& text, char sep)
{
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        if (c == sep) {
            out.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    out.push_back(current);
    return out;
}

std::size_t parse_count(const std::string& token, const std::string& flag)
{
    if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos) {
        throw ArgumentError(flag + ": '" + token + "' is not a non-negative integer");
    }
    try {
        return static_cast<std::size_t>(std::stoull(token));
    } catch (const std::exception&) {
        throw ArgumentError(flag + ": '" + token + "' is out of range");
    }
}

std::vector<std::size_t> parse_list(const std::string& text, const std::string& flag)
{
    std::vector<std::size_t> out;
    for (const std::string& token : split(text, ',')) out.push_back(parse_count(token, flag));
    return out;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& flag)
{
    std::vector<double> out;
    for (const std::string& token : split(text, ',')) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(token, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (token.empty() || pos != token.size()) throw ArgumentError(flag + ": '" + token + "' is not a number");
        out.push_back(v);
    }
    return out;
}

Ranks parse_ranks(const std::string& text, std::size_t expected, const std::string& flag)
{
    Ranks r = parse_list(text, flag);
    if (r.size() != expected) {
        throw ArgumentError(flag + ": expected " + std::to_string(expected) + " comma-separated values, got " +
                            std::to_string(r.size()));
    }
    for (std::size_t v : r) {
        if (v < 1) throw ArgumentError(flag + ": values must be >= 1");
    }
    return r;
}

std::string join(const std::vector<std::size_t>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

std::uint64_t resolve_seed(std::uint64_t flag_value)
{
    const char* env = std::getenv("TTOI_SEED");
    if (env == nullptr || *env == '\0') return flag_value;
    return parse_count(env, "TTOI_SEED");
}

// Index columns i1..id (1-based) followed by value columns, one row per entry,
// grouped by prefix (last index fastest).
void write_entries(std::ostream& out, const Dims& dims, const std::vector<std::string>& names,
                   const std::vector<const DenseTensor*>& tensors)
{
    std::vector<std::string> header;
    for (std::size_t k = 0; k < dims.size(); ++k) header.push_back("i" + std::to_string(k + 1));
    header.insert(header.end(), names.begin(), names.end());
    CsvWriter csv(out, header);
    std::vector<std::size_t> index(dims.size(), 0);
    const std::size_t total = checked_product(dims);
    for (std::size_t lin = 0; lin < total; ++lin) {
        std::size_t rest = lin;
        for (std::size_t k = dims.size(); k-- > 0;) {
            index[k] = rest % dims[k];
            rest /= dims[k];
        }
        std::vector<std::string> row;
        for (std::size_t i : index) row.push_back(std::to_string(i + 1));
        const std::size_t off = tensors.front()->offset(index);
        for (const DenseTensor* t : tensors) row.push_back(format_double(t->data()[off]));
        csv.row(row);
    }
}

struct DecomposeArgs {
    std::string input;
    std::string ranks;
    int iters = 10;
    std::optional<double> eps;
    std::string output_cores;
    std::string output_estimate;
    bool diagnostics = false;
};

int decompose(const DecomposeArgs& a, std::ostream& out)
{
    const DenseTensor y = read_tensor(a.input);
    if (y.order() < 2) throw ArgumentError("--input: tensor order must be >= 2");
    const Ranks ranks = parse_ranks(a.ranks, y.order() - 1, "--ranks");
    if (a.iters < 0) throw ArgumentError("--iters must be >= 0");
    TtoiOptions options;
    options.t_max = a.iters;
    options.epsilon = a.eps;
    const TtoiResult fit = ttoi(y, ranks, options);

    if (!a.output_cores.empty()) {
        const TTTensor& cores = fit.cores;
        const std::size_t d = cores.order();
        write_tensor(a.output_cores + "_core1.tnsr", DenseTensor::from_matrix(cores.first()));
        for (std::size_t k = 2; k <= d - 1; ++k) {
            write_tensor(a.output_cores + "_core" + std::to_string(k) + ".tnsr", cores.middle(k));
        }
        write_tensor(a.output_cores + "_core" + std::to_string(d) + ".tnsr",
                     DenseTensor::from_matrix(cores.last().transpose()));
    }
    if (!a.output_estimate.empty()) write_tensor(a.output_estimate, fit.estimate);
    if (a.diagnostics) {
        CsvWriter csv(out, {"iteration", "objective", "estimate_sq_norm"});
        const TtoiDiagnostics& diag = fit.diagnostics;
        for (std::size_t t = 0; t < diag.objective_trace.size(); ++t) {
            csv.row({std::to_string(t), format_double(diag.objective_trace[t]),
                     format_double(diag.estimate_sq_norms[t])});
        }
    }
    return kOk;
}

struct SelectArgs {
    std::string input;
    std::string rmax;
    std::string strategy = "auto";
    int iters = 10;
};

int select(const SelectArgs& a, std::ostream& out)
{
    const DenseTensor y = read_tensor(a.input);
    if (y.order() < 2) throw ArgumentError("--input: tensor order must be >= 2");
    const Ranks r_max = parse_ranks(a.rmax, y.order() - 1, "--rmax");
    SelectOptions options;
    if (a.strategy == "auto") {
        options.strategy = SearchStrategy::automatic;
    } else if (a.strategy == "exhaustive") {
        options.strategy = SearchStrategy::exhaustive;
    } else if (a.strategy == "greedy") {
        options.strategy = SearchStrategy::greedy;
    } else {
        throw ArgumentError("--strategy must be auto, exhaustive or greedy");
    }
    if (a.iters < 0) throw ArgumentError("--iters must be >= 0");
    options.ttoi.t_max = a.iters;
    out << join(select_ranks(y, r_max, options).ranks) << '\n';
    return kOk;
}

struct SpikedArgs {
    std::string dims;
    std::string ranks;
    std::string noise = "gaussian";
    double level = 1.0;
    std::string sweep;
    std::size_t reps = 50;
    std::uint64_t seed = 0;
    std::string methods = "ttsvd,ttoi1,ttoi2";
    bool no_timing = false;
};

int spiked(const SpikedArgs& a, std::ostream& out)
{
    SpikedModelConfig base;
    base.dims = parse_list(a.dims, "--dims");
    if (base.dims.size() < 2) throw ArgumentError("--dims: need at least two modes");
    base.ranks = parse_ranks(a.ranks, base.dims.size() - 1, "--ranks");
    if (a.noise == "gaussian") {
        base.noise = NoiseFamily::gaussian;
    } else if (a.noise == "uniform") {
        base.noise = NoiseFamily::uniform;
    } else {
        throw ArgumentError("--noise must be gaussian or uniform");
    }
    base.replications = a.reps;
    base.seed = resolve_seed(a.seed);
    const std::vector<double> levels = a.sweep.empty() ? std::vector<double>{a.level} : parse_doubles(a.sweep, "--sweep");
    std::vector<SpikedModelConfig> grid;
    for (double level : levels) {
        SpikedModelConfig c = base;
        c.level = level;
        c.validate();
        grid.push_back(c);
    }
    const std::vector<std::string> methods = split(a.methods, ',');
    for (const std::string& m : methods) {
        if (m != "ttsvd" && m != "ttoi1" && m != "ttoi2") {
            throw ArgumentError("--methods: unknown method '" + m + "'");
        }
    }
    const std::vector<ExperimentRecord> records = run_spiked_sweep(grid, methods);
    write_records(out, records, !a.no_timing);
    return kOk;
}

struct MarkovArgs {
    std::string trajectory;
    std::size_t generative_n = 0;
    std::size_t states = 0;
    std::size_t order = 1;
    std::string ranks;
    std::string model;
    std::uint64_t seed = 0;
    std::string output;
};

int markov(const MarkovArgs& a, std::ostream& out)
{
    if (a.trajectory.empty() == (a.generative_n == 0)) {
        throw ArgumentError("exactly one of --trajectory and --generative-n is required");
    }
    if (a.states < 1) throw ArgumentError("--states must be >= 1");
    if (a.order < 1) throw ArgumentError("--order must be >= 1");
    const std::size_t d = a.order + 1;
    std::optional<Ranks> ranks;
    if (!a.ranks.empty()) ranks = parse_ranks(a.ranks, a.order, "--ranks");

    std::optional<DenseTensor> truth;
    DenseTensor empirical(Dims{1});
    if (!a.trajectory.empty()) {
        const Trajectory traj = read_trajectory(a.trajectory, a.states);
        empirical = empirical_from_trajectory(traj, a.states, d);
    } else {
        std::optional<MarkovModel> model;
        const std::uint64_t seed = resolve_seed(a.seed);
        if (!a.model.empty()) {
            DenseTensor p = read_tensor(a.model);
            if (p.dims() != Dims(d, a.states)) {
                throw ArgumentError("--model: expected a tensor with " + std::to_string(d) + " modes of size " +
                                    std::to_string(a.states));
            }
            validate_transition(p, 1e-9);
            model = MarkovModel{a.states, a.order, std::move(p)};
        } else {
            if (!ranks) throw ArgumentError("--generative-n without --model needs --ranks to generate a model");
            model = generate_aggregatable(a.states, d, *ranks, seed);
        }
        empirical = empirical_generative(*model, a.generative_n, seed);
        truth = model->transition;
    }

    std::vector<std::string> names;
    std::vector<const DenseTensor*> columns;
    if (truth) {
        names.push_back("truth");
        columns.push_back(&*truth);
    }
    names.push_back("empirical");
    columns.push_back(&empirical);
    std::optional<DenseTensor> estimate;
    if (ranks) {
        estimate = estimate_transition(empirical, *ranks).projected;
        names.push_back("estimate");
        columns.push_back(&*estimate);
    }
    if (!a.output.empty()) write_tensor(a.output, estimate ? *estimate : empirical);
    write_entries(out, empirical.dims(), names, columns);
    return kOk;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Tensor-train orthogonal iteration toolkit", "ttoi"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "ttoi 0.1.0");

    DecomposeArgs dec;
    CLI::App* dec_cmd = app.add_subcommand("decompose", "Fit a TT approximation of a tensor file");
    dec_cmd->add_option("--input", dec.input, "Tensor file")->required();
    dec_cmd->add_option("--ranks", dec.ranks, "TT ranks r1,...,r(d-1)")->required();
    dec_cmd->add_option("--iters", dec.iters, "Maximum TTOI iterations (0 = TT-SVD)")->capture_default_str();
    dec_cmd->add_option("--eps", dec.eps, "Stop when the fitted energy gains less than this (default 1e-6 ||Y||^2)");
    dec_cmd->add_option("--output-cores", dec.output_cores, "Write cores to PREFIX_core<k>.tnsr");
    dec_cmd->add_option("--output-estimate", dec.output_estimate, "Write the dense estimate to this file");
    dec_cmd->add_flag("--diagnostics", dec.diagnostics, "Print the objective trace as CSV");

    SelectArgs sel;
    CLI::App* sel_cmd = app.add_subcommand("select-ranks", "Choose TT ranks by the BIC criterion");
    sel_cmd->add_option("--input", sel.input, "Tensor file")->required();
    sel_cmd->add_option("--rmax", sel.rmax, "Upper rank bounds r1,...,r(d-1)")->required();
    sel_cmd->add_option("--strategy", sel.strategy, "auto, exhaustive or greedy")->capture_default_str();
    sel_cmd->add_option("--iters", sel.iters, "TTOI iterations per candidate")->capture_default_str();

    SpikedArgs spk;
    CLI::App* spk_cmd = app.add_subcommand("spiked", "Monte-Carlo sweep on the spiked TT model");
    spk_cmd->add_option("--dims", spk.dims, "p1,...,pd")->required();
    spk_cmd->add_option("--ranks", spk.ranks, "r1,...,r(d-1)")->required();
    spk_cmd->add_option("--noise", spk.noise, "gaussian or uniform")->capture_default_str();
    spk_cmd->add_option("--level", spk.level, "Noise sigma (gaussian) or b (uniform)")->capture_default_str();
    spk_cmd->add_option("--sweep", spk.sweep, "Comma-separated noise levels; overrides --level");
    spk_cmd->add_option("--reps", spk.reps, "Replications per level")->capture_default_str();
    spk_cmd->add_option("--seed", spk.seed, "Base seed (TTOI_SEED overrides)")->capture_default_str();
    spk_cmd->add_option("--methods", spk.methods, "Subset of ttsvd,ttoi1,ttoi2")->capture_default_str();
    spk_cmd->add_flag("--no-timing", spk.no_timing, "Omit the wall_ms column");

    MarkovArgs mkv;
    CLI::App* mkv_cmd = app.add_subcommand("markov", "Estimate a high-order transition tensor");
    mkv_cmd->add_option("--trajectory", mkv.trajectory, "Trajectory file, one 1-based state per line");
    mkv_cmd->add_option("--generative-n", mkv.generative_n, "Draws per prefix in the generative setting");
    mkv_cmd->add_option("--states", mkv.states, "Number of states p")->required();
    mkv_cmd->add_option("--order", mkv.order, "Chain order d-1")->capture_default_str();
    mkv_cmd->add_option("--ranks", mkv.ranks, "TT ranks r1,...,r(d-1); enables the TTOI estimate");
    mkv_cmd->add_option("--model", mkv.model, "Transition tensor file to sample from (generative setting)");
    mkv_cmd->add_option("--seed", mkv.seed, "Seed (TTOI_SEED overrides)")->capture_default_str();
    mkv_cmd->add_option("--output", mkv.output, "Write the final transition tensor to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kArgument;
    }

    CLI::App* active = app.get_subcommands().front();
    try {
        if (active == dec_cmd) return decompose(dec, out);
        if (active == sel_cmd) return select(sel, out);
        if (active == spk_cmd) return spiked(spk, out);
        return markov(mkv, out);
    } catch (const ArgumentError& e) {
        err << "error: " << e.what() << "\n\n" << active->help();
        return kArgument;
    } catch (const ResourceError& e) {
        err << "error: " << e.what() << '\n';
        return kArgument;
    } catch (const FormatError& e) {
        err << "format error: " << e.what() << '\n';
        return kFormat;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kFormat;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << '\n';
        return kNumeric;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUnexpected;
    }
}

}  // namespace ttoi::cli
