#include "ttoi/errors.hpp"
#include "ttoi/io.hpp"
#include "ttoi/markov.hpp"
#include "ttoi/rankselect.hpp"
#include "ttoi/simlab.hpp"
#include "ttoi/tt.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <optional>
#include <string>

namespace py = pybind11;
using namespace ttoi;

namespace {

using FArray = py::array_t<double, py::array::f_style | py::array::forcecast>;

// Mode-1-fastest storage is Fortran order.
DenseTensor to_tensor(const FArray& a)
{
    if (a.ndim() == 0) throw ArgumentError("expected an array with at least one dimension");
    Dims dims(static_cast<std::size_t>(a.ndim()));
    for (std::size_t k = 0; k < dims.size(); ++k) dims[k] = static_cast<std::size_t>(a.shape(static_cast<py::ssize_t>(k)));
    return DenseTensor(std::move(dims), std::vector<double>(a.data(), a.data() + a.size()));
}

FArray to_array(const DenseTensor& t)
{
    std::vector<py::ssize_t> shape(t.dims().begin(), t.dims().end());
    FArray out(shape);
    std::copy(t.data().begin(), t.data().end(), out.mutable_data());
    return out;
}

FArray matrix_to_core(const Matrix& m, bool transpose_to_last)
{
    // First core as (1, p, r); last core stored p x r becomes (r, p, 1).
    const Matrix src = transpose_to_last ? Matrix(m.transpose()) : m;
    const std::size_t rows = static_cast<std::size_t>(src.rows());
    const std::size_t cols = static_cast<std::size_t>(src.cols());
    const Dims dims = transpose_to_last ? Dims{rows, cols, 1} : Dims{1, rows, cols};
    return to_array(DenseTensor(dims, std::vector<double>(src.data(), src.data() + src.size())));
}

py::list cores_to_list(const TTTensor& cores)
{
    py::list out;
    out.append(matrix_to_core(cores.first(), false));
    for (const DenseTensor& g : cores.middles()) out.append(to_array(g));
    out.append(matrix_to_core(cores.last(), true));
    return out;
}

SearchStrategy parse_strategy(const std::string& s)
{
    if (s == "auto") return SearchStrategy::automatic;
    if (s == "exhaustive") return SearchStrategy::exhaustive;
    if (s == "greedy") return SearchStrategy::greedy;
    throw ArgumentError("strategy must be auto, exhaustive or greedy");
}

NoiseFamily parse_noise(const std::string& s)
{
    if (s == "gaussian") return NoiseFamily::gaussian;
    if (s == "uniform") return NoiseFamily::uniform;
    throw ArgumentError("noise must be gaussian or uniform");
}

py::dict fit_to_dict(const TtoiResult& r)
{
    py::dict d;
    d["estimate"] = to_array(r.estimate);
    d["cores"] = cores_to_list(r.cores);
    d["iterations"] = r.diagnostics.iterations;
    d["objective_trace"] = r.diagnostics.objective_trace;
    d["stopped_by_tolerance"] = r.diagnostics.stopped_by_tolerance;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Tensor-train SVD, orthogonal iteration, BIC rank selection and Markov transition estimation";

    static py::exception<FormatError> format_error(m, "FormatError", PyExc_ValueError);
    static py::exception<NumericError> numeric_error(m, "NumericError", PyExc_ArithmeticError);
    static py::exception<StateError> state_error(m, "StateError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ArgumentError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const FormatError& e) {
            format_error(e.what());
        } catch (const NumericError& e) {
            numeric_error(e.what());
        } catch (const StateError& e) {
            state_error(e.what());
        } catch (const IoError& e) {
            PyErr_SetString(PyExc_OSError, e.what());
        } catch (const ResourceError& e) {
            PyErr_SetString(PyExc_MemoryError, e.what());
        }
    });

    m.def(
        "ttoi",
        [](const FArray& y, const Ranks& ranks, int t_max, std::optional<double> epsilon) {
            TtoiOptions o;
            o.t_max = t_max;
            o.epsilon = epsilon;
            return fit_to_dict(ttoi::ttoi(to_tensor(y), ranks, o));
        },
        py::arg("y"), py::arg("ranks"), py::arg("t_max") = 10, py::arg("epsilon") = py::none(),
        "Fit a TT approximation. t_max = 0 is TT-SVD. Returns a dict with estimate, cores "
        "(each of shape (r_prev, p, r_next)), iterations and objective_trace.");

    m.def(
        "tt_svd", [](const FArray& y, const Ranks& ranks) { return to_array(*tt_svd(to_tensor(y), ranks).state.estimate); },
        py::arg("y"), py::arg("ranks"));

    m.def(
        "contract",
        [](const std::vector<FArray>& cores) {
            if (cores.size() < 2) throw ArgumentError("need at least two cores");
            auto as_matrix = [](const FArray& a, bool last) {
                const DenseTensor t = to_tensor(a);
                if (t.order() != 3) throw ArgumentError("cores must be 3-way arrays");
                const auto r0 = static_cast<Eigen::Index>(t.dim(0));
                const auto p = static_cast<Eigen::Index>(t.dim(1));
                const auto r1 = static_cast<Eigen::Index>(t.dim(2));
                if (!last) {
                    if (r0 != 1) throw ArgumentError("first core must have shape (1, p, r)");
                    return Matrix(Eigen::Map<const Matrix>(t.data().data(), p, r1));
                }
                if (r1 != 1) throw ArgumentError("last core must have shape (r, p, 1)");
                return Matrix(Eigen::Map<const Matrix>(t.data().data(), r0, p).transpose());
            };
            std::vector<DenseTensor> middle;
            for (std::size_t k = 1; k + 1 < cores.size(); ++k) middle.push_back(to_tensor(cores[k]));
            return to_array(contract(TTTensor(as_matrix(cores.front(), false), std::move(middle),
                                              as_matrix(cores.back(), true))));
        },
        py::arg("cores"));

    m.def(
        "tt_ranks", [](const FArray& x, double tol) { return tt_ranks_of(to_tensor(x), tol).ranks; }, py::arg("x"),
        py::arg("tol") = 1e-10);

    m.def(
        "bic_score",
        [](const FArray& y, const Ranks& ranks) {
            const BicResult r = bic_score(to_tensor(y), ranks);
            return py::make_tuple(r.score, r.residual_sq, r.param_count);
        },
        py::arg("y"), py::arg("ranks"), "Returns (score, residual_sq, param_count).");

    m.def(
        "select_ranks",
        [](const FArray& y, const Ranks& r_max, const std::string& strategy) {
            SelectOptions o;
            o.strategy = parse_strategy(strategy);
            const BicResult r = select_ranks(to_tensor(y), r_max, o);
            return py::make_tuple(r.ranks, r.score);
        },
        py::arg("y"), py::arg("r_max"), py::arg("strategy") = "auto");

    m.def(
        "generate_spiked",
        [](const Dims& dims, const Ranks& ranks, double level, std::uint64_t seed, std::size_t replication,
           const std::string& noise) {
            SpikedModelConfig c;
            c.dims = dims;
            c.ranks = ranks;
            c.level = level;
            c.seed = seed;
            c.noise = parse_noise(noise);
            const SpikedInstance inst = generate_spiked(c, replication);
            return py::make_tuple(to_array(inst.truth), to_array(inst.observed));
        },
        py::arg("dims"), py::arg("ranks"), py::arg("level"), py::arg("seed") = 0, py::arg("replication") = 0,
        py::arg("noise") = "gaussian", "Returns (truth, observed).");

    m.def(
        "generate_aggregatable",
        [](std::size_t states, std::size_t order, const Ranks& ranks, std::uint64_t seed) {
            return to_array(generate_aggregatable(states, order, ranks, seed).transition);
        },
        py::arg("states"), py::arg("order"), py::arg("ranks"), py::arg("seed") = 0,
        "Transition tensor of tensor order `order` (chain order order - 1).");

    m.def(
        "sample_trajectory",
        [](const FArray& transition, std::size_t n, std::uint64_t seed) {
            const DenseTensor p = to_tensor(transition);
            MarkovModel model{p.dim(0), p.order() - 1, p};
            return sample_trajectory(model, n, seed).states;
        },
        py::arg("transition"), py::arg("n"), py::arg("seed") = 0, "0-based states.");

    m.def(
        "empirical_transition",
        [](const std::vector<std::uint32_t>& states, std::size_t p, std::size_t order) {
            return to_array(empirical_from_trajectory(Trajectory{states}, p, order));
        },
        py::arg("states"), py::arg("p"), py::arg("order"));

    m.def(
        "estimate_transition",
        [](const FArray& empirical, const Ranks& ranks) {
            return to_array(estimate_transition(to_tensor(empirical), ranks).projected);
        },
        py::arg("empirical"), py::arg("ranks"));

    m.def("simplex_project", [](const std::vector<double>& v) { return simplex_project(v); }, py::arg("v"));

    m.def(
        "read_tensor", [](const std::filesystem::path& path) { return to_array(read_tensor(path)); }, py::arg("path"));
    m.def(
        "write_tensor", [](const std::filesystem::path& path, const FArray& t) { write_tensor(path, to_tensor(t)); },
        py::arg("path"), py::arg("tensor"));
}
