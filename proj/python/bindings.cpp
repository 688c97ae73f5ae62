#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rembed/error.hpp"
#include "rembed/io.hpp"
#include "rembed/linalg.hpp"
#include "rembed/oracle.hpp"
#include "rembed/parallel.hpp"
#include "rembed/predictor.hpp"
#include "rembed/rembed.hpp"

namespace py = pybind11;
using namespace rembed;

namespace {

using FArray = py::array_t<double, py::array::f_style | py::array::forcecast>;

DenseMatrix to_dense(const FArray& a) {
    if (a.ndim() != 2) throw DimensionError("expected a 2-d array");
    const auto rows = static_cast<std::size_t>(a.shape(0));
    const auto cols = static_cast<std::size_t>(a.shape(1));
    return DenseMatrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

py::array_t<double> to_numpy(const DenseMatrix& m) {
    py::array_t<double, py::array::f_style> out({m.rows(), m.cols()});
    std::copy(m.values().begin(), m.values().end(), out.mutable_data());
    return out;
}

template <class T>
py::array_t<T> vec_to_numpy(std::span<const T> v) {
    py::array_t<T> out(v.size());
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::dict report_dict(const SolveReport& r) {
    py::dict d;
    d["all_converged"] = r.all_converged();
    d["total_iterations"] = r.total_iterations();
    d["max_iterations_used"] = r.max_iterations_used();
    d["max_relative_residual"] = r.max_relative_residual();
    return d;
}

SolverParams solver_for(const SparseMatrix& x, std::optional<double> ridge, double tol, std::size_t max_iter) {
    SolverParams s;
    s.ridge = ridge ? *ridge : default_ridge(x);
    s.rel_tolerance = tol;
    s.max_iterations = max_iter;
    return s;
}

}  // namespace

PYBIND11_MODULE(_rembed, m) {
    m.doc() = "Randomized label embeddings for multilabel and multiclass prediction";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DimensionError>(m, "DimensionError", base);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", base);
    py::register_exception<ModelFormatError>(m, "ModelFormatError", base);
    // ParseError carries the 1-based line number as its `line` attribute.
    static py::exception<ParseError> parse_error(m, "ParseError", base);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ParseError& e) {
            py::object err = py::reinterpret_borrow<py::object>(parse_error.ptr())(e.what());
            err.attr("line") = e.line();
            PyErr_SetObject(parse_error.ptr(), err.ptr());
        }
    });

    m.def("set_max_threads", &set_max_threads, py::arg("n"));
    m.def("max_threads", &max_threads);

    py::class_<SparseMatrix>(m, "SparseMatrix")
        .def(py::init([](std::size_t rows, std::size_t cols, const py::array_t<std::int64_t, py::array::forcecast>& indptr,
                         const py::array_t<std::int64_t, py::array::forcecast>& indices,
                         const py::array_t<double, py::array::forcecast>& data) {
                 std::vector<std::size_t> offsets;
                 for (std::int64_t v : std::span(indptr.data(), indptr.size())) {
                     if (v < 0) throw InvalidArgument("negative row offset");
                     offsets.push_back(static_cast<std::size_t>(v));
                 }
                 std::vector<Index> cols_idx;
                 for (std::int64_t v : std::span(indices.data(), indices.size())) {
                     if (v < 0 || v > std::numeric_limits<Index>::max()) throw InvalidArgument("column index out of range");
                     cols_idx.push_back(static_cast<Index>(v));
                 }
                 return SparseMatrix(rows, cols, std::move(offsets), std::move(cols_idx),
                                     std::vector<double>(data.data(), data.data() + data.size()));
             }),
             py::arg("rows"), py::arg("cols"), py::arg("indptr"), py::arg("indices"), py::arg("data"))
        .def_property_readonly("shape", [](const SparseMatrix& a) { return py::make_tuple(a.rows(), a.cols()); })
        .def_property_readonly("nnz", &SparseMatrix::nnz)
        .def_property_readonly("indptr", [](const SparseMatrix& a) { return vec_to_numpy(a.row_offsets()); })
        .def_property_readonly("indices", [](const SparseMatrix& a) { return vec_to_numpy(a.col_indices()); })
        .def_property_readonly("data", [](const SparseMatrix& a) { return vec_to_numpy(a.values()); })
        .def("to_dense", [](const SparseMatrix& a) { return to_numpy(a.to_dense()); })
        .def("__eq__", [](const SparseMatrix& a, const SparseMatrix& b) { return a == b; });

    m.def("spmm", [](const SparseMatrix& a, const FArray& b) { return to_numpy(spmm(a, to_dense(b))); });
    m.def("spmm_t", [](const SparseMatrix& a, const FArray& b) { return to_numpy(spmm_t(a, to_dense(b))); });
    m.def("row_l2_normalize", &row_l2_normalize);
    m.def("default_ridge", &default_ridge);

    py::class_<LabelEmbedding>(m, "LabelEmbedding")
        .def_property_readonly("basis", [](const LabelEmbedding& e) { return to_numpy(e.basis); })
        .def_readonly("spectrum", &LabelEmbedding::spectrum)
        .def_property_readonly("dim", &LabelEmbedding::dim)
        .def_property_readonly("num_labels", &LabelEmbedding::num_labels);

    py::class_<LinearPredictor>(m, "LinearPredictor")
        .def_property_readonly("regressor", [](const LinearPredictor& p) { return to_numpy(p.regressor); })
        .def_readonly("embedding", &LinearPredictor::embedding)
        .def_readonly("ridge_used", &LinearPredictor::ridge_used)
        .def_property_readonly("trained", [](const LinearPredictor& p) { return has_regressor(p); });

    py::enum_<DatasetKind>(m, "DatasetKind")
        .value("Multiclass", DatasetKind::Multiclass)
        .value("Multilabel", DatasetKind::Multilabel);

    py::class_<Dataset>(m, "Dataset")
        .def(py::init([](SparseMatrix features, SparseMatrix labels) {
                 Dataset d{std::move(features), std::move(labels), DatasetKind::Multilabel};
                 d.validate();
                 d.kind = infer_kind(d.labels);
                 return d;
             }),
             py::arg("features"), py::arg("labels"))
        .def_readonly("features", &Dataset::features)
        .def_readonly("labels", &Dataset::labels)
        .def_readonly("kind", &Dataset::kind)
        .def("__len__", &Dataset::size);

    m.def(
        "rembed",
        [](const SparseMatrix& x, const SparseMatrix& y, std::size_t k, std::size_t p, std::size_t q,
           std::optional<double> ridge, double tol, std::size_t max_iter, std::uint64_t seed) {
            RembedConfig config;
            config.embedding_dim = k;
            config.oversampling = p;
            config.power_iterations = q;
            config.solver = solver_for(x, ridge, tol, max_iter);
            config.seed = seed;
            RembedResult r;
            {
                py::gil_scoped_release release;
                r = rembed::rembed(x, y, config);
            }
            return py::make_tuple(r.embedding, r.ritz_values, report_dict(r.solves));
        },
        py::arg("x"), py::arg("y"), py::arg("k"), py::arg("p") = 10, py::arg("q") = 3, py::arg("ridge") = py::none(),
        py::arg("tol") = 1e-6, py::arg("max_iter") = 1000, py::arg("seed") = 0);

    m.def(
        "hat_product",
        [](const SparseMatrix& x, const SparseMatrix& y, const FArray& q, std::optional<double> ridge, double tol,
           std::size_t max_iter) {
            return to_numpy(hat_product(x, y, to_dense(q), solver_for(x, ridge, tol, max_iter)).value);
        },
        py::arg("x"), py::arg("y"), py::arg("q"), py::arg("ridge") = py::none(), py::arg("tol") = 1e-6,
        py::arg("max_iter") = 1000);

    m.def(
        "fit_regressor",
        [](const SparseMatrix& x, const SparseMatrix& y, const LabelEmbedding& e, std::optional<double> ridge,
           double tol, std::size_t max_iter) {
            FitResult r;
            {
                py::gil_scoped_release release;
                r = fit_regressor(x, y, e, solver_for(x, ridge, tol, max_iter));
            }
            return py::make_tuple(r.model, report_dict(r.report));
        },
        py::arg("x"), py::arg("y"), py::arg("embedding"), py::arg("ridge") = py::none(), py::arg("tol") = 1e-6,
        py::arg("max_iter") = 1000);

    m.def(
        "predict_topt",
        [](const LinearPredictor& model, const SparseMatrix& x, std::size_t t) {
            py::array_t<std::int64_t> ids({x.rows(), t});
            py::array_t<double> scores({x.rows(), t});
            auto id = ids.mutable_unchecked<2>();
            auto sc = scores.mutable_unchecked<2>();
            for (std::size_t i = 0; i < x.rows(); ++i) {
                const Prediction p = predict_topt(x, i, model, t);
                for (std::size_t r = 0; r < t; ++r) {
                    id(i, r) = p.label_ids[r];
                    sc(i, r) = p.scores[r];
                }
            }
            return py::make_tuple(ids, scores);
        },
        py::arg("model"), py::arg("x"), py::arg("t"));

    m.def(
        "evaluate",
        [](const LinearPredictor& model, const Dataset& test, const std::vector<std::size_t>& at) {
            const Metrics metrics = evaluate(model, test, at);
            py::dict d;
            d["precision_at"] = metrics.precision_at;
            d["test_error"] = metrics.test_error ? py::cast(*metrics.test_error) : py::none();
            d["n_evaluated"] = metrics.n_evaluated;
            d["n_skipped_empty"] = metrics.n_skipped_empty;
            return d;
        },
        py::arg("model"), py::arg("test"), py::arg("at") = std::vector<std::size_t>{1, 3, 5});

    m.def(
        "generate_synthetic",
        [](std::size_t n, std::size_t d, std::size_t c, std::size_t k_true, double noise, std::uint64_t seed,
           std::size_t n_test) {
            SyntheticSpec spec;
            spec.n = n;
            spec.d = d;
            spec.c = c;
            spec.k_true = k_true;
            spec.noise = noise;
            spec.seed = seed;
            spec.n_test = n_test;
            SyntheticData s = generate_synthetic(spec);
            return py::make_tuple(std::move(s.train), std::move(s.test), to_numpy(s.planted_basis));
        },
        py::arg("n"), py::arg("d"), py::arg("c"), py::arg("k_true"), py::arg("noise") = 0.0, py::arg("seed") = 0,
        py::arg("n_test") = 0);

    m.def(
        "parse_multilabel_text",
        [](const std::filesystem::path& path) { return parse_multilabel_text(path).dataset; }, py::arg("path"));
    m.def(
        "write_multilabel_text",
        [](const Dataset& d, const std::filesystem::path& path) { write_multilabel_text(d, path); }, py::arg("data"),
        py::arg("path"));
    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));

    m.def(
        "exact_embedding",
        [](const FArray& x, const FArray& y, std::size_t k, double ridge) {
            const auto e = oracle::exact_embedding(to_dense(x), to_dense(y), k, ridge);
            return py::make_tuple(to_numpy(e.basis), e.eigenvalues);
        },
        py::arg("x"), py::arg("y"), py::arg("k"), py::arg("ridge"));
    m.def(
        "principal_angles",
        [](const FArray& a, const FArray& b) { return oracle::principal_angles(to_dense(a), to_dense(b)); },
        py::arg("a"), py::arg("b"));
}
