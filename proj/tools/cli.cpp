#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "rembed/error.hpp"
#include "rembed/io.hpp"
#include "rembed/oracle.hpp"
#include "rembed/parallel.hpp"
#include "rembed/predictor.hpp"
#include "rembed/rembed.hpp"
#include "report.hpp"

namespace rembed::cli {

namespace {

namespace fs = std::filesystem;

/// Raised for flag combinations CLI11 cannot validate on its own.
class UsageError : public Error {
public:
    using Error::Error;
};

struct CommonFlags {
    std::size_t threads = 0;
    std::string report_path;
    bool report_timings = false;
};

struct SolverFlags {
    std::optional<double> ridge;
    double tol = 1e-6;
    std::size_t max_iter = 1000;

    SolverParams resolve(const SparseMatrix& x) const {
        SolverParams p;
        p.ridge = ridge ? *ridge : default_ridge(x);
        p.rel_tolerance = tol;
        p.max_iterations = max_iter;
        p.validate();
        return p;
    }
};

struct EmbedFlags {
    std::string train_path;
    std::string model_path;
    std::size_t k = 0;
    std::size_t p = 10;
    std::size_t q = 3;
    std::uint64_t seed = 0;
    bool normalize = false;
    SolverFlags solver;
};

struct TrainFlags {
    std::string train_path;
    std::string model_path;
    bool normalize = false;
    SolverFlags solver;
};

struct PredictFlags {
    std::string data_path;
    std::string model_path;
    std::size_t top = 5;
    bool normalize = false;
};

struct EvalFlags {
    std::string test_path;
    std::string model_path;
    std::vector<std::size_t> at{1, 3, 5};
    bool normalize = false;
    std::optional<double> min_p1;
};

struct VerifyFlags {
    std::size_t size = 1;
    std::uint64_t seed = 0;
    std::uint64_t instance_seed = 11;
    std::size_t k = 5;
    std::size_t p = 5;
    std::size_t q = 20;
    double ridge = 1e-6;
    double tol = 1e-12;
};

struct SynthFlags {
    SyntheticSpec spec;
    std::string train_out;
    std::string test_out;
    std::string planted_out;
};

void add_common(CLI::App& cmd, CommonFlags& f) {
    cmd.add_option("--threads", f.threads, "Worker thread cap (0 = all cores); never changes results");
    cmd.add_option("--report", f.report_path, "Write the run report (JSON) to this path");
    cmd.add_flag("--report-timings", f.report_timings, "Embed per-stage wall-clock times in the report");
}

void add_solver(CLI::App& cmd, SolverFlags& f) {
    cmd.add_option("--ridge", f.ridge, "Ridge penalty (default: 1e-3 x mean squared row norm of X)")
        ->check(CLI::NonNegativeNumber);
    cmd.add_option("--tol", f.tol, "Relative normal-equation residual target, in (0, 1)")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd.add_option("--max-iter", f.max_iter, "Conjugate-gradient iteration cap per column")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

Dataset load_dataset(const std::string& path, bool normalize, RunReport& report, const std::string& key) {
    if (!fs::exists(path)) throw UsageError("input file '" + path + "' does not exist");
    ParsedDataset parsed = report.stage("parse", [&] { return parse_multilabel_text(fs::path(path)); });
    if (normalize) parsed.dataset.features = row_l2_normalize(parsed.dataset.features);
    Json info = describe(parsed.dataset);
    info["path"] = path;
    info["normalized"] = normalize;
    info["parse"] = to_json(parsed.report);
    report[key] = info;
    return std::move(parsed.dataset);
}

void warn_unconverged(const SolveReport& r, const std::string& stage, std::ostream& err) {
    if (r.all_converged()) return;
    std::size_t bad = 0;
    for (const auto& c : r.columns) bad += c.converged ? 0 : 1;
    err << "warning: " << stage << ": " << bad << " of " << r.columns.size()
        << " inner solves stopped before reaching the tolerance (max relative residual "
        << r.max_relative_residual() << ")\n";
}

void finish(const RunReport& report, const CommonFlags& common) {
    if (!common.report_path.empty()) report.write(common.report_path);
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

// ---------------------------------------------------------------------------

int cmd_embed(const EmbedFlags& f, const CommonFlags& common, std::ostream& out, std::ostream& err) {
    RunReport report("embed", err, common.report_timings);
    const Dataset data = load_dataset(f.train_path, f.normalize, report, "train");

    RembedConfig config;
    config.embedding_dim = f.k;
    config.oversampling = f.p;
    config.power_iterations = f.q;
    config.seed = f.seed;
    config.solver = f.solver.resolve(data.features);
    try {
        config.validate(data.num_labels());
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    report["config"] = to_json(config);

    RembedResult result = report.stage("rembed", [&] { return rembed(data.features, data.labels, config); });
    warn_unconverged(result.solves, "embed", err);
    report["solver"] = to_json(result.solves);
    report["spectrum"] = result.embedding.spectrum;
    report["ritz_values"] = result.ritz_values;

    LinearPredictor model;
    model.regressor = DenseMatrix(0, config.embedding_dim);
    model.embedding = std::move(result.embedding);
    model.ridge_used = config.solver.ridge;
    report.stage("save", [&] { save_model(model, f.model_path); });
    report["model"] = f.model_path;

    out << "spectrum";
    for (double v : model.embedding.spectrum) out << ' ' << format_double(v);
    out << '\n';
    finish(report, common);
    return kSuccess;
}

int cmd_train(const TrainFlags& f, const CommonFlags& common, std::ostream& out, std::ostream& err) {
    RunReport report("train", err, common.report_timings);
    if (!fs::exists(f.model_path))
        throw UsageError("model '" + f.model_path + "' has no embedding section; run `rembed embed` first");
    LinearPredictor model = load_model(f.model_path);
    if (model.dim() == 0)
        throw UsageError("model '" + f.model_path + "' has no embedding section; run `rembed embed` first");

    const Dataset data = load_dataset(f.train_path, f.normalize, report, "train");
    if (data.num_labels() != model.num_labels())
        throw UsageError("training data has " + std::to_string(data.num_labels()) +
                         " labels but the embedding covers " + std::to_string(model.num_labels()));
    const SolverParams solver = f.solver.resolve(data.features);
    report["solver_params"] = to_json(solver);
    report["k"] = model.dim();

    FitResult fit =
        report.stage("fit", [&] { return fit_regressor(data.features, data.labels, model.embedding, solver); });
    warn_unconverged(fit.report, "train", err);
    report["solver"] = to_json(fit.report);

    report.stage("save", [&] { save_model(fit.model, f.model_path); });
    report["model"] = f.model_path;
    out << "trained regressor " << fit.model.num_features() << "x" << fit.model.dim() << " -> " << f.model_path
        << '\n';
    finish(report, common);
    return kSuccess;
}

LinearPredictor load_trained(const std::string& path) {
    if (!fs::exists(path)) throw UsageError("model '" + path + "' does not exist");
    LinearPredictor model = load_model(path);
    if (!has_regressor(model))
        throw UsageError("model '" + path + "' has no trained regressor; run `rembed train` first");
    return model;
}

int cmd_predict(const PredictFlags& f, const CommonFlags& common, std::ostream& out, std::ostream& err) {
    RunReport report("predict", err, common.report_timings);
    const LinearPredictor model = load_trained(f.model_path);
    if (f.top > model.num_labels())
        throw UsageError("--top " + std::to_string(f.top) + " exceeds the number of labels " +
                         std::to_string(model.num_labels()));
    const Dataset data = load_dataset(f.data_path, f.normalize, report, "data");
    if (data.num_features() > model.num_features())
        throw UsageError("data has " + std::to_string(data.num_features()) + " features but the model has " +
                         std::to_string(model.num_features()));
    report["top"] = f.top;

    report.stage("predict", [&] {
        for (std::size_t i = 0; i < data.size(); ++i) {
            const Prediction pred = predict_topt(data.features, i, model, f.top);
            for (std::size_t r = 0; r < pred.label_ids.size(); ++r)
                out << (r ? " " : "") << pred.label_ids[r] + 1 << ':' << format_double(pred.scores[r]);
            out << '\n';
        }
    });
    finish(report, common);
    return kSuccess;
}

int cmd_eval(const EvalFlags& f, const CommonFlags& common, std::ostream& out, std::ostream& err) {
    RunReport report("eval", err, common.report_timings);
    const LinearPredictor model = load_trained(f.model_path);
    for (std::size_t t : f.at)
        if (t == 0 || t > model.num_labels())
            throw UsageError("--at " + std::to_string(t) + " must lie in [1, " + std::to_string(model.num_labels()) +
                             "]");
    const Dataset data = load_dataset(f.test_path, f.normalize, report, "test");
    if (data.num_features() > model.num_features() || data.num_labels() > model.num_labels())
        throw UsageError("test data dimensions exceed the model's");

    const Metrics metrics = report.stage("evaluate", [&] { return evaluate(model, data, f.at); });
    const Json doc = to_json(metrics);
    report["metrics"] = doc;
    out << doc.dump(2) << '\n';
    finish(report, common);

    if (f.min_p1) {
        const double p1 = metrics.precision_at.count(1) ? metrics.precision_at.at(1) : 0.0;
        if (p1 < *f.min_p1) {
            err << "precision@1 " << p1 << " is below the required " << *f.min_p1 << '\n';
            return kCheckFailed;
        }
    }
    return kSuccess;
}

// ---------------------------------------------------------------------------

struct Check {
    std::string name;
    double value;
    double threshold;
    bool pass;
};

int cmd_verify(const VerifyFlags& f, const CommonFlags& common, std::ostream& out, std::ostream& err) {
    RunReport report("verify", err, common.report_timings);
    if (f.size < 1 || f.size > 5) throw UsageError("--size must lie in [1, 5]");
    const std::size_t n = 40 * f.size, d = 25 * f.size, c = 30 * f.size;
    const auto [x, y] = oracle::verification_instance(f.size, f.instance_seed);
    RandomStream rng = RandomStream(f.instance_seed).fork(0xbeef);
    const DenseMatrix xd = x.to_dense();
    const DenseMatrix yd = y.to_dense();

    RembedConfig config;
    config.embedding_dim = f.k;
    config.oversampling = f.p;
    config.power_iterations = f.q;
    config.seed = f.seed;
    config.solver.ridge = f.ridge;
    config.solver.rel_tolerance = f.tol;
    config.solver.max_iterations = 1000;
    try {
        config.validate(c);
        if (f.k > d) throw InvalidArgument("k exceeds the feature count of the verification instance");
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    report["instance"] = Json{{"n", n}, {"d", d}, {"c", c}, {"density", 0.3}, {"seed", f.instance_seed}};
    report["config"] = to_json(config);

    std::vector<Check> checks;
    auto add = [&](std::string name, double value, double threshold) {
        checks.push_back({std::move(name), value, threshold, value <= threshold});
    };

    // Kernels against dense products.
    {
        RandomStream krng = rng.fork(1);
        const DenseMatrix b = krng.gaussian_matrix(d, 4);
        const DenseMatrix bt = krng.gaussian_matrix(n, 3);
        add("spmm vs dense", relative_frobenius_error(spmm(x, b), matmul(xd, b)), 1e-12);
        add("spmm_t vs dense", relative_frobenius_error(spmm_t(x, bt), matmul_tn(xd, bt)), 1e-12);
        const RidgeSolution sol = ridge_solve_multi(x, bt, config.solver);
        add("ridge solve vs dense", relative_frobenius_error(sol.w, oracle::dense_ridge_solve(xd, bt, f.ridge)),
            1e-8);
        const DenseMatrix q = krng.gaussian_matrix(c, 6);
        add("hat product vs dense",
            relative_frobenius_error(hat_product(x, y, q, config.solver).value,
                                     matmul(oracle::hat_operator(xd, yd, f.ridge), q)),
            1e-8);
    }

    const RembedResult result = report.stage("rembed", [&] { return rembed(x, y, config); });
    const oracle::ExactEmbedding exact =
        report.stage("oracle", [&] { return oracle::exact_embedding(xd, yd, f.k, f.ridge); });
    const auto angles = oracle::principal_angles(result.embedding.basis, exact.basis);
    add("largest principal angle (rad)", angles.back(), 1e-6);
    double excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.k; ++i) excess = std::max(excess, result.embedding.spectrum[i] - exact.eigenvalues[i]);
    add("Ritz value excess over exact", excess, 1e-8);
    add("embedding orthonormality", orthonormality_error(result.embedding.basis), 1e-8);

    Json rows = Json::array();
    bool all_pass = true;
    out << std::left << std::setw(32) << "check" << std::setw(16) << "value" << std::setw(12) << "threshold"
        << "result\n";
    for (const auto& ch : checks) {
        all_pass = all_pass && ch.pass;
        std::ostringstream value;
        value << std::setprecision(4) << std::scientific << ch.value;
        std::ostringstream threshold;
        threshold << std::setprecision(0) << std::scientific << ch.threshold;
        out << std::left << std::setw(32) << ch.name << std::setw(16) << value.str() << std::setw(12)
            << threshold.str() << (ch.pass ? "PASS" : "FAIL") << '\n';
        rows.push_back(Json{{"name", ch.name}, {"value", ch.value}, {"threshold", ch.threshold}, {"pass", ch.pass}});
    }
    report["checks"] = rows;
    report["principal_angles"] = angles;
    report["spectrum"] = result.embedding.spectrum;
    report["exact_eigenvalues"] = exact.eigenvalues;
    report["exact_spectrum"] = exact.all_eigenvalues;
    report["solver"] = to_json(result.solves);
    report["all_pass"] = all_pass;
    out << (all_pass ? "all checks passed" : "some checks FAILED") << '\n';
    finish(report, common);
    return all_pass ? kSuccess : kCheckFailed;
}

int cmd_synth(const SynthFlags& f, const CommonFlags& common, std::ostream& out, std::ostream& err) {
    RunReport report("synth", err, common.report_timings);
    const SyntheticData data = report.stage("generate", [&] { return generate_synthetic(f.spec); });
    write_multilabel_text(data.train, fs::path(f.train_out));
    write_multilabel_text(data.test, fs::path(f.test_out));
    if (!f.planted_out.empty()) {
        std::ofstream planted(f.planted_out, std::ios::binary | std::ios::trunc);
        if (!planted) throw Error("cannot write '" + f.planted_out + "'");
        const auto& v = data.planted_basis;
        for (std::size_t i = 0; i < v.rows(); ++i) {
            for (std::size_t j = 0; j < v.cols(); ++j) planted << (j ? " " : "") << format_double(v(i, j));
            planted << '\n';
        }
    }
    report["spec"] = Json{{"n", f.spec.n},       {"d", f.spec.d},         {"c", f.spec.c},
                          {"k_true", f.spec.k_true}, {"noise", f.spec.noise}, {"seed", f.spec.seed},
                          {"n_test", data.test.size()}};
    report["train"] = describe(data.train);
    report["test"] = describe(data.test);
    out << "wrote " << data.train.size() << " training and " << data.test.size() << " test examples ("
        << to_string(data.train.kind) << ")\n";
    finish(report, common);
    return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Randomized label embeddings for large-output multiclass and multilabel problems", "rembed"};
    app.require_subcommand(1);

    CommonFlags common;
    EmbedFlags embed;
    TrainFlags train;
    PredictFlags predict;
    EvalFlags eval;
    VerifyFlags verify;
    SynthFlags synth;

    auto* c_embed = app.add_subcommand("embed", "Compute the rank-k label embedding and start a model file");
    c_embed->add_option("train", embed.train_path, "Training data (multilabel text)")->required();
    c_embed->add_option("-m,--model", embed.model_path, "Model file to write")->required();
    c_embed->add_option("-k,--dim", embed.k, "Embedding dimension")->required()->check(CLI::PositiveNumber);
    c_embed->add_option("-p,--oversampling", embed.p, "Extra probe columns")->capture_default_str();
    c_embed->add_option("-q,--power-iterations", embed.q, "Subspace iterations")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    c_embed->add_option("--seed", embed.seed, "Random seed")->capture_default_str();
    c_embed->add_flag("--normalize", embed.normalize, "Scale feature rows to unit L2 norm");
    add_solver(*c_embed, embed.solver);
    add_common(*c_embed, common);

    auto* c_train = app.add_subcommand("train", "Fit the embedding-space regressor into an embedded model");
    c_train->add_option("train", train.train_path, "Training data (multilabel text)")->required();
    c_train->add_option("-m,--model", train.model_path, "Model file produced by `embed`")->required();
    c_train->add_flag("--normalize", train.normalize, "Scale feature rows to unit L2 norm");
    add_solver(*c_train, train.solver);
    add_common(*c_train, common);

    auto* c_predict = app.add_subcommand("predict", "Print the top-t labels (1-based id:score) per example");
    c_predict->add_option("data", predict.data_path, "Examples (multilabel text; labels ignored)")->required();
    c_predict->add_option("-m,--model", predict.model_path, "Trained model")->required();
    c_predict->add_option("-t,--top", predict.top, "Labels per example")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    c_predict->add_flag("--normalize", predict.normalize, "Scale feature rows to unit L2 norm");
    add_common(*c_predict, common);

    auto* c_eval = app.add_subcommand("eval", "Print precision@t (and test error for multiclass data) as JSON");
    c_eval->add_option("test", eval.test_path, "Test data (multilabel text)")->required();
    c_eval->add_option("-m,--model", eval.model_path, "Trained model")->required();
    c_eval->add_option("--at", eval.at, "Cutoffs t")->delimiter(',')->capture_default_str();
    c_eval->add_option("--min-p1", eval.min_p1, "Exit with status 1 when precision@1 falls below this");
    c_eval->add_flag("--normalize", eval.normalize, "Scale feature rows to unit L2 norm");
    add_common(*c_eval, common);

    auto* c_verify = app.add_subcommand("verify", "Check the randomized embedding against the dense oracle");
    c_verify->add_option("--size", verify.size, "Instance scale factor (n=40s, d=25s, c=30s)")->capture_default_str();
    c_verify->add_option("--seed", verify.seed, "Probe seed for the randomized embedding")->capture_default_str();
    c_verify->add_option("--instance-seed", verify.instance_seed, "Seed of the random test instance")
        ->capture_default_str();
    c_verify->add_option("-k,--dim", verify.k, "Embedding dimension")->check(CLI::PositiveNumber)->capture_default_str();
    c_verify->add_option("-p,--oversampling", verify.p, "Extra probe columns")->capture_default_str();
    c_verify->add_option("-q,--power-iterations", verify.q, "Subspace iterations")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    c_verify->add_option("--ridge", verify.ridge, "Ridge penalty")->check(CLI::NonNegativeNumber)->capture_default_str();
    c_verify->add_option("--tol", verify.tol, "Inner solve tolerance")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    add_common(*c_verify, common);

    auto* c_synth = app.add_subcommand("synth", "Write a planted low-rank synthetic train/test pair");
    c_synth->add_option("--n", synth.spec.n, "Training examples")->required();
    c_synth->add_option("--d", synth.spec.d, "Features")->required();
    c_synth->add_option("--c", synth.spec.c, "Labels")->required();
    c_synth->add_option("--k-true", synth.spec.k_true, "Planted rank")->required();
    c_synth->add_option("--noise", synth.spec.noise, "Label flip probability")->capture_default_str();
    c_synth->add_option("--seed", synth.spec.seed, "Random seed")->capture_default_str();
    c_synth->add_option("--n-test", synth.spec.n_test, "Test examples (0 = n/4)")->capture_default_str();
    c_synth->add_option("--train-out", synth.train_out, "Training data output")->required();
    c_synth->add_option("--test-out", synth.test_out, "Test data output")->required();
    c_synth->add_option("--planted-out", synth.planted_out, "Optional planted label basis (text matrix)");
    add_common(*c_synth, common);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        err << "run with --help for usage\n";
        return kUsageError;
    }

    set_max_threads(common.threads);
    try {
        if (c_embed->parsed()) return cmd_embed(embed, common, out, err);
        if (c_train->parsed()) return cmd_train(train, common, out, err);
        if (c_predict->parsed()) return cmd_predict(predict, common, out, err);
        if (c_eval->parsed()) return cmd_eval(eval, common, out, err);
        if (c_verify->parsed()) return cmd_verify(verify, common, out, err);
        if (c_synth->parsed()) return cmd_synth(synth, common, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }
    return kUsageError;
}

}  // namespace rembed::cli
