#include "report.hpp"

#include <fstream>
#include <ostream>

#include "rembed/error.hpp"

namespace rembed::cli {

Json to_json(const SolverParams& p) {
    return Json{{"ridge", p.ridge}, {"rel_tolerance", p.rel_tolerance}, {"max_iterations", p.max_iterations}};
}

Json to_json(const RembedConfig& c) {
    return Json{{"k", c.embedding_dim},
                {"p", c.oversampling},
                {"q", c.power_iterations},
                {"seed", c.seed},
                {"solver", to_json(c.solver)}};
}

Json to_json(const SolveReport& r) {
    std::size_t converged = 0;
    for (const auto& c : r.columns) converged += c.converged ? 1 : 0;
    return Json{{"columns", r.columns.size()},
                {"converged_columns", converged},
                {"all_converged", r.all_converged()},
                {"total_iterations", r.total_iterations()},
                {"max_iterations_used", r.max_iterations_used()},
                {"max_relative_residual", r.max_relative_residual()}};
}

Json to_json(const Metrics& m) {
    Json precision = Json::object();
    for (const auto& [t, v] : m.precision_at) precision[std::to_string(t)] = v;
    Json out{{"precision_at", precision}};
    out["test_error"] = m.test_error ? Json(*m.test_error) : Json(nullptr);
    out["n_evaluated"] = m.n_evaluated;
    out["n_skipped_empty"] = m.n_skipped_empty;
    return out;
}

Json to_json(const ParseReport& r) {
    return Json{{"lines", r.lines},
                {"examples", r.examples},
                {"header_present", r.header_present},
                {"empty_label_examples", r.empty_label_lines.size()},
                {"empty_label_lines", r.empty_label_lines}};
}

Json describe(const Dataset& d) {
    return Json{{"n", d.size()},
                {"d", d.num_features()},
                {"c", d.num_labels()},
                {"nnz_features", d.features.nnz()},
                {"nnz_labels", d.labels.nnz()},
                {"kind", std::string(to_string(d.kind))}};
}

RunReport::RunReport(std::string command, std::ostream& log, bool include_timings)
    : command_(std::move(command)), log_(log), include_timings_(include_timings) {
    doc_["command"] = command_;
}

void RunReport::record(const std::string& name, std::chrono::steady_clock::duration elapsed) {
    const double seconds = std::chrono::duration<double>(elapsed).count();
    timings_[name] = seconds;
    log_ << "[" << command_ << "] " << name << ": " << seconds << " s\n";
}

std::string RunReport::dump() const {
    Json doc = doc_;
    if (include_timings_) doc["timings_seconds"] = timings_;
    return doc.dump(2) + "\n";
}

void RunReport::write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write report '" + path.string() + "'");
    out << dump();
    if (!out) throw Error("write failure on '" + path.string() + "'");
}

}  // namespace rembed::cli
