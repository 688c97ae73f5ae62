#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "rembed/dataset.hpp"
#include "rembed/io.hpp"
#include "rembed/linalg.hpp"
#include "rembed/rembed.hpp"

namespace rembed::cli {

using Json = nlohmann::ordered_json;

Json to_json(const SolverParams& p);
Json to_json(const RembedConfig& c);
/// Aggregate view of a solve report (per-column detail is summarized).
Json to_json(const SolveReport& r);
Json to_json(const Metrics& m);
Json to_json(const ParseReport& r);
Json describe(const Dataset& d);

/// One machine-readable document per run. Everything in it is a function of the inputs
/// and flags, so two identical runs produce identical bytes. Stage wall-clock times are
/// always logged to the diagnostic stream and only embedded when requested.
class RunReport {
public:
    RunReport(std::string command, std::ostream& log, bool include_timings);

    Json& operator[](const std::string& key) { return doc_[key]; }

    /// Times `fn()` as the named stage.
    template <typename Fn>
    decltype(auto) stage(const std::string& name, Fn&& fn) {
        const auto start = std::chrono::steady_clock::now();
        struct Finish {
            RunReport& self;
            const std::string& name;
            std::chrono::steady_clock::time_point start;
            ~Finish() { self.record(name, std::chrono::steady_clock::now() - start); }
        } finish{*this, name, start};
        return fn();
    }

    std::string dump() const;
    void write(const std::filesystem::path& path) const;

private:
    void record(const std::string& name, std::chrono::steady_clock::duration elapsed);

    Json doc_;
    Json timings_ = Json::object();
    std::string command_;
    std::ostream& log_;
    bool include_timings_;
};

}  // namespace rembed::cli
