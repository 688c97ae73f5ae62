#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "naive.hpp"
#include "rembed/io.hpp"

using namespace rembed;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("rembed_cli_" + std::to_string(++counter));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// Clean planted data: train.txt / test.txt in `dir`.
void synth(const TempDir& dir, const std::string& noise = "0") {
    const Run r = run({"synth", "--n", "600", "--d", "60", "--c", "24", "--k-true", "4", "--noise", noise, "--seed",
                       "3", "--train-out", dir / "train.txt", "--test-out", dir / "test.txt"});
    REQUIRE(r.code == 0);
}

}  // namespace

TEST_CASE("cli: missing input is a usage error naming the file") {
    TempDir dir;
    const Run r = run({"embed", dir / "nope.txt", "-m", dir / "m.bin", "-k", "2"});
    CHECK(r.code == 2);
    CHECK(r.err.find("nope.txt") != std::string::npos);
}

TEST_CASE("cli: bad arguments exit 2, help exits 0") {
    CHECK(run({"embed"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"--help"}).code == 0);
    TempDir dir;
    synth(dir);
    CHECK(run({"embed", dir / "train.txt", "-m", dir / "m.bin", "-k", "20", "-p", "10"}).code == 2);  // k + p > c
    CHECK(run({"embed", dir / "train.txt", "-m", dir / "m.bin", "-k", "0"}).code == 2);
}

TEST_CASE("cli: embed prints a nonincreasing spectrum and is byte-reproducible") {
    TempDir dir;
    synth(dir);
    const Run a = run({"embed", dir / "train.txt", "-m", dir / "a.bin", "-k", "6", "--seed", "5"});
    REQUIRE(a.code == 0);
    std::istringstream line(a.out);
    std::string word;
    line >> word;
    CHECK(word == "spectrum");
    std::vector<double> values;
    for (double v; line >> v;) values.push_back(v);
    REQUIRE(values.size() == 6);
    for (std::size_t i = 1; i < values.size(); ++i) CHECK(values[i] <= values[i - 1]);
    CHECK(values.back() >= 0.0);

    REQUIRE(run({"embed", dir / "train.txt", "-m", dir / "b.bin", "-k", "6", "--seed", "5", "--threads", "1"}).code ==
            0);
    CHECK(slurp(dir / "a.bin") == slurp(dir / "b.bin"));
}

TEST_CASE("cli: train requires an embedded model") {
    TempDir dir;
    synth(dir);
    const Run r = run({"train", dir / "train.txt", "-m", dir / "missing.bin"});
    CHECK(r.code == 2);
    CHECK(r.err.find("embed` first") != std::string::npos);

    REQUIRE(run({"embed", dir / "train.txt", "-m", dir / "m.bin", "-k", "3"}).code == 0);
    const Run p = run({"predict", dir / "test.txt", "-m", dir / "m.bin"});
    CHECK(p.code == 2);
    CHECK(p.err.find("train` first") != std::string::npos);
}

TEST_CASE("cli: identity design trains W_e = Y·V") {
    TempDir dir;
    {
        std::ofstream f(dir / "id.txt");
        f << "6 6 5\n1,2 1:1\n3 2:1\n2,4 3:1\n5 4:1\n1,5 5:1\n3,4 6:1\n";
    }
    REQUIRE(run({"embed", dir / "id.txt", "-m", dir / "m.bin", "-k", "2", "-p", "2", "--ridge", "0", "--tol",
                 "1e-12"})
                .code == 0);
    REQUIRE(run({"train", dir / "id.txt", "-m", dir / "m.bin", "--ridge", "0", "--tol", "1e-12"}).code == 0);
    const LinearPredictor m = load_model(dir / "m.bin");
    const Dataset data = parse_multilabel_text(fs::path(dir / "id.txt")).dataset;
    CHECK(naive::rel_err(m.regressor, naive::mul(naive::from(data.labels), naive::from(m.embedding.basis))) <= 1e-10);
}

TEST_CASE("cli: full pipeline on clean planted data") {
    TempDir dir;
    synth(dir);
    REQUIRE(run({"embed", dir / "train.txt", "-m", dir / "m.bin", "-k", "4"}).code == 0);
    REQUIRE(run({"train", dir / "train.txt", "-m", dir / "m.bin", "--report", dir / "r.json"}).code == 0);
    CHECK(nlohmann::json::parse(slurp(dir / "r.json"))["command"] == "train");

    const Run e = run({"eval", dir / "test.txt", "-m", dir / "m.bin", "--at", "1,3", "--min-p1", "0.95"});
    REQUIRE(e.code == 0);
    const auto metrics = nlohmann::json::parse(e.out);
    CHECK(metrics["precision_at"]["1"].get<double>() >= 0.95);
    CHECK(metrics["precision_at"].contains("3"));

    CHECK(run({"eval", dir / "test.txt", "-m", dir / "m.bin", "--at", "25"}).code == 2);
    CHECK(run({"eval", dir / "test.txt", "-m", dir / "m.bin", "--at", "0"}).code == 2);
    CHECK(run({"eval", dir / "test.txt", "-m", dir / "m.bin", "--min-p1", "1.01"}).code == 1);

    const Run p = run({"predict", dir / "test.txt", "-m", dir / "m.bin", "-t", "2"});
    REQUIRE(p.code == 0);
    std::istringstream lines(p.out);
    std::size_t count = 0;
    for (std::string l; std::getline(lines, l); ++count) {
        std::istringstream toks(l);
        std::vector<std::string> t{std::istream_iterator<std::string>(toks), {}};
        REQUIRE(t.size() == 2);
        for (const auto& tok : t) {
            const auto colon = tok.find(':');
            REQUIRE(colon != std::string::npos);
            const int id = std::stoi(tok.substr(0, colon));
            CHECK(id >= 1);
            CHECK(id <= 24);
        }
    }
    CHECK(count == 150);
}

TEST_CASE("cli: verify passes by default and fails when crippled") {
    const Run ok = run({"verify"});
    CHECK(ok.code == 0);
    CHECK(ok.out.find("all checks passed") != std::string::npos);
    const Run bad = run({"verify", "--tol", "0.5", "-q", "1"});
    CHECK(bad.code == 1);
    CHECK(bad.out.find("FAILED") != std::string::npos);
}
