#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "rembed/dataset.hpp"
#include "rembed/predictor.hpp"

namespace rembed {

// ---------------------------------------------------------------------------
// Multilabel text datasets
//
// One example per line:  `l1,l2,... f1:v1 f2:v2 ...`
// Label ids and feature ids are 1-based in the file and 0-based in memory. A line that
// starts with whitespace (or whose first token already contains ':') has no labels; a
// whitespace-only line is an example with neither labels nor features. An optional first
// line `n d c` fixes the dimensions; otherwise they are the largest ids seen.
// ---------------------------------------------------------------------------

struct ParseReport {
    std::size_t lines = 0;
    std::size_t examples = 0;
    bool header_present = false;
    /// 1-based line numbers of examples with an empty label field.
    std::vector<std::size_t> empty_label_lines;
};

struct ParsedDataset {
    Dataset dataset;
    ParseReport report;
};

ParsedDataset parse_multilabel_text(std::istream& in);
ParsedDataset parse_multilabel_text(const std::filesystem::path& path);

/// Writes the header line and every example; values use 17 significant digits so a
/// parse of the output reproduces the matrices exactly.
void write_multilabel_text(const Dataset& data, std::ostream& out);
void write_multilabel_text(const Dataset& data, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

struct SyntheticSpec {
    std::size_t n = 0;        // training examples
    std::size_t d = 0;        // features
    std::size_t c = 0;        // labels
    std::size_t k_true = 0;   // planted rank
    double noise = 0.0;       // label-flip probability
    std::uint64_t seed = 0;
    std::size_t n_test = 0;   // 0 selects max(1, n / 4)
    std::size_t active_features = 4;      // per example, drawn from its topic's feature pool
    std::size_t background_features = 2;  // per example, drawn from all features
};

struct SyntheticData {
    Dataset train;
    Dataset test;
    /// c×k_true orthonormal basis of the planted label subspace.
    DenseMatrix planted_basis;
};

/// Planted rank-k_true problem: k_true latent topics, each owning a disjoint block of labels
/// and a disjoint pool of features. An example picks a topic uniformly, draws features from
/// the topic's pool (plus weak background features), and carries the topic's label block, so
/// Y ≈ X·B·S with S the k_true×c block indicator. Labels are then corrupted: multilabel data
/// flips every label entry with probability `noise`; multiclass data (k_true = c) replaces the
/// label by a uniformly chosen other label with probability `noise`.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

// ---------------------------------------------------------------------------
// Model files
//
// Little-endian layout:
//   "RMBD" | u32 version (=1) | u64 c | u64 d | u64 k |
//   f64 spectrum[k] | f64 V[c*k] (column-major) | f64 W_e[d*k] (column-major) |
//   u32 CRC-32 of every preceding byte (zlib polynomial)
// A file written after embedding but before training has d = 0 and no W_e values.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_model(const LinearPredictor& model);
/// Throws ModelFormatError on a bad magic, unknown version, truncation, or checksum mismatch.
LinearPredictor deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const LinearPredictor& model, const std::filesystem::path& path);
LinearPredictor load_model(const std::filesystem::path& path);

/// True when the model carries a trained regressor (d > 0).
bool has_regressor(const LinearPredictor& model) noexcept;

}  // namespace rembed
