#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string_view>

#include "rembed/sparse.hpp"

namespace rembed {

enum class DatasetKind { Multiclass, Multilabel };

std::string_view to_string(DatasetKind kind) noexcept;

/// Feature matrix X (n×d) paired with label indicators Y (n×c).
struct Dataset {
    SparseMatrix features;
    SparseMatrix labels;
    DatasetKind kind = DatasetKind::Multilabel;

    std::size_t size() const noexcept { return features.rows(); }
    std::size_t num_features() const noexcept { return features.cols(); }
    std::size_t num_labels() const noexcept { return labels.cols(); }

    /// Throws InvalidArgument when row counts differ or a multiclass row is not one-hot.
    void validate() const;
};

/// Multiclass iff every label row holds exactly one entry equal to 1.
DatasetKind infer_kind(const SparseMatrix& labels);

struct Metrics {
    std::map<std::size_t, double> precision_at;
    std::optional<double> test_error;
    std::size_t n_evaluated = 0;
    std::size_t n_skipped_empty = 0;
};

}  // namespace rembed
