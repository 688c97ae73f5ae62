#include "rembed/dataset.hpp"

#include "rembed/error.hpp"

namespace rembed {

std::string_view to_string(DatasetKind kind) noexcept {
    return kind == DatasetKind::Multiclass ? "multiclass" : "multilabel";
}

DatasetKind infer_kind(const SparseMatrix& labels) {
    if (labels.rows() == 0) return DatasetKind::Multilabel;
    for (std::size_t i = 0; i < labels.rows(); ++i) {
        auto v = labels.row_values(i);
        if (v.size() != 1 || v[0] != 1.0) return DatasetKind::Multilabel;
    }
    return DatasetKind::Multiclass;
}

void Dataset::validate() const {
    if (features.rows() != labels.rows())
        throw InvalidArgument("dataset: features have " + std::to_string(features.rows()) +
                              " rows but labels have " + std::to_string(labels.rows()));
    if (kind == DatasetKind::Multiclass && infer_kind(labels) != DatasetKind::Multiclass && labels.rows() > 0)
        throw InvalidArgument("dataset: multiclass labels must be one-hot rows");
}

}  // namespace rembed
