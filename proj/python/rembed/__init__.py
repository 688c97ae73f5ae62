"""Randomized label embeddings for multilabel and multiclass prediction.

Sparse inputs may be given as ``SparseMatrix`` or as any scipy.sparse matrix.
"""

from . import _rembed
from ._rembed import (
    Dataset,
    DatasetKind,
    DimensionError,
    Error,
    InvalidArgument,
    LabelEmbedding,
    LinearPredictor,
    ModelFormatError,
    ParseError,
    SparseMatrix,
    default_ridge,
    exact_embedding,
    generate_synthetic,
    load_model,
    max_threads,
    parse_multilabel_text,
    principal_angles,
    save_model,
    set_max_threads,
    write_multilabel_text,
)

__all__ = [
    "Dataset", "DatasetKind", "DimensionError", "Error", "InvalidArgument", "LabelEmbedding",
    "LinearPredictor", "ModelFormatError", "ParseError", "SparseMatrix", "as_sparse", "default_ridge",
    "evaluate", "exact_embedding", "fit_regressor", "generate_synthetic", "hat_product", "load_model",
    "max_threads", "parse_multilabel_text", "predict_topt", "principal_angles", "rembed",
    "row_l2_normalize", "save_model", "set_max_threads", "spmm", "spmm_t", "write_multilabel_text",
]


def as_sparse(a):
    """Return ``a`` as a SparseMatrix, converting scipy.sparse input to canonical CSR."""
    if isinstance(a, SparseMatrix):
        return a
    csr = a.tocsr(copy=True)
    csr.sum_duplicates()
    csr.sort_indices()
    return SparseMatrix(csr.shape[0], csr.shape[1], csr.indptr, csr.indices, csr.data)


def spmm(a, b):
    return _rembed.spmm(as_sparse(a), b)


def spmm_t(a, b):
    return _rembed.spmm_t(as_sparse(a), b)


def row_l2_normalize(a):
    return _rembed.row_l2_normalize(as_sparse(a))


def rembed(x, y, k, p=10, q=3, ridge=None, tol=1e-6, max_iter=1000, seed=0):
    """Rank-k label embedding. Returns (LabelEmbedding, ritz_values, solve summary)."""
    return _rembed.rembed(as_sparse(x), as_sparse(y), k, p, q, ridge, tol, max_iter, seed)


def hat_product(x, y, q, ridge=None, tol=1e-6, max_iter=1000):
    return _rembed.hat_product(as_sparse(x), as_sparse(y), q, ridge, tol, max_iter)


def fit_regressor(x, y, embedding, ridge=None, tol=1e-6, max_iter=1000):
    """Returns (LinearPredictor, solve summary)."""
    return _rembed.fit_regressor(as_sparse(x), as_sparse(y), embedding, ridge, tol, max_iter)


def predict_topt(model, x, t=5):
    """Top-t label ids (0-based) and scores per row, each an (n, t) array."""
    return _rembed.predict_topt(model, as_sparse(x), t)


def evaluate(model, test, at=(1, 3, 5)):
    return _rembed.evaluate(model, test, list(at))
