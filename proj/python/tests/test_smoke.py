import numpy as np
import pytest
import scipy.sparse as sp

import rembed


def random_problem(seed, n=40, d=25, c=30):
    rng = np.random.default_rng(seed)
    x = sp.random(n, d, density=0.3, random_state=rng, format="csr")
    y = sp.lil_matrix((n, c))
    for i in range(n):
        y[i, rng.choice(c, size=rng.integers(1, 4), replace=False)] = 1.0
    return x, y.tocsr()


def test_sparse_round_trip_and_products():
    x, _ = random_problem(0)
    a = rembed.as_sparse(x)
    assert a.shape == x.shape
    assert a.nnz == x.nnz
    np.testing.assert_array_equal(a.to_dense(), x.toarray())
    b = np.random.default_rng(1).standard_normal((25, 4))
    np.testing.assert_allclose(rembed.spmm(x, b), x.toarray() @ b, rtol=1e-12, atol=1e-12)
    bt = np.random.default_rng(2).standard_normal((40, 3))
    np.testing.assert_allclose(rembed.spmm_t(x, bt), x.toarray().T @ bt, rtol=1e-12, atol=1e-12)
    with pytest.raises(rembed.DimensionError):
        rembed.spmm(x, np.ones((24, 1)))


def test_hat_product_matches_dense_formula():
    x, y = random_problem(3)
    q = np.random.default_rng(4).standard_normal((30, 5))
    xd, yd = x.toarray(), y.toarray()
    lam = 1e-2
    w = np.linalg.solve(xd.T @ xd + lam * np.eye(25), xd.T @ (yd @ q))
    want = yd.T @ (xd @ w)
    got = rembed.hat_product(x, y, q, ridge=lam, tol=1e-13)
    assert np.linalg.norm(got - want) <= 1e-8 * np.linalg.norm(want)


def test_rembed_matches_exact_embedding():
    x, y = random_problem(5)
    emb, ritz, solves = rembed.rembed(x, y, k=5, p=5, q=20, ridge=1e-6, tol=1e-12)
    assert emb.basis.shape == (30, 5)
    assert solves["all_converged"]
    np.testing.assert_allclose(emb.basis.T @ emb.basis, np.eye(5), atol=1e-8)
    basis, eigenvalues = rembed.exact_embedding(x.toarray(), y.toarray(), 5, 1e-6)
    assert all(s <= e + 1e-8 for s, e in zip(emb.spectrum, eigenvalues))
    # Loose bound: the eigengap of this instance is not controlled.
    angles = rembed.principal_angles(emb.basis, basis)
    assert angles[-1] < 1e-3


def test_pipeline_on_planted_data(tmp_path):
    train, test, planted = rembed.generate_synthetic(n=1000, d=80, c=30, k_true=4, seed=2)
    assert len(train) == 1000 and len(test) == 250
    np.testing.assert_allclose(planted.T @ planted, np.eye(4), atol=1e-12)
    emb, _, _ = rembed.rembed(train.features, train.labels, k=4)
    model, report = rembed.fit_regressor(train.features, train.labels, emb)
    assert model.trained
    metrics = rembed.evaluate(model, test, at=[1, 3])
    assert metrics["precision_at"][1] >= 0.95
    ids, scores = rembed.predict_topt(model, test.features, 3)
    assert ids.shape == (250, 3)
    assert np.all(np.diff(scores, axis=1) <= 0)

    path = tmp_path / "model.bin"
    rembed.save_model(model, str(path))
    loaded = rembed.load_model(str(path))
    np.testing.assert_array_equal(loaded.regressor, model.regressor)
    np.testing.assert_array_equal(loaded.embedding.basis, model.embedding.basis)


def test_text_format_and_errors(tmp_path):
    good = tmp_path / "good.txt"
    good.write_text("3,7 1:0.5 4:2.0\n  1:1.0\n")
    data = rembed.parse_multilabel_text(str(good))
    assert len(data) == 2
    np.testing.assert_array_equal(data.labels.indices, [2, 6])
    out = tmp_path / "out.txt"
    rembed.write_multilabel_text(data, str(out))
    assert rembed.parse_multilabel_text(str(out)).features == data.features

    bad = tmp_path / "bad.txt"
    bad.write_text("1 1:1\n0 1:1\n")
    with pytest.raises(rembed.ParseError) as info:
        rembed.parse_multilabel_text(str(bad))
    assert info.value.line == 2

    junk = tmp_path / "junk.bin"
    junk.write_bytes(b"nope" * 20)
    with pytest.raises(rembed.ModelFormatError):
        rembed.load_model(str(junk))
