"""Acceptance suite: one test per criterion, each printing a pass line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
status lines.
"""
from __future__ import annotations

import time

import numpy as np
import pytest

from susx import (
    EmbeddingBank,
    HyperParams,
    SupportSet,
    SweepGrid,
    diversity,
    evaluate,
    grid_sweep,
    kl_matrix,
    load_bank,
    rescale_psi,
    retrieve_support,
    row_softmax,
    save_bank,
    signatures,
    tip_affinity,
    tip_logits,
    tipx_logits,
    zeroshot_logits,
)

from conftest import make_bank, random_classifier
from oracles import naive_retrieve, naive_tipx, random_unit_rows
from synthetic import make_cluster_fixture
from test_harness import naive_sweep


def report(name):
    print(f"\n[ACCEPTANCE] {name}: PASS")


def one_hot(classes, C):
    L = np.zeros((len(classes), C))
    L[np.arange(len(classes)), classes] = 1.0
    return L


def random_instance(rng, t_max=20, m_max=12, c_max=5, d_max=16):
    t = int(rng.integers(1, t_max + 1))
    m = int(rng.integers(1, m_max + 1))
    C = int(rng.integers(2, c_max + 1))
    d = int(rng.integers(2, d_max + 1))
    f = random_unit_rows(rng, t, d)
    F = random_unit_rows(rng, m, d)
    W = random_classifier(rng, C, d)
    L = one_hot(rng.integers(0, C, m), C)
    return f, F, W, L


def test_reduction_chain_exactness():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    for _ in range(100):
        f, F, W, L = random_instance(rng)
        beta = float(rng.uniform(0.5, 10.0))
        alpha = float(rng.uniform(0.0, 5.0))
        zsl = f @ W.W.T
        A = tip_affinity(f, F, beta)
        M = kl_matrix(signatures(f, W), signatures(F, W))
        gamma0 = tipx_logits(zsl, A, M, L, alpha, 0.0).scores
        assert np.array_equal(gamma0, tip_logits(zsl, A, L, alpha).scores)
        both0 = tipx_logits(zsl, A, M, L, 0.0, 0.0).scores
        assert np.array_equal(both0, zsl)
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"took {elapsed:.3f}s"
    report("reduction-chain exactness (100 instances, bitwise, <1s)")


def test_straight_line_oracle_equivalence():
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    for _ in range(50):
        f, F, W, L = random_instance(rng, t_max=10, m_max=6, c_max=4, d_max=8)
        alpha = float(rng.uniform(0, 3))
        beta = float(rng.uniform(0.2, 5))
        gamma = float(rng.uniform(0, 3))
        zsl = f @ W.W.T
        A = tip_affinity(f, F, beta)
        M = kl_matrix(signatures(f, W), signatures(F, W))
        got = tipx_logits(zsl, A, M, L, alpha, gamma).scores
        want = naive_tipx(f, F, W.W, L, alpha, beta, gamma)
        assert np.max(np.abs(got - want)) <= 1e-9
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"took {elapsed:.3f}s"
    report("straight-line oracle equivalence (50 instances, <=1e-9, <5s)")


def test_kl_softmax_numerics():
    rng = np.random.default_rng(11)
    for _ in range(20):
        W = random_classifier(rng, int(rng.integers(2, 6)), 8)
        X = random_unit_rows(rng, 15, 8)
        sig = signatures(X, W, tau=float(rng.uniform(0.05, 2.0)))
        assert np.max(np.abs(sig.sum(axis=1) - 1.0)) <= 1e-9
        other = signatures(random_unit_rows(rng, 9, 8), W)
        M = kl_matrix(signatures(X, W), other)
        assert np.min(M) >= -1e-9
        Mself = kl_matrix(sig, sig)
        assert np.max(np.abs(np.diag(Mself))) <= 1e-9
    known = kl_matrix(np.array([[0.5, 0.5]]), np.array([[0.25, 0.75]]))[0, 0]
    assert known == pytest.approx(0.143841, abs=1e-5)
    report("KL/softmax numerics (row sums, non-negativity, known value)")


def test_psi_contract():
    rng = np.random.default_rng(13)
    for _ in range(50):
        shape = (int(rng.integers(1, 10)), int(rng.integers(2, 10)))
        X = rng.standard_normal(shape) * rng.uniform(0.1, 20)
        ref = rng.uniform(0.01, 3.0, shape)
        out = rescale_psi(X, ref)
        assert abs(out.min() - ref.min()) <= 1e-9
        assert abs(out.max() - ref.max()) <= 1e-9
    # constant-input midpoint rule, exact
    out = rescale_psi(np.full((3, 3), 7.7), np.arange(9.0).reshape(3, 3))
    assert np.all(out == (0.0 + 8.0) / 2.0)
    # negation inverts ordering: strictly decreasing map when max > min
    M = np.sort(rng.uniform(0, 5, (1, 12)))
    mapped = rescale_psi(-M, rng.uniform(0.1, 2.0, (1, 12)))
    assert np.all(np.diff(mapped[0]) < 0)
    report("psi contract (range match, midpoint rule, order inversion)")


def test_retrieval_oracle():
    rng = np.random.default_rng(17)
    for trial in range(100):
        C = int(rng.integers(1, 5))
        d = int(rng.integers(2, 8))
        n = 1000 if trial < 5 else int(rng.integers(2, 120))
        N = int(rng.integers(1, min(n, 6) + 1))
        data = random_unit_rows(rng, n, d)
        if trial % 3 == 0 and n >= 4:
            # force exact ties by duplicating rows
            data[1] = data[0]
            data[3] = data[2]
        cands = make_bank(data, normalized=True)
        W = random_classifier(rng, C, d)
        s = retrieve_support(cands, W, N)
        rows, classes = naive_retrieve(data, W.W, N)
        assert np.array_equal(s.F, data[rows])
        assert np.array_equal(s.classes, classes)
    report("retrieval matches exhaustive sort oracle (100 banks, ties by index)")


def test_diversity_criteria():
    rng = np.random.default_rng(19)
    # exactly representable unit vector gives exactly zero
    v = np.eye(6)[:1]
    identical = SupportSet(F=np.repeat(v, 4, axis=0),
                           classes=np.zeros(4, dtype=int), num_classes=1)
    assert diversity(identical) == 0.0
    # numerically unit vector stays within float rounding of zero
    w = random_unit_rows(rng, 1, 6)
    near = SupportSet(F=np.repeat(w, 4, axis=0),
                      classes=np.zeros(4, dtype=int), num_classes=1)
    assert abs(diversity(near)) <= 1e-12
    pair = SupportSet(F=np.eye(2), classes=np.array([0, 0]), num_classes=1)
    assert abs(diversity(pair) - 0.5) <= 1e-12
    F = random_unit_rows(rng, 12, 6)
    classes = np.repeat(np.arange(3), 4)
    base = diversity(SupportSet(F=F, classes=classes, num_classes=3))
    Q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    rotated = diversity(SupportSet(F=F @ Q, classes=classes, num_classes=3))
    assert abs(rotated - base) <= 1e-9
    report("diversity (identical 0.0, orthonormal pair 0.5, rotation invariant)")


def test_sweep_factoring_equality_and_speed():
    # equality on a small synthetic fixture, 4x4x4 grid
    fx = make_cluster_fixture(21, val_per_class=10)
    grid = SweepGrid(
        alpha_values=tuple(np.geomspace(0.1, 50, 4)),
        beta_values=tuple(np.geomspace(1, 50, 4)),
        gamma_values=tuple(np.geomspace(0.1, 30, 4)),
    )
    best, best_acc, table = grid_sweep(fx.val, None, fx.classifier, fx.support, grid)
    nbest, nbest_acc, ntable = naive_sweep(
        fx.val, fx.val.labels.astype(int), fx.classifier, fx.support, grid)
    assert len(table) == len(ntable) == 64
    for row, (a, b, g, tau, acc) in zip(table, ntable):
        assert row["val_accuracy"] == acc
    assert (best.alpha, best.beta, best.gamma, best.tau) == nbest

    # speed at t=2000, m=500, C=50, d=64
    rng = np.random.default_rng(23)
    t, m, C, d = 2000, 500, 50, 64
    W = random_classifier(rng, C, d)
    val = make_bank(random_unit_rows(rng, t, d),
                    labels=rng.integers(0, C, t), normalized=True)
    support = SupportSet(F=random_unit_rows(rng, m, d),
                         classes=np.repeat(np.arange(C), m // C), num_classes=C)
    start = time.perf_counter()
    grid_sweep(val, None, W, support, grid)
    factored = time.perf_counter() - start
    start = time.perf_counter()
    naive_sweep(val, val.labels.astype(int), W, support, grid)
    naive = time.perf_counter() - start
    assert naive >= 5.0 * factored, f"naive {naive:.3f}s vs factored {factored:.3f}s"
    report(f"sweep factoring (identical tables; {naive / factored:.1f}x speedup)")


def test_synthetic_efficacy_fixture():
    grid = SweepGrid.default()
    gains = []
    for seed in range(10):
        fx = make_cluster_fixture(seed)
        assert 0.5 <= fx.zeroshot_val_accuracy <= 0.8
        best, best_val, _ = grid_sweep(fx.val, None, fx.classifier, fx.support, grid)
        assert best_val >= fx.zeroshot_val_accuracy
        zs = evaluate(fx.test, None, fx.classifier, None, HyperParams(), mode="zs")
        tx = evaluate(fx.test, None, fx.classifier, fx.support, best, mode="tipx")
        gains.append(tx.accuracy - zs.accuracy)
    mean_gain = float(np.mean(gains))
    assert mean_gain >= 0.02, f"mean gain {mean_gain:.4f}"
    report(f"synthetic efficacy (mean test gain {100 * mean_gain:.1f} points over 10 seeds)")


def test_format_round_trip_1000_banks(tmp_path):
    rng = np.random.default_rng(29)
    p = tmp_path / "bank.susx"
    for i in range(1000):
        n = int(rng.integers(0, 6))
        d = int(rng.integers(1, 9))
        data = rng.standard_normal((n, d)).astype(np.float32).astype(np.float64)
        bank = EmbeddingBank(
            dim=d, count=n, data=data,
            labels=rng.integers(0, 1000, n).astype(np.uint32) if i % 2 else None,
            ids=tuple(f"row-{j}" for j in range(n)) if i % 3 == 0 else None,
            normalized=False,
            meta={"trial": str(i)} if i % 5 == 0 else {},
        )
        save_bank(bank, p)
        got = load_bank(p)
        assert np.array_equal(got.data, bank.data)
        assert got.ids == bank.ids
        assert (got.labels is None) == (bank.labels is None)
        if bank.labels is not None:
            assert np.array_equal(got.labels, bank.labels)
        assert got.meta == bank.meta
        assert got.normalized == bank.normalized
    report("format round-trip (1000 randomized banks, bit-exact)")
