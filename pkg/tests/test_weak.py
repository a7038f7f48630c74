import math

import numpy as np
import pytest

from sparserec.errors import UsageError
from sparserec.expander import BipartiteGraph, SignedSketchOperator
from sparserec.weak import (
    WeakLayer,
    WeakParams,
    bucket_class_counts,
    lower_median,
    majority_amplify,
    median_estimate,
    median_estimates,
    weak_estimate,
    weak_identify,
)


def _operator(n, ell, m, seed=1):
    return SignedSketchOperator.build(n, ell, m, seed=seed, sign_independence=16)


def test_lower_median_convention():
    assert lower_median(np.array([[1.0, 2.0, 3.0, 4.0]])) == 2.0
    assert lower_median(np.array([[5.0, 1.0]])) == 1.0
    assert lower_median(np.array([[3.0]])) == 3.0
    assert lower_median(np.array([[-1.0, -2.0]])) == -2.0


def test_single_spike_estimated_exactly():
    op = _operator(64, 8, 128)
    x = np.zeros(64)
    x[17] = 2.5
    u = op.apply(x)
    assert median_estimate(op, u, 17) == 2.5


def test_zero_signal_estimates_zero():
    op = _operator(64, 8, 128)
    u = op.apply(np.zeros(64))
    ests = median_estimates(op, u, np.arange(64))
    assert np.array_equal(ests, np.zeros(64))


def test_estimate_depends_only_on_own_buckets():
    op = _operator(128, 6, 256, seed=3)
    rng = np.random.default_rng(0)
    x = rng.normal(size=128)
    u = op.apply(x)
    i = 40
    own = set(op.graph.neighbors(i))
    masked = np.zeros_like(u)
    for j in own:
        masked[j] = u[j]
    assert median_estimate(op, u, i) == median_estimate(op, masked, i)


def test_weak_identify_recovers_exact_sparse_support():
    params = WeakParams(k=4, gamma=0.2, eta=0.25, ell=8)
    op = _operator(256, 8, 256, seed=5)
    rng = np.random.default_rng(2)
    supp = rng.choice(256, size=4, replace=False)
    x = np.zeros(256)
    x[supp] = rng.choice([-1.0, 1.0], size=4) * (1 + rng.random(4))
    u = op.apply(x)
    found = weak_identify(op, u, np.arange(256), params)
    assert set(supp.tolist()) <= set(found.tolist())
    assert len(found) <= params.k + math.ceil(params.k / params.eta)


def test_weak_identify_empty_candidates():
    params = WeakParams(k=4, gamma=0.2, eta=0.25, ell=8)
    op = _operator(64, 8, 64)
    u = op.apply(np.zeros(64))
    assert weak_identify(op, u, [], params).size == 0


def test_weak_identify_permutation_equivariant():
    n, ell, m = 96, 6, 192
    params = WeakParams(k=3, gamma=0.2, eta=0.25, ell=ell)
    base = _operator(n, ell, m, seed=9)
    rng = np.random.default_rng(4)
    # dense generic signal with dyadic values: bucket sums are exact in
    # any summation order and |estimate| ties are generically absent,
    # so the smaller-index tie rule cannot interfere with equivariance
    x = rng.integers(-(1 << 20), 1 << 20, size=n).astype(float) / (1 << 20)
    supp = rng.choice(n, size=3, replace=False)
    x[supp] += 4.0
    u = base.apply(x)
    found = weak_identify(base, u, np.arange(n), params)

    perm = rng.permutation(n)  # new label of each old index
    inv = np.argsort(perm)
    table = base.graph.neighbors_of(np.arange(n))

    class _RelabeledSigns:
        n_left, n_buckets = n, m

        def sign_vec(self, i, j):
            return base.signs.sign_vec(inv[np.asarray(i)], j)

        def sign(self, i, j):
            return base.signs.sign(int(inv[i]), j)

    pg = BipartiteGraph.from_neighbors(table[inv], m)
    pop = SignedSketchOperator(pg, _RelabeledSigns())
    xp = np.zeros(n)
    xp[perm] = x
    up = pop.apply(xp)
    assert np.array_equal(up, u)
    found_p = weak_identify(pop, up, np.arange(n), params)
    assert np.array_equal(found_p, np.sort(perm[found]))


def test_weak_estimate_exact_on_sparse_signal():
    params = WeakParams(k=4, gamma=0.2, eta=0.25, ell=8)
    op = _operator(256, 8, 512, seed=6)
    rng = np.random.default_rng(3)
    supp = rng.choice(256, size=4, replace=False)
    x = np.zeros(256)
    x[supp] = rng.normal(size=4) + 3.0
    u = op.apply(x)
    dec = weak_estimate(op, u, np.arange(256), params)
    assert dec.support_size <= params.k + math.ceil(params.k / math.sqrt(params.eta))
    assert np.max(np.abs(dec.to_dense() - x)) < 1e-12


def test_weak_estimate_zero_signal():
    params = WeakParams(k=4, gamma=0.2, eta=0.25, ell=8)
    op = _operator(64, 8, 64)
    dec = weak_estimate(op, op.apply(np.zeros(64)), np.arange(64), params)
    assert np.array_equal(dec.to_dense(), np.zeros(64))


def test_weak_params_validation():
    with pytest.raises(UsageError):
        WeakParams(k=0, gamma=0.2, eta=0.25, ell=4)
    with pytest.raises(UsageError):
        WeakParams(k=2, gamma=1.5, eta=0.25, ell=4)
    p = WeakParams(k=8, gamma=0.1, eta=0.25, ell=4)
    assert p.eps_exp == pytest.approx(0.1**3 * 0.25 / 2)
    assert p.ident_count == 8 + 32
    assert p.est_count == 8 + 16


def test_majority_amplify_single_list_identity():
    out = majority_amplify([np.array([5, 1, 9])])
    assert np.array_equal(out, np.array([1, 5, 9]))


def test_majority_amplify_keeps_unanimous_items():
    lists = [np.array([3, 7, 11]), np.array([7, 2, 3]), np.array([3, 7, 50])]
    out = majority_amplify(lists)
    assert {3, 7} <= set(out.tolist())
    assert 11 not in out and 2 not in out and 50 not in out


def test_majority_amplify_output_size_bound():
    rng = np.random.default_rng(7)
    for s in (3, 5, 7):
        lists = [rng.choice(100, size=10, replace=False) for _ in range(s)]
        out = majority_amplify(lists)
        assert len(out) < 2 * 10


def test_weak_layer_measurement_accounting():
    params = WeakParams(k=4, gamma=0.2, eta=0.25, ell=6, s=3)
    layer = WeakLayer(params=params, domain=128, n_buckets=64, seed=1)
    assert layer.measurement_count == (3 + 1) * 64
    sketches = layer.encode(np.zeros(128))
    assert len(sketches) == 4
    assert all(len(u) == 64 for u in sketches)


def test_weak_layer_amplified_pipeline_recovers_planted():
    params = WeakParams(k=4, gamma=0.25, eta=0.25, ell=8, s=3)
    layer = WeakLayer(params=params, domain=256, n_buckets=256, seed=2)
    rng = np.random.default_rng(5)
    x = np.zeros(256)
    supp = rng.choice(256, size=4, replace=False)
    x[supp] = 5.0
    sketches = layer.encode(x)
    found = layer.identify(sketches, np.arange(256))
    assert set(supp.tolist()) <= set(found.tolist())
    dec = layer.estimate(sketches, found)
    assert np.max(np.abs(dec.to_dense() - x)) < 1e-12


def _planted_trial(seed, n, k, ell, m, s, head=1.0, sigma=None):
    """Returns (missed_s1, missed_amplified) for one planted instance."""
    params = WeakParams(k=k, gamma=0.25, eta=0.25, ell=ell, s=s)
    layer = WeakLayer(params=params, domain=n, n_buckets=m, seed=seed)
    rng = np.random.default_rng(seed ^ 0xABCDEF)
    supp = rng.choice(n, size=k, replace=False)
    x = rng.normal(size=n) * (sigma if sigma is not None else 1.0 / math.sqrt(n))
    x[supp] = head * rng.choice([-1.0, 1.0], size=k)
    sketches = layer.encode(x)
    head_set = set(supp.tolist())
    single = weak_identify(layer.ident_ops[0], sketches[0], np.arange(n), params)
    amplified = layer.identify(sketches, np.arange(n))
    return (len(head_set - set(single.tolist())),
            len(head_set - set(amplified.tolist())))


def test_amplification_failure_rate_not_worse():
    # paired trials; failure = missing more than gamma*k planted heads
    n, k, trials = 256, 4, 500
    allowed = 0.25 * k
    fail1 = fail5 = 0
    for t in range(trials):
        m1, m5 = _planted_trial(seed=t, n=n, k=k, ell=4, m=48, s=5, head=0.85)
        fail1 += m1 > allowed
        fail5 += m5 > allowed
    p1, p5 = fail1 / trials, fail5 / trials
    tolerance = 1.645 * math.sqrt(max(p1 * (1 - p1), 1e-4) / trials)
    assert p5 <= p1 + tolerance
    assert fail1 > 0  # the regime is genuinely marginal


def test_median_estimates_mostly_good_under_gaussian_tail():
    n, k, eta, ell, m = 512, 8, 0.25, 12, 512
    good = total = 0
    for seed in range(3):
        op = _operator(n, ell, m, seed=100 + seed)
        rng = np.random.default_rng(seed)
        supp = rng.choice(n, k, replace=False)
        x = rng.normal(size=n) / math.sqrt(n)
        x[supp] = rng.choice([-1.0, 1.0], k)
        order = np.lexsort((np.arange(n), -np.abs(x)))
        z = x.copy()
        z[order[:k]] = 0.0
        u = op.apply(x)
        ests = median_estimates(op, u, np.arange(n))
        good += int(np.sum(np.abs(x - ests) <= math.sqrt(eta / k) * np.linalg.norm(z)))
        total += n
    assert good / total >= 0.95


def test_weak_decomposition_oracle_bounds():
    # rebuild y-hat per the estimator's case analysis and check the
    # residual inflation (1 + 22*sqrt(eta)) on the squared norm
    n, k, ell, m = 512, 8, 12, 1024
    eta, gamma = 0.25, 0.25
    params = WeakParams(k=k, gamma=gamma, eta=eta, ell=ell)
    op = _operator(n, ell, m, seed=11)
    rng = np.random.default_rng(9)
    supp = rng.choice(n, size=k, replace=False)
    x = rng.normal(size=n) / math.sqrt(n)
    x[supp] = rng.choice([-1.0, 1.0], size=k) * 1.0
    u = op.apply(x)
    dec = weak_estimate(op, u, np.arange(n), params)

    order = np.lexsort((np.arange(n), -np.abs(x)))
    z = x.copy()
    z[order[:k]] = 0.0
    z_norm = np.linalg.norm(z)
    good_bound = math.sqrt(eta / k) * z_norm
    ests = median_estimates(op, u, np.arange(n))
    bad = np.abs(x - ests) > good_bound

    kp = params.est_count
    head_kp = set(order[:kp].tolist())
    sel = set(dec.indices.tolist())
    y_hat = np.zeros(n)
    for i in dec.indices:
        if bad[i]:
            y_hat[i] = x[i] - ests[i]
    displaced = sorted(head_kp - sel)
    intruders = sorted(sel - head_kp)
    for rank, i in enumerate(displaced):
        if bad[i] or (rank < len(intruders) and bad[intruders[rank]]):
            y_hat[i] = x[i]
    z_hat = x - dec.to_dense() - y_hat
    assert np.count_nonzero(y_hat) <= 2 * np.count_nonzero(bad)
    assert np.linalg.norm(z_hat) ** 2 <= (1 + 22 * math.sqrt(eta)) * z_norm**2
    fitted_c = (np.linalg.norm(z_hat) / z_norm - 1) / eta
    assert fitted_c <= 25


def test_bucket_diagnostics_on_planted_instance():
    op = _operator(128, 6, 256, seed=13)
    rng = np.random.default_rng(1)
    x = rng.normal(size=128) * 0.01
    supp = rng.choice(128, size=4, replace=False)
    x[supp] = 3.0
    counts = bucket_class_counts(op, x, k=4, zeta=0.25, eta=0.25)
    assert sum(counts.values()) >= 4 * 6  # every head bucket classified
    assert counts["good"] > counts["head_collision"]
