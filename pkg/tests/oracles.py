"""Independent reference computations used by the tests.

Nothing here calls into the coefficient-vector machinery of ``mda.scatter``;
group means are taken directly over boolean masks in the projected space.
"""

import itertools
import math

import mpmath
import numpy as np

from mda.data import MultiDomainDataset


def random_dataset(rng, n_max=40, d_max=5, m_max=3, c_max=3, m_min=2, c_min=2) -> MultiDomainDataset:
    """Random dataset with every (domain, class) cell populated."""
    m = int(rng.integers(m_min, m_max + 1))
    c = int(rng.integers(c_min, c_max + 1))
    d = int(rng.integers(1, d_max + 1))
    cells = [(s, j) for s in range(m) for j in range(c)]
    n = int(rng.integers(len(cells), max(len(cells), n_max) + 1))
    assign = cells + [cells[k] for k in rng.integers(0, len(cells), n - len(cells))]
    assign = [assign[k] for k in rng.permutation(n)]
    X = rng.normal(size=(n, d)) + np.array([s for s, _ in assign])[:, None] * 0.5
    return MultiDomainDataset(
        X, [j for _, j in assign], [s for s, _ in assign],
        tuple(f"c{j}" for j in range(c)), tuple(f"d{s}" for s in range(m)),
    )


def domain_posterior(data):
    """P(S=s | Y=j) from counts, assuming equal domain sampling probability."""
    p = np.zeros((data.m, data.c))
    for j in range(data.c):
        ratios = []
        for s in range(data.m):
            n_s = np.sum(data.domains == s)
            n_sj = np.sum((data.domains == s) & (data.labels == j))
            ratios.append(n_sj / n_s if n_s else 0.0)
        p[:, j] = np.array(ratios) / sum(ratios)
    return p


def projected_measures(data, Z):
    """The four averaged distances computed on projected rows ``Z``."""
    m, c, n = data.m, data.c, data.n
    p = domain_posterior(data)
    mean = {}
    for s in range(m):
        for j in range(c):
            mask = (data.domains == s) & (data.labels == j)
            if mask.any():
                mean[s, j] = Z[mask].mean(axis=0)
    dd = []
    for j in range(c):
        for s, t in itertools.combinations(range(m), 2):
            if (s, j) in mean and (t, j) in mean:
                dd.append(np.sum((mean[s, j] - mean[t, j]) ** 2))
    u = [sum(p[s, j] * mean[s, j] for s in range(m) if (s, j) in mean) for j in range(c)]
    cd = [np.sum((u[j] - u[k]) ** 2) for j, k in itertools.combinations(range(c), 2)]
    nj = [np.sum(data.labels == j) for j in range(c)]
    ubar = sum(nj[j] / n * u[j] for j in range(c))
    bs = sum(nj[j] * np.sum((u[j] - ubar) ** 2) for j in range(c)) / n
    ws = sum(np.sum((Z[i] - u[data.labels[i]]) ** 2) for i in range(n)) / n
    return {
        "domain_discrepancy": float(np.mean(dd)) if dd else 0.0,
        "class_discrepancy": float(np.mean(cd)) if cd else 0.0,
        "between_scatter": float(bs),
        "within_scatter": float(ws),
    }


def pooled_fisher_scatter(K, labels):
    """Classical kernel between/within-class scatter of pooled data, by loops."""
    K = np.asarray(K)
    labels = np.asarray(labels)
    n = K.shape[0]
    classes = np.unique(labels)
    grand = K.mean(axis=1)
    Sb = np.zeros((n, n))
    Sw = np.zeros((n, n))
    for j in classes:
        cols = np.flatnonzero(labels == j)
        mj = K[:, cols].mean(axis=1)
        Sb += len(cols) * np.outer(mj - grand, mj - grand)
        for i in cols:
            Sw += np.outer(K[:, i] - mj, K[:, i] - mj)
    return Sb / n, Sw / n


def dense_generalized_eigvals(A, D):
    """Real parts of the eigenvalues of ``D^-1 A``, descending."""
    vals = np.linalg.eigvals(np.linalg.solve(D, A))
    return np.sort(vals.real)[::-1]


def centering_oracle(K):
    n = K.shape[0]
    H = np.eye(n) - np.full((n, n), 1.0 / n)
    return H @ K @ H


def excess_risk_hp(tr, n, k, dps=50):
    with mpmath.workdps(dps):
        lead = 4 * mpmath.mpf(k.L_loss) * k.L_kgamma * k.U_kprime * k.U_kx
        return lead * mpmath.sqrt(mpmath.mpf(tr) / n) + mpmath.sqrt(
            2 * mpmath.log(2 / mpmath.mpf(k.delta)) / n)


def generalization_hp(tr, m, n_bar, k, dps=50):
    with mpmath.workdps(dps):
        delta = mpmath.mpf(k.delta)
        c1 = 2 * mpmath.sqrt(2) * k.L_loss * k.U_kx * k.L_kgamma * k.U_kprime
        c2 = 2 * mpmath.mpf(k.L_loss) * k.U_kx * k.U_kgamma
        t1 = k.U_loss * mpmath.sqrt(mpmath.log(2 / delta) / (2 * m * n_bar))
        t2 = k.U_loss * mpmath.sqrt(mpmath.log(1 / delta) / (2 * m))
        t3 = mpmath.sqrt(tr) * c1 * mpmath.sqrt((mpmath.log(2 / delta) + mpmath.log(m)) / n_bar)
        t4 = mpmath.sqrt(tr) * c2 * (mpmath.sqrt(mpmath.mpf(1) / (m * n_bar))
                                     + mpmath.sqrt(mpmath.mpf(1) / m))
        return t1 + t2 + t3 + t4


def rel_close(a, b, rtol):
    return abs(a - b) <= rtol * max(abs(a), abs(b), 1e-300) or (a == b)


def brute_nn(refs, labels, queries):
    out = []
    for q in queries:
        best, best_d = None, math.inf
        for i, r in enumerate(refs):
            dist = sum((float(a) - float(b)) ** 2 for a, b in zip(q, r))
            if dist < best_d:
                best, best_d = i, dist
        out.append(labels[best])
    return np.array(out)
