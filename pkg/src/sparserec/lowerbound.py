"""Numerical verifier for the null-space lower-bound geometry.

For a measurement matrix Phi, the orthoprojector P onto its null space
has trace N - rank(Phi), so some diagonal entry is at least 1 - m/N: a
"spike" coordinate j*.  Any unit vector v close to e_{j*} pairs with its
reflection v' = (I - 2P)v through the row space; both have the same
sketch, v has a positive spike and v' a negative one, so no decoder can
satisfy the l2/l2 guarantee on both.  This module builds such pairs and
checks the dichotomy against concrete decoders.

Dense linear algebra only; instances are capped at N <= 2000 since this
is a desk-scale demonstrator.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from sparserec.errors import InfeasibleError, NumericalError, UsageError
from sparserec.seeds import rng_for
from sparserec.vectors import tail_norm

_DENSE_LIMIT = 2000


@dataclass
class Orthoprojector:
    """Projection onto the row null space of a dense matrix."""

    matrix: np.ndarray     # P, N x N
    source: np.ndarray     # Phi, m x N
    rank: int

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def null_projector(phi: np.ndarray, rank_tol: float = 1e-10) -> Orthoprojector:
    phi = np.asarray(phi, dtype=np.float64)
    if phi.ndim != 2:
        raise UsageError("expected a 2-d measurement matrix")
    m, n = phi.shape
    if n > _DENSE_LIMIT:
        raise InfeasibleError(f"dense verifier capped at N <= {_DENSE_LIMIT}")
    if m > n:
        raise UsageError("expected m <= N")
    _, svals, vt = np.linalg.svd(phi, full_matrices=False)
    cutoff = rank_tol * max(svals[0], 1.0) if svals.size else 0.0
    rank = int(np.sum(svals > cutoff))
    if rank < m:
        warnings.warn(
            f"matrix is rank deficient (rank {rank} < m {m}); reducing",
            stacklevel=2,
        )
    v_row = vt[:rank]
    p = np.eye(n) - v_row.T @ v_row
    proj = Orthoprojector(matrix=p, source=phi, rank=rank)
    _check_projector(proj)
    return proj


def _check_projector(proj: Orthoprojector):
    p, phi = proj.matrix, proj.source
    n = proj.n
    if np.linalg.norm(p @ p - p) > 1e-9:
        raise NumericalError("projector is not idempotent")
    if np.linalg.norm(p.T - p) > 1e-9:
        raise NumericalError("projector is not symmetric")
    phi_norm = max(np.linalg.norm(phi), 1.0)
    if np.linalg.norm(phi @ p) > 1e-9 * phi_norm:
        raise NumericalError("projector does not annihilate the row space")
    if abs(np.trace(p) - (n - proj.rank)) > 1e-6:
        raise NumericalError("projector trace does not match the corank")


def find_spike(proj: Orthoprojector) -> tuple[int, float]:
    """Coordinate with the largest diagonal entry of P.

    The trace identity guarantees the value is at least 1 - rank/N.
    """
    diag = np.diag(proj.matrix)
    j = int(np.argmax(diag))
    value = float(diag[j])
    if value < 1.0 - proj.rank / proj.n - 1e-9:
        raise NumericalError("spike below the trace-identity floor")
    return j, value


def gammadelta_check(gamma: float, delta: float, c: float) -> bool:
    """Feasibility of the reflection argument:
    1 - 2*gamma - 2*delta - 2*sqrt(2*gamma*delta) > C / sqrt(1 + C^2)."""
    if gamma < 0 or delta < 0 or c < 1:
        raise UsageError("need gamma, delta >= 0 and C >= 1")
    lhs = 1.0 - 2.0 * gamma - 2.0 * delta - 2.0 * math.sqrt(2.0 * gamma * delta)
    return lhs > c / math.sqrt(1.0 + c * c)


@dataclass
class AdversarialPair:
    j_star: int
    v: np.ndarray
    v_prime: np.ndarray
    gamma: float
    delta: float
    c: float


def adversarial_pair(phi: np.ndarray, gamma: float, c: float,
                     seed: int = 0) -> AdversarialPair:
    """A unit vector on the cap boundary around e_{j*} and its reflection.

    Both map to the same sketch; their spikes at j* have opposite signs,
    which forces any decoder with approximation factor c to fail on one.
    """
    proj = null_projector(phi)
    n = proj.n
    delta = proj.rank / n
    if not gammadelta_check(gamma, delta, c):
        lhs = 1 - 2 * gamma - 2 * delta - 2 * math.sqrt(2 * gamma * delta)
        raise UsageError(
            f"infeasible (gamma, delta, C): {lhs:.6f} <= C/sqrt(1+C^2) "
            f"= {c / math.sqrt(1 + c * c):.6f}"
        )
    j_star, _ = find_spike(proj)
    rng = rng_for(seed, "cap-sample")
    for _ in range(64):
        w = rng.normal(size=n)
        w[j_star] = 0.0
        norm = np.linalg.norm(w)
        if norm < 1e-12:
            continue
        w /= norm
        v = (1.0 - gamma) * _basis(n, j_star) + math.sqrt(1 - (1 - gamma) ** 2) * w
        v_prime = v - 2.0 * proj.matrix @ v
        if np.linalg.norm(v - v_prime) < 1e-9:
            continue  # v happened to lie in the row space; resample
        pair = AdversarialPair(j_star=j_star, v=v, v_prime=v_prime,
                               gamma=gamma, delta=delta, c=c)
        _check_pair(proj, pair)
        return pair
    raise NumericalError("could not sample a non-degenerate cap vector")


def _basis(n: int, j: int) -> np.ndarray:
    e = np.zeros(n)
    e[j] = 1.0
    return e


def _check_pair(proj: Orthoprojector, pair: AdversarialPair):
    v, vp = pair.v, pair.v_prime
    if abs(np.linalg.norm(v) - 1.0) > 1e-9 or abs(np.linalg.norm(vp) - 1.0) > 1e-9:
        raise NumericalError("pair vectors are not unit length")
    if np.linalg.norm(proj.source @ (v - vp)) > 1e-9 * max(np.linalg.norm(proj.source), 1.0):
        raise NumericalError("pair does not share a sketch")
    g, d = pair.gamma, pair.delta
    ceiling = -1.0 + 2 * g + 2 * d + 2 * math.sqrt(2 * g * d)
    if vp[pair.j_star] > ceiling + 1e-9:
        raise NumericalError("reflected spike not negative enough")


def decoder_fails(decoder, phi: np.ndarray, w: np.ndarray, k: int, c: float) -> bool:
    """True when ||w - decoder(phi @ w)||_2 > c * ||w - w_k||_2."""
    est = decoder(phi @ w)
    return float(np.linalg.norm(w - est)) > c * tail_norm(w, k) + 1e-12


def dichotomy_holds(decoder, phi: np.ndarray, pair: AdversarialPair, k: int = 1) -> bool:
    """The decoder violates the guarantee on at least one of v, v'."""
    return (decoder_fails(decoder, phi, pair.v, k, pair.c)
            or decoder_fails(decoder, phi, pair.v_prime, k, pair.c))


def bounded_adversary_signal(phi: np.ndarray, s: int, bits: int) -> np.ndarray:
    """Unit null vector of the leading sqrt(s/bits)-column sub-matrix,
    zero-padded: a signal computable from s bits of matrix information
    that any decoder confuses with zero."""
    phi = np.asarray(phi, dtype=np.float64)
    m, n = phi.shape
    if s < 1 or bits < 1:
        raise UsageError("need positive information and entry-width budgets")
    n_prime = math.ceil(math.sqrt(s / bits))
    n_prime = min(n_prime, n)
    if m == 0:
        return _basis(n, 0)
    if n_prime <= m:
        raise InfeasibleError(
            f"sub-matrix has {n_prime} <= m = {m} columns: no null spike"
        )
    sub = phi[:, :n_prime]
    proj = null_projector(sub)
    j_star, _ = find_spike(proj)
    spike = proj.matrix @ _basis(n_prime, j_star)
    spike /= np.linalg.norm(spike)
    out = np.zeros(n)
    out[:n_prime] = spike
    if np.linalg.norm(phi @ out) > 1e-9 * max(np.linalg.norm(phi), 1.0):
        raise NumericalError("padded vector escaped the null space")
    return out
