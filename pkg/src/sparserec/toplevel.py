"""Weak layers stacked into a full (k, 1+eps) recovery system.

The stage schedule halves the sparsity target per stage while tightening
precision as eps / i^(1+alpha); stage i runs its own weak layer (and
optionally a recursive identification tree) on the residual sketch,
i.e. the stage sketch of x minus the stage encoding of everything
recovered so far, and the estimates accumulate.  Residual sketches are
recomputed exactly from the accumulated estimate; no approximate
updates.

Also here: component-wise median amplification across independently
seeded system copies, and an orthogonal-matching-pursuit baseline for
dense Gaussian matrices.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field as dc_field

import numpy as np

from sparserec.errors import UsageError
from sparserec.recursive import RecursionTree, RecursiveParams
from sparserec.seeds import derive_seed
from sparserec.vectors import head_indices
from sparserec.weak import WeakLayer, WeakParams, lower_median


@dataclass(frozen=True)
class StageSpec:
    index: int          # 1-based stage number
    k: int              # sparsity target floor(k / 2^(index-1))
    loss_fraction: float
    precision: float    # eta for this stage: eps / index^(1+alpha)
    copies: int         # identification copies s_i


@dataclass
class StageSchedule:
    epsilon: float
    alpha: float
    c_exp: int
    d_exp: int
    stages: list[StageSpec]

    @staticmethod
    def build(k: int, epsilon: float, alpha: float = 0.5,
              c_exp: int = 4, d_exp: int = 6) -> "StageSchedule":
        if k < 1 or epsilon <= 0:
            raise UsageError("need k >= 1 and epsilon > 0")
        stages = []
        i = 1
        while True:
            ki = k >> (i - 1)
            if ki < 1:
                break
            precision = min(0.9, epsilon / i ** (1 + alpha))
            copies = max(1, round(2**i / i ** ((1 + alpha) * c_exp + 2 + alpha)))
            stages.append(StageSpec(index=i, k=ki, loss_fraction=0.5,
                                    precision=precision, copies=copies))
            if ki == 1:
                break
            i += 1
        return StageSchedule(epsilon=epsilon, alpha=alpha, c_exp=c_exp,
                             d_exp=d_exp, stages=stages)


@dataclass
class TopLevelConfig:
    """Everything needed to rebuild a system from (config, seed)."""

    n: int
    k: int
    epsilon: float = 0.5
    alpha: float = 0.5
    c_exp: int = 4
    d_exp: int = 6
    engine: str = "scan"            # "scan" | "recursive"
    ell: int = 12
    bucket_factor: float = 8.0
    min_buckets: int = 64
    sign_independence: int = 32
    tree: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if self.engine not in ("scan", "recursive"):
            raise UsageError(f"unknown stage engine {self.engine!r}")
        if self.n < 2 or self.k < 1 or self.k > self.n:
            raise UsageError("need 2 <= n and 1 <= k <= n")


class _Stage:
    def __init__(self, config: TopLevelConfig, spec: StageSpec, seed: int):
        self.spec = spec
        buckets = max(config.min_buckets,
                      int(config.bucket_factor * spec.k * config.ell))
        params = WeakParams(k=spec.k, gamma=spec.loss_fraction,
                            eta=spec.precision, ell=config.ell, s=spec.copies)
        self.layer = WeakLayer(params=params, domain=config.n,
                               n_buckets=buckets, seed=derive_seed(seed, "layer"),
                               sign_independence=config.sign_independence)
        self.tree = None
        if config.engine == "recursive":
            opts = dict(config.tree)
            tree_params = RecursiveParams(
                k=spec.k, eta=spec.precision, gamma=opts.pop("gamma", 0.1),
                ell=opts.pop("ell", config.ell),
                buckets_per_node=opts.pop("buckets_per_node", 0),
                s=opts.pop("s", spec.copies),
                sign_independence=config.sign_independence,
                cap=opts.pop("cap", 0),
                lw_errors=opts.pop("lw_errors", 0),
                rho=opts.pop("rho", 0.25),
                max_leaf_domain=opts.pop("max_leaf_domain", 1 << 20),
            )
            self.tree = RecursionTree(
                n_signal=config.n,
                leaf_target=opts.pop("leaf_target", 256),
                code_kind=opts.pop("code_kind", "lw"),
                params=tree_params,
                seed=derive_seed(seed, "tree"),
                **opts,
            )

    @property
    def measurement_count(self) -> int:
        total = self.layer.measurement_count
        if self.tree is not None:
            total += self.tree.measurement_count
        return total

    def encode_sparse(self, indices: np.ndarray, values: np.ndarray) -> list[np.ndarray]:
        out = []
        if self.tree is not None:
            for node_sketches in self.tree.encode_sparse(indices, values):
                out.extend(node_sketches)
        out.extend(self.layer.encode_sparse(indices, values))
        return out

    def identify(self, sketches: list[np.ndarray]) -> np.ndarray:
        if self.tree is not None:
            n_tree = sum(len(node.layer.ident_ops) + 1 for node in self.tree.nodes)
            grouped, pos = [], 0
            for node in self.tree.nodes:
                width = len(node.layer.ident_ops) + 1
                grouped.append(sketches[pos : pos + width])
                pos += width
            assert pos == n_tree
            found, _ = self.tree.identify(grouped)
            return found
        layer_sketches = sketches[-(len(self.layer.ident_ops) + 1):]
        return self.layer.identify(layer_sketches, np.arange(self.layer.domain))

    def estimate(self, sketches: list[np.ndarray], candidates):
        layer_sketches = sketches[-(len(self.layer.ident_ops) + 1):]
        return self.layer.estimate(layer_sketches, candidates)


class TopLevelSystem:
    """Stacked stage systems with exact measurement accounting."""

    def __init__(self, config: TopLevelConfig, seed: int):
        self.config = config
        self.seed = int(seed)
        self.schedule = StageSchedule.build(config.k, config.epsilon,
                                            config.alpha, config.c_exp,
                                            config.d_exp)
        self.stages = [
            _Stage(config, spec, derive_seed(self.seed, f"stage/{spec.index}"))
            for spec in self.schedule.stages
        ]
        self._layouts = None

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def measurement_count(self) -> int:
        return sum(stage.measurement_count for stage in self.stages)

    def _stage_sketches_sparse(self, indices, values) -> list[list[np.ndarray]]:
        return [stage.encode_sparse(indices, values) for stage in self.stages]

    def encode(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise UsageError(f"expected signal of length {self.n}")
        nz = np.flatnonzero(x)
        per_stage = self._stage_sketches_sparse(nz, x[nz])
        self._layouts = [[len(u) for u in stage] for stage in per_stage]
        flat = np.concatenate([u for stage in per_stage for u in stage])
        assert flat.size == self.measurement_count
        return flat

    def _unflatten(self, flat: np.ndarray) -> list[list[np.ndarray]]:
        if flat.size != self.measurement_count:
            raise UsageError(
                f"sketch has {flat.size} entries, expected {self.measurement_count}"
            )
        if self._layouts is None:
            self.encode(np.zeros(self.n))  # populate layout cache
        out, pos = [], 0
        for layout in self._layouts:
            stage_arrays = []
            for width in layout:
                stage_arrays.append(flat[pos : pos + width])
                pos += width
            out.append(stage_arrays)
        return out

    def decode(self, flat_sketch: np.ndarray, instrument_x: np.ndarray | None = None,
               identify_override=None):
        """Accumulated estimate; optional loop-invariant instrumentation.

        identify_override(stage_index, accumulated) replaces the stage
        identification step (test hook for forced-success runs).
        """
        per_stage = self._unflatten(np.asarray(flat_sketch, dtype=np.float64))
        acc = np.zeros(self.n)
        missing_per_stage = []
        truth_heads = (set(head_indices(instrument_x, self.config.k).tolist())
                       if instrument_x is not None else None)
        for stage, sketches in zip(self.stages, per_stage):
            nz = np.flatnonzero(acc)
            if nz.size:
                acc_sk = stage.encode_sparse(nz, acc[nz])
                residual = [u - v for u, v in zip(sketches, acc_sk)]
            else:
                residual = sketches
            if all(not np.any(u) for u in residual):
                # an exactly-zero residual sketch yields all-zero medians,
                # so the stage would accumulate nothing
                if truth_heads is not None:
                    found = set(np.flatnonzero(acc).tolist())
                    missing_per_stage.append(len(truth_heads - found))
                continue
            if identify_override is not None:
                candidates = identify_override(stage.spec.index, acc)
            else:
                candidates = stage.identify(residual)
            dec = stage.estimate(residual, candidates)
            acc[dec.indices] += dec.values
            if truth_heads is not None:
                found = set(np.flatnonzero(acc).tolist())
                missing_per_stage.append(len(truth_heads - found))
        info = {"missing_heads_per_stage": missing_per_stage}
        if instrument_x is not None:
            return acc, info
        return acc

    # -- serialization --

    def to_json(self) -> str:
        blob = {"config": asdict(self.config), "seed": self.seed,
                "measurements": self.measurement_count}
        return json.dumps(blob, sort_keys=True, indent=2)

    @staticmethod
    def from_json(text: str) -> "TopLevelSystem":
        blob = json.loads(text)
        return TopLevelSystem(TopLevelConfig(**blob["config"]), blob["seed"])


def build_toplevel(n: int, k: int, epsilon: float, seed: int,
                   **kwargs) -> TopLevelSystem:
    return TopLevelSystem(TopLevelConfig(n=n, k=k, epsilon=epsilon, **kwargs), seed)


def toplevel_decode(system: TopLevelSystem, flat_sketch: np.ndarray) -> np.ndarray:
    return system.decode(flat_sketch)


def repeat_median_amplify(systems: list[TopLevelSystem],
                          sketches: list[np.ndarray]) -> np.ndarray:
    """Component-wise (lower) median of the copies' decodes."""
    if not systems or len(systems) != len(sketches):
        raise UsageError("need one sketch per system copy")
    decs = np.stack([sys_.decode(sk) for sys_, sk in zip(systems, sketches)], axis=1)
    return lower_median(decs)


def omp_baseline(phi: np.ndarray, y: np.ndarray, k: int,
                 iterations: int | None = None) -> np.ndarray:
    """Orthogonal matching pursuit: 2k rounds of greedy correlation
    selection with a full least-squares refit each round."""
    phi = np.asarray(phi, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    m, n = phi.shape
    if m > n:
        raise UsageError("expected m <= N")
    col_norms = np.linalg.norm(phi, axis=0)
    if np.any(col_norms == 0):
        raise UsageError("measurement matrix has a zero column")
    if iterations is None:
        iterations = 2 * k
    selected: list[int] = []
    residual = y.copy()
    solution = np.zeros(0)
    for _ in range(iterations):
        if np.linalg.norm(residual) <= 1e-12:
            break
        scores = np.abs(phi.T @ residual) / col_norms
        scores[selected] = -1.0
        j = int(np.argmax(scores))
        selected.append(j)
        # least-squares refit; rank-deficient submatrices fall back to the
        # least-norm solution automatically
        solution, *_ = np.linalg.lstsq(phi[:, selected], y, rcond=None)
        residual = y - phi[:, selected] @ solution
    x_hat = np.zeros(n)
    if selected:
        x_hat[selected] = solution
    return x_hat
