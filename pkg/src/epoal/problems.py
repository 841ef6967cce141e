"""Seeded synthetic problem families for the benchmark experiments.

Two families over K anchor points w_1..w_K on the unit sphere:

  convex-distance:     J_k(w) = sqrt(1 + ||w - w_k||^2) - 1
  nonconvex-gaussian:  J_k(w) = 1 - exp(-||w - w_k||^2)

plus ``fig1-pair``, the two-objective visualization instance with fixed
antipodal anchors +(1/sqrt(d)) 1 and -(1/sqrt(d)) 1 and the gaussian
formulas.  Every objective is positive except exactly at its own anchor.

All randomness flows through a single integer seed.  Anchors, preference
vectors and initial models draw from domain-separated sub-streams of that
seed, so the three sources can be reproduced independently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ObjectiveSet

CONVEX = "convex-distance"
NONCONVEX = "nonconvex-gaussian"
FIG1 = "fig1-pair"
KINDS = (CONVEX, NONCONVEX, FIG1)

# Domain-separation tags appended to the user seed; changing these breaks
# reproducibility of previously recorded runs.
_ANCHOR_TAG = 0xA17C
_PREFERENCE_TAG = 0x9BEF
_INITIAL_TAG = 0x1217


def _stream(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=[int(seed), tag]))


def _unit_rows(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    rows = np.empty((n, d))
    for i in range(n):
        v = rng.standard_normal(d)
        norm = np.linalg.norm(v)
        while norm < 1e-8:
            v = rng.standard_normal(d)
            norm = np.linalg.norm(v)
        rows[i] = v / norm
    return rows


def gen_anchors(d: int, K: int, seed: int) -> np.ndarray:
    """K independent points drawn uniformly on the unit sphere in R^d, as rows."""
    if d < 1 or K < 2:
        raise ValueError(f"need d >= 1 and K >= 2, got d={d}, K={K}")
    return _unit_rows(_stream(seed, _ANCHOR_TAG), K, d)


def sample_preference(K: int, seed: int) -> np.ndarray:
    """Uniform sample from the shrunken simplex {y in simplex: y_k > 1/(3K)}.

    Draws z uniformly on the simplex by exponential spacings and maps it
    affinely, y = 1/(3K) + (2/3) z.  The shrink map keeps every coordinate
    bounded away from zero so no objective is essentially ignored, and it
    is exact for any K (rejection sampling would almost never accept for
    large K).
    """
    if K < 2:
        raise ValueError(f"need K >= 2, got K={K}")
    rng = _stream(seed, _PREFERENCE_TAG)
    spacings = rng.exponential(scale=1.0, size=K)
    z = spacings / spacings.sum()
    return 1.0 / (3.0 * K) + (2.0 / 3.0) * z


def sample_initial(d: int, seed: int) -> np.ndarray:
    """Initial model drawn uniformly on the unit sphere in R^d."""
    if d < 1:
        raise ValueError(f"need d >= 1, got d={d}")
    return _unit_rows(_stream(seed, _INITIAL_TAG), 1, d)[0]


def eval_convex(anchors: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values and (d, K) jacobian of J_k(w) = sqrt(1 + ||w - w_k||^2) - 1."""
    diffs = w[None, :] - anchors                     # (K, d)
    root = np.sqrt(1.0 + np.einsum("kd,kd->k", diffs, diffs))
    jvals = root - 1.0
    jac = (diffs / root[:, None]).T
    return jvals, jac


def eval_nonconvex(anchors: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values and (d, K) jacobian of J_k(w) = 1 - exp(-||w - w_k||^2)."""
    diffs = w[None, :] - anchors
    expo = np.exp(-np.einsum("kd,kd->k", diffs, diffs))
    jvals = 1.0 - expo
    jac = (2.0 * expo[:, None] * diffs).T
    return jvals, jac


_EVALUATORS = {CONVEX: eval_convex, NONCONVEX: eval_nonconvex, FIG1: eval_nonconvex}


@dataclass(frozen=True)
class SyntheticProblem(ObjectiveSet):
    """An anchor-based objective set of one of the synthetic kinds.

    ``seed`` records how the anchors were generated (None when they were
    supplied directly); it is carried for audit and serialization only.
    """

    kind: str
    anchors: np.ndarray
    seed: int | None = field(default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown problem kind {self.kind!r}")
        anchors = np.asarray(self.anchors, dtype=np.float64)
        if anchors.ndim != 2 or anchors.shape[0] < 1:
            raise ValueError(f"anchors must be a (K, d) matrix, got shape {anchors.shape}")
        norms = np.linalg.norm(anchors, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError("anchor rows must have unit norm")
        object.__setattr__(self, "anchors", anchors)

    @property
    def d(self) -> int:
        return self.anchors.shape[1]

    @property
    def count(self) -> int:
        return self.anchors.shape[0]

    def values(self, w: np.ndarray) -> np.ndarray:
        return self.values_and_jacobian(w)[0]

    def jacobian(self, w: np.ndarray) -> np.ndarray:
        return self.values_and_jacobian(w)[1]

    def values_and_jacobian(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        # One shared pass: both formulas reuse the same ||w - w_k||^2 term.
        return _EVALUATORS[self.kind](self.anchors, np.asarray(w, dtype=np.float64))


def fig1_problem(d: int) -> SyntheticProblem:
    """The two-objective visualization instance with anchors +-(1/sqrt(d)) 1."""
    if d < 1:
        raise ValueError(f"need d >= 1, got d={d}")
    a = np.full(d, 1.0 / np.sqrt(d))
    return SyntheticProblem(kind=FIG1, anchors=np.vstack([a, -a]))


def make_problem(kind: str, d: int, K: int, seed: int) -> SyntheticProblem:
    """Problem instance as a pure function of (kind, d, K, seed)."""
    if kind == FIG1:
        if K != 2:
            raise ValueError("fig1-pair is a two-objective problem")
        prob = fig1_problem(d)
        return SyntheticProblem(kind=FIG1, anchors=prob.anchors, seed=seed)
    if kind not in (CONVEX, NONCONVEX):
        raise ValueError(f"unknown problem kind {kind!r}")
    return SyntheticProblem(kind=kind, anchors=gen_anchors(d, K, seed), seed=seed)


def save_problem(problem: SyntheticProblem, path) -> None:
    """Write the plain-text problem record: header line, then anchor rows.

    Header is ``kind d K seed`` (seed ``-`` when unknown); each anchor row
    is d space-separated decimals with full round-trip precision.
    """
    lines = [
        f"{problem.kind} {problem.d} {problem.count} "
        f"{'-' if problem.seed is None else int(problem.seed)}"
    ]
    for row in problem.anchors:
        lines.append(" ".join(repr(float(x)) for x in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_problem(path) -> SyntheticProblem:
    """Read a problem record written by :func:`save_problem`."""
    with open(path) as fh:
        lines = [ln for ln in (raw.strip() for raw in fh) if ln]
    if not lines:
        raise ValueError(f"empty problem file: {path}")
    head = lines[0].split()
    if len(head) != 4:
        raise ValueError(f"malformed problem header: {lines[0]!r}")
    kind, d, K = head[0], int(head[1]), int(head[2])
    seed = None if head[3] == "-" else int(head[3])
    rows = [np.fromstring(ln, sep=" ") for ln in lines[1:]]
    anchors = np.vstack(rows) if rows else np.empty((0, d))
    if anchors.shape != (K, d):
        raise ValueError(f"anchor block has shape {anchors.shape}, header says ({K}, {d})")
    return SyntheticProblem(kind=kind, anchors=anchors, seed=seed)
