"""Bifurcation-point counting and parameter-space component maps.

For a path of symmetric matrices with isolated crossings, a nonzero total
flow certifies bifurcation for any twice-differentiable family whose second
derivatives realize the path, and the number of such parameters is at least
``ceil(|sf| / m)`` with ``m`` the largest kernel dimension met along the way.
Crossings with zero local flow are reported as candidates without a
conclusion. On two-parameter rectangles, nodes of a lattice are labeled by
the flow along lattice paths from a base node; the labels are well defined
exactly when every elementary loop carries zero flow, which is checked cell
by cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .symlin import REL_ZERO_TOL, as_sym, default_zero_tol
from .sfpath import (
    Crossing,
    OperatorPath,
    classify_crossings,
    extended_sf,
    locate_crossings,
)

__all__ = [
    "BifurcationReport",
    "PathComponentTrace",
    "ComponentMap2D",
    "analyze_path",
    "trace_components",
    "sweep2d",
    "krasnoselskii",
]


@dataclass(frozen=True)
class BifurcationReport:
    """Crossing census of a path with the derived bifurcation lower bound."""

    crossings: tuple[Crossing, ...]
    total_sf: int
    m: int
    lower_bound: int
    admissible: tuple[bool, bool]
    notes: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "crossings": [c.to_dict() for c in self.crossings],
            "total_sf": self.total_sf,
            "max_kernel_dim": self.m,
            "lower_bound": self.lower_bound,
            "admissible": list(self.admissible),
            "notes": list(self.notes),
        }


def analyze_path(
    path: OperatorPath,
    n_grid: int = 256,
    zero_tol: float | None = None,
    eps_lambda: float | None = None,
) -> BifurcationReport:
    """Locate crossings, total the flow, and bound the bifurcation count.

    The bound ``ceil(|sf| / m)`` uses the largest kernel dimension among the
    detected crossings; when the flow is nonzero and the endpoints are
    invertible, at least one interior bifurcation parameter is certified.
    """
    base = extended_sf(path, zero_tol=zero_tol)
    crossings = locate_crossings(path, n_grid=n_grid, zero_tol=zero_tol, eps_lambda=eps_lambda)
    if path.smooth and crossings:
        try:
            crossings = classify_crossings(path, crossings, eps_lambda=eps_lambda)
        except ValueError:
            pass  # kernel can evaporate at the estimate for borderline events
    total = base.total_sf
    m = max((c.kernel_dim for c in crossings), default=0)
    lower = 0 if m == 0 else math.ceil(abs(total) / m)
    notes = []
    if total != 0 and base.admissible_start and base.admissible_end:
        notes.append(
            f"nonzero flow across an admissible path: at least {max(lower, 1)} interior "
            "bifurcation parameter(s) certified for families with these second derivatives"
        )
    if total != 0 and not crossings:
        notes.append("nonzero flow but no crossing localized; refine the scan grid")
    for c in crossings:
        if c.local_sf == 0:
            notes.append(
                f"crossing near {c.lambda_est:.12g} carries zero local flow: "
                "candidate only, no conclusion"
            )
    return BifurcationReport(
        crossings=crossings,
        total_sf=total,
        m=m,
        lower_bound=lower,
        admissible=(base.admissible_start, base.admissible_end),
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class PathComponentTrace:
    """Invertible segments between crossing brackets with cumulative flow.

    ``cumulative_index[j]`` is the flow from the start of the path to any
    point of segment ``j``; when the total flow is nonzero the number of
    distinct values is at least ``ceil(|sf| / m) + 1``. Interpreting segments
    as connected components of the regular set assumes every singular
    parameter is a genuine bifurcation parameter, which holds in particular
    when all crossings carry nonzero local flow.
    """

    segments: tuple[tuple[float, float], ...]
    cumulative_index: tuple[int, ...]
    distinct_count: int

    def to_dict(self) -> dict:
        return {
            "segments": [list(s) for s in self.segments],
            "cumulative_index": list(self.cumulative_index),
            "distinct_count": self.distinct_count,
        }


def trace_components(
    path: OperatorPath,
    crossings: Sequence[Crossing] | None = None,
    n_grid: int = 256,
    zero_tol: float | None = None,
    eps_lambda: float | None = None,
) -> PathComponentTrace:
    """Cumulative flow over the maximal intervals between crossing brackets."""
    if crossings is None:
        crossings = locate_crossings(path, n_grid=n_grid, zero_tol=zero_tol, eps_lambda=eps_lambda)
    crossings = sorted(crossings, key=lambda c: c.bracket[0])
    for left, right in zip(crossings, crossings[1:]):
        if left.bracket[1] >= right.bracket[0]:
            raise ValueError(
                f"overlapping crossing brackets near {left.lambda_est:.12g} and "
                f"{right.lambda_est:.12g}; refine the scan grid"
            )
    cuts = [path.a]
    for c in crossings:
        cuts.extend(c.bracket)
    cuts.append(path.b)
    segments = [(cuts[2 * i], cuts[2 * i + 1]) for i in range(len(crossings) + 1)]
    ma = path(path.a)
    tol = default_zero_tol(ma) if zero_tol is None else zero_tol
    neg_a = int(np.sum(np.linalg.eigvalsh(ma.entries) < -tol))
    indices = []
    for lo, hi in segments:
        mid = 0.5 * (lo + hi)
        m = path(mid)
        tol_m = default_zero_tol(m) if zero_tol is None else zero_tol
        neg_mid = int(np.sum(np.linalg.eigvalsh(m.entries) < -tol_m))
        indices.append(neg_a - neg_mid)
    return PathComponentTrace(
        segments=tuple(segments),
        cumulative_index=tuple(indices),
        distinct_count=len(set(indices)),
    )


@dataclass(frozen=True, eq=False)
class ComponentMap2D:
    """Flow-based labels over a two-parameter lattice.

    ``index`` holds, per node, the flow along a lattice path from the base
    node (``None`` on singular nodes); edges are affine interpolations of the
    node matrices, so labels are exact integers. ``loop_defects`` lists
    elementary cells with non-singular corners whose boundary flow fails to
    vanish.
    """

    s_coords: tuple[float, ...]
    t_coords: tuple[float, ...]
    singular_mask: np.ndarray
    index: np.ndarray
    base: tuple[int, int]
    loop_defects: tuple[tuple[int, int], ...]

    def to_dict(self) -> dict:
        return {
            "s_coords": list(self.s_coords),
            "t_coords": list(self.t_coords),
            "singular_mask": self.singular_mask.tolist(),
            "index": [[None if v is None else int(v) for v in row] for row in self.index],
            "base": list(self.base),
            "loop_defects": [list(d) for d in self.loop_defects],
        }


def sweep2d(matrices: Sequence[Sequence], base: tuple[int, int], zero_tol: float | None = None) -> ComponentMap2D:
    """Label a lattice of symmetric matrices by flow relative to a base node.

    ``matrices[i][j]`` sits at lattice node ``(s_i, t_j)`` of the unit square.
    Flow is accumulated along lattice edges by breadth-first propagation
    (passing through singular nodes is allowed; the extended convention keeps
    edge flows additive), every elementary loop with non-singular corners is
    checked for zero boundary flow, and labels are reported only at
    non-singular nodes.
    """
    rows = [[as_sym(m) for m in row] for row in matrices]
    ns = len(rows)
    if ns < 2 or any(len(r) != len(rows[0]) for r in rows):
        raise ValueError("expected a rectangular lattice with at least two rows")
    nt = len(rows[0])
    if nt < 2:
        raise ValueError("expected at least two columns")
    dim = rows[0][0].dim
    if any(m.dim != dim for r in rows for m in r):
        raise ValueError("all lattice matrices must share one dimension")

    evals = np.empty((ns, nt, dim))
    scale = 1.0
    for i in range(ns):
        for j in range(nt):
            w = np.linalg.eigvalsh(rows[i][j].entries)
            evals[i, j] = w
            scale = max(scale, float(np.linalg.norm(w)) / math.sqrt(dim))
    tol = REL_ZERO_TOL * scale if zero_tol is None else zero_tol
    neg = np.sum(evals < -tol, axis=2).astype(int)
    singular = np.any(np.abs(evals) <= tol, axis=2)

    bi, bj = base
    if not (0 <= bi < ns and 0 <= bj < nt):
        raise ValueError(f"base node {base} outside the {ns}x{nt} lattice")
    if singular[bi, bj]:
        raise ValueError("base node is singular")

    # breadth-first accumulation of edge flows from the base node
    level = np.full((ns, nt), None, dtype=object)
    level[bi, bj] = 0
    queue = [(bi, bj)]
    while queue:
        i, j = queue.pop(0)
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            u, v = i + di, j + dj
            if not (0 <= u < ns and 0 <= v < nt):
                continue
            edge = int(neg[i, j] - neg[u, v])
            if level[u, v] is None:
                level[u, v] = level[i, j] + edge
                queue.append((u, v))

    index = np.full((ns, nt), None, dtype=object)
    for i in range(ns):
        for j in range(nt):
            if not singular[i, j]:
                index[i, j] = int(level[i, j])

    defects = []
    for i in range(ns - 1):
        for j in range(nt - 1):
            corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
            if any(singular[u, v] for u, v in corners):
                continue
            loop = 0
            ring = corners + [corners[0]]
            for (u1, v1), (u2, v2) in zip(ring, ring[1:]):
                loop += int(neg[u1, v1] - neg[u2, v2])
            if loop != 0:
                defects.append((i, j))

    s_coords = tuple(np.linspace(0.0, 1.0, ns))
    t_coords = tuple(np.linspace(0.0, 1.0, nt))
    return ComponentMap2D(
        s_coords=s_coords,
        t_coords=t_coords,
        singular_mask=singular,
        index=index,
        base=(bi, bj),
        loop_defects=tuple(defects),
    )


def krasnoselskii(
    K,
    interval: tuple[float, float],
    n_grid: int = 256,
    eps_lambda: float = 1e-8,
) -> BifurcationReport:
    """Crossing census of ``lambda -> lambda * Id - K`` over an interval.

    Every eigenvalue of ``K`` inside the interval produces one crossing whose
    local flow equals its multiplicity and whose crossing form is positive
    definite; the located crossings are verified against the spectrum of
    ``K`` before the report is returned.
    """
    K = as_sym(K)
    c, d = float(interval[0]), float(interval[1])
    if not d > c:
        raise ValueError("interval must satisfy c < d")
    eigs = np.linalg.eigvalsh(K.entries)
    tol = max(1e-9, 1e-9 * float(np.max(np.abs(eigs), initial=1.0)))
    if np.any(np.abs(eigs - c) <= tol) or np.any(np.abs(eigs - d) <= tol):
        raise ValueError("an interval endpoint lies in the spectrum of K")
    path = OperatorPath.from_samples(
        [c, d], [c * np.eye(K.dim) - K.entries, d * np.eye(K.dim) - K.entries], smooth=True
    )
    report = analyze_path(path, n_grid=n_grid, eps_lambda=eps_lambda)

    inside = eigs[(eigs > c) & (eigs < d)]
    clusters: list[tuple[float, int]] = []
    for e in inside:
        if clusters and abs(e - clusters[-1][0]) <= 1e-7 * max(1.0, abs(e)):
            center, count = clusters[-1]
            clusters[-1] = ((center * count + e) / (count + 1), count + 1)
        else:
            clusters.append((float(e), 1))
    if len(report.crossings) != len(clusters):
        raise RuntimeError(
            f"crossing census ({len(report.crossings)}) disagrees with the spectrum "
            f"of K ({len(clusters)} eigenvalue clusters inside the interval)"
        )
    notes = list(report.notes)
    for crossing, (center, mult) in zip(report.crossings, clusters):
        if abs(crossing.lambda_est - center) > eps_lambda:
            raise RuntimeError(
                f"crossing at {crossing.lambda_est!r} misses eigenvalue {center!r} "
                f"beyond eps_lambda"
            )
        if crossing.local_sf != mult or crossing.kernel_dim != mult:
            raise RuntimeError(
                f"crossing at {center!r}: local flow {crossing.local_sf} and kernel "
                f"{crossing.kernel_dim} should both equal the multiplicity {mult}"
            )
        if crossing.regular is not None and (
            not crossing.regular or crossing.crossing_form_signature != mult
        ):
            raise RuntimeError(f"crossing form at {center!r} is not positive definite")
        notes.append(f"eigenvalue {center:.12g} (multiplicity {mult}) matched at {crossing.lambda_est:.12g}")
    return BifurcationReport(
        crossings=report.crossings,
        total_sf=report.total_sf,
        m=report.m,
        lower_bound=report.lower_bound,
        admissible=report.admissible,
        notes=tuple(notes),
    )
