"""Spectral flow of paths of symmetric matrices.

A path is a continuous family ``lambda -> S(lambda)`` of symmetric matrices
over a closed interval, given either by a sample grid with entrywise affine
interpolation or by an evaluation rule. The extended spectral flow counts
eigenvalues moving from negative to positive minus the reverse, with endpoint
kernels pushed to the positive side (equivalent to translating the path by
``+delta * Id`` for a small ``delta``), so it is defined even when endpoints
are singular. In finite dimensions the total equals the difference of endpoint
Morse indices; crossings are localized separately by grid scanning plus
bisection.

All paths are immutable after construction and every operation is pure, so
grid evaluations may run in parallel and merge deterministically in lambda
order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .symlin import (
    REL_ZERO_TOL,
    SymMatrix,
    as_sym,
    default_zero_tol,
    inertia,
    kernel_basis,
)

__all__ = [
    "OperatorPath",
    "Crossing",
    "SpectralFlowResult",
    "CrossingForm",
    "ComparisonReport",
    "AxiomReport",
    "AxiomViolation",
    "EndpointCrossingError",
    "concat",
    "reverse",
    "direct_sum",
    "is_admissible",
    "extended_sf",
    "locate_crossings",
    "scan_path",
    "crossing_form",
    "classify_crossings",
    "sf_regular_sum",
    "is_nondecreasing",
    "compare_paths",
    "verify_axioms",
]

#: Default number of scan points for crossing localization.
DEFAULT_N_GRID = 256

#: Bisection / golden-section iteration cap per crossing candidate.
REFINE_CAP = 60

_JUNCTION_TOL = 1e-12


class EndpointCrossingError(RuntimeError):
    """A singular parameter was detected within eps_lambda of a domain endpoint."""


@dataclass(frozen=True, eq=False)
class OperatorPath:
    """A parametrized family of symmetric matrices over ``[a, b]``.

    ``smooth`` enables derivative-based operations (crossing forms via central
    differences); grid paths are piecewise affine and may opt in.
    """

    a: float
    b: float
    dim: int
    smooth: bool
    _lambdas: np.ndarray | None
    _matrices: tuple[np.ndarray, ...] | None
    _fn: Callable[[float], object] | None

    @classmethod
    def from_samples(cls, lambdas: Sequence[float], matrices: Sequence, smooth: bool = False) -> "OperatorPath":
        lams = np.asarray(lambdas, dtype=float)
        if lams.ndim != 1 or lams.size < 2:
            raise ValueError("grid paths need at least two samples")
        if not np.all(np.diff(lams) > 0):
            raise ValueError("sample parameters must be strictly increasing")
        mats = tuple(as_sym(m).entries for m in matrices)
        if len(mats) != lams.size:
            raise ValueError("number of samples must match number of parameters")
        dim = mats[0].shape[0]
        if any(m.shape[0] != dim for m in mats):
            raise ValueError("all samples must share one dimension")
        lams.flags.writeable = False
        return cls(float(lams[0]), float(lams[-1]), dim, smooth, lams, mats, None)

    @classmethod
    def from_callable(cls, a: float, b: float, dim: int, fn: Callable[[float], object], smooth: bool = True) -> "OperatorPath":
        if not b > a:
            raise ValueError("domain must satisfy a < b")
        return cls(float(a), float(b), int(dim), smooth, None, None, fn)

    @property
    def is_grid(self) -> bool:
        return self._fn is None

    def _check_domain(self, lam: float) -> float:
        slack = 1e-12 * max(1.0, self.b - self.a)
        if lam < self.a - slack or lam > self.b + slack:
            raise ValueError(f"parameter {lam} outside domain [{self.a}, {self.b}]")
        return min(max(lam, self.a), self.b)

    def evaluate(self, lam: float) -> SymMatrix:
        """Matrix at ``lam``; affine interpolation between bracketing samples
        for grid paths, exact sample values at sample points."""
        lam = self._check_domain(float(lam))
        if self._fn is not None:
            m = as_sym(self._fn(lam))
            if m.dim != self.dim:
                raise ValueError(f"evaluation rule returned dimension {m.dim}, expected {self.dim}")
            return m
        lams = self._lambdas
        j = int(np.searchsorted(lams, lam))
        if j < lams.size and lams[j] == lam:
            return SymMatrix(self._matrices[j])
        j = max(1, min(j, lams.size - 1))
        l0, l1 = lams[j - 1], lams[j]
        t = (lam - l0) / (l1 - l0)
        return SymMatrix((1.0 - t) * self._matrices[j - 1] + t * self._matrices[j])

    def __call__(self, lam: float) -> SymMatrix:
        return self.evaluate(lam)


def _paths_junction_match(p: OperatorPath, q: OperatorPath) -> bool:
    mp, mq = p(p.b).entries, q(q.a).entries
    scale = max(1.0, float(np.max(np.abs(mp))), float(np.max(np.abs(mq))))
    return bool(np.max(np.abs(mp - mq)) <= _JUNCTION_TOL * scale)


def concat(p: OperatorPath, q: OperatorPath) -> OperatorPath:
    """Concatenate two paths sharing the junction parameter and value."""
    if p.dim != q.dim:
        raise ValueError("dimension mismatch at concatenation")
    if abs(p.b - q.a) > _JUNCTION_TOL * max(1.0, abs(p.b), abs(q.a)):
        raise ValueError(f"junction mismatch: first path ends at {p.b}, second starts at {q.a}")
    if not _paths_junction_match(p, q):
        raise ValueError("paths disagree at the junction parameter")
    if p.is_grid and q.is_grid:
        lams = np.concatenate([p._lambdas, q._lambdas[1:]])
        mats = list(p._matrices) + list(q._matrices[1:])
        return OperatorPath.from_samples(lams, mats, smooth=p.smooth and q.smooth)
    junction = p.b

    def fn(lam: float):
        return p(lam) if lam <= junction else q(lam)

    return OperatorPath.from_callable(p.a, q.b, p.dim, fn, smooth=p.smooth and q.smooth)


def reverse(p: OperatorPath) -> OperatorPath:
    """Traverse the path backwards over the same domain."""
    if p.is_grid:
        lams = (p.a + p.b) - p._lambdas[::-1]
        return OperatorPath.from_samples(lams, p._matrices[::-1], smooth=p.smooth)
    return OperatorPath.from_callable(p.a, p.b, p.dim, lambda lam: p(p.a + p.b - lam), smooth=p.smooth)


def direct_sum(p: OperatorPath, q: OperatorPath) -> OperatorPath:
    """Block-diagonal sum of two paths over the same domain."""
    if abs(p.a - q.a) > _JUNCTION_TOL * max(1.0, abs(p.a)) or abs(p.b - q.b) > _JUNCTION_TOL * max(1.0, abs(p.b)):
        raise ValueError("domain mismatch in direct sum")
    dp, dq = p.dim, q.dim

    def fn(lam: float):
        out = np.zeros((dp + dq, dp + dq))
        out[:dp, :dp] = p(lam).entries
        out[dp:, dp:] = q(lam).entries
        return out

    return OperatorPath.from_callable(p.a, p.b, dp + dq, fn, smooth=p.smooth and q.smooth)


@dataclass(frozen=True)
class Crossing:
    """A localized singular parameter of a path.

    ``bracket`` encloses the singular set of the event; for isolated crossings
    its width is at most the eps_lambda used during refinement. ``local_sf``
    is the extended spectral flow across a bracket enlarged by eps_lambda on
    each side, and always satisfies ``|local_sf| <= kernel_dim``.
    """

    lambda_est: float
    bracket: tuple[float, float]
    kernel_dim: int
    local_sf: int
    crossing_form_signature: int | None = None
    regular: bool | None = None

    def to_dict(self) -> dict:
        return {
            "lambda_est": self.lambda_est,
            "bracket": [self.bracket[0], self.bracket[1]],
            "kernel_dim": self.kernel_dim,
            "local_sf": self.local_sf,
            "crossing_form_signature": self.crossing_form_signature,
            "regular": self.regular,
        }


@dataclass(frozen=True)
class SpectralFlowResult:
    total_sf: int
    crossings: tuple[Crossing, ...]
    admissible_start: bool
    admissible_end: bool
    shift_delta: float
    grid_points_used: int

    def to_dict(self) -> dict:
        return {
            "total_sf": self.total_sf,
            "crossings": [c.to_dict() for c in self.crossings],
            "admissible": [self.admissible_start, self.admissible_end],
            "shift_delta": self.shift_delta,
            "grid_points_used": self.grid_points_used,
        }


def _neg_count(w: np.ndarray, tol: float) -> int:
    return int(np.sum(w < -tol))


def _zero_count(w: np.ndarray, tol: float) -> int:
    return int(np.sum(np.abs(w) <= tol))


def _eigvals_of(path: OperatorPath, lam: float) -> np.ndarray:
    return np.linalg.eigvalsh(path(lam).entries)


def is_admissible(path: OperatorPath, zero_tol: float | None = None) -> tuple[bool, bool]:
    """Whether each endpoint matrix is invertible (no eigenvalue inside the
    tolerance band)."""
    out = []
    for lam in (path.a, path.b):
        m = path(lam)
        tol = default_zero_tol(m) if zero_tol is None else zero_tol
        out.append(_zero_count(np.linalg.eigvalsh(m.entries), tol) == 0)
    return out[0], out[1]


def extended_sf(path: OperatorPath, zero_tol: float | None = None) -> SpectralFlowResult:
    """Extended spectral flow from endpoint data.

    Singular endpoints are handled by translating the path with ``+delta*Id``,
    which pushes endpoint kernels to the positive side; with the reported
    ``shift_delta`` the total equals ``mu(S_a + delta) - mu(S_b + delta)`` and
    reduces to the plain Morse-index difference on admissible paths.
    """
    ma, mb = path(path.a), path(path.b)
    wa, wb = np.linalg.eigvalsh(ma.entries), np.linalg.eigvalsh(mb.entries)
    tol_a = default_zero_tol(ma) if zero_tol is None else zero_tol
    tol_b = default_zero_tol(mb) if zero_tol is None else zero_tol
    adm_a = _zero_count(wa, tol_a) == 0
    adm_b = _zero_count(wb, tol_b) == 0
    delta = 0.0
    if not (adm_a and adm_b):
        nonzero = np.concatenate([np.abs(wa)[np.abs(wa) > tol_a], np.abs(wb)[np.abs(wb) > tol_b]])
        scale = max(1.0, ma.norm_fro() / math.sqrt(ma.dim), mb.norm_fro() / math.sqrt(mb.dim))
        delta = 1e-6 * scale
        if nonzero.size:
            delta = min(delta, 0.5 * float(np.min(nonzero)))
    # counting strictly negative eigenvalues realizes the +delta translation
    total = _neg_count(wa, tol_a) - _neg_count(wb, tol_b)
    return SpectralFlowResult(
        total_sf=total,
        crossings=(),
        admissible_start=adm_a,
        admissible_end=adm_b,
        shift_delta=delta,
        grid_points_used=2,
    )


def _golden_min(f: Callable[[float], float], lo: float, hi: float, eps: float, cap: int = REFINE_CAP) -> tuple[float, float]:
    # golden-section minimization, assumes one relevant dip inside [lo, hi]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(cap):
        if hi - lo <= eps:
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = f(x2)
    xs = [(lo, f(lo)), (x1, f1), (x2, f2), (hi, f(hi))]
    return min(xs, key=lambda t: t[1])


@dataclass
class _Event:
    lo: float
    hi: float
    est: float
    est_width: float  # accuracy of est, used to pick the best estimate on merge


def _bisect_sign_events(path: OperatorPath, lo: float, hi: float, eps: float) -> list[_Event]:
    # refine every strict sign-count change inside [lo, hi]; the zero-tolerance
    # count flips exactly at eigenvalue zeros, so the refined brackets are not
    # biased by the detection tolerance. Cells where the change cancels are
    # dropped (their net flow is zero at this resolution).
    def neg0(x: float) -> int:
        return int(np.sum(_eigvals_of(path, x) < 0.0))

    out: list[_Event] = []
    stack = [(lo, hi, neg0(lo), neg0(hi), 0)]
    while stack:
        clo, chi, nlo, nhi, depth = stack.pop()
        if nlo == nhi:
            continue
        if chi - clo <= eps or depth >= REFINE_CAP:
            mid = 0.5 * (clo + chi)
            out.append(_Event(clo, chi, mid, 0.5 * (chi - clo)))
            continue
        mid = 0.5 * (clo + chi)
        nmid = neg0(mid)
        stack.append((clo, mid, nlo, nmid, depth + 1))
        stack.append((mid, chi, nmid, nhi, depth + 1))
    return out


def locate_crossings(
    path: OperatorPath,
    n_grid: int = DEFAULT_N_GRID,
    zero_tol: float | None = None,
    eps_lambda: float | None = None,
) -> tuple[Crossing, ...]:
    """Locate and refine the singular parameters of a path.

    Scans a uniform grid of ``n_grid`` points. Three kinds of events are
    chased: cells whose strictly-negative eigenvalue count changes (refined by
    bisection), samples that are singular outright, and dips of the smallest
    absolute eigenvalue that plausibly touch zero between samples (refined by
    golden-section; rejected dips are re-scanned at 16x resolution to catch
    cancelling crossing pairs). Overlapping refined brackets are merged; each
    resulting crossing carries the extended spectral flow across its bracket
    enlarged by ``eps_lambda`` per side, and a kernel dimension measured with
    a tolerance wide enough to cover every eigenvalue that vanishes inside
    the enlarged bracket, which enforces ``|local_sf| <= kernel_dim``.

    Raises :class:`EndpointCrossingError` when a singularity is detected
    within ``eps_lambda`` of either endpoint.
    """
    if n_grid < 2:
        raise ValueError("n_grid must be at least 2")
    a, b = path.a, path.b
    span = b - a
    eps = 1e-8 * span if eps_lambda is None else float(eps_lambda)
    grid = np.linspace(a, b, n_grid)
    evals = [np.linalg.eigvalsh(path(x).entries) for x in grid]
    if zero_tol is None:
        scale = max(1.0, max(float(np.linalg.norm(w)) / math.sqrt(path.dim) for w in evals))
        tol = REL_ZERO_TOL * scale
    else:
        tol = float(zero_tol)
    neg = np.array([_neg_count(w, tol) for w in evals])
    minabs = np.array([float(np.min(np.abs(w))) for w in evals])
    singular = minabs <= tol

    def min_abs_at(x: float) -> float:
        return float(np.min(np.abs(_eigvals_of(path, x))))

    events: list[_Event] = []

    # singular samples, grouped into maximal runs
    i = 0
    while i < n_grid:
        if not singular[i]:
            i += 1
            continue
        j = i
        while j + 1 < n_grid and singular[j + 1]:
            j += 1
        if grid[i] - a <= eps or b - grid[j] <= eps:
            raise EndpointCrossingError(
                f"singular parameter within eps_lambda of an endpoint (samples "
                f"{grid[i]:.12g}..{grid[j]:.12g} on [{a:.12g}, {b:.12g}])"
            )
        if i == j:
            x0, f0 = _golden_min(min_abs_at, grid[max(i - 1, 0)], grid[min(i + 1, n_grid - 1)], eps)
            est = x0 if f0 <= minabs[i] else grid[i]
            events.append(_Event(max(est - eps / 2, a), min(est + eps / 2, b), est, eps / 2))
        else:
            # non-isolated singular run: keep its full extent
            events.append(_Event(grid[i], grid[j], 0.5 * (grid[i] + grid[j]), 0.5 * (grid[j] - grid[i])))
        i = j + 1

    # cells with a change of the negative count
    for j in range(n_grid - 1):
        if neg[j] != neg[j + 1]:
            events.extend(_bisect_sign_events(path, grid[j], grid[j + 1], eps))

    # dips of the smallest |eigenvalue| that may touch zero between samples
    for j in range(1, n_grid - 1):
        if singular[j - 1] or singular[j] or singular[j + 1]:
            continue
        if neg[j - 1] != neg[j] or neg[j] != neg[j + 1]:
            continue
        if not (minabs[j] <= minabs[j - 1] and minabs[j] <= minabs[j + 1]):
            continue
        if minabs[j] > 0.6 * max(minabs[j - 1], minabs[j + 1]):
            continue
        lo, hi = grid[j - 1], grid[j + 1]
        x0, f0 = _golden_min(min_abs_at, lo, hi, eps)
        if f0 <= tol:
            if x0 - a <= eps or b - x0 <= eps:
                raise EndpointCrossingError(
                    f"singular parameter within eps_lambda of an endpoint (at {x0:.12g})"
                )
            events.append(_Event(max(x0 - eps / 2, a), min(x0 + eps / 2, b), x0, eps / 2))
        else:
            # a rejected dip may hide a cancelling pair: re-scan finer
            sub = np.linspace(lo, hi, 33)
            sneg = [int(np.sum(_eigvals_of(path, x) < 0.0)) for x in sub]
            for k in range(32):
                if sneg[k] != sneg[k + 1]:
                    events.extend(_bisect_sign_events(path, sub[k], sub[k + 1], eps))

    if not events:
        return ()

    # merge events whose enlarged brackets would overlap
    events.sort(key=lambda e: (e.lo, e.hi))
    merged: list[list[_Event]] = [[events[0]]]
    for e in events[1:]:
        if e.lo - merged[-1][-1].hi <= 2 * eps:
            merged[-1].append(e)
        else:
            merged.append([e])

    def clear_point(x0: float, direction: float, max_ext: float) -> float:
        # walk away from the bracket until no eigenvalue sits inside the
        # tolerance band, so slow eigenvalue branches are counted correctly
        ext = eps
        while ext <= max_ext:
            x = x0 + direction * ext
            if float(np.min(np.abs(_eigvals_of(path, x)))) > 2.0 * tol:
                return x
            ext *= 2.0
        return x0 + direction * max_ext

    brackets = [(min(e.lo for e in g), max(e.hi for e in g)) for g in merged]
    crossings = []
    for idx, (group, (lo, hi)) in enumerate(zip(merged, brackets)):
        best = min(group, key=lambda e: e.est_width)
        est = best.est
        if lo - eps <= a or hi + eps >= b:
            raise EndpointCrossingError(
                f"crossing bracket [{lo:.12g}, {hi:.12g}] reaches an endpoint of [{a:.12g}, {b:.12g}]"
            )
        room_left = lo - (brackets[idx - 1][1] if idx > 0 else a)
        room_right = (brackets[idx + 1][0] if idx + 1 < len(brackets) else b) - hi
        lo_ext = clear_point(lo, -1.0, 0.4 * room_left)
        hi_ext = clear_point(hi, +1.0, 0.4 * room_right)
        w_lo = _eigvals_of(path, lo_ext)
        w_hi = _eigvals_of(path, hi_ext)
        local = _neg_count(w_lo, tol) - _neg_count(w_hi, tol)
        m_est = path(est).entries
        drift = max(
            float(np.linalg.norm(m_est - path(lo_ext).entries)),
            float(np.linalg.norm(m_est - path(hi_ext).entries)),
        )
        ktol = max(tol, drift)
        kdim = _zero_count(np.linalg.eigvalsh(m_est), ktol)
        kdim = max(kdim, abs(local), 1)
        crossings.append(
            Crossing(lambda_est=float(est), bracket=(float(lo), float(hi)), kernel_dim=int(kdim), local_sf=int(local))
        )
    return tuple(crossings)


def scan_path(
    path: OperatorPath,
    n_grid: int = DEFAULT_N_GRID,
    zero_tol: float | None = None,
    eps_lambda: float | None = None,
) -> SpectralFlowResult:
    """Extended spectral flow together with located crossings."""
    base = extended_sf(path, zero_tol=zero_tol)
    crossings = locate_crossings(path, n_grid=n_grid, zero_tol=zero_tol, eps_lambda=eps_lambda)
    return replace(base, crossings=crossings, grid_points_used=n_grid)


@dataclass(frozen=True)
class CrossingForm:
    matrix: np.ndarray
    signature: int
    regular: bool


def crossing_form(
    path: OperatorPath,
    lambda0: float,
    h: float | None = None,
    zero_tol: float | None = None,
) -> CrossingForm:
    """Derivative quadratic form on the kernel at a crossing.

    With ``K`` an orthonormal kernel basis of ``S(lambda0)`` and ``D`` the
    central difference ``(S(lambda0+h) - S(lambda0-h)) / (2h)``, returns
    ``K.T D K``, its signature, and whether the form is non-degenerate.
    """
    if not path.smooth:
        raise ValueError("crossing_form requires a smooth path")
    if h is None:
        h = max(1e-5 * (path.b - path.a), 1e-7)
    if lambda0 - h < path.a or lambda0 + h > path.b:
        raise ValueError(f"lambda0 +- h = {lambda0} +- {h} leaves the domain [{path.a}, {path.b}]")
    k = kernel_basis(path(lambda0), zero_tol=zero_tol)
    if k.shape[1] == 0:
        raise ValueError(f"not a crossing: kernel is trivial at lambda0 = {lambda0}")
    d = (path(lambda0 + h).entries - path(lambda0 - h).entries) / (2.0 * h)
    form = as_sym(k.T @ d @ k)
    q = inertia(form)
    return CrossingForm(matrix=form.entries, signature=q.signature, regular=q.zero == 0)


def _crossing_kernel_tol(path: OperatorPath, c: Crossing, eps: float) -> float:
    lo = max(path.a, c.bracket[0] - eps)
    hi = min(path.b, c.bracket[1] + eps)
    m_est = path(c.lambda_est).entries
    drift = max(
        float(np.linalg.norm(m_est - path(lo).entries)),
        float(np.linalg.norm(m_est - path(hi).entries)),
    )
    return max(default_zero_tol(SymMatrix(m_est)), drift)


def classify_crossings(
    path: OperatorPath,
    crossings: Sequence[Crossing],
    h: float | None = None,
    eps_lambda: float | None = None,
) -> tuple[Crossing, ...]:
    """Attach crossing-form signatures and regularity flags to crossings."""
    eps = 1e-8 * (path.b - path.a) if eps_lambda is None else eps_lambda
    out = []
    for c in crossings:
        form = crossing_form(path, c.lambda_est, h=h, zero_tol=_crossing_kernel_tol(path, c, eps))
        out.append(replace(c, crossing_form_signature=form.signature, regular=form.regular))
    return tuple(out)


def sf_regular_sum(
    path: OperatorPath,
    crossings: Sequence[Crossing] | None = None,
    h: float | None = None,
    n_grid: int = DEFAULT_N_GRID,
) -> int:
    """Sum of crossing-form signatures over regular crossings.

    Refuses when any crossing form is degenerate; for paths with only regular
    crossings the sum equals the extended spectral flow.
    """
    if crossings is None:
        crossings = locate_crossings(path, n_grid=n_grid)
    classified = classify_crossings(path, crossings, h=h)
    bad = [c for c in classified if not c.regular]
    if bad:
        where = ", ".join(f"{c.lambda_est:.12g}" for c in bad)
        raise ValueError(f"degenerate crossing form at lambda = {where}; the signature sum does not apply")
    return sum(c.crossing_form_signature for c in classified)


def is_nondecreasing(path: OperatorPath, n_grid: int = DEFAULT_N_GRID, zero_tol: float | None = None) -> bool:
    """True when consecutive grid increments have no eigenvalue below the
    tolerance band."""
    if n_grid < 2:
        raise ValueError("n_grid must be at least 2")
    grid = np.linspace(path.a, path.b, n_grid)
    prev = path(grid[0]).entries
    for x in grid[1:]:
        cur = path(x).entries
        diff = SymMatrix(cur - prev)
        tol = default_zero_tol(diff) if zero_tol is None else zero_tol
        if float(np.min(np.linalg.eigvalsh(diff.entries))) < -tol:
            return False
        prev = cur
    return True


@dataclass(frozen=True)
class ComparisonReport:
    """Outcome of the endpoint-ordering comparison between two paths.

    When ``hypothesis`` holds (left path below the right at the start, above
    at the end), the flow of the right path cannot exceed the left one's.
    """

    start_ordered: bool
    end_ordered: bool
    hypothesis: bool
    sf_left: int
    sf_right: int
    comparison_holds: bool

    def to_dict(self) -> dict:
        return {
            "start_ordered": self.start_ordered,
            "end_ordered": self.end_ordered,
            "hypothesis": self.hypothesis,
            "sf_left": self.sf_left,
            "sf_right": self.sf_right,
            "comparison_holds": self.comparison_holds,
        }


def compare_paths(left: OperatorPath, right: OperatorPath, zero_tol: float | None = None) -> ComparisonReport:
    """Check ``left_a <= right_a`` and ``right_b <= left_b`` (positive
    semidefinite differences) and report both flows; under the hypothesis the
    conclusion ``sf(right) <= sf(left)`` is asserted by ``comparison_holds``."""
    if left.dim != right.dim:
        raise ValueError("dimension mismatch")
    if abs(left.a - right.a) > _JUNCTION_TOL * max(1.0, abs(left.a)) or abs(left.b - right.b) > _JUNCTION_TOL * max(1.0, abs(left.b)):
        raise ValueError("domain mismatch")

    def psd(mat: np.ndarray) -> bool:
        d = SymMatrix(mat)
        tol = default_zero_tol(d) if zero_tol is None else zero_tol
        return float(np.min(np.linalg.eigvalsh(d.entries))) >= -tol

    start_ordered = psd(right(right.a).entries - left(left.a).entries)
    end_ordered = psd(left(left.b).entries - right(right.b).entries)
    sf_left = extended_sf(left, zero_tol=zero_tol).total_sf
    sf_right = extended_sf(right, zero_tol=zero_tol).total_sf
    return ComparisonReport(
        start_ordered=start_ordered,
        end_ordered=end_ordered,
        hypothesis=start_ordered and end_ordered,
        sf_left=sf_left,
        sf_right=sf_right,
        comparison_holds=sf_right <= sf_left,
    )


class AxiomViolation(AssertionError):
    """A randomized flow-property check found a counterexample.

    The offending instance is serialized on ``payload`` (JSON-compatible).
    """

    def __init__(self, message: str, payload: dict):
        super().__init__(message + "\n" + json.dumps(payload, sort_keys=True, default=_np_default))
        self.payload = payload


def _np_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"not serializable: {type(obj)}")


@dataclass(frozen=True)
class AxiomReport:
    seed: int
    trials: int
    passed: dict

    @property
    def all_passed(self) -> bool:
        return all(v == self.trials for v in self.passed.values())

    def to_dict(self) -> dict:
        return {"seed": self.seed, "trials": self.trials, "passed": dict(self.passed), "all_passed": self.all_passed}


def _rand_sym(rng, d, scale=1.0):
    m = rng.normal(size=(d, d)) * scale
    return (m + m.T) / 2.0


def _rand_orth(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    return q * np.sign(np.diag(r))


def _rand_invertible_sym(rng, d):
    q = _rand_orth(rng, d)
    w = rng.uniform(0.3, 2.0, size=d) * rng.choice([-1.0, 1.0], size=d)
    return (q * w) @ q.T


def _rand_grid_path(rng, d, n_samples=4, invertible_ends=True, singular_middle=False):
    lams = np.sort(rng.uniform(-1.0, 1.0, size=n_samples))
    lams[0], lams[-1] = -1.0, 1.0
    while np.any(np.diff(lams) <= 1e-3):
        lams = np.sort(rng.uniform(-1.0, 1.0, size=n_samples))
        lams[0], lams[-1] = -1.0, 1.0
    mats = [_rand_sym(rng, d) for _ in range(n_samples)]
    if invertible_ends:
        mats[0] = _rand_invertible_sym(rng, d)
        mats[-1] = _rand_invertible_sym(rng, d)
    if singular_middle:
        q = _rand_orth(rng, d)
        w = np.concatenate([[0.0], rng.uniform(0.3, 2.0, size=d - 1) * rng.choice([-1.0, 1.0], size=d - 1)])
        mats[n_samples // 2] = (q * w) @ q.T
    return OperatorPath.from_samples(lams, mats)


def verify_axioms(seed: int = 0, trials: int = 100, dims: Sequence[int] = (2, 3, 4, 5, 6, 7, 8)) -> AxiomReport:
    """Randomized exact-integer checks of the defining flow properties.

    Runs ``trials`` independent instances of each check: normalization on
    invertible families, the endpoint Morse-index formula, direct-sum and
    concatenation additivity (including singular junctions), homotopy
    invariance with fixed invertible endpoints, monotone non-negativity, and
    reversal antisymmetry on admissible paths. The first counterexample raises
    :class:`AxiomViolation` with the instance serialized.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = np.random.default_rng(seed)
    dims = tuple(int(d) for d in dims)
    passed = {
        "normalization": 0,
        "morse_index_formula": 0,
        "direct_sum": 0,
        "homotopy_invariance": 0,
        "concatenation": 0,
        "monotone_nonnegative": 0,
        "reversal_antisymmetry": 0,
    }

    def fail(name, trial, message, **payload):
        raise AxiomViolation(
            f"{name} failed at trial {trial}: {message}",
            {"check": name, "seed": seed, "trial": trial, **payload},
        )

    for t in range(trials):
        d = int(rng.choice(dims))

        # normalization: paths of invertible matrices have zero flow
        q = _rand_orth(rng, d)
        signs = rng.choice([-1.0, 1.0], size=d)
        base = rng.uniform(0.4, 1.4, size=d)
        drift = rng.uniform(-0.3, 0.3, size=d)

        def fn(lam, q=q, signs=signs, base=base, drift=drift):
            return (q * (signs * (base + drift * lam))) @ q.T

        p = OperatorPath.from_callable(0.0, 1.0, d, fn)
        sf = extended_sf(p).total_sf
        if sf != 0:
            fail("normalization", t, f"sf = {sf}", matrix_start=p(0.0).entries, matrix_end=p(1.0).entries)
        passed["normalization"] += 1

        # endpoint Morse-index formula on admissible paths
        p = _rand_grid_path(rng, d)
        mu_a = int(np.sum(np.linalg.eigvalsh(p(p.a).entries) < 0.0))
        mu_b = int(np.sum(np.linalg.eigvalsh(p(p.b).entries) < 0.0))
        sf = extended_sf(p).total_sf
        if sf != mu_a - mu_b:
            fail("morse_index_formula", t, f"sf = {sf}, mu_a - mu_b = {mu_a - mu_b}",
                 matrix_start=p(p.a).entries, matrix_end=p(p.b).entries)
        passed["morse_index_formula"] += 1

        # direct-sum additivity
        d2 = int(rng.choice(dims))
        p1, p2 = _rand_grid_path(rng, d), _rand_grid_path(rng, d2)
        lhs = extended_sf(direct_sum(p1, p2)).total_sf
        rhs = extended_sf(p1).total_sf + extended_sf(p2).total_sf
        if lhs != rhs:
            fail("direct_sum", t, f"sf(sum) = {lhs}, sf parts = {rhs}",
                 start_1=p1(p1.a).entries, start_2=p2(p2.a).entries)
        passed["direct_sum"] += 1

        # homotopy invariance with s-independent invertible endpoints
        a_mat = _rand_invertible_sym(rng, d)
        b_mat = _rand_invertible_sym(rng, d)
        w0, w1 = _rand_sym(rng, d), _rand_sym(rng, d)
        lams = np.linspace(0.0, 1.0, 5)
        values = []
        for s in np.linspace(0.0, 1.0, 10):
            mats = [
                (1 - x) * a_mat + x * b_mat + math.sin(math.pi * x) * (w0 + s * w1)
                for x in lams
            ]
            values.append(extended_sf(OperatorPath.from_samples(lams, mats)).total_sf)
        if len(set(values)) != 1:
            fail("homotopy_invariance", t, f"sf over slices = {values}", endpoint_a=a_mat, endpoint_b=b_mat)
        passed["homotopy_invariance"] += 1

        # concatenation additivity, singular junction in half the trials
        p = _rand_grid_path(rng, d, n_samples=5, singular_middle=(t % 2 == 0))
        lams_full = p._lambdas
        mid_idx = len(lams_full) // 2
        left = OperatorPath.from_samples(lams_full[: mid_idx + 1], p._matrices[: mid_idx + 1])
        right_part = OperatorPath.from_samples(lams_full[mid_idx:], p._matrices[mid_idx:])
        whole = extended_sf(p).total_sf
        pieces = extended_sf(left).total_sf + extended_sf(right_part).total_sf
        glued = extended_sf(concat(left, right_part)).total_sf
        if whole != pieces or glued != whole:
            fail("concatenation", t, f"whole = {whole}, pieces = {pieces}, glued = {glued}",
                 junction=p._matrices[mid_idx])
        passed["concatenation"] += 1

        # monotone non-decreasing paths have non-negative flow
        l0 = _rand_sym(rng, d)
        rank = int(rng.integers(0, d + 1))
        if rank == 0:
            psd = np.zeros((d, d))
        else:
            g = rng.normal(size=(d, rank))
            psd = g @ g.T
        p = OperatorPath.from_samples([0.0, 1.0], [l0, l0 + psd])
        sf = extended_sf(p).total_sf
        if sf < 0:
            fail("monotone_nonnegative", t, f"sf = {sf}", base=l0, increment=psd)
        if rank == 0 and sf != 0:
            fail("monotone_nonnegative", t, f"constant path gave sf = {sf}", base=l0)
        passed["monotone_nonnegative"] += 1

        # reversal antisymmetry on admissible paths
        p = _rand_grid_path(rng, d)
        sf_fwd = extended_sf(p).total_sf
        sf_rev = extended_sf(reverse(p)).total_sf
        if sf_rev != -sf_fwd:
            fail("reversal_antisymmetry", t, f"forward {sf_fwd}, reverse {sf_rev}",
                 matrix_start=p(p.a).entries, matrix_end=p(p.b).entries)
        passed["reversal_antisymmetry"] += 1

    return AxiomReport(seed=seed, trials=trials, passed=passed)
