"""Real and complex root finding, including argument-principle zero counts."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize


@dataclass
class MissFunction:
    """Complex mismatch function of the spectral parameter.

    ``evaluate`` takes an array of complex s and returns an array of the
    same shape. ``domain_guard`` returns a boolean mask of admissible s.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    domain_guard: Callable[[np.ndarray], np.ndarray] = field(
        default=lambda s: np.ones(np.shape(s), dtype=bool))

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        out = np.asarray(self.evaluate(np.atleast_1d(s).ravel()), dtype=complex)
        return out.reshape(s.shape) if s.ndim else complex(out[0])

    @classmethod
    def scalar(cls, fn, domain_guard=None):
        """Wrap a scalar function of s."""
        vec = lambda s: np.array([fn(z) for z in s], dtype=complex)
        if domain_guard is None:
            return cls(vec)
        return cls(vec, domain_guard)


@dataclass
class RealRootResult:
    roots: list  # (root, residual)
    poles: list
    truncated: bool = False

    @property
    def values(self) -> np.ndarray:
        return np.array([r for r, _ in self.roots])


def find_real_roots(f: Callable, bracket, max_roots: int | None = None,
                    scan_step: float | None = None, grid=None, xtol: float = 1e-14,
                    pole_detector: Callable | None = None,
                    vectorized: bool = False) -> RealRootResult:
    """Roots of a real function by sign-change scan and Brent polish.

    A sign change whose polished point has |f| larger than at both scan
    neighbours is treated as a pole and rejected (or whatever
    ``pole_detector(a, b, x, fa, fb, fx)`` decides). Roots are returned in
    scan order; ``truncated`` is set when ``max_roots`` stopped the scan.
    """
    lo, hi = bracket
    if grid is None:
        if scan_step is None:
            scan_step = (hi - lo) / 1000.0
        n = max(int(np.ceil(abs(hi - lo) / scan_step)), 1)
        grid = np.linspace(lo, hi, n + 1)
    grid = np.asarray(grid, dtype=float)
    if vectorized:
        vals = np.asarray(f(grid), dtype=float)
    else:
        vals = np.array([f(x) for x in grid], dtype=float)

    roots, poles = [], []
    truncated = False
    for i in range(len(grid) - 1):
        a, b, fa, fb = grid[i], grid[i + 1], vals[i], vals[i + 1]
        if not (np.isfinite(fa) and np.isfinite(fb)):
            continue
        if fa == 0.0:
            if not roots or roots[-1][0] != a:
                roots.append((float(a), 0.0))
            continue
        if fa * fb > 0 or fb == 0.0:
            continue
        g = (lambda x: float(f(np.array([x]))[0])) if vectorized else f
        x = optimize.brentq(g, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
        fx = g(x)
        if pole_detector is not None:
            is_pole = pole_detector(a, b, x, fa, fb, fx)
        else:
            is_pole = abs(fx) > min(abs(fa), abs(fb))
        if is_pole:
            poles.append(float(x))
            continue
        roots.append((float(x), abs(fx)))
        if max_roots is not None and len(roots) >= max_roots:
            truncated = i < len(grid) - 2
            break
    if vals[-1] == 0.0 and (not roots or roots[-1][0] != grid[-1]):
        roots.append((float(grid[-1]), 0.0))
    return RealRootResult(roots=roots, poles=poles, truncated=truncated)


def muller(f: Callable, z0, z1=None, z2=None, tol: float = 1e-12, max_iter: int = 60,
           step: float = 1e-3):
    """Vectorized Muller iteration.

    ``f`` maps an array of complex points to an array of values. Returns the
    final iterates, |f| there, and a convergence mask (relative step below
    ``tol``).
    """
    x2 = np.atleast_1d(np.asarray(z0, dtype=complex)).copy()
    scale = np.maximum(np.abs(x2), 1.0)
    x1 = x2 + step * scale if z1 is None else np.atleast_1d(np.asarray(z1, complex)).copy()
    x0 = x2 - step * scale * 1j if z2 is None else np.atleast_1d(np.asarray(z2, complex)).copy()
    f0, f1, f2 = f(x0), f(x1), f(x2)
    n = len(x2)
    active = np.ones(n, dtype=bool)
    converged = np.zeros(n, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        a0, a1, a2 = x0[idx], x1[idx], x2[idx]
        g0, g1, g2 = f0[idx], f1[idx], f2[idx]
        with np.errstate(all="ignore"):
            h1, h2 = a1 - a0, a2 - a1
            d1, d2 = (g1 - g0) / h1, (g2 - g1) / h2
            d = (d2 - d1) / (h2 + h1)
            b = d2 + h2 * d
            disc = np.sqrt(b * b - 4.0 * g2 * d)
            den = np.where(np.abs(b + disc) >= np.abs(b - disc), b + disc, b - disc)
            dx = np.where(den != 0, -2.0 * g2 / den, step * np.maximum(np.abs(a2), 1.0))
        bad = ~np.isfinite(dx)
        dx[bad] = 0.0
        x_new = a2 + dx
        f_new = f(x_new)
        x0[idx], x1[idx], x2[idx] = a1, a2, x_new
        f0[idx], f1[idx], f2[idx] = g1, g2, f_new
        done = (np.abs(dx) <= tol * np.maximum(np.abs(x_new), 1.0)) | (f_new == 0)
        converged[idx[done & ~bad]] = True
        active[idx[done | bad | ~np.isfinite(f_new)]] = False
    return x2, np.abs(f2), converged


@dataclass
class WindingResult:
    count: int
    raw: float
    reliable: bool
    n_points: int
    min_modulus: float


def _rectangle_contour(rect, n_side):
    x0, x1, y0, y1 = rect
    t = np.linspace(0.0, 1.0, n_side, endpoint=False)
    bottom = x0 + (x1 - x0) * t + 1j * y0
    right = x1 + 1j * (y0 + (y1 - y0) * t)
    top = x1 - (x1 - x0) * t + 1j * y1
    left = x0 + 1j * (y1 - (y1 - y0) * t)
    return np.concatenate([bottom, right, top, left])


def winding_number(f: Callable, rect, n_side: int = 16, max_points: int = 4096,
                   max_dphase: float = np.pi / 4, points=None, values=None,
                   confirm: bool = True) -> WindingResult:
    """Zero count of analytic ``f`` inside ``rect = (x0, x1, y0, y1)``.

    The contour is refined until consecutive phase increments are below
    ``max_dphase``. ``reliable`` is False when the refinement budget ran
    out or ``f`` vanished on (or too close to) the contour. ``points``/``values`` may supply
    precomputed contour samples (counter-clockwise, open polygon). With
    ``confirm`` the converged contour is refined once more uniformly and the
    count must not change.
    """
    if points is None:
        z = _rectangle_contour(rect, n_side)
        v = np.asarray(f(z), dtype=complex)
    else:
        z = np.asarray(points, dtype=complex)
        v = np.asarray(values, dtype=complex) if values is not None else np.asarray(f(z), complex)
    reliable = True
    min_segment = 1e-10 * float(np.sum(np.abs(np.roll(z, -1) - z)))
    while True:
        if np.any(v == 0) or not np.all(np.isfinite(v)):
            reliable = False
            break
        z_next, v_next = np.roll(z, -1), np.roll(v, -1)
        dphase = np.angle(v_next / v)
        coarse = np.abs(dphase) > max_dphase
        if not coarse.any():
            break
        if len(z) + coarse.sum() > max_points:
            reliable = False
            break
        if np.min(np.abs(z_next[coarse] - z[coarse])) < min_segment:
            # a phase jump that survives bisection: a zero on the contour
            reliable = False
            break
        mid = 0.5 * (z[coarse] + z_next[coarse])
        vmid = np.asarray(f(mid), dtype=complex)
        pos = np.flatnonzero(coarse) + 1
        z = np.insert(z, pos, mid)
        v = np.insert(v, pos, vmid)
    if not reliable:
        # a zero on the contour or a non-finite sample: no count can be given
        finite = np.abs(v[np.isfinite(v)])
        return WindingResult(count=0, raw=float("nan"), reliable=False, n_points=len(z),
                             min_modulus=float(np.min(finite)) if finite.size else 0.0)
    dphase = np.angle(np.roll(v, -1) / v)
    raw = float(np.sum(dphase) / (2.0 * np.pi))
    count = int(np.rint(raw))
    if abs(raw - count) > 1e-6:
        reliable = False
    if confirm and reliable and len(z) <= max_points // 2:
        # one uniform refinement must leave the count unchanged
        mid = 0.5 * (z + np.roll(z, -1))
        vmid = np.asarray(f(mid), dtype=complex)
        zz = np.empty(2 * len(z), dtype=complex)
        vv = np.empty(2 * len(z), dtype=complex)
        zz[0::2], zz[1::2], vv[0::2], vv[1::2] = z, mid, v, vmid
        if np.any(vv == 0) or not np.all(np.isfinite(vv)):
            reliable = False
        else:
            raw2 = float(np.sum(np.angle(np.roll(vv, -1) / vv)) / (2.0 * np.pi))
            if int(np.rint(raw2)) != count or np.max(np.abs(np.angle(np.roll(vv, -1) / vv))) > max_dphase:
                reliable = False
            z, v = zz, vv
    return WindingResult(count=count, raw=raw, reliable=reliable, n_points=len(z),
                         min_modulus=float(np.min(np.abs(v))) if len(v) else 0.0)


@dataclass
class ComplexRoot:
    root: complex
    residual: float
    winding_verified: bool


@dataclass
class ComplexRootResult:
    roots: list
    inconclusive_cells: list
    cell_counts: list  # (rect, winding count)

    @property
    def values(self) -> np.ndarray:
        return np.array([r.root for r in self.roots], dtype=complex)


def _dedupe(points, tol):
    out = []
    for p in points:
        if all(abs(p - q) > tol * max(1.0, abs(q)) for q in out):
            out.append(p)
    return out


def find_complex_roots(miss, rect, seeds=None, n_seeds=(41, 41), tol: float = 1e-12,
                       dedup: float = 1e-8, verify: bool = True, max_depth: int = 3,
                       n_side: int = 16, max_points: int = 4096) -> ComplexRootResult:
    """Zeros of an analytic function in a rectangle.

    Muller iteration is started from the local minima of |miss| on a seed
    grid (or from ``seeds``). With ``verify`` the rectangle's winding number
    is compared with the roots found; on mismatch the rectangle is split in
    four and the process repeated down to ``max_depth``.
    """
    if not isinstance(miss, MissFunction):
        miss = MissFunction(miss)
    fn = miss.evaluate
    guard = miss.domain_guard

    def seeds_for(r):
        x0, x1, y0, y1 = r
        nx, ny = n_seeds
        xs, ys = np.linspace(x0, x1, nx), np.linspace(y0, y1, ny)
        zz = xs[None, :] + 1j * ys[:, None]
        vals = np.abs(np.asarray(fn(zz.ravel()), dtype=complex)).reshape(zz.shape)
        pad = np.pad(vals, 1, constant_values=np.inf)
        centre = pad[1:-1, 1:-1]
        is_min = np.ones_like(centre, dtype=bool)
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                if di == 0 and dj == 0:
                    continue
                is_min &= centre <= pad[1 + di:pad.shape[0] - 1 + di, 1 + dj:pad.shape[1] - 1 + dj]
        return zz[is_min]

    def polish(starts, r):
        if len(starts) == 0:
            return []
        x0, x1, y0, y1 = r
        mx, my = x1 - x0, y1 - y0

        def guarded(z):
            # iterates outside the admissible set, or far outside the cell, are dropped
            keep = np.asarray(guard(z), dtype=bool) & (z.real >= x0 - mx) & (z.real <= x1 + mx) \
                & (z.imag >= y0 - my) & (z.imag <= y1 + my)
            out = np.full(z.shape, np.nan + 0j)
            if keep.any():
                out[keep] = fn(z[keep])
            return out
        z, res, ok = muller(guarded, starts, tol=tol)
        inside = ok & (z.real >= x0) & (z.real <= x1) & (z.imag >= y0) & (z.imag <= y1)
        inside &= np.asarray(guard(z), dtype=bool)
        return _dedupe(list(z[inside]), dedup)

    starts = seeds_for(rect) if seeds is None else np.asarray(seeds, dtype=complex)
    found = polish(starts, rect)

    inconclusive, counts = [], []
    verified = {}

    def check(r, candidates, depth):
        x0, x1, y0, y1 = r
        inside = [z for z in candidates
                  if x0 < z.real < x1 and y0 < z.imag < y1]
        w = winding_number(fn, r, n_side=n_side, max_points=max_points)
        if w.reliable and w.count == len(inside):
            counts.append((r, w.count))
            for z in inside:
                verified[z] = True
            return inside
        if depth >= max_depth:
            inconclusive.append(r)
            counts.append((r, w.count if w.reliable else None))
            return inside
        xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        # nudge split lines off any known root
        for z in candidates:
            if abs(z.real - xm) < 1e-6 * (x1 - x0):
                xm += 1e-3 * (x1 - x0)
            if abs(z.imag - ym) < 1e-6 * (y1 - y0):
                ym += 1e-3 * (y1 - y0)
        out = []
        for sub in ((x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)):
            extra = polish(seeds_for(sub), sub) if not w.reliable or w.count > len(inside) else []
            out += check(sub, _dedupe(candidates + extra, dedup), depth + 1)
        return _dedupe(out, dedup)

    if verify:
        found = check(rect, found, 0)
    roots = [ComplexRoot(complex(z), float(abs(miss(z))), bool(verified.get(z, False)))
             for z in found]
    roots.sort(key=lambda c: (-c.root.real, c.root.imag))
    return ComplexRootResult(roots=roots, inconclusive_cells=inconclusive, cell_counts=counts)


def refine_brackets(f: Callable, a, b, fa=None, fb=None, xtol: float = 1e-13,
                    max_iter: int = 200):
    """Polish many sign-change brackets at once (Illinois with bisection fallback).

    ``f`` maps an array of points to real values. Returns the roots and |f|
    at the final iterate.
    """
    a = np.asarray(a, dtype=float).copy()
    b = np.asarray(b, dtype=float).copy()
    fa = np.asarray(f(a), dtype=float) if fa is None else np.asarray(fa, dtype=float).copy()
    fb = np.asarray(f(b), dtype=float) if fb is None else np.asarray(fb, dtype=float).copy()
    if np.any(fa * fb > 0):
        raise ValueError("every bracket must contain a sign change")
    side = np.zeros(len(a), dtype=int)
    ref_width = np.abs(b - a)  # width three steps ago, to detect stalling
    x = 0.5 * (a + b)
    fx = np.zeros_like(x)
    x_prev = np.full_like(x, np.inf)
    active = np.ones(len(a), dtype=bool)
    for it in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        aa, bb, ga, gb = a[idx], b[idx], fa[idx], fb[idx]
        with np.errstate(all="ignore"):
            xs = (aa * gb - bb * ga) / (gb - ga)
        bis = ~np.isfinite(xs) | (xs <= np.minimum(aa, bb)) | (xs >= np.maximum(aa, bb))
        # bisect when three steps have not halved the bracket
        if it % 3 == 2:
            bis |= np.abs(bb - aa) > 0.5 * ref_width[idx]
            ref_width[idx] = np.abs(bb - aa)
        xs[bis] = 0.5 * (aa[bis] + bb[bis])
        gx = np.asarray(f(xs), dtype=float)
        x[idx], fx[idx] = xs, gx
        left = ga * gx < 0  # root in [a, x]
        # Illinois: halve the retained endpoint value when the same side repeats
        keep_a = ~left
        new_b = np.where(left, xs, bb)
        new_gb = np.where(left, gx, gb)
        new_a = np.where(keep_a, xs, aa)
        new_ga = np.where(keep_a, gx, ga)
        rep_a = left & (side[idx] == -1)
        rep_b = keep_a & (side[idx] == 1)
        new_ga = np.where(rep_a, 0.5 * new_ga, new_ga)
        new_gb = np.where(rep_b, 0.5 * new_gb, new_gb)
        side[idx] = np.where(left, -1, 1)
        a[idx], b[idx], fa[idx], fb[idx] = new_a, new_b, new_ga, new_gb
        width = np.abs(new_b - new_a)
        step = np.abs(xs - x_prev[idx])
        x_prev[idx] = xs
        tiny = xtol * np.maximum(1.0, np.abs(xs))
        done = (width <= tiny) | (gx == 0) | ((step <= tiny) & ~bis)
        active[idx[done]] = False
    return x, np.abs(fx)
