"""Argument-principle scan of the mismatch function over (a, b) rectangles."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..numerics.roots import find_complex_roots, winding_number
from ..profiles import VortexProfile
from .eigen import ab_to_s_rect, auto_rectangle
from .modes import FourierMode, ab_from_s
from .radial import RadialProblem


class CachedMiss:
    """Memoized batched mismatch, so cells sharing an edge share evaluations."""

    def __init__(self, miss, digits: int = 12):
        self.miss = miss
        self.digits = digits
        self.store: dict = {}
        self.n_evaluations = 0

    def _key(self, z):
        return (round(z.real, self.digits), round(z.imag, self.digits))

    def __call__(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        keys = [self._key(z) for z in s.ravel()]
        todo = {}
        for key, z in zip(keys, s.ravel()):
            if key not in self.store and key not in todo:
                todo[key] = z
        if todo:
            vals = np.asarray(self.miss(np.array(list(todo.values()))), dtype=complex)
            self.n_evaluations += len(todo)
            self.store.update(zip(todo.keys(), vals))
        return np.array([self.store[key] for key in keys], dtype=complex).reshape(s.shape)


@dataclass
class CellCount:
    rect: tuple  # (a0, a1, b0, b1)
    count: int | None
    raw: float
    reliable: bool
    n_points: int
    depth: int

    def to_dict(self) -> dict:
        a0, a1, b0, b1 = self.rect
        return {"a0": a0, "a1": a1, "b0": b0, "b1": b1, "count": self.count, "raw": self.raw,
                "reliable": self.reliable, "n_points": self.n_points, "depth": self.depth}


@dataclass
class ScanReport:
    mode: FourierMode
    rectangles: list
    resolution: tuple
    cells: list  # CellCount, leaves of the subdivision
    roots: list = field(default_factory=list)  # dicts with s, a, b, residual
    n_evaluations: int = 0

    @property
    def total_count(self) -> int:
        return int(sum(c.count for c in self.cells if c.count is not None))

    @property
    def inconclusive(self) -> list:
        return [c for c in self.cells if not c.reliable]

    def to_dict(self) -> dict:
        return {"m": self.mode.m, "k": self.mode.k,
                "rectangles": [list(r) for r in self.rectangles],
                "resolution": list(self.resolution),
                "total_count": self.total_count,
                "n_inconclusive": len(self.inconclusive),
                "cells": [c.to_dict() for c in self.cells],
                "roots": self.roots,
                "n_evaluations": self.n_evaluations}


_SPLIT = 0.4472  # off-centre, so a zero on a corner does not stay on the new edges


def _split(rect):
    a0, a1, b0, b1 = rect
    am, bm = a0 + _SPLIT * (a1 - a0), b0 + _SPLIT * (b1 - b0)
    return [(a0, am, b0, bm), (am, a1, b0, bm), (a0, am, bm, b1), (am, a1, bm, b1)]


def spectrum_scan(profile: VortexProfile, mode: FourierMode, rectangle="auto",
                  resolution=(2, 4), strip: float = 0.02, n_side: int = 16,
                  max_depth: int = 2, polish: bool = True, tol: float = 1e-10,
                  problem: RadialProblem | None = None) -> ScanReport:
    """Zero counts of the mismatch function on a grid of (a, b) cells.

    ``rectangle`` is "auto" (|a| in [strip, M], b in [-0.5, 1.5]) or a list of
    (a0, a1, b0, b1). Each rectangle is cut into ``resolution = (n_a, n_b)``
    cells; a cell whose count cannot be certified is resampled with more
    contour points and then split in four, down to ``max_depth``. Cells with a nonzero count are searched and the roots
    polished.
    """
    m = mode.m
    if m == 0:
        raise ValueError("spectrum_scan needs m != 0")
    rects = auto_rectangle(profile, mode, strip=strip) if rectangle == "auto" else list(rectangle)
    problem = problem or RadialProblem(profile, mode, tol=tol)
    f = CachedMiss(problem.miss)
    n_a, n_b = resolution
    cells, roots = [], []

    def visit(rect, depth):
        # a failed confirmation usually means aliasing, so resample densely first
        for n in (n_side, 4 * n_side, 16 * n_side):
            w = winding_number(f, ab_to_s_rect(m, rect), n_side=n, max_points=64 * n_side)
            if w.reliable:
                break
        if not w.reliable and depth < max_depth:
            for sub in _split(rect):
                visit(sub, depth + 1)
            return
        cell = CellCount(rect=tuple(float(x) for x in rect), count=w.count if w.reliable else None,
                         raw=w.raw, reliable=w.reliable, n_points=w.n_points, depth=depth)
        cells.append(cell)
        if polish and (w.count != 0 or not w.reliable):
            res = find_complex_roots(problem.miss_function(guard_strip=0.0),
                                     ab_to_s_rect(m, rect), n_seeds=(11, 11))
            for root in res.roots:
                a, b = ab_from_s(m, root.root)
                roots.append({"s": root.root, "a": a, "b": b, "residual": root.residual,
                              "winding_verified": root.winding_verified})

    for a0, a1, b0, b1 in rects:
        a_edges = np.linspace(a0, a1, n_a + 1)
        b_edges = np.linspace(b0, b1, n_b + 1)
        for i in range(n_a):
            for j in range(n_b):
                visit((a_edges[i], a_edges[i + 1], b_edges[j], b_edges[j + 1]), 0)
    return ScanReport(mode=mode, rectangles=rects, resolution=(n_a, n_b), cells=cells,
                      roots=roots, n_evaluations=f.n_evaluations)


def bump(center: float = 1.0, width: float = 0.5):
    """Smooth radial bump chi(r) = exp(-((r - center)/width)^2)."""
    return lambda r: np.exp(-((np.asarray(r) - center) / width) ** 2)


def planted_zero_problem(profile: VortexProfile, mode: FourierMode, target: complex,
                         chi=None, kappa0: complex = -10.0, tol: float = 1e-10):
    """A perturbed radial problem with an eigenvalue placed exactly at ``target``.

    B is replaced by B + kappa chi(r), and the complex kappa is chosen by
    Muller iteration so that the mismatch at ``target`` vanishes. Returns
    ``(problem, kappa)``; scanning the perturbed problem must find ``target``.
    """
    chi = bump() if chi is None else chi

    def make(kappa):
        return RadialProblem(profile, mode, tol=tol,
                             perturbation=lambda r, s, c=kappa: c * chi(r))

    def f(kappas):
        return np.array([make(c).miss(np.array([target]))[0] for c in np.atleast_1d(kappas)])

    from ..numerics.roots import muller
    kappa, _, ok = muller(f, kappa0, tol=1e-13)
    if not ok[0]:
        raise RuntimeError("could not place the test eigenvalue")
    kappa = complex(kappa[0])
    return make(kappa), kappa
