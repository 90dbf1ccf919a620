"""Bipartite Configuration Model solver.

The BiCM is the maximum-entropy ensemble of binary bipartite graphs whose
expected degrees equal the observed ones on both layers. Link probabilities
factorise as::

    p[i, a] = x[i] * y[a] / (1 + x[i] * y[a])

with one multiplier per node. The multipliers maximise the log-likelihood of
the observed graph, whose gradient is exactly the expected-minus-observed
degree vector.

Solving proceeds in three steps:

1. Nodes with degree zero, or degree equal to the number of available
   partners, are peeled off repeatedly. Their probabilities are forced to
   0 or 1 and the remaining degrees are updated.
2. Nodes left on each layer are grouped by degree (nodes with equal degree
   share a multiplier), giving a much smaller reduced system.
3. The reduced system is solved in log-space with an alternating fixed-point
   iteration, optionally refined with Newton steps on the (convex) negative
   log-likelihood.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.special import expit, logsumexp

from .bigraph import BipartiteGraph, DegreeSequence

FREE = -1


class DegreeSequenceError(ValueError):
    """Degree sequences are inconsistent or not realisable by a bipartite graph."""


class ConvergenceError(RuntimeError):
    """The solver hit ``max_iterations`` before reaching the tolerance."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations


class LikelihoodInconsistencyError(ValueError):
    """An observed entry contradicts a probability forced to 0 or 1."""


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-8
    max_iterations: int = 10000
    method: str = "fixed-point"
    damping: float = 1.0
    newton_refine: bool = True
    # fixed-point hands over to Newton once the residual drops below this
    refine_threshold: float = 1e-3
    reduce: bool = True

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.method not in ("fixed-point", "newton"):
            raise ValueError(f"unknown method {self.method!r}")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")


@dataclass(frozen=True)
class BicmSolution:
    """Converged BiCM multipliers.

    ``log_x``/``log_y`` hold the log multipliers (``-theta``). Nodes removed
    during peeling carry ``-inf`` (forced 0) or ``+inf`` (forced 1) and a
    peeling step in ``top_order``/``bottom_order``; free nodes have order
    ``-1``. For a pair where at least one node was peeled, the node peeled
    first decides the probability.
    """

    log_x: np.ndarray
    log_y: np.ndarray
    top_order: np.ndarray
    bottom_order: np.ndarray
    top_degrees: np.ndarray
    bottom_degrees: np.ndarray
    residual: float = 0.0
    iterations: int = 0

    @property
    def top_count(self) -> int:
        return len(self.log_x)

    @property
    def bottom_count(self) -> int:
        return len(self.log_y)

    @property
    def x(self) -> np.ndarray:
        return np.exp(self.log_x)

    @property
    def y(self) -> np.ndarray:
        return np.exp(self.log_y)

    @property
    def saturated_top(self) -> frozenset:
        """Top nodes removed by peeling, i.e. whose probabilities are forced to 0 or 1."""
        return frozenset(np.flatnonzero(self.top_order != FREE).tolist())

    @property
    def saturated_bottom(self) -> frozenset:
        return frozenset(np.flatnonzero(self.bottom_order != FREE).tolist())

    @property
    def isolated_top(self) -> frozenset:
        """Top nodes of degree zero."""
        return frozenset(np.flatnonzero(self.top_degrees == 0).tolist())

    @property
    def isolated_bottom(self) -> frozenset:
        return frozenset(np.flatnonzero(self.bottom_degrees == 0).tolist())

    def probabilities(self, top_idx=None, bottom_idx=None) -> np.ndarray:
        """Dense block of link probabilities for the given rows and columns."""
        ti = np.arange(self.top_count) if top_idx is None else np.asarray(top_idx)
        bi = np.arange(self.bottom_count) if bottom_idx is None else np.asarray(bottom_idx)
        lx, ly = self.log_x[ti][:, None], self.log_y[bi][None, :]
        to, bo = self.top_order[ti][:, None], self.bottom_order[bi][None, :]
        free = (to == FREE) & (bo == FREE)
        with np.errstate(invalid="ignore"):
            p = expit(np.where(free, lx + ly, 0.0))
        top_first = (to != FREE) & ((bo == FREE) | (to < bo))
        bottom_first = (bo != FREE) & ~top_first
        p = np.where(top_first, np.isposinf(lx).astype(float), p)
        p = np.where(bottom_first, np.isposinf(ly).astype(float), p)
        return p

    def bottom_groups(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Group bottom nodes by degree (equal degree implies equal column).

        Returns ``(group_of_node, representative, counts)``.
        """
        values, rep, inverse, counts = np.unique(
            self.bottom_degrees, return_index=True, return_inverse=True, return_counts=True
        )
        return inverse, rep, counts

    def with_multipliers(self, log_x, log_y) -> "BicmSolution":
        return replace(self, log_x=np.asarray(log_x, float), log_y=np.asarray(log_y, float))

    # -- serialisation -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "x": self.x.tolist(),
            "y": self.y.tolist(),
            "log_x": self.log_x.tolist(),
            "log_y": self.log_y.tolist(),
            "top_order": self.top_order.tolist(),
            "bottom_order": self.bottom_order.tolist(),
            "top_degrees": self.top_degrees.tolist(),
            "bottom_degrees": self.bottom_degrees.tolist(),
            "residual": self.residual,
            "iterations": self.iterations,
            "saturated_top": sorted(self.saturated_top),
            "saturated_bottom": sorted(self.saturated_bottom),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BicmSolution":
        return cls(
            log_x=np.asarray(d["log_x"], dtype=float),
            log_y=np.asarray(d["log_y"], dtype=float),
            top_order=np.asarray(d["top_order"], dtype=np.int64),
            bottom_order=np.asarray(d["bottom_order"], dtype=np.int64),
            top_degrees=np.asarray(d["top_degrees"], dtype=np.int64),
            bottom_degrees=np.asarray(d["bottom_degrees"], dtype=np.int64),
            residual=float(d["residual"]),
            iterations=int(d["iterations"]),
        )

    def __eq__(self, other):
        if not isinstance(other, BicmSolution):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def save_solution(path, sol: BicmSolution) -> None:
    # float repr is the shortest string that round-trips exactly
    Path(path).write_text(json.dumps(sol.to_dict(), indent=1) + "\n", encoding="utf-8")


def load_solution(path) -> BicmSolution:
    return BicmSolution.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# -- degree sequence checks ----------------------------------------------------

def check_degree_sequence(seq: DegreeSequence) -> None:
    """Raise :class:`DegreeSequenceError` unless a bipartite graph realises ``seq``.

    Uses the Gale-Ryser condition.
    """
    top, bottom = seq.top, seq.bottom
    if top.sum() != bottom.sum():
        raise DegreeSequenceError(f"degree sums differ: top {top.sum()} vs bottom {bottom.sum()}")
    if len(top) and (top.min() < 0 or top.max() > len(bottom)):
        raise DegreeSequenceError("top degree outside [0, bottom_count]")
    if len(bottom) and (bottom.min() < 0 or bottom.max() > len(top)):
        raise DegreeSequenceError("bottom degree outside [0, top_count]")
    a = np.sort(top)[::-1]
    ks = np.arange(1, len(a) + 1)
    lhs = np.cumsum(a)
    rhs = np.minimum(bottom[None, :], ks[:, None]).sum(axis=1) if len(bottom) else np.zeros(len(a))
    bad = np.flatnonzero(lhs > rhs)
    if bad.size:
        raise DegreeSequenceError(f"sequence is not bigraphical (Gale-Ryser fails at k={bad[0] + 1})")


def _peel(top: np.ndarray, bottom: np.ndarray):
    """Iteratively force zero-degree and full-degree nodes.

    Returns residual degrees, per-node peeling step (``FREE`` if kept) and
    per-node forced value (1 for saturated, 0 for isolated).
    """
    rt, rb = top.astype(np.int64).copy(), bottom.astype(np.int64).copy()
    ot = np.full(len(top), FREE, dtype=np.int64)
    ob = np.full(len(bottom), FREE, dtype=np.int64)
    ft = np.zeros(len(top), dtype=np.int8)
    fb = np.zeros(len(bottom), dtype=np.int8)
    step = 0
    changed = True
    while changed:
        changed = False
        for r, o, f, r_other, o_other in ((rt, ot, ft, rb, ob), (rb, ob, fb, rt, ot)):
            zero = (o == FREE) & (r == 0)
            if zero.any():
                o[zero] = step
                step += 1
                changed = True
            active_other = o_other == FREE
            full = (o == FREE) & (r == int(active_other.sum())) & (r > 0)
            if full.any():
                o[full] = step
                f[full] = 1
                step += 1
                r_other[active_other] -= int(full.sum())
                r[full] = 0
                changed = True
                if (r_other[active_other] < 0).any():
                    raise DegreeSequenceError("degree sequence inconsistent after forcing saturated nodes")
    return rt, rb, ot, ob, ft, fb


# -- reduced-system solvers -----------------------------------------------------

def _softplus(z):
    return np.logaddexp(0.0, z)


class _Reduced:
    """Degree-grouped system on the free nodes."""

    def __init__(self, kt, mt, kb, mb):
        self.kt, self.mt = kt.astype(float), mt.astype(float)
        self.kb, self.mb = kb.astype(float), mb.astype(float)
        self.log_mt, self.log_mb = np.log(self.mt), np.log(self.mb)
        self.nt = len(kt)

    def expected(self, u, v):
        p = expit(u[:, None] + v[None, :])
        return p @ self.mb, self.mt @ p

    def residual(self, u, v) -> float:
        et, eb = self.expected(u, v)
        return float(max(np.abs(et - self.kt).max(), np.abs(eb - self.kb).max()))

    def objective(self, u, v) -> float:
        z = u[:, None] + v[None, :]
        return float(self.mt @ _softplus(z) @ self.mb - (self.mt * self.kt) @ u - (self.mb * self.kb) @ v)

    def fixed_point_step(self, u, v, damping):
        # x_i = k_i / sum_a m_a y_a / (1 + x_i y_a), evaluated in log-space
        z = u[:, None] + v[None, :]
        u_new = np.log(self.kt) - logsumexp(self.log_mb[None, :] + v[None, :] - _softplus(z), axis=1)
        u = (1 - damping) * u + damping * u_new
        z = u[:, None] + v[None, :]
        v_new = np.log(self.kb) - logsumexp(self.log_mt[:, None] + u[:, None] - _softplus(z), axis=0)
        v = (1 - damping) * v + damping * v_new
        return u, v

    def newton_step(self, u, v):
        z = u[:, None] + v[None, :]
        p = expit(z)
        w = p * (1 - p) * self.mt[:, None] * self.mb[None, :]
        et, eb = p @ self.mb, self.mt @ p
        grad = np.concatenate([self.mt * (et - self.kt), self.mb * (eb - self.kb)])
        n = self.nt + len(v)
        hess = np.empty((n, n))
        hess[:self.nt, :self.nt] = np.diag(w.sum(axis=1))
        hess[self.nt:, self.nt:] = np.diag(w.sum(axis=0))
        hess[:self.nt, self.nt:] = w
        hess[self.nt:, :self.nt] = w.T
        # the gauge direction (u + c, v - c) is a null vector of the Hessian
        g = np.concatenate([np.ones(self.nt), -np.ones(len(v))])
        scale = max(float(np.mean(np.diag(hess))), 1e-12)
        hess += scale * np.outer(g, g) / n
        try:
            step = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = -np.linalg.lstsq(hess, grad, rcond=None)[0]
        f0 = self.objective(u, v)
        slope = float(grad @ step)
        t = 1.0
        for _ in range(50):
            un, vn = u + t * step[:self.nt], v + t * step[self.nt:]
            if self.objective(un, vn) <= f0 + 1e-4 * t * slope or t < 1e-10:
                break
            t *= 0.5
        return un, vn


def _solve_reduced(red: _Reduced, cfg: SolverConfig, u, v):
    res = red.residual(u, v)
    it = 0
    use_newton = cfg.method == "newton"
    while res > cfg.tolerance:
        if it >= cfg.max_iterations:
            raise ConvergenceError("BiCM solver did not converge", res, it)
        if not use_newton and cfg.newton_refine and res < cfg.refine_threshold:
            use_newton = True
        if use_newton:
            u, v = red.newton_step(u, v)
        else:
            u, v = red.fixed_point_step(u, v, cfg.damping)
        # keep the gauge centred so log-multipliers stay bounded
        shift = 0.5 * (u.mean() - v.mean())
        u, v = u - shift, v + shift
        res = red.residual(u, v)
        it += 1
    return u, v, res, it


def solve_bicm(seq: DegreeSequence, cfg: SolverConfig | None = None) -> BicmSolution:
    """Fit the BiCM to a pair of degree sequences.

    Parameters
    ----------
    seq : DegreeSequence
        Observed top and bottom degrees.
    cfg : SolverConfig, optional
        Tolerance (max absolute expected-degree error), iteration budget and
        method.

    Returns
    -------
    BicmSolution

    Raises
    ------
    DegreeSequenceError
        If the sequences are not realisable.
    ConvergenceError
        If the tolerance is not reached within ``max_iterations``.
    """
    cfg = cfg or SolverConfig()
    check_degree_sequence(seq)
    top, bottom = seq.top, seq.bottom
    rt, rb, ot, ob, ft, fb = _peel(top, bottom)
    free_t, free_b = np.flatnonzero(ot == FREE), np.flatnonzero(ob == FREE)

    log_x = np.where(ft == 1, np.inf, -np.inf)
    log_y = np.where(fb == 1, np.inf, -np.inf)
    res, it = 0.0, 0
    if free_t.size and free_b.size:
        if cfg.reduce:
            kt, inv_t, mt = np.unique(rt[free_t], return_inverse=True, return_counts=True)
            kb, inv_b, mb = np.unique(rb[free_b], return_inverse=True, return_counts=True)
        else:
            kt, inv_t, mt = rt[free_t], np.arange(free_t.size), np.ones(free_t.size, dtype=np.int64)
            kb, inv_b, mb = rb[free_b], np.arange(free_b.size), np.ones(free_b.size, dtype=np.int64)
        red = _Reduced(kt, mt, kb, mb)
        n_edges = float(rt[free_t].sum())
        u0 = np.log(kt) - 0.5 * math.log(n_edges)
        v0 = np.log(kb) - 0.5 * math.log(n_edges)
        u, v, res, it = _solve_reduced(red, cfg, u0, v0)
        log_x[free_t] = u[inv_t]
        log_y[free_b] = v[inv_b]
    elif free_t.size or free_b.size:
        raise DegreeSequenceError("degree sequence inconsistent after peeling")
    return BicmSolution(log_x, log_y, ot, ob, top.copy(), bottom.copy(), float(res), int(it))


def link_probability(sol: BicmSolution, i: int, a: int) -> float:
    """Probability that top node ``i`` links to bottom node ``a``."""
    if not (0 <= i < sol.top_count and 0 <= a < sol.bottom_count):
        raise IndexError(f"pair ({i}, {a}) out of range for {sol.top_count}x{sol.bottom_count} solution")
    return float(sol.probabilities([i], [a])[0, 0])


def expected_degrees(sol: BicmSolution) -> tuple[np.ndarray, np.ndarray]:
    """Ensemble-average degrees on both layers."""
    groups, rep, counts = sol.bottom_groups()
    p = sol.probabilities(None, rep)
    top = p @ counts
    bottom = p.sum(axis=0)[groups]
    return top, bottom


def _log_terms(sol: BicmSolution, rows):
    """``ln p`` and ``ln(1 - p)`` over (rows x bottom groups), forced entries marked."""
    groups, rep, counts = sol.bottom_groups()
    lx = sol.log_x[rows][:, None]
    ly = sol.log_y[rep][None, :]
    p = sol.probabilities(rows, rep)
    free = (sol.top_order[rows][:, None] == FREE) & (sol.bottom_order[rep][None, :] == FREE)
    with np.errstate(invalid="ignore"):
        z = np.where(free, lx + ly, 0.0)
    log_p = np.where(free, -_softplus(-z), np.where(p == 1.0, 0.0, -np.inf))
    log_q = np.where(free, -_softplus(z), np.where(p == 0.0, 0.0, -np.inf))
    return log_p, log_q, groups, counts


def log_likelihood(sol: BicmSolution, g: BipartiteGraph) -> float:
    """Log-probability of observing ``g`` under the ensemble described by ``sol``.

    Entries whose probability is forced contribute zero when the observation
    agrees and raise :class:`LikelihoodInconsistencyError` otherwise.
    """
    if (g.top_count, g.bottom_count) != (sol.top_count, sol.bottom_count):
        raise ValueError("graph and solution dimensions differ")
    rows = np.arange(sol.top_count)
    log_p, log_q, groups, counts = _log_terms(sol, rows)
    # observed links of each top node per bottom degree-group
    a = g.biadjacency.tocoo()
    links = np.zeros(log_p.shape)
    np.add.at(links, (a.row, groups[a.col]), 1.0)
    misses = counts[None, :] - links
    if np.any((links > 0) & np.isneginf(log_p)) or np.any((misses > 0) & np.isneginf(log_q)):
        raise LikelihoodInconsistencyError("observed graph contradicts a forced link probability")
    with np.errstate(invalid="ignore"):
        terms = np.where(links > 0, links * log_p, 0.0) + np.where(misses > 0, misses * log_q, 0.0)
    return float(math.fsum(terms.ravel()))
