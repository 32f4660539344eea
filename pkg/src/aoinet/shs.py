"""Piecewise-linear age processes driven by a finite Markov chain.

The state is a discrete chain q(t) plus a vector of ages x that grow at unit
rate (where marked) and are linearly reset on transitions: x' = x @ A. Solving
for the stationary distribution and the per-state expected ages yields the
average age at the monitor as the sum of the 0-coordinate expectations.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

# pivot smaller than this times the largest initial entry means singular
PIVOT_RTOL = 1e-13
# solved systems must reproduce their equations to this relative residual
RESIDUAL_RTOL = 1e-10
# expected ages below this are a modeling error, not noise
NEGATIVE_ATOL = 1e-9


class NonErgodicError(RuntimeError):
    """The chain is reducible or its linear systems are singular beyond tolerance."""


class NegativeSolutionError(RuntimeError):
    """The age system produced materially negative expectations."""


class SingularMatrixError(RuntimeError):
    """A pivot fell below the singularity threshold."""


@dataclass(frozen=True)
class ShsTransition:
    """One Markov transition: source state -> target state at `rate`, ages reset by x' = x @ reset."""

    source: int
    target: int
    rate: float
    reset: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "reset", np.asarray(self.reset, dtype=float))
        if not (np.isfinite(self.rate) and self.rate > 0):
            raise ValueError("transition rate must be finite and > 0")
        r = self.reset
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise ValueError("reset matrix must be square")
        if not np.all((r == 0) | (r == 1)):
            raise ValueError("reset matrix entries must be 0 or 1")
        if np.any(r.sum(axis=0) > 1):
            raise ValueError(
                "reset matrix columns must have at most one 1 "
                "(each new coordinate copies at most one old one)"
            )


@dataclass
class ShsModel:
    """A chain over `num_states` states with `age_dim` age coordinates.

    growth[q] is the 0/1 vector of coordinates that grow at unit rate in state q.
    """

    num_states: int
    age_dim: int
    transitions: tuple[ShsTransition, ...]
    growth: np.ndarray

    def __post_init__(self) -> None:
        self.transitions = tuple(self.transitions)
        self.growth = np.asarray(self.growth, dtype=float)
        if self.num_states < 1 or self.age_dim < 1:
            raise ValueError("num_states and age_dim must be >= 1")
        if self.growth.shape != (self.num_states, self.age_dim):
            raise ValueError("growth must have shape (num_states, age_dim)")
        if not np.all((self.growth == 0) | (self.growth == 1)):
            raise ValueError("growth entries must be 0 or 1")
        for t in self.transitions:
            if not (0 <= t.source < self.num_states and 0 <= t.target < self.num_states):
                raise ValueError("transition state index out of range")
            if t.reset.shape != (self.age_dim, self.age_dim):
                raise ValueError("reset matrix shape must match age_dim")

    def exit_rates(self) -> np.ndarray:
        out = np.zeros(self.num_states)
        for t in self.transitions:
            out[t.source] += t.rate
        return out


@dataclass
class ShsSolution:
    """Stationary distribution, per-state expected ages (rows), and the average age."""

    pi: np.ndarray
    v: np.ndarray
    aoi: float


def solve_dense(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a @ x = b by Gaussian elimination with partial pivoting.

    Raises SingularMatrixError when a pivot falls below PIVOT_RTOL times the
    largest entry of the initial matrix.
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or b.shape != (n,):
        raise ValueError("need a square matrix and a matching vector")
    scale = np.abs(a).max()
    if scale == 0:
        raise SingularMatrixError("zero matrix")
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) < PIVOT_RTOL * scale:
            raise SingularMatrixError(f"pivot {a[p, k]:.3e} below tolerance at column {k}")
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
        f = a[k + 1 :, k] / a[k, k]
        a[k + 1 :, k:] -= np.outer(f, a[k, k:])
        b[k + 1 :] -= f * b[k]
    x = np.empty(n)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1 :] @ x[k + 1 :]) / a[k, k]
    return x


def _strongly_connected(model: ShsModel) -> bool:
    if model.num_states == 1:
        return True
    fwd: list[set[int]] = [set() for _ in range(model.num_states)]
    bwd: list[set[int]] = [set() for _ in range(model.num_states)]
    for t in model.transitions:
        fwd[t.source].add(t.target)
        bwd[t.target].add(t.source)

    def reaches_all(adj: list[set[int]]) -> bool:
        seen = {0}
        queue = deque([0])
        while queue:
            q = queue.popleft()
            for r in adj[q]:
                if r not in seen:
                    seen.add(r)
                    queue.append(r)
        return len(seen) == model.num_states

    return reaches_all(fwd) and reaches_all(bwd)


def _balance_matrix(model: ShsModel) -> np.ndarray:
    # row q: (exit rate of q) * pi_q - sum of rate * pi_source over transitions into q
    m = np.zeros((model.num_states, model.num_states))
    np.fill_diagonal(m, model.exit_rates())
    for t in model.transitions:
        m[t.target, t.source] -= t.rate
    return m


def balance_residual(model: ShsModel, pi: np.ndarray) -> float:
    """Worst relative residual of the stationary balance equations.

    Relative to the per-equation flow magnitudes before cancellation, so a
    tiny net imbalance on large opposing flows reads as tiny.
    """
    out_flow = model.exit_rates() * pi
    in_flow = np.zeros(model.num_states)
    for t in model.transitions:
        in_flow[t.target] += t.rate * pi[t.source]
    scale = np.maximum(out_flow + in_flow, 1e-300)
    return float(np.max(np.abs(out_flow - in_flow) / scale))


def age_residual(model: ShsModel, pi: np.ndarray, v: np.ndarray) -> float:
    """Worst relative residual of the expected-age equations for a solution v."""
    lhs = model.exit_rates()[:, None] * v
    rhs = model.growth * pi[:, None]
    scale = np.abs(lhs) + np.abs(rhs)
    for t in model.transitions:
        term = t.rate * (v[t.source] @ t.reset)
        rhs[t.target] += term
        scale[t.target] += np.abs(term)
    scale = np.maximum(scale, 1e-300)
    return float(np.max(np.abs(lhs - rhs) / scale))


def stationary_distribution(model: ShsModel) -> np.ndarray:
    """Stationary distribution of the discrete chain.

    Checks irreducibility by reachability first; one balance equation is
    replaced by normalization, and the full balance residual is verified on
    the solution.
    """
    if not _strongly_connected(model):
        raise NonErgodicError("chain is not irreducible")
    m = _balance_matrix(model)
    rhs = np.zeros(model.num_states)
    m[-1, :] = 1.0
    rhs[-1] = 1.0
    try:
        pi = solve_dense(m, rhs)
    except SingularMatrixError as e:
        raise NonErgodicError(f"stationary system singular: {e}") from None
    if pi.min() < -1e-12:
        raise NonErgodicError(f"stationary distribution has negative mass {pi.min():.3e}")
    pi = np.maximum(pi, 0.0)
    pi /= pi.sum()
    worst = balance_residual(model, pi)
    if worst > RESIDUAL_RTOL:
        raise NonErgodicError(
            f"balance residual {worst:.3e} exceeds {RESIDUAL_RTOL:.0e}"
        )
    return pi


def solve_age(model: ShsModel) -> ShsSolution:
    """Solve for expected age correlations and the average age at the monitor.

    For each state q and coordinate k the unknown v[q, k] satisfies

        exit_rate(q) * v[q] = growth[q] * pi[q] + sum over transitions into q of
                              rate * (v[source] @ reset)

    and the average age is the sum of v[:, 0]. Unknowns are laid out
    state-major, coordinate-minor.
    """
    pi = stationary_distribution(model)
    s, d = model.num_states, model.age_dim
    n = s * d
    m = np.zeros((n, n))
    exit_rates = model.exit_rates()
    for q in range(s):
        for k in range(d):
            m[q * d + k, q * d + k] += exit_rates[q]
    for t in model.transitions:
        rows, cols = np.nonzero(t.reset)
        # coordinate `cols` of the target equation picks up rate * v[source, rows]
        m[t.target * d + cols, t.source * d + rows] -= t.rate
    rhs = (model.growth * pi[:, None]).ravel()
    try:
        flat = solve_dense(m, rhs)
    except SingularMatrixError as e:
        raise NonErgodicError(f"age system singular: {e}") from None
    worst = age_residual(model, pi, flat.reshape(s, d))
    if worst > RESIDUAL_RTOL:
        raise NonErgodicError(
            f"age system residual {worst:.3e} exceeds {RESIDUAL_RTOL:.0e}"
        )
    if flat.min() < -NEGATIVE_ATOL:
        raise NegativeSolutionError(
            f"age expectation {flat.min():.3e} is materially negative"
        )
    flat = np.maximum(flat, 0.0)
    v = flat.reshape(s, d)
    return ShsSolution(pi=pi, v=v, aoi=float(v[:, 0].sum()))
