"""Quantum realizations of cycle behaviors.

A realization is a prepared pure state together with one projective
binary measurement per label. The outcome-1 projector of measurement i is
stored as an orthonormal frame (dim x k matrix of column vectors), so rank-1
measurements are a single unit vector and relabeled or two-qubit
measurements carry higher-rank frames.

Pair statistics for compatible (commuting) measurements are computed from
products of the commuting projectors, i.e. from the joint coarse-graining of
the simultaneously diagonalizable measurement. No state-update rule enters
anywhere in this module; the textbook sequential-update computation lives in
``oracles`` purely as a cross-check.

``find_quantum_realization`` searches for a realization of a possibilistic
cycle target by penalty minimization over the state and the frames:

    objective =   sum over forbidden tuples of p(s|C)^2
                + sum over contexts of ||[P_i, P_j]||_F^2
                + sum over required tuples of hinge(margin - p(s|C))^2

with random-restart gradient descent (analytic gradients, unit-sphere
renormalization of the state after every accepted step) followed by a
Gauss-Newton polish that drives the zero residuals to machine precision.
Deterministic structured starting points (a planar construction for odd
cycles, a two-qubit product ansatz for even cycles) are tried before random
restarts. The optimizer's objective is never the acceptance signal: every
candidate is re-verified through ``behavior_from_realization`` and
``possibilistic_collapse`` against the target.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .linalg import ALG_TOL, commutator_norm, normalized
from .scenario import (
    Behavior,
    Context,
    OutcomeTuple,
    PossibilisticBehavior,
    Scenario,
    possibilistic_collapse,
    supports_within,
)

# Success thresholds for the realization search.
FORBIDDEN_TOL = 1e-10
COMM_TOL = 1e-8
REQUIRED_MARGIN = 1e-3

MAX_RESTARTS = 50
ITERS_PER_RESTART = 2000


class RealizationError(ValueError):
    """Realization data violates an invariant."""


class NoncommutingError(ValueError):
    """Joint statistics were requested for a non-commuting pair."""


@dataclass(frozen=True)
class QuantumRealization:
    dim: int
    state: np.ndarray                      # (dim,) unit vector
    frames: Mapping[int, np.ndarray]       # label -> (dim, k) orthonormal columns

    def __post_init__(self):
        if self.dim < 2:
            raise RealizationError("dimension must be at least 2")
        s = np.asarray(self.state, dtype=complex)
        if s.shape != (self.dim,):
            raise RealizationError(f"state must have shape ({self.dim},)")
        if abs(np.linalg.norm(s) ** 2 - 1.0) > ALG_TOL:
            raise RealizationError("state is not normalized")
        for i, f in self.frames.items():
            f = np.asarray(f, dtype=complex)
            if f.ndim != 2 or f.shape[0] != self.dim or not 1 <= f.shape[1] <= self.dim:
                raise RealizationError(f"frame {i} has invalid shape {f.shape}")
            gram = f.conj().T @ f
            if np.linalg.norm(gram - np.eye(f.shape[1])) > ALG_TOL:
                raise RealizationError(f"frame {i} is not orthonormal")

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(sorted(self.frames))

    def rank(self, i: int) -> int:
        return int(np.asarray(self.frames[i]).shape[1])

    @property
    def vectors(self) -> dict[int, np.ndarray]:
        """Rank-1 view: one unit vector per measurement. Raises otherwise."""
        if any(self.rank(i) != 1 for i in self.frames):
            raise RealizationError("realization has measurements of rank above 1")
        return {i: np.asarray(self.frames[i], dtype=complex)[:, 0] for i in self.frames}

    def projector(self, i: int) -> np.ndarray:
        f = np.asarray(self.frames[i], dtype=complex)
        return f @ f.conj().T

    def outcome_projector(self, i: int, outcome: int) -> np.ndarray:
        p = self.projector(i)
        return p if outcome == 1 else np.eye(self.dim) - p


@dataclass(frozen=True)
class PairDistribution:
    context: tuple[int, int]
    probabilities: Mapping[tuple[int, int], float]

    def __post_init__(self):
        probs = {}
        total = 0.0
        for t, p in self.probabilities.items():
            if p < -1e-15:
                raise RealizationError(f"negative probability {p} at {t}")
            p = max(p, 0.0)
            probs[t] = p
            total += p
        if abs(total - 1.0) > 1e-12:
            raise RealizationError(f"pair distribution sums to {total}")
        object.__setattr__(self, "probabilities", probs)

    def __getitem__(self, t: tuple[int, int]) -> float:
        return self.probabilities[t]


def kcbs_realization() -> QuantumRealization:
    """The qutrit pentagon realization of the 5-cycle behavior.

    State (1,1,1)/sqrt(3) and five unit vectors with every cyclically
    adjacent pair orthogonal; outcome 1 of measurement i projects onto
    vector i.
    """
    r3, r2 = np.sqrt(3.0), np.sqrt(2.0)
    eta = np.array([1, 1, 1], dtype=complex) / r3
    vecs = {
        1: np.array([1, -1, 1], dtype=complex) / r3,
        2: np.array([1, 1, 0], dtype=complex) / r2,
        3: np.array([0, 0, 1], dtype=complex),
        4: np.array([1, 0, 0], dtype=complex),
        5: np.array([0, 1, 1], dtype=complex) / r2,
    }
    return QuantumRealization(3, eta, {i: v.reshape(3, 1) for i, v in vecs.items()})


def born_pair(r: QuantumRealization, i: int, j: int,
              comm_tol: float = ALG_TOL) -> PairDistribution:
    """Joint outcome distribution for the compatible pair (i, j).

    Probabilities come from products of the commuting outcome projectors
    applied to the prepared state, keyed (a_i, a_j) in argument order.
    """
    c = commutator_norm(r.projector(i), r.projector(j))
    if c > comm_tol:
        raise NoncommutingError(
            f"measurements {i} and {j} do not commute (norm {c:.3e} > {comm_tol:.1e})")
    probs = {}
    for a, b in itertools.product((0, 1), repeat=2):
        v = r.outcome_projector(j, b) @ (r.outcome_projector(i, a) @ r.state)
        probs[(a, b)] = float(np.linalg.norm(v) ** 2)
    return PairDistribution((i, j), probs)


def behavior_from_realization(r: QuantumRealization, s: Scenario,
                              comm_tol: float = ALG_TOL) -> Behavior:
    """Fill every context table of the scenario from the realization."""
    tables = {}
    for c in s.contexts:
        if len(c) != 2:
            raise RealizationError("only two-measurement contexts are supported here")
        tables[c] = dict(born_pair(r, c[0], c[1], comm_tol).probabilities)
    return Behavior(s, tables)


@dataclass(frozen=True)
class CompatibilityReport:
    context_norms: Mapping[tuple[int, int], float]
    noncontext_norms: Mapping[tuple[int, int], float]
    tol: float

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.context_norms.values())


def verify_compatibility(r: QuantumRealization, s: Scenario,
                         tol: float = ALG_TOL) -> CompatibilityReport:
    """Commutator norms for all context pairs, plus the remaining pairs.

    Non-context pairs are reported for information only; for the pentagon
    realization they are expected to be strictly nonzero.
    """
    ctx_pairs = set()
    for c in s.contexts:
        for a, b in itertools.combinations(sorted(c), 2):
            ctx_pairs.add((a, b))
    context_norms = {p: commutator_norm(r.projector(p[0]), r.projector(p[1]))
                     for p in sorted(ctx_pairs)}
    noncontext_norms = {}
    for a, b in itertools.combinations(sorted(s.measurements), 2):
        if (a, b) not in ctx_pairs:
            noncontext_norms[(a, b)] = commutator_norm(r.projector(a), r.projector(b))
    return CompatibilityReport(context_norms, noncontext_norms, tol)


# --- realization search -----------------------------------------------------


@dataclass(frozen=True)
class SearchFailure:
    best_objective: float
    forbidden_max: float
    commutator_max: float
    required_min: float
    iterations_used: int
    attempts: int
    message: str


@dataclass
class _PenaltyProblem:
    """Penalty objective over (state, frames), with analytic gradients.

    Parameters are packed as a flat real vector: the unnormalized state
    followed by one unconstrained dim x k complex matrix per measurement,
    each split into real and imaginary parts. The frame's projector is
    computed exactly as Z (Z^dag Z)^{-1} Z^dag, which makes the probability
    formulas exact at every iterate without an orthonormality constraint.
    """

    n: int
    dim: int
    ranks: Sequence[int]
    forbidden: Sequence[tuple[tuple[int, int], tuple[int, int]]]
    required: Sequence[tuple[tuple[int, int], tuple[int, int]]]
    contexts: Sequence[tuple[int, int]]
    margin: float = REQUIRED_MARGIN

    def num_params(self) -> int:
        return 2 * self.dim + sum(2 * self.dim * k for k in self.ranks)

    def pack(self, state: np.ndarray, zs: Sequence[np.ndarray]) -> np.ndarray:
        parts = [np.concatenate([state.real, state.imag])]
        for z in zs:
            f = np.asarray(z, dtype=complex).ravel()
            parts.append(np.concatenate([f.real, f.imag]))
        return np.concatenate(parts)

    def unpack(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        d, pos = self.dim, 0

        def take(m):
            nonlocal pos
            v = x[pos:pos + m] + 1j * x[pos + m:pos + 2 * m]
            pos += 2 * m
            return v

        s = take(d)
        zs = [take(d * k).reshape(d, k) for k in self.ranks]
        return s, zs

    def geometry(self, x: np.ndarray):
        s, zs = self.unpack(x)
        ns = np.linalg.norm(s)
        if ns < 1e-12:
            raise FloatingPointError("degenerate state")
        psi = s / ns
        projs = []
        for z in zs:
            gram = z.conj().T @ z
            if np.linalg.cond(gram) > 1e12:
                raise FloatingPointError("degenerate frame")
            projs.append(z @ np.linalg.solve(gram, z.conj().T))
        return s, ns, psi, zs, projs

    def _outcome(self, projs, i, a):
        return projs[i - 1] if a == 1 else np.eye(self.dim) - projs[i - 1]

    def components(self, x: np.ndarray) -> dict:
        _, _, psi, _, projs = self.geometry(x)
        forb = [float(np.linalg.norm(self._outcome(projs, j, b)
                                     @ (self._outcome(projs, i, a) @ psi)) ** 2)
                for (i, j), (a, b) in self.forbidden]
        req = [float(np.linalg.norm(self._outcome(projs, j, b)
                                    @ (self._outcome(projs, i, a) @ psi)) ** 2)
               for (i, j), (a, b) in self.required]
        comms = [commutator_norm(projs[i - 1], projs[j - 1]) for i, j in self.contexts]
        return {"forbidden": forb, "required": req, "commutators": comms}

    def objective(self, x: np.ndarray) -> float:
        try:
            comp = self.components(x)
        except FloatingPointError:
            return np.inf
        v = sum(t * t for t in comp["forbidden"])
        v += sum(c * c for c in comp["commutators"])
        v += sum(max(0.0, self.margin - t) ** 2 for t in comp["required"])
        return float(v)

    def objective_and_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        d = self.dim
        try:
            s, ns, psi, zs, projs = self.geometry(x)
        except FloatingPointError:
            return np.inf, np.zeros_like(x)
        rho = np.outer(psi, psi.conj())
        eye = np.eye(d)
        total = 0.0
        g_psi = np.zeros(d, dtype=complex)
        g_proj = [np.zeros((d, d), dtype=complex) for _ in range(self.n)]

        def pair_term(ctx, ab, weight_of):
            nonlocal total, g_psi
            (i, j), (a, b) = ctx, ab
            pa = self._outcome(projs, i, a)
            pb = self._outcome(projs, j, b)
            t = float(np.real(psi.conj() @ (pa @ (pb @ (pa @ psi)))))
            w = weight_of(t)
            if w != 0.0:
                sa = 1.0 if a == 1 else -1.0
                sb = 1.0 if b == 1 else -1.0
                g_psi += w * (pa @ (pb @ (pa @ psi)))
                gi = rho @ pa @ pb + pb @ pa @ rho
                g_proj[i - 1] += w * sa * 0.5 * (gi + gi.conj().T)
                g_proj[j - 1] += w * sb * (pa @ rho @ pa)
            return t

        for ctx, ab in self.forbidden:
            t = pair_term(ctx, ab, lambda t: 2.0 * t)
            total += t * t
        for ctx, ab in self.required:
            t = pair_term(ctx, ab, lambda t: -2.0 * max(0.0, self.margin - t))
            total += max(0.0, self.margin - t) ** 2
        for i, j in self.contexts:
            pi, pj = projs[i - 1], projs[j - 1]
            k = pi @ pj - pj @ pi
            total += float(np.real(np.trace(k.conj().T @ k)))
            gi = k @ pj - pj @ k
            gj = pi @ k - k @ pi
            g_proj[i - 1] += gi + gi.conj().T
            g_proj[j - 1] += gj + gj.conj().T

        # chain rule: projectors -> Z, normalized state -> raw state
        g = np.zeros_like(x)
        inner = float(np.real(psi.conj() @ g_psi))
        gs = (g_psi - inner * psi) / ns
        g[0:d] = 2 * gs.real
        g[d:2 * d] = 2 * gs.imag
        pos = 2 * d
        for idx, z in enumerate(zs):
            k = self.ranks[idx]
            p = projs[idx]
            m = np.linalg.inv(z.conj().T @ z)
            c = (eye - p) @ g_proj[idx] @ z @ m
            g[pos:pos + d * k] = 2 * c.real.ravel()
            g[pos + d * k:pos + 2 * d * k] = 2 * c.imag.ravel()
            pos += 2 * d * k
        return total, g

    def zero_residuals(self, x: np.ndarray) -> np.ndarray:
        """Real residual vector of all exact-zero constraints (no hinges)."""
        _, _, psi, _, projs = self.geometry(x)
        parts = []
        for (i, j), (a, b) in self.forbidden:
            v = self._outcome(projs, j, b) @ (self._outcome(projs, i, a) @ psi)
            parts.append(np.concatenate([v.real, v.imag]))
        for i, j in self.contexts:
            k = projs[i - 1] @ projs[j - 1] - projs[j - 1] @ projs[i - 1]
            parts.append(np.concatenate([k.real.ravel(), k.imag.ravel()]))
        return np.concatenate(parts)


def _descend(prob: _PenaltyProblem, x0: np.ndarray, max_iters: int,
             stop_objective: float = 1e-22) -> tuple[np.ndarray, float, list[float], int]:
    """Backtracking gradient descent; renormalizes the raw state each step.

    Returns (point, objective, log of accepted objective values, iterations).
    The log is non-increasing by construction.
    """
    x = x0.copy()
    val, grad = prob.objective_and_grad(x)
    log = [val]
    if not np.isfinite(val):
        return x, val, log, 0
    step = 1.0
    stale = 0
    ref = val
    it = 0
    while it < max_iters:
        it += 1
        gn2 = float(grad @ grad)
        if val <= stop_objective or gn2 < 1e-32:
            break
        accepted = False
        trial = step
        for _ in range(40):
            xn = x - trial * grad
            vn = prob.objective(xn)
            if vn < val - 1e-4 * trial * gn2:
                accepted = True
                break
            trial *= 0.5
        if not accepted:
            break
        x, val = xn, vn
        d = prob.dim
        sn = np.linalg.norm(x[0:d] + 1j * x[d:2 * d])
        if sn > 0:
            x[0:2 * d] /= sn
        step = min(trial * 2.0, 1e3)
        val, grad = prob.objective_and_grad(x)
        log.append(val)
        if val < 0.9 * ref:
            ref, stale = val, 0
        else:
            stale += 1
            if stale >= 150:
                break
    return x, val, log, it


def _gauss_newton_polish(prob: _PenaltyProblem, x0: np.ndarray,
                         max_iters: int = 40) -> np.ndarray:
    """Drive the zero residuals to machine precision near a converged point."""
    x = x0.copy()
    try:
        r = prob.zero_residuals(x)
    except FloatingPointError:
        return x
    for _ in range(max_iters):
        f = float(r @ r)
        if f < 1e-30:
            break
        jac = np.zeros((len(r), len(x)))
        h = 1e-7
        for k in range(len(x)):
            xp = x.copy(); xp[k] += h
            xm = x.copy(); xm[k] -= h
            try:
                jac[:, k] = (prob.zero_residuals(xp) - prob.zero_residuals(xm)) / (2 * h)
            except FloatingPointError:
                return x
        dx, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        improved = False
        t = 1.0
        for _ in range(30):
            try:
                rn = prob.zero_residuals(x + t * dx)
            except FloatingPointError:
                rn = None
            if rn is not None and float(rn @ rn) < f:
                improved = True
                break
            t *= 0.5
        if not improved:
            break
        x, r = x + t * dx, rn
    return x


# --- structured starting points ---------------------------------------------


def _odd_plane_vectors(n: int) -> tuple[np.ndarray, dict[int, np.ndarray]]:
    """Adjacent-orthogonal unit vectors in R^3 for an odd cycle.

    Vectors 2k and 2k+1 form an orthonormal basis of a plane through the
    state, which pins the alternating joint zeros; vector 1 is normal to its
    two neighbors. A small deterministic parameter grid picks the variant
    with the largest overlap between vector 1 and the state.
    """
    assert n % 2 == 1 and n >= 5
    half = (n - 1) // 2
    psi = np.array([0.0, 0.0, 1.0])
    best = None
    for theta0 in np.linspace(0.3, 1.2, 10):
        for delta in np.linspace(1.0, 2.8, 10):
            vs: dict[int, np.ndarray] = {}
            th = theta0
            for k in range(half):
                phi = k * delta
                w = np.array([np.cos(phi), np.sin(phi), 0.0])
                vs[2 * k + 2] = np.cos(th) * psi + np.sin(th) * w
                vs[2 * k + 3] = -np.sin(th) * psi + np.cos(th) * w
                if k + 1 < half:
                    th = np.arctan2(np.tan(th), np.cos(delta))
            v1 = np.cross(vs[2], vs[n])
            norm = np.linalg.norm(v1)
            if norm < 1e-9:
                continue
            vs[1] = v1 / norm
            margin = abs(vs[1] @ psi) ** 2
            if best is None or margin > best[0]:
                best = (margin, dict(vs))
    assert best is not None
    return psi, best[1]


def _embed(vec: np.ndarray, dim: int) -> np.ndarray:
    out = np.zeros(dim, dtype=complex)
    out[: len(vec)] = vec
    return out


def _complement_frame(vec: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis of the orthocomplement of a unit vector."""
    v = _embed(vec, dim)
    proj = np.eye(dim) - np.outer(v, v.conj())
    u, sv, _ = np.linalg.svd(proj)
    return u[:, : dim - 1]


def _candidate_starts(prob: _PenaltyProblem, n: int, dim: int, seed: int):
    """Deterministic structured candidates, then seeded random restarts.

    Yields (ranks, x0) pairs. Structured candidates of the wrong shape for
    the target simply start at a high objective and lose to better ones.
    """
    structured: list[tuple[tuple[int, ...], np.ndarray]] = []
    if n % 2 == 1 and n >= 5 and dim >= 3:
        psi, vs = _odd_plane_vectors(n)
        state = _embed(psi, dim)
        # rank-1 everywhere: alternating-zero pattern
        ranks1 = tuple([1] * n)
        zs1 = [_embed(vs[i], dim).reshape(dim, 1) for i in range(1, n + 1)]
        structured.append((ranks1, _PenaltyProblem(n, dim, ranks1, prob.forbidden,
                                                   prob.required, prob.contexts).pack(state, zs1)))
        # outcome labels of odd measurements swapped: complement frames
        ranks2 = tuple(dim - 1 if i % 2 == 1 else 1 for i in range(1, n + 1))
        zs2 = [
            _complement_frame(vs[i], dim) if i % 2 == 1 else _embed(vs[i], dim).reshape(dim, 1)
            for i in range(1, n + 1)
        ]
        structured.append((ranks2, _PenaltyProblem(n, dim, ranks2, prob.forbidden,
                                                   prob.required, prob.contexts).pack(state, zs2)))
    if n % 2 == 0 and dim >= 4:
        # two-qubit product ansatz: odd labels act on the first qubit,
        # even labels on the second, embedded in the first four dimensions
        rng = np.random.default_rng([abs(seed), 2])
        e = np.eye(2, dtype=complex)
        for _ in range(6):
            zs = []
            for i in range(1, n + 1):
                q = rng.standard_normal(2) + 1j * rng.standard_normal(2)
                q /= np.linalg.norm(q)
                cols = ([np.kron(q, e[:, 0]), np.kron(q, e[:, 1])] if i % 2 == 1
                        else [np.kron(e[:, 0], q), np.kron(e[:, 1], q)])
                zs.append(np.column_stack([_embed(c, dim) for c in cols]))
            sr = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            state = _embed(sr / np.linalg.norm(sr), dim)
            ranks = tuple([2] * n)
            structured.append((ranks, _PenaltyProblem(n, dim, ranks, prob.forbidden,
                                                      prob.required, prob.contexts).pack(state, zs)))

    # evaluate structured candidates and order by initial objective
    scored = []
    for ranks, x0 in structured:
        p = _PenaltyProblem(prob.n, prob.dim, ranks, prob.forbidden,
                            prob.required, prob.contexts)
        scored.append((p.objective(x0), ranks, x0))
    scored.sort(key=lambda t: t[0])
    for _, ranks, x0 in scored:
        yield ranks, x0

    # random restarts over a small set of rank patterns
    patterns: list[tuple[int, ...]] = [tuple([1] * n)]
    if dim >= 3:
        patterns.append(tuple(dim - 1 if i % 2 == 1 else 1 for i in range(1, n + 1)))
    if dim >= 4:
        patterns.append(tuple([dim // 2] * n))
    for k in itertools.count():
        ranks = patterns[k % len(patterns)]
        rng = np.random.default_rng([abs(seed), 3, k])
        state = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        zs = [rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r))
              for r in ranks]
        p = _PenaltyProblem(prob.n, prob.dim, ranks, prob.forbidden,
                            prob.required, prob.contexts)
        yield ranks, p.pack(state / np.linalg.norm(state), zs)


def _canonical_frame(z: np.ndarray) -> np.ndarray:
    """Orthonormalize and fix column phases so serialization is stable."""
    q, _ = np.linalg.qr(z)
    q = q[:, : z.shape[1]].copy()
    for c in range(q.shape[1]):
        col = q[:, c]
        pivot = np.argmax(np.abs(col) > 1e-8)
        ph = col[pivot] / abs(col[pivot])
        q[:, c] = col * np.conj(ph)
    return q


def find_quantum_realization(
    s: Scenario,
    target: PossibilisticBehavior,
    dim: int,
    seed: int = 0,
    budget: int = MAX_RESTARTS * ITERS_PER_RESTART,
) -> QuantumRealization | SearchFailure:
    """Search for a realization whose support collapse matches the target.

    The forbidden set is the complement of the target supports; the
    required-possible set is the target's annotated required tuple when
    present. Success demands forbidden probabilities <= 1e-10, context
    commutators <= 1e-8 and required probabilities >= 1e-3, and is then
    re-verified: the collapse of the realized behavior must stay inside the
    target supports and contain the required tuple. A commuting-pair
    realization always has extra zeros beyond the target's forbidden list
    (a commuting rank-1 pair is parallel or orthogonal, either of which
    kills one more tuple per context), so containment rather than support
    equality is the faithful acceptance test.

    Budget counts descent iterations across restarts; on exhaustion a
    ``SearchFailure`` with the best objective reached is returned.
    """
    if target.scenario.contexts != s.contexts:
        raise RealizationError("target does not live on the given scenario")
    if dim < 2:
        raise RealizationError("dimension must be at least 2")
    n = s.n
    for c in s.contexts:
        if not target.supports[c]:
            return SearchFailure(np.inf, np.inf, np.inf, 0.0, 0, 0,
                                 f"infeasible target: context {c} forbids every outcome")

    forbidden = []
    for c in s.contexts:
        for t in s.tuples(c):
            if t not in target.supports[c]:
                forbidden.append((c, t))
    required = [target.required] if target.required is not None else []
    base = _PenaltyProblem(n, dim, tuple([1] * n), tuple(forbidden),
                           tuple(required), tuple(s.contexts))

    best = (np.inf, np.inf, np.inf, 0.0)
    used = 0
    attempts = 0
    for ranks, x0 in _candidate_starts(base, n, dim, seed):
        if used >= budget or attempts >= MAX_RESTARTS:
            break
        attempts += 1
        prob = _PenaltyProblem(n, dim, ranks, tuple(forbidden),
                               tuple(required), tuple(s.contexts))
        iters = min(ITERS_PER_RESTART, budget - used)
        x, val, _log, it = _descend(prob, x0, iters)
        used += max(it, 1)
        if np.isfinite(val) and val < 1.0:
            x = _gauss_newton_polish(prob, x)
        try:
            comp = prob.components(x)
        except FloatingPointError:
            continue
        fmax = max(comp["forbidden"], default=0.0)
        cmax = max(comp["commutators"], default=0.0)
        rmin = min(comp["required"], default=1.0)
        obj = prob.objective(x)
        if obj < best[0]:
            best = (obj, fmax, cmax, rmin)
        if fmax > FORBIDDEN_TOL or cmax > COMM_TOL or rmin < REQUIRED_MARGIN:
            continue
        _, _, psi, zs, _ = prob.geometry(x)
        try:
            cand = QuantumRealization(
                dim, normalized(psi),
                {i + 1: _canonical_frame(zs[i]) for i in range(n)})
            collapse = possibilistic_collapse(behavior_from_realization(cand, s))
        except (RealizationError, NoncommutingError):
            continue
        if not supports_within(collapse, target):
            continue
        if target.required is not None and not collapse.possible(*target.required):
            continue
        return cand
    return SearchFailure(best[0], best[1], best[2], best[3], used, attempts,
                         "budget exhausted without a verified realization")


# --- serialization ----------------------------------------------------------


def _c2pair(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def realization_to_doc(r: QuantumRealization) -> dict:
    doc: dict = {"dim": r.dim, "state": [_c2pair(z) for z in r.state]}
    if all(r.rank(i) == 1 for i in r.frames):
        doc["vectors"] = {
            str(i): [_c2pair(z) for z in np.asarray(r.frames[i])[:, 0]]
            for i in sorted(r.frames)
        }
    else:
        doc["frames"] = {
            str(i): [[_c2pair(z) for z in np.asarray(r.frames[i])[:, c]]
                     for c in range(r.rank(i))]
            for i in sorted(r.frames)
        }
    return doc


def realization_from_doc(doc: Mapping) -> QuantumRealization:
    dim = int(doc["dim"])
    state = np.array([complex(a, b) for a, b in doc["state"]])
    frames = {}
    if "vectors" in doc:
        for k, vec in doc["vectors"].items():
            frames[int(k)] = np.array([complex(a, b) for a, b in vec]).reshape(dim, 1)
    else:
        for k, cols in doc["frames"].items():
            frames[int(k)] = np.column_stack(
                [np.array([complex(a, b) for a, b in col]) for col in cols])
    return QuantumRealization(dim, state, frames)
