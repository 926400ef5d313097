"""Brute-force verification oracles for the orthogonal-pair extrema.

Two independent routes, neither of which looks at the closed forms:

* `continuous_extremum` runs projected gradient descent (or ascent) from
  many random starts. Orthogonality is built into the parametrization:
  ``u = x1/|x1|`` and ``v`` is ``x2`` projected onto the complement of
  ``u`` and normalized, so every iterate is feasible.
* `grid_extremum` scans moduli profiles ``(p, q) = (|u|^2, |v|^2)`` on a
  lattice, keeping only pairs that orthogonal states can realize. A
  profile pair is realizable iff ``l_i = sqrt(p_i q_i)`` satisfies the
  polygon inequality ``max_i l_i <= sum_{j != i} l_j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np
from scipy import optimize

from .channel import CQChannel, mixed_average, overlap
from .errors import CapacityError, ConfigError, InfeasibleError, OptimizerError
from .linalg import PureState, _frozen

DEGENERATE_TOL = 1e-12
# a strict sufficient-decrease constant stops step doubling from overshooting
# across shallow valleys, which otherwise stalls descent into a zig-zag
ARMIJO = 0.3
MAX_HALVINGS = 60
MAX_STEP = 1e3
MAX_GRID_RESOLUTION = 400

DIRECTIONS = ("minimize", "maximize")


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 50
    max_iters: int = 500
    step_init: float = 1.0
    grad_tol: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ConfigError(f"restarts must be >= 1, got {self.restarts}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.step_init > 0:
            raise ConfigError(f"step_init must be > 0, got {self.step_init}")
        if not self.grad_tol >= 0:
            raise ConfigError(f"grad_tol must be >= 0, got {self.grad_tol}")

    @classmethod
    def from_dict(cls, data: dict) -> "OptimizerConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown optimizer options: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True, eq=False)
class OracleResult:
    value: float
    u: PureState
    v: PureState
    converged: bool
    iterations_used: int
    resamples: int = 0
    restart: int = 0


def _sign(direction: str) -> float:
    if direction not in DIRECTIONS:
        raise ConfigError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    return 1.0 if direction == "minimize" else -1.0


def _rowdot(a, b):
    """Row-wise ``a^H b`` for batches of complex vectors."""
    return np.sum(a.conj() * b, axis=-1)


def _forward(m, x1, x2):
    nx1 = np.linalg.norm(x1, axis=-1)
    u = x1 / nx1[..., None]
    c = _rowdot(u, x2)
    w = x2 - u * c[..., None]
    nw = np.linalg.norm(w, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = w / nw[..., None]
    p = np.abs(u) ** 2
    q = np.abs(v) ** 2
    mq = np.einsum("rn,nm->rm", q, m)
    f = np.sum(p * mq, axis=-1)
    return f, (nx1, u, c, nw, v, p, q, mq)


def _backward(m, x2, cache):
    nx1, u, c, nw, v, p, q, mq = cache
    mp = np.einsum("rn,nm->rm", p, m)
    gu = 2.0 * mq * u
    gv = 2.0 * mp * v
    gw = (gv - v * np.real(_rowdot(v, gv))[..., None]) / nw[..., None]
    ugw = _rowdot(u, gw)
    gx2 = gw - u * ugw[..., None]
    gu = gu - c.conj()[..., None] * gw - ugw.conj()[..., None] * x2
    gx1 = (gu - u * np.real(_rowdot(u, gu))[..., None]) / nx1[..., None]
    return gx1, gx2


def _degenerate(x1, x2, nw):
    nx2 = np.linalg.norm(x2, axis=-1)
    nx1 = np.linalg.norm(x1, axis=-1)
    return (nx1 <= DEGENERATE_TOL) | ~(nw > DEGENERATE_TOL * np.maximum(nx2, 1e-300))


def objective_and_gradient(ch: CQChannel, x1, x2):
    """Overlap at the parametrized pair and its gradient in the free vectors.

    The gradient is returned in the complex convention ``df = Re(G^H dx)``,
    i.e. ``G = df/dRe(x) + i df/dIm(x)``.
    """
    x1 = np.atleast_2d(np.asarray(x1, dtype=complex))
    x2 = np.atleast_2d(np.asarray(x2, dtype=complex))
    f, cache = _forward(ch.gram, x1, x2)
    if _degenerate(x1, x2, cache[3]).any():
        raise OptimizerError("degenerate point: x1 is zero or x2 is parallel to x1")
    g1, g2 = _backward(ch.gram, x2, cache)
    return float(f[0]), g1[0], g2[0]


def _real_params(x1, x2):
    return np.concatenate([x1.real, x1.imag, x2.real, x2.imag])


def _complex_params(theta, n):
    return theta[:n] + 1j * theta[n : 2 * n], theta[2 * n : 3 * n] + 1j * theta[3 * n :]


def gradient_check(ch: CQChannel, point, eps: float = 1e-6) -> float:
    """Max discrepancy between the analytic gradient and central differences.

    ``point`` is the pair of free vectors ``(x1, x2)``.
    """
    if not 1e-7 <= eps <= 1e-4:
        raise ConfigError(f"eps must lie in [1e-7, 1e-4], got {eps}")
    x1 = np.asarray(point[0], dtype=complex)
    x2 = np.asarray(point[1], dtype=complex)
    n = ch.n
    if x1.shape != (n,) or x2.shape != (n,):
        raise ConfigError(f"free vectors must have shape ({n},)")
    _, g1, g2 = objective_and_gradient(ch, x1, x2)
    analytic = _real_params(g1, g2)
    theta = _real_params(x1, x2)
    fd = np.empty_like(theta)
    for idx in range(theta.size):
        tp, tm = theta.copy(), theta.copy()
        tp[idx] += eps
        tm[idx] -= eps
        fp, _ = _forward(ch.gram, *(a[None] for a in _complex_params(tp, n)))
        fm, _ = _forward(ch.gram, *(a[None] for a in _complex_params(tm, n)))
        fd[idx] = (fp[0] - fm[0]) / (2 * eps)
    return float(np.max(np.abs(analytic - fd)))


def _draw(rng, n):
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)


def _initial_points(n, cfg: OptimizerConfig):
    """One independent stream per restart, keyed by ``(seed, restart)``."""
    x1 = np.empty((cfg.restarts, n), dtype=complex)
    x2 = np.empty((cfg.restarts, n), dtype=complex)
    resamples = np.zeros(cfg.restarts, dtype=int)
    for r in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, r])
        x1[r] = _draw(rng, n)
        x2[r] = _draw(rng, n)
        while True:
            _, cache = _forward(np.zeros((n, n)), x1[r : r + 1], x2[r : r + 1])
            if not _degenerate(x1[r : r + 1], x2[r : r + 1], cache[3])[0]:
                break
            resamples[r] += 1
            if resamples[r] > 100:
                raise OptimizerError("could not draw a non-degenerate starting pair")
            x2[r] = _draw(rng, n)
    return x1, x2, resamples


def _descend(m, sign, x1, x2, cfg: OptimizerConfig):
    """Batched backtracking gradient descent on ``sign * f``.

    Every row is an independent restart with its own step size, so the
    trajectory of a row does not depend on which other rows are present.
    """
    rows = x1.shape[0]
    step = np.full(rows, float(cfg.step_init))
    done = np.zeros(rows, dtype=bool)
    converged = np.zeros(rows, dtype=bool)
    iters = np.zeros(rows, dtype=int)

    f, cache = _forward(m, x1, x2)
    # retract onto the unit-norm orthogonal representatives
    x1, x2 = cache[1], cache[4]
    for _ in range(cfg.max_iters):
        f, cache = _forward(m, x1, x2)
        if not np.all(np.isfinite(f)):
            raise OptimizerError("non-finite objective value")
        g1, g2 = _backward(m, x2, cache)
        gsq = np.sum(np.abs(g1) ** 2 + np.abs(g2) ** 2, axis=-1)
        newly = ~done & (np.sqrt(gsq) <= cfg.grad_tol)
        converged |= newly
        done |= newly
        active = ~done
        if not active.any():
            break
        d1, d2 = -sign * g1, -sign * g2
        h = sign * f
        trial = step.copy()
        pending = active.copy()
        nx1, nx2 = x1.copy(), x2.copy()
        for _h in range(MAX_HALVINGS):
            idx = np.flatnonzero(pending)
            if idx.size == 0:
                break
            t = trial[idx, None]
            c1 = x1[idx] + t * d1[idx]
            c2 = x2[idx] + t * d2[idx]
            fc, cc = _forward(m, c1, c2)
            ok = ~_degenerate(c1, c2, cc[3]) & (
                sign * fc <= h[idx] - ARMIJO * trial[idx] * gsq[idx]
            )
            acc = idx[ok]
            nx1[acc], nx2[acc] = cc[1][ok], cc[4][ok]
            pending[acc] = False
            trial[idx[~ok]] *= 0.5
        # rows where no step was accepted are stalled at working precision
        stalled = pending
        done |= stalled
        moved = active & ~stalled
        iters[moved] += 1
        x1, x2 = nx1, nx2
        step[moved] = np.minimum(2.0 * trial[moved], MAX_STEP)
    f, cache = _forward(m, x1, x2)
    return f, cache[1], cache[4], converged, iters


def _finish(ch, u, v, **kw) -> OracleResult:
    u = u / np.linalg.norm(u)
    v = v - u * np.vdot(u, v)
    v = v / np.linalg.norm(v)
    us, vs = PureState(_frozen(u)), PureState(_frozen(v))
    return OracleResult(value=overlap(ch, us, vs), u=us, v=vs, **kw)


def continuous_extremum(ch: CQChannel, direction: str = "minimize", cfg: OptimizerConfig | None = None) -> OracleResult:
    """Best local optimum of the output overlap over orthogonal pairs.

    Runs ``cfg.restarts`` independent descents and returns the best one.
    ``converged`` reports whether that restart reached ``grad_tol``.
    """
    sign = _sign(direction)
    cfg = cfg or OptimizerConfig()
    x1, x2, resamples = _initial_points(ch.n, cfg)
    f, u, v, conv, iters = _descend(ch.gram, sign, x1, x2, cfg)
    best = int(np.argmin(sign * f))
    return _finish(
        ch,
        u[best],
        v[best],
        converged=bool(conv[best]),
        iterations_used=int(iters[best]),
        resamples=int(resamples.sum()),
        restart=best,
    )


def moduli_feasible(p, q, tol: float = 1e-12) -> bool:
    """Whether orthogonal states with ``|u|^2 = p`` and ``|v|^2 = q`` exist."""
    lengths = np.sqrt(np.clip(p, 0, None) * np.clip(q, 0, None))
    return bool(2.0 * lengths.max() <= lengths.sum() + tol)


def closing_phases(lengths) -> np.ndarray:
    """Phases ``phi`` with ``sum_i l_i exp(i phi_i) = 0``.

    Requires the polygon inequality ``max l <= sum l - max l``. The lengths
    are packed greedily into three groups whose sums form a triangle.
    """
    lengths = np.asarray(lengths, dtype=float)
    total = lengths.sum()
    top = lengths.max(initial=0.0)
    if 2 * top > total * (1 + 1e-9) + 1e-12:
        raise InfeasibleError("lengths violate the polygon inequality")
    phases = np.zeros(lengths.size)
    if total == 0:
        return phases
    order = np.argsort(-lengths, kind="stable")
    group = np.zeros(lengths.size, dtype=int)
    sums = [lengths[order[0]], 0.0, 0.0]
    for i in order[1:]:
        g = 1 if sums[1] <= sums[2] else 2
        group[i] = g
        sums[g] += lengths[i]
    g1, g2, g3 = sums
    # triangle 0 -> g1 -> P -> 0 with |P - g1| = g2 and |P| = g3
    x = (g1 * g1 + g3 * g3 - g2 * g2) / (2 * g1)
    y = math.sqrt(max(0.0, g3 * g3 - x * x))
    corner = complex(x, y)
    angles = [0.0, np.angle(corner - g1) if g2 > 0 else 0.0, np.angle(-corner) if g3 > 0 else 0.0]
    for i in range(lengths.size):
        phases[i] = angles[group[i]]
    return phases


def orthogonal_pair_from_moduli(p, q) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal unit vectors realizing the moduli profiles ``p`` and ``q``."""
    a = np.sqrt(np.clip(np.asarray(p, dtype=float), 0, None))
    b = np.sqrt(np.clip(np.asarray(q, dtype=float), 0, None))
    phi = closing_phases(a * b)
    return a.astype(complex), b * np.exp(1j * phi)


def _simplex_lattice(n, res):
    if n == 2:
        t = np.arange(res + 1) / res
        return np.stack([t, 1 - t], axis=1)
    i, j = np.meshgrid(np.arange(res + 1), np.arange(res + 1), indexing="ij")
    keep = i + j <= res
    i, j = i[keep], j[keep]
    return np.stack([i, j, res - i - j], axis=1) / res


def grid_extremum(ch: CQChannel, direction: str = "minimize", resolution: int = 100) -> OracleResult:
    """Exhaustive lattice scan of realizable moduli pairs for ``n`` in {2, 3}.

    For ``n = 2`` orthogonality forces ``q`` to be ``p`` reversed, so the
    scan is one-dimensional. For ``n = 3`` both profiles range over the
    simplex lattice with spacing ``1/resolution``.
    """
    sign = _sign(direction)
    if ch.n not in (2, 3):
        raise CapacityError(f"grid oracle supports n in {{2, 3}}, got n={ch.n}")
    if not 1 <= resolution <= MAX_GRID_RESOLUTION:
        raise CapacityError(f"resolution must be in [1, {MAX_GRID_RESOLUTION}], got {resolution}")
    m = ch.gram
    pts = _simplex_lattice(ch.n, resolution)
    if ch.n == 2:
        p, q = pts, pts[:, ::-1]
        vals = np.einsum("rn,nm,rm->r", p, m, q)
        best = int(np.argmin(sign * vals))
        bp, bq = p[best], q[best]
    else:
        roots = np.sqrt(pts)
        mq = pts @ m
        best_val, bp, bq = np.inf, None, None
        chunk = max(1, 2_000_000 // len(pts))
        for lo in range(0, len(pts), chunk):
            P = pts[lo : lo + chunk]
            vals = P @ mq.T
            lens = roots[lo : lo + chunk, None, :] * roots[None, :, :]
            feas = 2.0 * lens.max(axis=-1) <= lens.sum(axis=-1) + 1e-12
            scored = np.where(feas, sign * vals, np.inf)
            k = int(np.argmin(scored))
            if scored.flat[k] < best_val:
                best_val = scored.flat[k]
                r, c = divmod(k, len(pts))
                bp, bq = P[r], pts[c]
    u, v = orthogonal_pair_from_moduli(bp, bq)
    return _finish(ch, u, v, converged=True, iterations_used=0)


def _tuple_from_params(theta, n, k):
    z = theta[: n * k].reshape(n, k) + 1j * theta[n * k :].reshape(n, k)
    q, _ = np.linalg.qr(z)
    return [q[:, r] for r in range(k)]


def polish_tuple(ch: CQChannel, states, direction: str = "minimize", max_iters: int = 200):
    """Local search over orthonormal k-tuples for the average pairwise overlap.

    Starts from ``states``, parametrizes the tuple by a free ``n x k``
    matrix orthonormalized with QR, and runs L-BFGS with finite-difference
    gradients. Meant for a handful of suspicious instances, not bulk use.
    """
    sign = _sign(direction)
    n, k = ch.n, len(states)
    z = np.stack([np.asarray(s, dtype=complex) for s in states], axis=1)
    theta0 = np.concatenate([z.real.ravel(), z.imag.ravel()])

    def fun(theta):
        return sign * mixed_average(ch, _tuple_from_params(theta, n, k))

    res = optimize.minimize(fun, theta0, method="L-BFGS-B", options={"maxiter": max_iters})
    best = res.x if res.fun <= fun(theta0) else theta0
    out = [PureState(_frozen(s)) for s in _tuple_from_params(best, n, k)]
    return out, mixed_average(ch, out)
