"""Multi-start maximization of the computation rate over input distributions."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
import logging
import math
from typing import Iterable, Sequence

import numpy as np

from .channel import DEFAULT_EXTENT, DEFAULT_SPACING
from .constellation import (Constellation, InvalidArgument, XorClassIndex,
                            build_xor_classes, get_constellation)
from .info import (DEFAULT_POWER_RULE, InputDistribution, UnreachableRateError,
                   as_probs, bisect_threshold, cutset_bound, cutset_threshold_db,
                   fixed_threshold, mb_best_rate, mb_lambda_search, rate_and_grad_at_snr,
                   rate_at_snr)

log = logging.getLogger(__name__)

SYMMETRIC = "symmetric"
ASYMMETRIC = "asymmetric"


class OptimizationFailed(RuntimeError):
    pass


@dataclass
class Tolerances:
    grad_tol: float = 1e-7
    obj_tol: float = 1e-10
    max_iters: int = 2000

    def __post_init__(self):
        if not (self.grad_tol > 0 and self.obj_tol > 0 and self.max_iters > 0):
            raise InvalidArgument("tolerances must be positive")


@dataclass
class ShapingProblem:
    constellation_id: str
    snr_db: float
    mode: str = SYMMETRIC
    starts: int = 32
    seed: int = 0
    tol: Tolerances = field(default_factory=Tolerances)
    spacing: float = DEFAULT_SPACING
    extent: float = DEFAULT_EXTENT
    power_rule: str = DEFAULT_POWER_RULE
    workers: int = 1

    def __post_init__(self):
        if self.starts < 1:
            raise InvalidArgument("starts must be >= 1")
        if self.mode not in (SYMMETRIC, ASYMMETRIC):
            raise InvalidArgument(f"unknown mode {self.mode!r}")


@dataclass
class StartLog:
    index: int
    init_p: list
    init_q: list
    objective: float
    iterations: int
    converged: bool
    status: str
    grad_norm: float


@dataclass
class ShapingResult:
    best_p: InputDistribution
    best_q: InputDistribution
    mi_bits: float
    starts: list[StartLog]
    provenance: dict

    @property
    def best_start(self) -> int:
        return self.provenance["best_start"]

    def to_json(self) -> dict:
        return {
            "best_p": self.best_p.to_json(),
            "best_q": self.best_q.to_json(),
            "mi_bits": self.mi_bits,
            "starts": [asdict(s) for s in self.starts],
            "provenance": self.provenance,
        }


# ---------------------------------------------------------------------------
# local solver

def softmax(theta: np.ndarray) -> np.ndarray:
    z = np.exp(theta - theta.max())
    return z / z.sum()


def reduced_gradient(p: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Gradient in softmax logits: p * (g - <p, g>).

    Vanishes exactly at KKT points of the simplex-constrained problem.
    """
    return p * (g - p @ g)


def lbfgs_ascent(fg, theta0: np.ndarray, tol: Tolerances, memory: int = 10,
                 patience: int = 5):
    """Maximize ``fg`` (returns value, gradient) with L-BFGS and Armijo backtracking.

    The objective test fires only after ``patience`` consecutive iterations
    with relative change below ``tol.obj_tol``; vanishing probabilities keep
    moving in logit space long after the value has settled.

    Returns (theta, value, grad, iterations, status).
    """
    theta = np.array(theta0, dtype=float)
    f, g = fg(theta)
    if not math.isfinite(f):
        return theta, f, g, 0, "failed"
    S, Y = [], []
    stalled = 0
    for it in range(1, tol.max_iters + 1):
        if np.linalg.norm(g) <= tol.grad_tol:
            return theta, f, g, it - 1, "grad_tol"
        # two-loop recursion on F = -f
        q = -g.copy()
        alphas = []
        for s, y in zip(reversed(S), reversed(Y)):
            a = (s @ q) / (y @ s)
            alphas.append(a)
            q -= a * y
        if S:
            q *= (S[-1] @ Y[-1]) / (Y[-1] @ Y[-1])
        else:
            q /= max(1.0, np.linalg.norm(g))
        for (s, y), a in zip(zip(S, Y), reversed(alphas)):
            q += s * (a - (y @ q) / (y @ s))
        d = -q
        slope = g @ d
        if not slope > 0:
            S.clear()
            Y.clear()
            d = g / max(1.0, np.linalg.norm(g))
            slope = g @ d
        step = 1.0
        for _ in range(50):
            theta_new = theta + step * d
            f_new, g_new = fg(theta_new)
            if math.isfinite(f_new) and f_new >= f + 1e-4 * step * slope:
                break
            step *= 0.5
        else:
            if S:
                S.clear()
                Y.clear()
                continue
            return theta, f, g, it, "line_search"
        s, y = theta_new - theta, -(g_new - g)
        if s @ y > 1e-12 * (np.linalg.norm(s) * np.linalg.norm(y) + 1e-300):
            S.append(s)
            Y.append(y)
            if len(S) > memory:
                S.pop(0)
                Y.pop(0)
        change = abs(f_new - f) / max(1.0, abs(f))
        theta, f, g = theta_new, f_new, g_new
        stalled = stalled + 1 if change <= tol.obj_tol else 0
        if stalled >= patience:
            return theta, f, g, it, "obj_tol"
    return theta, f, g, tol.max_iters, "max_iters"


# ---------------------------------------------------------------------------
# multi-start driver

def _objective(x: XorClassIndex, prob: ShapingProblem):
    M = x.M
    kw = dict(spacing=prob.spacing, extent=prob.extent, power_rule=prob.power_rule)

    if prob.mode == SYMMETRIC:
        def fg(theta):
            p = softmax(theta)
            try:
                r, gp, gq = rate_and_grad_at_snr(p, p, x, prob.snr_db, **kw)
            except (ArithmeticError, FloatingPointError):
                return math.nan, np.zeros_like(theta)
            return r, reduced_gradient(p, gp + gq)
    else:
        def fg(theta):
            p, q = softmax(theta[:M]), softmax(theta[M:])
            try:
                r, gp, gq = rate_and_grad_at_snr(p, q, x, prob.snr_db, **kw)
            except (ArithmeticError, FloatingPointError):
                return math.nan, np.zeros_like(theta)
            return r, np.concatenate([reduced_gradient(p, gp), reduced_gradient(q, gq)])
    return fg


def start_point(seed: int, index: int, M: int, mode: str):
    """Flat-Dirichlet initial distributions for one start (own RNG stream)."""
    rng = np.random.default_rng([seed, index])
    p = rng.dirichlet(np.ones(M))
    q = rng.dirichlet(np.ones(M)) if mode == ASYMMETRIC else p
    return p, q


def _split(theta, M, mode):
    if mode == SYMMETRIC:
        p = softmax(theta)
        return p, p
    return softmax(theta[:M]), softmax(theta[M:])


def _run_start(fg, index, p0, q0, M, mode, tol):
    theta0 = np.log(np.maximum(p0, 1e-300))
    if mode == ASYMMETRIC:
        theta0 = np.concatenate([theta0, np.log(np.maximum(q0, 1e-300))])
    try:
        theta, f, g, iters, status = lbfgs_ascent(fg, theta0, tol)
    except (ArithmeticError, FloatingPointError, ValueError) as exc:
        log.warning("start %d failed: %s", index, exc)
        theta, f, g, iters, status = theta0, math.nan, np.zeros_like(theta0), 0, "failed"
    if not math.isfinite(f):
        status = "failed"
    entry = StartLog(index, [float(v) for v in p0], [float(v) for v in q0],
                     float(f), int(iters), status in ("grad_tol", "obj_tol"), status,
                     float(np.linalg.norm(g)))
    return entry, theta


def optimize(prob: ShapingProblem, x: XorClassIndex | None = None,
             warm_starts: Sequence[tuple] = ()) -> ShapingResult:
    """Best of ``prob.starts`` local maximizations from flat-Dirichlet points.

    ``warm_starts`` are extra (p, q) initial points appended after the random
    starts; they are logged like any other start.
    """
    if x is None:
        x = build_xor_classes(get_constellation(prob.constellation_id))
    M = x.M
    fg = _objective(x, prob)
    inits = [start_point(prob.seed, i, M, prob.mode) for i in range(prob.starts)]
    for p0, q0 in warm_starts:
        p0 = np.clip(as_probs(p0), 1e-12, None)
        q0 = p0 if prob.mode == SYMMETRIC else np.clip(as_probs(q0), 1e-12, None)
        inits.append((p0 / p0.sum(), q0 / q0.sum()))

    jobs = [(fg, i, p0, q0, M, prob.mode, prob.tol) for i, (p0, q0) in enumerate(inits)]
    if prob.workers > 1:
        with ThreadPoolExecutor(prob.workers) as ex:
            outs = list(ex.map(lambda a: _run_start(*a), jobs))
    else:
        outs = [_run_start(*a) for a in jobs]

    logs = [o[0] for o in outs]
    ok = [i for i, e in enumerate(logs) if e.status != "failed"]
    if not ok:
        raise OptimizationFailed("all starts failed")
    best = max(ok, key=lambda i: (logs[i].objective, -i))
    p, q = _split(outs[best][1], M, prob.mode)
    cid = x.constellation.name
    best_p = InputDistribution(p, cid)
    best_q = InputDistribution(q, cid)
    mi = rate_at_snr(best_p, best_q, x, prob.snr_db, spacing=prob.spacing,
                     extent=prob.extent, power_rule=prob.power_rule).mi_bits
    prov = {
        "constellation": cid, "snr_db": prob.snr_db, "mode": prob.mode,
        "starts": prob.starts, "warm_starts": len(warm_starts), "seed": prob.seed,
        "tolerances": asdict(prob.tol), "spacing": prob.spacing, "extent": prob.extent,
        "power_rule": prob.power_rule, "best_start": best,
    }
    return ShapingResult(best_p, best_q, mi, logs, prov)


# ---------------------------------------------------------------------------
# thresholds and sweeps

def _dims(c: Constellation) -> int:
    return c.signal_dimensions


def snr_threshold(c: Constellation, source, target_rate: float, *,
                  x: XorClassIndex | None = None, template: ShapingProblem | None = None,
                  tol: float = 0.01, spacing: float = DEFAULT_SPACING,
                  extent: float = DEFAULT_EXTENT) -> float:
    """Smallest SNR (dB) at which ``source`` reaches ``target_rate``.

    ``source`` is ``"cutset"``, ``"uniform"``, ``"mb"``, ``"optimized"``, an
    InputDistribution / probability vector, or a (p, q) pair.
    """
    if not 0 < target_rate < c.m:
        raise InvalidArgument(f"target rate must lie in (0, {c.m})")
    x = x if x is not None else build_xor_classes(c)
    kw = dict(spacing=spacing, extent=extent)
    if isinstance(source, str):
        if source == "cutset":
            return cutset_threshold_db(target_rate, _dims(c))
        if source == "uniform":
            u = InputDistribution.uniform(c)
            return fixed_threshold(u, u, x, target_rate, tol=tol, **kw)
        if source == "mb":
            return mb_lambda_search(c, x, target_rate, **kw)["threshold_snr_db"]
        if source == "optimized":
            return _optimized_threshold(c, x, target_rate, template, tol)
        raise InvalidArgument(f"unknown distribution source {source!r}")
    if isinstance(source, tuple):
        p, q = source
        rule = template.power_rule if template else DEFAULT_POWER_RULE
        return fixed_threshold(p, q, x, target_rate, tol=tol, power_rule=rule, **kw)
    return fixed_threshold(source, source, x, target_rate, tol=tol, **kw)


def _optimized_threshold(c, x, target_rate, template, tol):
    template = template or ShapingProblem(c.name, 0.0)
    warm: list = []

    def rate(snr):
        prob = ShapingProblem(**{**template.__dict__, "snr_db": snr})
        res = optimize(prob, x, warm_starts=warm[-1:])
        warm.append((res.best_p, res.best_q))
        return res.mi_bits

    return bisect_threshold(rate, target_rate, tol=tol)


FAMILIES = ("optimized", "uniform", "mb", "cutset")


def sweep(c: Constellation, snr_from_db: float, snr_to_db: float, step_db: float,
          families: Iterable[str] = FAMILIES, *, template: ShapingProblem | None = None,
          fixed: InputDistribution | None = None, spacing: float = DEFAULT_SPACING,
          extent: float = DEFAULT_EXTENT) -> list[dict]:
    """Rate per SNR for each requested family; rows (snr_db, family, rate_bits)."""
    if not snr_from_db < snr_to_db or not step_db > 0:
        raise InvalidArgument("need snr_from < snr_to and step > 0")
    families = list(families)
    for f in families:
        if f not in FAMILIES + ("fixed",):
            raise InvalidArgument(f"unknown family {f!r}")
    x = build_xor_classes(c)
    kw = dict(spacing=spacing, extent=extent)
    snrs = np.round(np.arange(snr_from_db, snr_to_db + step_db / 2, step_db), 10)
    template = template or ShapingProblem(c.name, 0.0, **kw)
    u = InputDistribution.uniform(c)
    rows = []
    warm: list = []
    for s in snrs:
        for fam in families:
            if fam == "cutset":
                r = cutset_bound(10 ** (s / 10), _dims(c))
            elif fam == "uniform":
                r = rate_at_snr(u, u, x, s, **kw).mi_bits
            elif fam == "mb":
                r = mb_best_rate(c, x, s, **kw)["rate_bits"]
            elif fam == "fixed":
                if fixed is None:
                    raise InvalidArgument("family 'fixed' needs a distribution")
                r = rate_at_snr(fixed, fixed, x, s, **kw).mi_bits
            else:
                prob = ShapingProblem(**{**template.__dict__, "snr_db": float(s)})
                res = optimize(prob, x, warm_starts=warm[-1:])
                warm.append((res.best_p, res.best_q))
                r = res.mi_bits
            rows.append({"snr_db": float(s), "family": fam, "rate_bits": float(r)})
    return rows


def horizontal_gap(rows: list[dict], family_a: str, family_b: str, rate: float) -> float:
    """SNR(family_a) - SNR(family_b) at ``rate``, by linear interpolation of sweep rows."""
    def snr_at(fam):
        pts = sorted((r["snr_db"], r["rate_bits"]) for r in rows if r["family"] == fam)
        s = np.array([p[0] for p in pts])
        v = np.maximum.accumulate(np.array([p[1] for p in pts]))
        if not v[0] <= rate <= v[-1]:
            raise UnreachableRateError(f"{fam} does not cross {rate} bits in sweep range")
        j = int(np.searchsorted(v, rate))
        if j == 0:
            return float(s[0])
        return float(s[j - 1] + (rate - v[j - 1]) * (s[j] - s[j - 1]) / (v[j] - v[j - 1]))
    return snr_at(family_a) - snr_at(family_b)
