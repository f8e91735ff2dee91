"""Information quantities of the XOR-computation channel.

All entropies and rates are in bits.  The quadrature rate evaluates

    I(W_C; Y) = H(W_C) + sum_i  int m_i(y) log2(m_i(y) / m(y)) dy,
    m_i(y)   = sum_{(k,l) in class i} p_k q_l N(y; x_ab(k,l), sigma^2),

which stays valid when superposed points collide.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Sequence

import numpy as np

from .channel import (DEFAULT_EXTENT, DEFAULT_SPACING, ChannelSpec, QuadratureGrid,
                      build_grid, db_to_linear, likelihood, normal_pdf)
from .constellation import Constellation, InvalidArgument, XorClassIndex

LOG2E = 1.0 / math.log(2.0)
FLOOR = 1e-300
BLOCK_ELEMS = 2_000_000

POWER_RULES = ("max", "mean", "geomean")
DEFAULT_POWER_RULE = "max"


class UnreachableRateError(RuntimeError):
    pass


@dataclass
class InputDistribution:
    probs: np.ndarray
    constellation_id: str = ""

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).copy()
        if p.ndim != 1 or not np.all(np.isfinite(p)):
            raise InvalidArgument("probabilities must be a finite vector")
        if p.min() < -1e-12:
            raise InvalidArgument("probabilities must be nonnegative")
        s = p.sum()
        if abs(s - 1.0) > 1e-6:
            raise InvalidArgument(f"probabilities sum to {s:.9g}, not 1")
        self.probs = np.clip(p, 0.0, None) / np.clip(p, 0.0, None).sum()

    def __len__(self):
        return len(self.probs)

    @classmethod
    def uniform(cls, c: Constellation) -> "InputDistribution":
        return cls(np.full(c.M, 1.0 / c.M), c.name)

    @classmethod
    def point_mass(cls, c: Constellation, k: int) -> "InputDistribution":
        p = np.zeros(c.M)
        p[k] = 1.0
        return cls(p, c.name)

    def to_json(self) -> dict:
        return {"constellation": self.constellation_id, "probs": [float(v) for v in self.probs]}

    @classmethod
    def from_json(cls, obj: dict) -> "InputDistribution":
        return cls(np.array(obj["probs"], dtype=float), obj.get("constellation", ""))


@dataclass
class MIResult:
    mi_bits: float
    h_wc_bits: float
    class_priors: np.ndarray
    method: str
    mc_stderr: float | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.mi_bits):
            raise ArithmeticError("non-finite mutual information")
        if self.method == "quadrature" and not (
                -1e-9 <= self.mi_bits <= self.h_wc_bits + 1e-6):
            raise ArithmeticError(
                f"I={self.mi_bits} outside [0, H(W_C)={self.h_wc_bits}]")

    def to_json(self) -> dict:
        return {
            "mi_bits": float(self.mi_bits),
            "h_wc_bits": float(self.h_wc_bits),
            "class_priors": [float(v) for v in self.class_priors],
            "method": self.method,
            "mc_stderr": None if self.mc_stderr is None else float(self.mc_stderr),
            "provenance": self.provenance,
        }


def as_probs(p) -> np.ndarray:
    if isinstance(p, InputDistribution):
        return p.probs
    return np.asarray(p, dtype=float)


def _check_pair(p, q, x: XorClassIndex):
    if isinstance(p, InputDistribution) and isinstance(q, InputDistribution):
        if p.constellation_id and q.constellation_id and p.constellation_id != q.constellation_id:
            raise InvalidArgument("p and q refer to different constellations")
    p, q = as_probs(p), as_probs(q)
    if len(p) != x.M or len(q) != x.M:
        raise InvalidArgument(f"distribution length must be {x.M}")
    return p, q


# ---------------------------------------------------------------------------
# computed-message prior and entropy

def class_prior(p, q, x: XorClassIndex) -> np.ndarray:
    p, q = _check_pair(p, q, x)
    return np.bincount(x.cls, weights=x.weights(p, q), minlength=x.M)


def entropy_wc(priors) -> float:
    """Entropy in bits with 0 log 0 = 0 (any probability vector)."""
    v = np.asarray(priors, dtype=float)
    v = v[v > 0]
    return float(-(v * np.log2(v)).sum())


def _pair_tensors(x: XorClassIndex):
    # S[i, j, n] = 1[(j, n) in class i] ; dense M^3, fine up to m = 6
    M = x.M
    S = np.zeros((M, M, M))
    S[x.cls, x.k, x.l] = 1.0
    return S


def entropy_grad(p, x: XorClassIndex) -> np.ndarray:
    """Gradient of H(W_C) with respect to p for the symmetric case q = p.

    With sum(p) = 1 this is -2/ln2 - 2 sum_i p_{k(j,i)} log2 Pr(w_C^i),
    where k(j,i) is the partner of j in class i.
    """
    p = as_probs(p)
    pri = class_prior(p, p, x)
    if np.any(~np.isfinite(p)):
        raise ArithmeticError("non-finite probabilities")
    logpri = np.log2(np.maximum(pri, FLOOR))
    coef = np.where(pri > 0, logpri + LOG2E, 0.0)
    # d pi_i / d p_j = sum_l 1[(j,l) in i] p_l + sum_k 1[(k,j) in i] p_k
    g = -(np.bincount(x.k, weights=p[x.l] * coef[x.cls], minlength=x.M)
          + np.bincount(x.l, weights=p[x.k] * coef[x.cls], minlength=x.M))
    if np.any(np.isnan(g)):
        raise ArithmeticError("NaN in entropy gradient")
    return g


def entropy_hess(p, x: XorClassIndex) -> np.ndarray:
    """Hessian of H(W_C) in p (symmetric case); needs strictly positive class priors."""
    p = as_probs(p)
    pri = class_prior(p, p, x)
    if np.any(pri <= 0):
        raise InvalidArgument("Hessian requires strictly positive class priors")
    S = _pair_tensors(x)
    S = S + S.transpose(0, 2, 1)
    D = S @ p  # D[i, j] = d pi_i / d p_j
    coef = np.log2(pri) + LOG2E
    H = -np.einsum("i,ijn->jn", coef, S) - (D.T / (pri * math.log(2.0))) @ D
    return 0.5 * (H + H.T)


# ---------------------------------------------------------------------------
# quadrature mutual information

def _mixture_quadrature(x: XorClassIndex, w: np.ndarray, sigma2: float,
                        grid: QuadratureGrid, want_grad: bool):
    """Return (integral, dE, dS).

    integral = sum_i int m_i log2(m_i / m);  dE[e] = int phi_e G_{c(e)};
    dS[e] = int d(phi_e)/d(sigma^2) G_{c(e)}, with G_i = log2(m_i / m).
    """
    M = x.M
    sigma = math.sqrt(sigma2)
    re_mask, im_mask = grid.active(x.x_ab, grid.extent * sigma)
    yr, wr = grid.re_nodes[re_mask], grid.re_weights[re_mask]
    yi, wi = grid.im_nodes[im_mask], grid.im_weights[im_mask]
    dr = yr[None, :] - x.x_ab.real[:, None]
    di = yi[None, :] - x.x_ab.imag[:, None]
    Pr = normal_pdf(dr, sigma2)
    Pi = normal_pdf(di, sigma2)
    Prw = Pr * w[:, None]
    Piw = Pi * wi[None, :]
    nr, ni = len(yr), len(yi)
    E = len(w)
    dE = np.zeros(E) if want_grad else None
    dS = np.zeros(E) if want_grad else None
    if want_grad:
        Pr2 = Pr * dr ** 2 / (2 * sigma2 ** 2)
        Pi2w = Piw * di ** 2 / (2 * sigma2 ** 2)
    B = max(1, BLOCK_ELEMS // (M * ni))
    total = 0.0
    mix = np.empty((M, min(B, nr), ni))
    for start in range(0, nr, B):
        b = slice(start, min(start + B, nr))
        nb = b.stop - b.start
        m = mix[:, :nb]
        for i in range(M):
            s = x.members(i)
            np.matmul(Prw[s, b].T, Pi[s], out=m[i])
        tot = m.sum(axis=0)
        G = np.log2(np.maximum(m, FLOOR)) - np.log2(np.maximum(tot, FLOOR))
        integrand = np.where(m > 0, m * G, 0.0).sum(axis=0)
        total += float(wr[b] @ (integrand @ wi))
        if want_grad:
            wrb = wr[b][:, None]
            for i in range(M):
                s = x.members(i)
                T = G[i] @ Piw[s].T           # (nb, M)
                Pr_b = Pr[s, b].T * wrb       # (nb, M)
                dE[s] += (Pr_b * T).sum(axis=0)
                T2 = G[i] @ Pi2w[s].T
                dS[s] += (Pr_b * T2).sum(axis=0) + (Pr2[s, b].T * wrb * T).sum(axis=0)
    if want_grad:
        dS -= dE / sigma2
    return total, dE, dS


def _resolve_grid(x, ch, grid):
    if grid is None:
        return build_grid(x, ch)
    if not grid.covers(x.x_ab, ch) or grid.step > 0.25 * ch.sigma * (1 + 1e-9):
        raise InvalidArgument("quadrature grid does not cover the constellation at this noise level")
    return grid


def mutual_information_grad(p, q, x: XorClassIndex, ch: ChannelSpec,
                            grid: QuadratureGrid | None = None):
    """Rate and its partial derivatives (dI/dp, dI/dq, dI/dsigma^2) at fixed grid."""
    p, q = _check_pair(p, q, x)
    grid = _resolve_grid(x, ch, grid)
    w = x.weights(p, q)
    pri = np.bincount(x.cls, weights=w, minlength=x.M)
    integral, dE, dS = _mixture_quadrature(x, w, ch.sigma2, grid, True)
    rate = entropy_wc(pri) + integral
    dw = dE - (np.log2(np.maximum(pri, FLOOR)) + LOG2E)[x.cls]
    gp = np.bincount(x.k, weights=q[x.l] * dw, minlength=x.M)
    gq = np.bincount(x.l, weights=p[x.k] * dw, minlength=x.M)
    gs = float(w @ dS)
    return rate, gp, gq, gs


def mutual_information(p, q, x: XorClassIndex, ch: ChannelSpec,
                       grid: QuadratureGrid | None = None) -> MIResult:
    p, q = _check_pair(p, q, x)
    grid = _resolve_grid(x, ch, grid)
    w = x.weights(p, q)
    pri = np.bincount(x.cls, weights=w, minlength=x.M)
    integral, _, _ = _mixture_quadrature(x, w, ch.sigma2, grid, False)
    h = entropy_wc(pri)
    return MIResult(h + integral, h, pri, "quadrature",
                    provenance={"sigma2": ch.sigma2, **grid.params()})


# ---------------------------------------------------------------------------
# Monte Carlo estimator

def mutual_information_mc(p, q, x: XorClassIndex, ch: ChannelSpec,
                          n_samples: int = 100_000, seed: int = 0,
                          chunk: int = 20_000) -> MIResult:
    """Sample average of log2[Pr(y|w_C) / Pr(y)] with its standard error.

    Chunk ``c`` draws from ``default_rng([seed, c])`` so the estimate does
    not depend on how chunks are scheduled.
    """
    if n_samples < 1000:
        raise InvalidArgument("n_samples must be at least 1000")
    p, q = _check_pair(p, q, x)
    M = x.M
    w = x.weights(p, q)
    pri = np.bincount(x.cls, weights=w, minlength=M)
    prob = w / w.sum()
    vals = np.empty(n_samples)
    for c, start in enumerate(range(0, n_samples, chunk)):
        n = min(chunk, n_samples - start)
        rng = np.random.default_rng([seed, c])
        e = rng.choice(len(w), size=n, p=prob)
        noise = rng.standard_normal((2, n)) * ch.sigma
        y = x.x_ab[e] + noise[0] + 1j * noise[1]
        dens = likelihood(y[:, None], x.x_ab[None, :], ch) * w[None, :]
        mcls = dens.reshape(n, M, M).sum(axis=2)  # class-major entries
        own = mcls[np.arange(n), x.cls[e]]
        vals[start:start + n] = (np.log2(np.maximum(own, FLOOR) / pri[x.cls[e]])
                                 - np.log2(np.maximum(mcls.sum(axis=1), FLOOR)))
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n_samples))
    return MIResult(est, entropy_wc(pri), pri, "monte-carlo", se,
                    {"sigma2": ch.sigma2, "n_samples": n_samples, "seed": seed})


# ---------------------------------------------------------------------------
# SNR attribution

def average_power(p, c: Constellation) -> float:
    return float(as_probs(p) @ c.energies)


def attributed_power(p, q, c: Constellation, rule: str = DEFAULT_POWER_RULE):
    """Power used for SNR attribution and its derivatives in p and q.

    With q = p every rule returns E_p.
    """
    e = c.energies
    Ep, Eq = float(as_probs(p) @ e), float(as_probs(q) @ e)
    if rule == "max":
        if Ep >= Eq:
            return Ep, e, np.zeros_like(e)
        return Eq, np.zeros_like(e), e
    if rule == "mean":
        return 0.5 * (Ep + Eq), 0.5 * e, 0.5 * e
    if rule == "geomean":
        P = math.sqrt(Ep * Eq)
        return P, e * (P / (2 * Ep)), e * (P / (2 * Eq))
    raise InvalidArgument(f"unknown power rule {rule!r}")


def channel_at_snr(p, q, x: XorClassIndex, snr_db: float,
                   power_rule: str = DEFAULT_POWER_RULE) -> ChannelSpec:
    c = x.constellation
    P, _, _ = attributed_power(p, q, c, power_rule)
    return ChannelSpec.from_snr_db(snr_db, P, c.signal_dimensions)


def rate_at_snr(p, q, x: XorClassIndex, snr_db: float, *,
                spacing: float = DEFAULT_SPACING, extent: float = DEFAULT_EXTENT,
                power_rule: str = DEFAULT_POWER_RULE) -> MIResult:
    """Rate of (p, q) with the noise set so the attributed SNR equals ``snr_db``."""
    ch = channel_at_snr(p, q, x, snr_db, power_rule)
    res = mutual_information(p, q, x, ch, build_grid(x, ch, spacing, extent))
    res.provenance.update(snr_db=float(snr_db), power_rule=power_rule)
    return res


def rate_and_grad_at_snr(p, q, x: XorClassIndex, snr_db: float, *,
                         spacing: float = DEFAULT_SPACING, extent: float = DEFAULT_EXTENT,
                         power_rule: str = DEFAULT_POWER_RULE):
    """Rate at attributed SNR and its total gradient in (p, q).

    The noise variance moves with the input powers, which adds a
    dI/dsigma^2 * dsigma^2/dp term to the fixed-noise partials.
    """
    c = x.constellation
    d = c.signal_dimensions
    s = float(db_to_linear(snr_db))
    P, dPp, dPq = attributed_power(p, q, c, power_rule)
    ch = ChannelSpec(P / (d * s))
    grid = build_grid(x, ch, spacing, extent)
    rate, gp, gq, gs = mutual_information_grad(p, q, x, ch, grid)
    return rate, gp + gs * dPp / (d * s), gq + gs * dPq / (d * s)


# ---------------------------------------------------------------------------
# cut-set bound and Maxwell-Boltzmann family

def cutset_bound(snr_linear, dims: int = 1):
    """Per-transmitter bound (dims/2) log2(1 + snr)."""
    snr = np.asarray(snr_linear, dtype=float)
    if np.any(snr < 0):
        raise InvalidArgument("snr must be nonnegative")
    out = 0.5 * dims * np.log2(1.0 + snr)
    return float(out) if out.ndim == 0 else out


def cutset_threshold_db(rate: float, dims: int = 1) -> float:
    return float(10 * np.log10(2.0 ** (2.0 * rate / dims) - 1.0))


def mb_distribution(c: Constellation, lam: float) -> InputDistribution:
    if lam < 0:
        raise InvalidArgument("lambda must be nonnegative")
    e = c.energies
    logits = -lam * (e - e.min())
    w = np.exp(logits)
    return InputDistribution(w / w.sum(), c.name)


def bisect_threshold(rate_fn, target: float, lo: float = -20.0, hi: float = 60.0,
                     tol: float = 0.01, probes: Sequence[float] = (30.0,)) -> float:
    """Smallest SNR (dB) in [lo, hi] with ``rate_fn(snr) >= target``, to ``tol``.

    ``rate_fn`` must be non-decreasing.  Intermediate ``probes`` are tried as
    upper brackets before ``hi`` to avoid costly high-SNR evaluations.
    """
    upper = None
    for h in [v for v in probes if lo < v < hi] + [hi]:
        if rate_fn(h) >= target:
            upper = h
            break
        lo = h
    if upper is None:
        raise UnreachableRateError(f"rate {target} not reached at {hi} dB")
    if rate_fn(lo) >= target:
        return lo
    while upper - lo > tol:
        mid = 0.5 * (lo + upper)
        if rate_fn(mid) >= target:
            upper = mid
        else:
            lo = mid
    return upper


def noiseless_rate(p, q, x: XorClassIndex) -> float:
    """Limit of the rate as sigma -> 0: H(W_C) - H(W_C | X_A + X_B)."""
    p, q = _check_pair(p, q, x)
    w = x.weights(p, q)
    key = np.rint(x.x_ab.real).astype(np.int64) * 1_000_003 + np.rint(x.x_ab.imag).astype(np.int64)
    _, point = np.unique(key, return_inverse=True)
    joint = np.zeros((point.max() + 1, x.M))
    np.add.at(joint, (point, x.cls), w)
    h_joint = entropy_wc(joint.ravel())
    h_point = entropy_wc(joint.sum(axis=1))
    return entropy_wc(joint.sum(axis=0)) - (h_joint - h_point)


def fixed_threshold(p, q, x: XorClassIndex, target_rate: float, *, tol: float = 0.01,
                    spacing: float = DEFAULT_SPACING, extent: float = DEFAULT_EXTENT,
                    power_rule: str = DEFAULT_POWER_RULE) -> float:
    """SNR threshold of a fixed distribution pair."""
    cap = noiseless_rate(p, q, x)
    if target_rate >= cap:
        raise UnreachableRateError(f"rate {target_rate} exceeds the noiseless rate {cap:.4f}")
    fn = lambda s: rate_at_snr(p, q, x, s, spacing=spacing, extent=extent,
                               power_rule=power_rule).mi_bits
    return bisect_threshold(fn, target_rate, tol=tol)


def _golden(f, a: float, b: float, tol: float):
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def mb_lambda_search(c: Constellation, x: XorClassIndex, target_rate: float, *,
                     spacing: float = DEFAULT_SPACING, extent: float = DEFAULT_EXTENT,
                     bracket: tuple[float, float] = (1e-6, 10.0), scan: int = 17,
                     tol: float = 1e-3) -> dict:
    """Lambda minimizing the SNR threshold of the Maxwell-Boltzmann family.

    A coarse log-spaced scan locates the basin; golden-section search over
    log(lambda) refines it.
    """
    if not 0 < target_rate < c.m:
        raise InvalidArgument("target rate out of range")
    cache: dict[float, float] = {}

    def thr(loglam: float) -> float:
        if loglam not in cache:
            p = mb_distribution(c, math.exp(loglam))
            try:
                cache[loglam] = fixed_threshold(p, p, x, target_rate, tol=tol,
                                                spacing=spacing, extent=extent)
            except UnreachableRateError:
                cache[loglam] = math.inf
        return cache[loglam]

    grid = np.linspace(math.log(bracket[0]), math.log(bracket[1]), scan)
    vals = [thr(v) for v in grid]
    best = int(np.argmin(vals))
    if not math.isfinite(vals[best]):
        raise UnreachableRateError(f"rate {target_rate} not reachable by any MB distribution")
    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, scan - 1)]
    loglam, t = _golden(thr, a, b, 1e-3)
    if vals[best] < t:
        loglam, t = grid[best], vals[best]
    return {"lambda": math.exp(loglam), "threshold_snr_db": t}


def mb_best_rate(c: Constellation, x: XorClassIndex, snr_db: float, *,
                 spacing: float = DEFAULT_SPACING, extent: float = DEFAULT_EXTENT,
                 bracket: tuple[float, float] = (1e-6, 10.0), scan: int = 17) -> dict:
    """Largest rate over the Maxwell-Boltzmann family at a fixed SNR."""
    def neg(loglam):
        p = mb_distribution(c, math.exp(loglam))
        return -rate_at_snr(p, p, x, snr_db, spacing=spacing, extent=extent).mi_bits

    grid = np.linspace(math.log(bracket[0]), math.log(bracket[1]), scan)
    vals = [neg(v) for v in grid]
    best = int(np.argmin(vals))
    loglam, v = _golden(neg, grid[max(best - 1, 0)], grid[min(best + 1, scan - 1)], 1e-3)
    if vals[best] < v:
        loglam, v = grid[best], vals[best]
    return {"lambda": math.exp(loglam), "rate_bits": -v}
