"""Edge-length laws, vertex-weight laws and the explosion criterion."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .stats import hill_top_fraction


class DomainError(ValueError):
    pass


# ---------------------------------------------------------------------------
# edge-length laws


class EdgeLengthDistribution:
    """Base class. Subclasses provide ``cdf``, ``_q`` (vectorized quantile on
    [0,1]), ``lower``/``upper`` support endpoints and ``spec``."""

    kind = "abstract"

    def cdf(self, t):
        raise NotImplementedError

    def _q(self, q: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def lower(self) -> float:
        return float(self._q(np.array([0.0]))[0])

    @property
    def upper(self) -> float:
        return float(self._q(np.array([1.0]))[0])

    def quantile_closed(self, q):
        """Generalized inverse on the closed interval: q=1 gives the essential
        supremum (possibly inf), q=0 the essential infimum."""
        arr = np.asarray(q, dtype=float)
        out = self._q(np.clip(arr, 0.0, 1.0))
        return out if arr.ndim else float(out)

    def sample(self, rng: np.random.Generator, size=None):
        u = rng.random(size)
        return self.quantile_closed(u)

    def from_uniform(self, u):
        """Inverse-transform of uniforms in (0,1)."""
        return self.quantile_closed(u)

    @property
    def atom_at_zero(self) -> float:
        return float(self.cdf(0.0))

    def __eq__(self, other):
        return isinstance(other, EdgeLengthDistribution) and self.spec == other.spec

    def __hash__(self):
        return hash(self.spec)

    def __repr__(self):
        return f"{type(self).__name__}({self.spec!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Deterministic(EdgeLengthDistribution):
    v: float
    kind = "deterministic"

    def __post_init__(self):
        if self.v < 0:
            raise DomainError("lengths must be nonnegative")

    def cdf(self, t):
        return np.where(np.asarray(t) >= self.v, 1.0, 0.0) if np.ndim(t) else float(t >= self.v)

    def _q(self, q):
        return np.full(np.shape(q), float(self.v))

    @property
    def spec(self):
        return f"det:{self.v!r}"


@dataclass(frozen=True, eq=False, repr=False)
class Exponential(EdgeLengthDistribution):
    rate: float
    kind = "exponential"

    def __post_init__(self):
        if self.rate <= 0:
            raise DomainError("rate must be positive")

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t < 0, 0.0, -np.expm1(-self.rate * np.maximum(t, 0.0)))
        return out if out.ndim else float(out)

    def _q(self, q):
        with np.errstate(divide="ignore"):
            return -np.log1p(-q) / self.rate

    @property
    def spec(self):
        return f"exp:{self.rate!r}"


@dataclass(frozen=True, eq=False, repr=False)
class Uniform(EdgeLengthDistribution):
    a: float
    b: float
    kind = "uniform"

    def __post_init__(self):
        if not 0 <= self.a <= self.b:
            raise DomainError("uniform needs 0 <= a <= b")

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.b == self.a:
            out = np.where(t >= self.a, 1.0, 0.0)
        else:
            out = np.clip((t - self.a) / (self.b - self.a), 0.0, 1.0)
        return out if out.ndim else float(out)

    def _q(self, q):
        return self.a + np.asarray(q) * (self.b - self.a)

    @property
    def spec(self):
        return f"unif:{self.a!r}:{self.b!r}"


@dataclass(frozen=True, eq=False, repr=False)
class Shifted(EdgeLengthDistribution):
    base: EdgeLengthDistribution
    offset: float
    kind = "shifted"

    def __post_init__(self):
        if self.offset < 0:
            raise DomainError("offset must be nonnegative")

    def cdf(self, t):
        return self.base.cdf(np.asarray(t, dtype=float) - self.offset) if np.ndim(t) else float(
            self.base.cdf(float(t) - self.offset))

    def _q(self, q):
        return self.offset + self.base._q(q)

    @property
    def spec(self):
        return f"shift:{self.offset!r}:{self.base.spec}"


@dataclass(frozen=True, eq=False, repr=False)
class QuantileTable(EdgeLengthDistribution):
    """Empirical law given by points (q_i, v_i); F^{-1}(q) = v_i for the first q_i >= q."""

    qs: tuple
    vs: tuple
    source: str = field(default="", compare=False)
    kind = "empirical-quantile-table"

    def __post_init__(self):
        qs = np.asarray(self.qs, dtype=float)
        vs = np.asarray(self.vs, dtype=float)
        if qs.size == 0 or qs.shape != vs.shape:
            raise DomainError("quantile table needs matching nonempty columns")
        if np.any(np.diff(qs) <= 0) or qs[0] <= 0 or qs[-1] != 1.0:
            raise DomainError("table q must be strictly increasing in (0,1] and end at 1")
        if np.any(np.diff(vs) < 0) or vs[0] < 0:
            raise DomainError("table values must be nonnegative and nondecreasing")

    def cdf(self, t):
        qs = np.asarray(self.qs)
        idx = np.searchsorted(np.asarray(self.vs), np.asarray(t, dtype=float), side="right") - 1
        out = np.where(idx >= 0, qs[np.maximum(idx, 0)], 0.0)
        return out if out.ndim else float(out)

    def _q(self, q):
        idx = np.searchsorted(np.asarray(self.qs), q, side="left")
        return np.asarray(self.vs)[np.minimum(idx, len(self.vs) - 1)]

    @property
    def spec(self):
        if self.source:
            return f"table:{self.source}"
        return "table:inline:" + ",".join(f"{q!r}/{v!r}" for q, v in zip(self.qs, self.vs))


def load_quantile_table(path: str | Path) -> QuantileTable:
    qs, vs = [], []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        q, v = line.split()
        qs.append(float(q))
        vs.append(float(v))
    return QuantileTable(tuple(qs), tuple(vs), source=str(path))


def parse_distribution(text: str) -> EdgeLengthDistribution:
    """Parse ``det:v``, ``exp:rate``, ``unif:a:b``, ``shift:offset:<inner>``, ``table:<path>``."""
    head, _, rest = text.strip().partition(":")
    try:
        if head == "det":
            return Deterministic(float(rest))
        if head == "exp":
            return Exponential(float(rest))
        if head == "unif":
            a, b = rest.split(":")
            return Uniform(float(a), float(b))
        if head == "shift":
            off, _, inner = rest.partition(":")
            return Shifted(parse_distribution(inner), float(off))
        if head == "table":
            if rest.startswith("inline:"):
                pairs = [p.split("/") for p in rest[len("inline:"):].split(",")]
                return QuantileTable(tuple(float(q) for q, _ in pairs), tuple(float(v) for _, v in pairs))
            return load_quantile_table(rest)
    except (ValueError, TypeError) as exc:
        raise DomainError(f"bad distribution spec {text!r}: {exc}") from exc
    raise DomainError(f"unknown distribution kind in {text!r}")


def quantile(dist: EdgeLengthDistribution, q: float) -> float:
    """F^{-1}(q) = inf{t : F(t) >= q} for q in (0,1)."""
    if not 0.0 < q < 1.0:
        raise DomainError("quantile needs q in (0,1)")
    return float(dist.quantile_closed(q))


# ---------------------------------------------------------------------------
# explosion criterion

TAIL_TOL = 1e-12
CONSERVATIVE_FLOOR = 1e-3
DECAY_RATIO = 0.5


def doubly_exp_term(dist: EdgeLengthDistribution, y: float) -> float:
    """F^{-1}(exp(-e^y)); an underflowed argument gives the right limit F^{-1}(0+)."""
    q = math.exp(-math.exp(y)) if y < 709 else 0.0
    return float(dist.quantile_closed(q))


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-9, max_depth: int = 60) -> float:
    def simpson(fa, fm, fb, lo, hi):
        return (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)

    def rec(lo, hi, fa, fm, fb, whole, eps, depth):
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, lo, mid)
        right = simpson(fm, frm, fb, mid, hi)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return rec(lo, mid, fa, flm, fm, left, eps / 2, depth - 1) + rec(
            mid, hi, fm, frm, fb, right, eps / 2, depth - 1)

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    if not all(map(math.isfinite, (fa, fb, fm))):
        return math.inf
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)


def explosion_integral(dist: EdgeLengthDistribution, y_max: float = 40.0, tol: float = 1e-9) -> float:
    """I(L) = int_1^{y_max} F^{-1}(exp(-e^y)) dy."""
    return adaptive_simpson(lambda y: doubly_exp_term(dist, y), 1.0, y_max, tol)


@dataclass(frozen=True)
class CriterionReport:
    partial_sum: float
    terms_used: int
    tail_bound_estimate: float
    verdict: str
    terms: tuple = ()
    integral: float = math.nan
    flags: tuple = ()


def explosion_sum(dist: EdgeLengthDistribution, k_max: int = 10, tau: float | None = None) -> CriterionReport:
    """Partial sum of F^{-1}(e^{-e^k}) for k = 1..k_max with a verdict.

    explosive: last term < 1e-12 and the last five terms shrink by at least a
    factor 2 per step (or vanish); conservative: every term >= 1e-3;
    otherwise inconclusive.
    """
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    terms = [doubly_exp_term(dist, k) for k in range(1, k_max + 1)]
    tail = terms[-5:]
    ratios = [b / a if a > 0 else (0.0 if b == 0 else math.inf) for a, b in zip(tail, tail[1:])]
    rho = max(ratios) if ratios else (0.0 if terms[-1] == 0 else math.inf)
    geometric = rho <= DECAY_RATIO
    if geometric:
        tail_est = terms[-1] * rho / (1.0 - rho)
    else:
        tail_est = math.inf
    if terms[-1] < TAIL_TOL and geometric and tail_est < TAIL_TOL:
        verdict = "explosive"
    elif min(terms) >= CONSERVATIVE_FLOOR:
        verdict = "conservative"
    else:
        verdict = "inconclusive"
    flags = []
    if tau is not None and not 2 < tau < 3:
        flags.append("criterion applies only for tau in (2,3)")
    if dist.atom_at_zero > 0:
        flags.append("P(L=0)>0: trivially explosive")
    return CriterionReport(
        partial_sum=float(sum(terms)),
        terms_used=k_max,
        tail_bound_estimate=tail_est,
        verdict=verdict,
        terms=tuple(terms),
        integral=explosion_integral(dist),
        flags=tuple(flags),
    )


# ---------------------------------------------------------------------------
# vertex weights


@dataclass(frozen=True)
class HrgInduced:
    alpha_H: float
    C_H: float
    n: int

    @property
    def R(self) -> float:
        return 2.0 * math.log(self.n) + self.C_H


@dataclass(frozen=True)
class VertexWeightModel:
    tau: float
    slowly_varying: str | HrgInduced = "constant"

    def __post_init__(self):
        if self.tau <= 1:
            raise DomainError("tau must exceed 1")
        if isinstance(self.slowly_varying, HrgInduced):
            if not math.isclose(self.tau, 2 * self.slowly_varying.alpha_H + 1):
                raise DomainError("hrg-induced weights need tau = 2 alpha_H + 1")
        elif self.slowly_varying != "constant":
            raise DomainError("slowly_varying must be 'constant' or HrgInduced")

    @classmethod
    def hrg(cls, alpha_H: float, C_H: float, n: int) -> "VertexWeightModel":
        return cls(2 * alpha_H + 1, HrgInduced(alpha_H, C_H, n))

    def from_uniform(self, u):
        """Weight as a function of a uniform in (0,1]; monotone decreasing in u."""
        u = np.asarray(u, dtype=float)
        if isinstance(self.slowly_varying, HrgInduced):
            h = self.slowly_varying
            r = hrg_radius_from_uniform(1.0 - u, h.alpha_H, h.R)
            out = np.exp((h.R - r) / 2.0)
        else:
            out = u ** (-1.0 / (self.tau - 1.0))
        out = np.maximum(out, 1.0)
        return out if out.ndim else float(out)

    def survival(self, x):
        """P(W > x)."""
        x = np.asarray(x, dtype=float)
        if isinstance(self.slowly_varying, HrgInduced):
            h = self.slowly_varying
            rr = np.clip(h.R - 2.0 * np.log(np.maximum(x, 1.0)), 0.0, h.R)
            out = (np.cosh(h.alpha_H * rr) - 1.0) / (np.cosh(h.alpha_H * h.R) - 1.0)
        else:
            out = np.maximum(x, 1.0) ** (-(self.tau - 1.0))
        return out


def hrg_radius_from_uniform(u, alpha_H: float, R: float):
    """Inverse of F(r) = (cosh(a r) - 1)/(cosh(a R) - 1)."""
    return np.arccosh(1.0 + np.asarray(u) * (math.cosh(alpha_H * R) - 1.0)) / alpha_H


def sample_weight(model: VertexWeightModel, rng: np.random.Generator) -> float:
    return float(model.from_uniform(1.0 - rng.random()))


def sample_weights(model: VertexWeightModel, rng: np.random.Generator, size: int) -> np.ndarray:
    return np.asarray(model.from_uniform(1.0 - rng.random(size)), dtype=float)


def validate_weight_tail(samples, tau: float, frac: float = 0.01, tol: float = 0.1) -> tuple[bool, float]:
    """Hill check of P(W > x) ~ x^{-(tau-1)} over the top ``frac`` of samples."""
    est = hill_top_fraction(samples, frac)
    return abs(est - (tau - 1.0)) <= tol, est
