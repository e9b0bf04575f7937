"""Growth bookkeeping for the tower of surfaces S_2, S_3, ...

S_2 is the catenoid with growths (-1, 1).  Gluing with m circle nodes at the
top end replaces c_n by the pair -c_n/(m-1), m c_n/(m-1).  Everything is kept
in exact rational arithmetic; the values are the t -> 0 limits, which the
actual surfaces attain only approximately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import EmbeddednessConditionError, ScheduleError

SQRT_CONSTANT = 1.6


@dataclass(frozen=True)
class GrowthState:
    growths: tuple  # Fractions, increasing, only the last one positive
    history: tuple = ()  # (m, curvature lower bound) per step

    def __post_init__(self):
        g = tuple(Fraction(x) for x in self.growths)
        object.__setattr__(self, "growths", g)
        if len(g) < 2:
            raise ValueError("need at least two ends")
        if any(a >= b for a, b in zip(g[:-1], g[1:])):
            raise ValueError("growths must be strictly increasing")
        if not (g[-2] < 0 < g[-1]):
            raise ValueError("exactly one growth must be positive")

    @property
    def n(self) -> int:
        return len(self.growths)

    @classmethod
    def catenoid(cls) -> "GrowthState":
        return cls((Fraction(-1), Fraction(1)))

    def as_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.growths])


def minimal_admissible_m(state: GrowthState) -> int:
    ratio = state.growths[-1] / abs(state.growths[-2])
    return math.floor(ratio) + 2


def step(state: GrowthState, m: int) -> GrowthState:
    g = state.growths
    cn, cn1 = g[-1], g[-2]
    if not m - 1 > cn / abs(cn1):
        mm = minimal_admissible_m(state)
        raise EmbeddednessConditionError(
            f"m = {m} violates m - 1 > c_n/|c_(n-1)| = {float(cn / abs(cn1))}; need m >= {mm}", mm
        )
    new = g[:-1] + (-cn / (m - 1), m * cn / (m - 1))
    bound = Fraction((m - 1) ** 2) / (2 * cn * cn)
    return GrowthState(new, state.history + ((m, bound),))


@dataclass(frozen=True)
class Schedule:
    """The sequence m_2, m_3, ..., m_N."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))

    def m(self, n: int) -> int:
        return self.values[n - 2]

    @property
    def last_index(self) -> int:
        return len(self.values) + 1

    @classmethod
    def minimal(cls, N: int) -> "Schedule":
        return cls(tuple(2 * n - 1 for n in range(2, N + 1)))

    @classmethod
    def geometric(cls, base: int, N: int) -> "Schedule":
        return cls(tuple(base**n for n in range(2, N + 1)))

    @classmethod
    def parse(cls, text: str, N: int) -> "Schedule":
        """'minimal', 'geometric:b' or a comma-separated list."""
        text = text.strip()
        if text == "minimal":
            return cls.minimal(N)
        if text.startswith("geometric:"):
            return cls.geometric(int(text.split(":", 1)[1]), N)
        return cls(tuple(int(x) for x in text.split(",") if x.strip()))


@dataclass
class ScheduleReport:
    valid: bool
    index: int | None = None
    reason: str = ""
    states: list = field(default_factory=list)
    meets_lower_bound: bool = True  # m_n >= 2n - 1


def validate_schedule(s: Schedule) -> ScheduleReport:
    vals = s.values
    if not vals:
        return ScheduleReport(True)
    if vals[0] < 3:
        return ScheduleReport(False, 2, f"m_2 = {vals[0]} must be at least 3")
    for k in range(1, len(vals)):
        if vals[k] < vals[k - 1] + 2:
            n = k + 2
            return ScheduleReport(False, n, f"m_{n} = {vals[k]} must be at least m_{n - 1} + 2 = {vals[k - 1] + 2}")
    state = GrowthState.catenoid()
    states = [state]
    for k, m in enumerate(vals):
        try:
            state = step(state, m)
        except EmbeddednessConditionError as e:
            return ScheduleReport(False, k + 2, str(e), states)
        states.append(state)
    lower = all(m >= 2 * n - 1 for n, m in enumerate(vals, start=2))
    return ScheduleReport(True, None, "", states, lower)


@dataclass
class AsymptoticsReport:
    n: list  # 2..N
    top_growth: list  # c_n(S_n) as Fractions
    sqrt_ratio: np.ndarray
    sqrt_bound_ok: bool
    certificates: list  # (m_n - 1)^2 / (2 c_n(S_n)^2) as Fractions, n = 2..N
    certificates_ok: bool  # certificate_n > n - 1 for every n
    limit_growths: np.ndarray  # c_n(S_infinity), n = 2..N
    partial_sums: np.ndarray
    series_verdict: str
    series_detail: str

    def certificate_exceeds(self, T: float) -> int | None:
        """Smallest n whose curvature certificate exceeds T, if any."""
        for n, c in zip(self.n, self.certificates):
            if c > T:
                return n
        return None


def top_growth(s: Schedule, n: int) -> Fraction:
    """c_n(S_n) = prod_{i=2}^{n-1} m_i/(m_i - 1)."""
    out = Fraction(1)
    for i in range(2, n):
        m = s.m(i)
        out *= Fraction(m, m - 1)
    return out


def classify_series(a: np.ndarray) -> tuple[str, str]:
    """Convergence of sum |a_n| from the tail: ratio test, then power-law exponent."""
    a = np.abs(np.asarray(a, dtype=float))
    if a.size < 8:
        return "inconclusive", "too few terms"
    tail = a[a.size // 2 :]
    ratios = tail[1:] / tail[:-1]
    rmax = float(ratios.max())
    if rmax < 0.95:
        return "convergent", f"ratio test: tail ratios <= {rmax:.4g}"
    if float(ratios.min()) > 1.0:
        return "divergent", "terms do not decrease"
    idx = np.arange(a.size // 2, a.size) + 2.0
    slope = float(np.polyfit(np.log(idx), np.log(tail), 1)[0])
    p = -slope
    if p > 1.1:
        return "convergent", f"comparison with n^-{p:.3g}"
    if p < 0.95:
        return "divergent", f"comparison with n^-{p:.3g}"
    return "inconclusive", f"tail exponent {p:.3g} too close to 1"


def asymptotics(s: Schedule, N: int, sqrt_constant: float = SQRT_CONSTANT) -> AsymptoticsReport:
    if s.last_index < N:
        raise ScheduleError(f"schedule defines m_n only up to n = {s.last_index}", s.last_index + 1)
    rep = validate_schedule(Schedule(s.values[: N - 1]))
    if not rep.valid:
        raise ScheduleError(rep.reason, rep.index)
    ns = list(range(2, N + 1))
    tops, c = [], Fraction(1)
    for n in ns:
        tops.append(c)
        m = s.m(n)
        c = c * Fraction(m, m - 1)
    ratio = np.array([float(t) / math.sqrt(n) for n, t in zip(ns, tops)])
    certs = [Fraction((s.m(n) - 1) ** 2) / (2 * t * t) for n, t in zip(ns, tops)]
    limit = np.array([-float(t) / (s.m(n) - 1) for n, t in zip(ns, tops)])
    verdict, detail = classify_series(limit)
    return AsymptoticsReport(
        ns,
        tops,
        ratio,
        bool(np.all(ratio <= sqrt_constant)),
        certs,
        all(cv > n - 1 for n, cv in zip(ns, certs)),
        limit,
        np.cumsum(limit),
        verdict,
        detail,
    )
