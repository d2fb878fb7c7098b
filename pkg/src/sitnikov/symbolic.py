"""Sign classes on a sample grid, symbol-sequence recovery, and counting.

Grid node ``i`` (``i >= 1``) sits at ``t_i = i * delta``.  A symbol is
``s_k = floor((tau_k - tau_{k-1}) / P)`` for consecutive zeros ``tau`` of z,
with ``tau_0 = 0``.

Recovery only ever looks at the sign classes.  Each crossing is bracketed
by the last certain node of the old sign and the first certain node of the
new sign, so every gap is known to lie in an open interval whose width is
at most four grid steps.
"""
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
import math

from flint import arb

from .ball import ball_to_json, to_ball, workprec
from .errors import DomainError, InconsistencyError, ParseError, ResourceError

__all__ = [
    "SignClass", "classify", "RecoveryConfig", "SymbolSequence",
    "recover_sequence", "crossing_brackets", "symbols_from_roots",
    "count_lower_bound", "enumerate_sequences", "count_sequences", "Enumeration",
]


class SignClass(Enum):
    POSITIVE = "+"
    NEGATIVE = "-"
    UNDEFINED = "U"

    @property
    def sign(self):
        return {"+": 1, "-": -1, "U": 0}[self.value]


def classify(zball, eps=None):
    """Positive / Negative when the sign of z is certain, else Undefined.

    With ``eps`` given, a ball wider than ``eps`` is rejected.
    """
    if eps is not None and not zball.rad() <= to_ball(eps):
        raise DomainError("enclosure radius exceeds eps")
    if zball > 0:
        return SignClass.POSITIVE
    if zball < 0:
        return SignClass.NEGATIVE
    return SignClass.UNDEFINED


@dataclass(frozen=True)
class RecoveryConfig:
    """Grid and accuracy parameters of the recovery.

    Requires delta < m P / 2 and eps < h / 4 (both certified).
    """

    m: int
    P: arb
    delta: Fraction
    eps: Fraction
    h: arb
    T: Fraction = None

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2 or self.m % 2:
            raise DomainError("m must be an even integer >= 2")
        object.__setattr__(self, "delta", Fraction(self.delta))
        object.__setattr__(self, "eps", Fraction(self.eps))
        if self.T is not None:
            object.__setattr__(self, "T", Fraction(self.T))
        if self.delta <= 0:
            raise DomainError("delta must be > 0")
        with workprec(128):
            if not to_ball(self.delta) < self.m * self.P / 2:
                raise DomainError("delta must satisfy delta < m P / 2")
            if not to_ball(self.eps) < self.h / 4:
                raise DomainError("eps must satisfy eps < h / 4")

    def node_time(self, i):
        return i * self.delta


@dataclass(frozen=True)
class SymbolSequence:
    s: tuple
    m: int
    P: str  # decimal rendering of the period used

    def to_json(self):
        return {"m": self.m, "P": self.P, "s": list(self.s)}

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict) or set(obj) != {"m", "P", "s"}:
            raise ParseError("symbol sequence needs exactly the fields m, P, s")
        s = obj["s"]
        if not isinstance(s, list) or not all(isinstance(x, int) and x >= 0 for x in s):
            raise ParseError("s must be a list of nonnegative integers")
        if not isinstance(obj["m"], int) or not isinstance(obj["P"], str):
            raise ParseError("m must be an integer and P a decimal string")
        return cls(tuple(s), obj["m"], obj["P"])

    def __len__(self):
        return len(self.s)


def render_period(P, digits=30):
    """Short decimal rendering of a period Ball (its midpoint)."""
    return P.mid().str(digits, radius=False)


def crossing_brackets(classes, tau0=True):
    """Open time-index brackets (i, j) of the sign changes.

    ``classes[k]`` belongs to node ``k + 1``.  Returns a list of index pairs
    (node indices, node 0 standing for t = 0) and the list of runs, each
    ``(sign, [node indices])``.  Raises InconsistencyError on two
    consecutive Undefined nodes.
    """
    classes = list(classes)
    for k in range(len(classes) - 1):
        if classes[k] is SignClass.UNDEFINED and classes[k + 1] is SignClass.UNDEFINED:
            raise InconsistencyError(
                f"two consecutive undefined nodes at {k + 1} and {k + 2}",
                nodes=(k + 1, k + 2))
    brackets = [(0, 0)] if tau0 else []
    runs = []
    last_sign, last_idx = None, None
    for k, c in enumerate(classes):
        idx = k + 1
        if c is SignClass.UNDEFINED:
            continue
        if last_sign is None or c.sign != last_sign:
            if last_sign is not None:
                brackets.append((last_idx, idx))
            runs.append((c.sign, [idx]))
        else:
            runs[-1][1].append(idx)
        last_sign, last_idx = c.sign, idx
    return brackets, runs


def _floor_range(x):
    """Integers that floor(y) can take for y in the Ball ``x``."""
    lo = math.floor(float(x.lower().mid()))
    hi = math.floor(float(x.upper().mid()))
    # guard the float conversion at integer boundaries
    while not arb(lo) <= x.lower():
        lo -= 1
    while arb(hi + 1) <= x.upper():
        hi += 1
    return lo, hi


def recover_sequence(classes, cfg, rule="interval", parity=False, tau0=True, check_m=True):
    """Recover (s_1, ..., s_k) from grid sign classes.

    ``rule="interval"`` (default) brackets every gap between crossing
    brackets and takes floor(gap / P) when the bracket determines it.  When
    the bracket straddles a multiple of P, ``parity=True`` picks the even
    candidate (symbols are even by assumption); otherwise ResourceError asks
    for a finer grid.  ``rule="runlength"`` uses the run-length formula
    ceil((p + 1) / 2) on the p certain nodes of each complete run; it is
    only meaningful for grids with delta close to P / 2.

    Only complete runs count: the part of the window after the last
    crossing is discarded.  With ``check_m``, a gap certified shorter than
    m P raises InconsistencyError.
    """
    brackets, runs = crossing_brackets(classes, tau0=tau0)
    P = cfg.P
    d = cfg.delta
    out = []
    if rule == "runlength":
        complete = runs[:len(brackets) - 1] if tau0 else runs[1:len(brackets)]
        for sign, nodes in complete:
            p = len(nodes)
            out.append((p + 2) // 2)
        return SymbolSequence(tuple(out), cfg.m, render_period(P))
    if rule != "interval":
        raise DomainError(f"unknown recovery rule {rule!r}")
    with workprec(128):
        for k in range(len(brackets) - 1):
            a0, b0 = brackets[k]
            a1, b1 = brackets[k + 1]
            glo = to_ball((a1 - b0) * d)
            ghi = to_ball((b1 - a0) * d)
            lo, _ = _floor_range(glo / P)
            _, hi = _floor_range(ghi / P)
            if check_m and arb(hi + 1) <= cfg.m:
                raise InconsistencyError(
                    f"gap between nodes {b0} and {a1} is shorter than m P",
                    nodes=(b0, a1))
            cands = list(range(lo, hi + 1))
            if len(cands) > 1 and parity:
                cands = [c for c in cands if c % 2 == 0]
            if len(cands) != 1:
                raise ResourceError(
                    f"symbol {k + 1} undetermined on this grid (candidates {list(range(lo, hi + 1))})",
                    interval=(b0 * d, a1 * d))
            out.append(cands[0])
    return SymbolSequence(tuple(out), cfg.m, render_period(P))


def symbols_from_roots(roots, P, check=True):
    """floor((tau_{k+1} - tau_k) / P) from root enclosures.

    Raises ResourceError if some floor is not determined by the enclosures.
    """
    out = []
    with workprec(128):
        for r0, r1 in zip(roots, roots[1:]):
            lo, hi = _floor_range((r1 - r0) / P)
            if lo != hi and check:
                raise ResourceError("root enclosures do not determine the symbol")
            out.append(lo)
    return out


# ---------------------------------------------------------------- counting

def count_lower_bound(T, m, P):
    """Enclosure of (m/2 + 1) ** (T / ((m + 1) P))."""
    _check_m(m)
    with workprec(128):
        x = to_ball(T) / ((m + 1) * to_ball(P))
        return arb(m // 2 + 1) ** x


def _check_m(m):
    if int(m) != m or m < 2 or m % 2:
        raise DomainError("m must be an even integer >= 2")


def _periods(T, P):
    """floor(T / P) certified, or T itself (as an int floor) if P is None."""
    if P is None:
        return math.floor(Fraction(T))
    prec = 128
    while prec <= 1 << 14:
        with workprec(prec):
            lo, hi = _floor_range(to_ball(T) / to_ball(P))
        if lo == hi:
            return lo
        prec *= 2
    raise ResourceError("cannot decide floor(T / P)")


@dataclass
class Enumeration:
    count: int
    sequences: list = field(default_factory=list)
    m: int = 2
    periods: int = 0

    def to_json(self):
        return {"count": self.count, "m": self.m, "periods": self.periods,
                "sequences": [list(s) for s in self.sequences]}


def count_sequences(N, m, include_empty=False):
    """Number of even sequences s_i >= m with sum(s_i + 1) <= N (dynamic programming)."""
    _check_m(m)
    # exact[n] = number of sequences with sum(s_i + 1) == n (empty counts at n = 0)
    exact = [0] * (max(N, 0) + 1)
    if N >= 0:
        exact[0] = 1
    for n in range(1, N + 1):
        exact[n] = sum(exact[n - (s + 1)] for s in range(m, n, 2))
    total = sum(exact)
    return total if include_empty else total - (1 if N >= 0 else 0)


def enumerate_sequences(T, m, P=None, budget=10 ** 6, include_empty=False):
    """All sequences of even s_i >= m with sum((s_i + 1) P) <= T, lexicographic.

    ``P=None`` means T is given in periods.  The empty sequence is left out
    unless ``include_empty``; with it left out, T = (m + 1) P gives exactly
    one sequence, (m,).  More than ``budget`` sequences raise ResourceError.
    """
    _check_m(m)
    if Fraction(T) < 0:
        raise DomainError("T must be >= 0")
    N = _periods(T, P)
    total = count_sequences(N, m, include_empty)
    if total > budget:
        raise ResourceError(f"{total} sequences exceed the enumeration budget of {budget}")
    out = []
    prefix = []

    def rec(left):
        if prefix or include_empty:
            out.append(tuple(prefix))
        s = m
        while s + 1 <= left:
            prefix.append(s)
            rec(left - s - 1)
            prefix.pop()
            s += 2

    rec(N)
    out.sort()
    return Enumeration(len(out), out, m, N)
