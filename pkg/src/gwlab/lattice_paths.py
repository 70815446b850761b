"""Skip-free lattice paths: codings, cyclic shifts, exact walk distributions.

A path is a finite sequence of integer increments, each >= -1 (downward skip
free). Partial sums W_t start from W_0 = 0. The cycle lemma lives here: for a
path with W_n = -j there are exactly j cyclic shifts whose first passage to
-j happens at time n, and the Vervaat shift (rotate at the first minimum)
picks one of them.

Walk distributions are computed by plain sequential dense convolution, never
FFT: the pmf values span hundreds of orders of magnitude and FFT error is
additive at the scale of the largest entry. Lost mass from the truncated
upper window and from the clipped step support is tracked explicitly and
reported on the result.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, ResourceError


class LatticePath:
    """Immutable wrapper around an increment array (each entry >= -1)."""

    __slots__ = ("increments", "_psums")

    def __init__(self, increments, validate=True):
        inc = np.asarray(increments, dtype=np.int64)
        if inc.ndim != 1 or inc.size == 0:
            raise DomainError("a lattice path needs at least one increment")
        if validate and inc.min() < -1:
            raise DomainError("increments must be >= -1 (downward skip free)")
        inc.setflags(write=False)
        self.increments = inc
        self._psums = None

    @property
    def n(self):
        return int(self.increments.size)

    @property
    def partial_sums(self):
        """W_1, ..., W_n (W_0 = 0 is implicit)."""
        if self._psums is None:
            ps = np.cumsum(self.increments)
            ps.setflags(write=False)
            self._psums = ps
        return self._psums

    @property
    def final(self):
        return int(self.partial_sums[-1])

    def as_tuple(self):
        return tuple(int(x) for x in self.increments)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, LatticePath):
            return NotImplemented
        return np.array_equal(self.increments, other.increments)

    def __hash__(self):
        return hash(self.as_tuple())

    def __repr__(self):
        if self.n <= 12:
            return f"LatticePath({list(self.increments)})"
        return f"LatticePath(n={self.n}, final={self.final})"


def cyclic_shift(path, i):
    """The path read from increment index i onward, wrapping around."""
    n = path.n
    i = int(i) % n
    if i == 0:
        return LatticePath(path.increments, validate=False)
    inc = np.concatenate([path.increments[i:], path.increments[:i]])
    return LatticePath(inc, validate=False)


def vervaat(path):
    """Cyclic shift at the first global minimum of the partial sums.

    For a path with W_n = -j (j >= 1) the result is a path whose first
    passage to -j happens at time n; for j = 1 it is the unique such shift.
    """
    if path.final >= 0:
        raise DomainError("vervaat needs a path with negative final value")
    istar = int(np.argmin(path.partial_sums)) + 1  # first argmin, as a time
    return cyclic_shift(path, istar % path.n)


def first_passage(path, j):
    """Smallest time t >= 1 with W_t = -j, or None if the path never gets there."""
    if j < 1:
        raise DomainError("first passage level must be >= 1")
    hits = np.nonzero(path.partial_sums == -j)[0]
    if hits.size == 0:
        return None
    return int(hits[0]) + 1


def cycle_index_set(path, j):
    """Start indices i whose cyclic shift has first passage to -j at time n.

    Requires W_n = -j. By the cycle lemma the result has exactly j elements
    (increments being >= -1 is what makes this count exact). Runs in O(n)
    via a sliding-window minimum over the doubled partial-sum array.
    """
    n = path.n
    if path.final != -j:
        raise DomainError(
            f"cycle_index_set needs W_n = -j; got W_n={path.final}, j={j}")
    if j < 1:
        raise DomainError("j must be >= 1")
    if n == 1:
        return np.array([0], dtype=np.int64)
    ps = path.partial_sums
    doubled = np.concatenate([ps, ps - j])
    from ._kernels import sliding_window_min
    # m[i] = min over W_{i+1} .. W_{i+n-1} of the shifted walk, i = 0..n-1
    mins = sliding_window_min(doubled, n - 1)[:n]
    base = np.concatenate([[0], ps[:-1]])  # W_i for i = 0..n-1
    valid = mins > base - j
    return np.nonzero(valid)[0].astype(np.int64)


# -- exact walk distributions --------------------------------------------------


@dataclass
class WalkPmf:
    """Dense pmf of W_n on the window [lo, hi], plus lost-mass accounting.

    probs[k - lo] = P(W_n = k) for lo <= k <= hi, computed without any mass
    from paths that left the window (so each entry is a lower bound, and the
    column sum deficit is at most lost_mass).
    """

    law_descriptor: str
    n: int
    lo: int
    probs: np.ndarray
    lost_mass: float
    step_cap: int

    @property
    def hi(self):
        return self.lo + len(self.probs) - 1

    def prob(self, k):
        if k < self.lo or k > self.hi:
            return 0.0
        return float(self.probs[k - self.lo])

    @property
    def total(self):
        return float(self.probs.sum())


def _step_array(law, cap):
    """Offspring pmf on 0..cap (the step is X - 1)."""
    return law.pmf_array(cap)


def exact_walk_pmf(law, n, support_budget, tol=1e-9):
    """Distribution of W_n = sum of n iid (X - 1) steps, by dense convolution.

    The window is [-n, support_budget]. The step support is truncated at the
    smallest cap with n * tail(cap + 1) <= tol / 2 (never beyond the window
    width, where it could not matter anyway). If even the widest usable cap
    cannot bring the projected lost mass under tol, a ResourceError is raised
    rather than silently returning a bad table.
    """
    if n < 1:
        raise DomainError("need n >= 1 steps")
    if support_budget < 0:
        raise DomainError("support budget must be >= 0")
    max_cap = support_budget + n
    cap = 0
    while law.tail(cap + 1) * n > 0.5 * tol:
        cap += 1 + cap // 4
        if cap >= max_cap:
            cap = max_cap
            break
    step_tail = law.tail(cap + 1)
    if step_tail * n > 0.5 * tol and cap >= max_cap:
        raise ResourceError(
            f"cannot keep projected lost mass under {tol:g}: step tail at "
            f"cap {cap} is {step_tail:g} over n={n} steps",
            n=n, cap=cap, projected=step_tail * n)
    step = _step_array(law, cap)
    width = n + support_budget + 1
    probs = np.zeros(width, dtype=np.float64)
    # support after t steps: [-t, budget]; index k - lo with lo = -n fixed
    probs[n] = 1.0  # W_0 = 0
    lost = 0.0
    lo_idx = n  # index of the lowest occupied entry
    for t in range(n):
        block = probs[lo_idx:]
        conv = np.convolve(block, step)
        lost += step_tail * float(block.sum())
        lo_idx -= 1
        keep = width - lo_idx
        probs[lo_idx:] = conv[:keep]
        lost += float(conv[keep:].sum())
    return WalkPmf(law.descriptor(), n, -n, probs, lost, cap)


def walk_pmf_diagonal(law, m_max):
    """P(W_m = -1) for m = 1..m_max, exact at that column.

    One sequential convolution with window [-m_max, m_max] and step support
    capped at m_max + 1. Paths ending at -1 by time m <= m_max can neither
    exceed the window top nor take a step that large, so the clipping never
    touches them; only the rest of the table is approximate.
    """
    if m_max < 1:
        raise DomainError("need m_max >= 1")
    cap = m_max + 1
    if law.max_support is not None:
        cap = min(cap, law.max_support)
    step = _step_array(law, cap)
    width = 2 * m_max + 1
    lo = -m_max
    probs = np.zeros(width, dtype=np.float64)
    probs[-lo] = 1.0
    out = np.zeros(m_max, dtype=np.float64)
    lo_idx = -lo
    for t in range(m_max):
        block = probs[lo_idx:]
        conv = np.convolve(block, step)
        lo_idx = max(lo_idx - 1, 0)
        keep = width - lo_idx
        probs[lo_idx:] = conv[:keep]
        if lo_idx == 0:
            probs[0] = conv[0]
        out[t] = probs[-1 - lo]
    return out


# -- Kemperman / cycle-lemma identity ------------------------------------------


@dataclass
class KempermanResult:
    """Both sides of P(zeta_j = n) = (j/n) P(W_n = -j)."""

    lhs: object
    rhs: object
    exact: bool

    @property
    def gap(self):
        return float(self.lhs - self.rhs)


def _fraction_step(law, cap):
    return [law.pmf_fraction(k) for k in range(cap + 1)]


def _convolve_fraction(block, step, width):
    out = [Fraction(0)] * min(len(block) + len(step) - 1, width)
    for i, b in enumerate(block):
        if b == 0:
            continue
        for s_idx, s in enumerate(step):
            if s == 0:
                continue
            pos = i + s_idx
            if pos >= len(out):
                break
            out[pos] += b * s
    return out


def _convolve_any(block, step, rational):
    if rational:
        return _convolve_fraction(block, step, len(block) + len(step))
    return list(np.convolve(np.array(block, dtype=np.float64),
                            np.array(step, dtype=np.float64)))


def _advance(probs, step, width, rational):
    """One walk step on a fixed window: convolve with the offspring pmf and
    shift down by one. Dropping index 0 discards the value just below the
    window floor; dropping the tail discards values above the ceiling."""
    zero = Fraction(0) if rational else 0.0
    conv = _convolve_any(probs, step, rational)
    nxt = conv[1:width + 1]
    if len(nxt) < width:
        nxt = nxt + [zero] * (width - len(nxt))
    return nxt


def kemperman_check(law, n, j):
    """First-passage probability two ways: direct absorbing recursion vs the
    cycle-lemma identity (j/n) P(W_n = -j).

    For laws with a rational pmf both sides come back as exact Fractions:
    with windows of height n and step support capped at n, no path that
    contributes to either side is ever clipped, so there is no truncation
    error at all. Other laws get float convolution with the same windows.
    """
    if not 1 <= j <= n:
        raise DomainError("need 1 <= j <= n")
    cap = n
    if law.max_support is not None:
        cap = min(cap, law.max_support)
    rational = law.has_rational_pmf
    if rational:
        step = _fraction_step(law, cap)
        one, zero = Fraction(1), Fraction(0)
    else:
        step = list(_step_array(law, cap))
        one, zero = 1.0, 0.0

    # rhs: free walk on the window [-n, n]; P(W_n = -j) is exact there
    width = 2 * n + 1
    probs = [zero] * width
    probs[n] = one  # value v sits at index v + n
    for _ in range(n):
        probs = _advance(probs, step, width, rational)
    p_final = probs[n - j]
    rhs = (Fraction(j, n) if rational else j / n) * p_final

    # lhs: absorbing walk on [-j+1, n]; mass reaching -j (conv index 0) is
    # killed by the shift, which is exactly the first-passage event
    awidth = n + j  # values -j+1 .. n, value v at index v + j - 1
    aprobs = [zero] * awidth
    aprobs[j - 1] = one
    for _ in range(n - 1):
        aprobs = _advance(aprobs, step, awidth, rational)
    # survive at -j+1 after n-1 steps, then one final leaf step down
    mu0 = law.pmf_fraction(0) if rational else law.pmf(0)
    lhs = aprobs[0] * mu0
    return KempermanResult(lhs, rhs, rational)
