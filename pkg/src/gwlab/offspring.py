"""Critical offspring laws and their analytic companions.

An offspring law here is a probability measure mu on {0, 1, 2, ...} with mean
exactly 1 (criticality) that lies in the domain of attraction of an
alpha-stable law for some alpha in (1, 2]. Finite variance corresponds to
alpha = 2 with normalizing sequence B_n = sigma * sqrt(n / 2). The
heavy-tailed built-in has an exact power tail mu(k) = c * k^(-1-alpha) for
k >= 2, for which B_n is closed-form as well:

    B_n = (c * Gamma(-alpha) * n)^(1/alpha),

the unique solution of n * L(B_n) / B_n^alpha -> 1 / ((2 - alpha) Gamma(-alpha))
when L is constant at infinity. Gamma(-alpha) > 0 for alpha in (1, 2), and the
alpha -> 2 limit recovers sigma * sqrt(n / 2) because (2 - alpha) * Gamma(-alpha)
tends to 1/2.

Laws carry closed-form pmf, tail, pgf and pgf-derivative where available;
the heavy-tailed pgf falls back to a chunked series with an explicit Hurwitz
zeta bound on the dropped tail. Everything downstream (samplers, walk
convolutions, experiments) goes through this module, so construction runs a
one-time self-check per law: normalization, criticality and tail consistency
to 1e-12.
"""

import math
from fractions import Fraction

import numpy as np
from scipy import special

from .errors import DomainError, ResourceError, UnsupportedLawError

# laws are immutable; construction self-checks run once per parameter set
_LAW_CACHE = {}

_BUILTIN_NAMES = ("binary", "geometric", "zipf", "noncrossing_inner",
                  "noncrossing_root")


class OffspringLaw:
    """Offspring distribution with enough structure for exact computations.

    Attributes
    ----------
    name : str
        Built-in family name.
    alpha : float
        Stability index in (1, 2]. Finite-variance laws have alpha = 2.
    variance : float
        Offspring variance, math.inf when alpha < 2.
    mean : float
        1.0 for critical laws; the non-critical root law keeps its true mean
        and has critical = False.
    tail_constant : float or None
        c / alpha when mu([k, inf)) ~ (c / alpha) * k^(-alpha), else None.
    slowly_varying_limit : float or None
        Limit of L(x) = x^alpha * mu([x, inf)) ... for alpha = 2 the limit of
        the truncated second moment, which is just the variance here.
    period : int
        Span of the step walk increments (2 for the binary law, else 1).
    max_support : int or None
        Largest k with mu(k) > 0, None for infinite support.
    """

    def __init__(self, name, alpha, *, pmf, tail, pgf, pgf_prime, variance,
                 params=None, tail_constant=None, slowly_varying_limit=None,
                 max_support=None, period=1, critical=True, mean=1.0,
                 pmf_fraction=None):
        self.name = name
        self.alpha = float(alpha)
        self._pmf = pmf
        self._tail = tail
        self._pgf = pgf
        self._pgf_prime = pgf_prime
        self.variance = variance
        self.params = dict(params or {})
        self.tail_constant = tail_constant
        self.slowly_varying_limit = slowly_varying_limit
        self.max_support = max_support
        self.period = period
        self.critical = critical
        self.mean = mean
        self._pmf_fraction = pmf_fraction
        if not (1.0 < self.alpha <= 2.0):
            raise DomainError(f"alpha must lie in (1, 2], got {alpha}")

    # -- point evaluations ---------------------------------------------------

    def pmf(self, k):
        if k < 0:
            return 0.0
        if self.max_support is not None and k > self.max_support:
            return 0.0
        return self._pmf(int(k))

    def tail(self, k):
        """mu([k, infinity)), exact per-law formula."""
        if k <= 0:
            return 1.0
        if self.max_support is not None and k > self.max_support:
            return 0.0
        return self._tail(int(k))

    def pgf(self, s):
        """G(s) = E[s^X] for s in [0, 1]."""
        if not 0.0 <= s <= 1.0:
            raise DomainError(f"pgf argument must be in [0, 1], got {s}")
        return self._pgf(float(s))

    def pgf_prime(self, s):
        """G'(s) = sum_k k mu(k) s^(k-1), which is also E[s^(Xstar - 1)]."""
        if not 0.0 <= s <= 1.0:
            raise DomainError(f"pgf argument must be in [0, 1], got {s}")
        return self._pgf_prime(float(s))

    def pmf_fraction(self, k):
        """Exact rational pmf value, or None when the law is irrational."""
        if self._pmf_fraction is None:
            return None
        if k < 0 or (self.max_support is not None and k > self.max_support):
            return Fraction(0)
        return self._pmf_fraction(int(k))

    @property
    def has_rational_pmf(self):
        return self._pmf_fraction is not None

    def pmf_array(self, kmax):
        """mu(0..kmax) as a float array."""
        return np.array([self.pmf(k) for k in range(kmax + 1)], dtype=np.float64)

    # -- structural predicates -----------------------------------------------

    def tree_size_possible(self, n):
        """Whether P(|tau| = n) > 0."""
        if n < 1:
            return False
        if self.name == "binary":
            return n % 2 == 1
        return True

    def forest_size_possible(self, n, j):
        """Whether a j-tree forest with n vertices has positive probability."""
        if not 1 <= j <= n:
            return False
        if self.name == "binary":
            return (n - j) % 2 == 0
        return True

    def descriptor(self):
        if self.params:
            inner = ",".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
            return f"{self.name}:{inner}"
        return self.name

    def __repr__(self):
        crit = "" if self.critical else ", non-critical"
        return f"OffspringLaw({self.descriptor()}, alpha={self.alpha}{crit})"


class SizeBiasedLaw:
    """The size-biased companion mu*(i) = i * mu(i), defined for critical mu.

    Supported on {1, 2, ...}; this is the offspring law along the spine of
    the Kesten tree.
    """

    def __init__(self, base):
        if not base.critical:
            raise UnsupportedLawError(
                "size-biasing needs a critical law (mean 1)")
        self.base = base

    def pmf(self, i):
        if i < 1:
            return 0.0
        return i * self.base.pmf(i)

    def tail(self, i):
        # sum_{j >= i} j mu(j); closed per-family where it matters, generic
        # summation elsewhere (exponential tails make this cheap)
        b = self.base
        if i <= 1:
            return 1.0
        if b.name == "zipf":
            # sum_{j>=i} j * c j^(-1-a) = c * zeta(a, i) for i >= 2
            return b.params["c"] * float(special.zeta(b.alpha, i))
        if b.max_support is not None:
            return sum(self.pmf(j) for j in range(i, b.max_support + 1))
        total, j = 0.0, i
        while True:
            t = self.pmf(j)
            total += t
            if t < 1e-18 and b.tail(j + 1) * (j + 2) < 1e-17:
                return total
            j += 1

    def mean(self):
        """E[Xstar] = 1 + variance of the base law (infinite when alpha < 2)."""
        v = self.base.variance
        return math.inf if v == math.inf else 1.0 + v

    def __repr__(self):
        return f"SizeBiasedLaw({self.base.descriptor()})"


class NormalizingSequence:
    """B_n recipe attached to a law: closed-form for the built-ins."""

    def __init__(self, law):
        if not law.critical:
            raise UnsupportedLawError(
                "B_n is only defined for critical laws")
        self.law = law
        if law.alpha == 2.0:
            self.recipe = "gaussian"
            self._sigma = math.sqrt(law.variance)
        elif law.tail_constant is not None:
            self.recipe = "stable-exact-tail"
            # (c * Gamma(-alpha) * n)^(1/alpha); Gamma(-alpha) > 0 on (1,2)
            self._scale = law.params["c"] * math.gamma(-law.alpha)
        else:
            raise UnsupportedLawError(
                f"no B_n recipe for {law.descriptor()}")

    def __call__(self, n):
        if n < 1:
            raise DomainError("B_n needs n >= 1")
        if self.recipe == "gaussian":
            return self._sigma * math.sqrt(n / 2.0)
        return (self._scale * n) ** (1.0 / self.law.alpha)


def calibrate_B(law, n):
    """The normalizing constant B_n for the law, closed form."""
    return NormalizingSequence(law)(n)


def stable_density_at_zero(alpha):
    """d_alpha(0) = 1 / |Gamma(-1/alpha)| = sin(pi/alpha) Gamma(1/alpha) / (pi alpha)."""
    if not 1.0 < alpha <= 2.0:
        raise DomainError(f"alpha must lie in (1, 2], got {alpha}")
    return 1.0 / (alpha * math.gamma(1.0 - 1.0 / alpha))


# -- built-in constructors ----------------------------------------------------


def _make_binary():
    def pmf(k):
        return 0.5 if k in (0, 2) else 0.0

    def tail(k):
        return 0.5 if k in (1, 2) else (1.0 if k <= 0 else 0.0)

    return OffspringLaw(
        "binary", 2.0,
        pmf=pmf, tail=tail,
        pgf=lambda s: 0.5 * (1.0 + s * s),
        pgf_prime=lambda s: s,
        variance=1.0, slowly_varying_limit=1.0,
        max_support=2, period=2,
        pmf_fraction=lambda k: Fraction(1, 2) if k in (0, 2) else Fraction(0),
    )


def _make_geometric():
    # mu(k) = 2^-(k+1); G(s) = 1/(2-s), G'(s) = 1/(2-s)^2, sigma^2 = 2
    return OffspringLaw(
        "geometric", 2.0,
        pmf=lambda k: 0.5 ** (k + 1),
        tail=lambda k: 0.5 ** k,
        pgf=lambda s: 1.0 / (2.0 - s),
        pgf_prime=lambda s: 1.0 / (2.0 - s) ** 2,
        variance=2.0, slowly_varying_limit=2.0,
        pmf_fraction=lambda k: Fraction(1, 2 ** (k + 1)),
    )


def _zipf_series(s, alpha, c, power_shift):
    """c * sum_{k>=2} k^(-1-alpha+power_shift) s^(k-power_shift), chunked.

    power_shift = 0 gives the pgf tail, power_shift = 1 its derivative.
    The dropped tail is bounded by c * s^K * zeta(1+alpha-power_shift, K)
    and the loop stops once that bound is below 1e-16 of the running sum.
    """
    if s == 0.0:
        return 0.0
    logs = math.log(s)
    expo = 1.0 + alpha - power_shift
    total = 0.0
    k0, chunk = 2, 1 << 14
    while True:
        k = np.arange(k0, k0 + chunk, dtype=np.float64)
        total += float(np.exp((k - power_shift) * logs - expo * np.log(k)).sum())
        K = k0 + chunk
        bound = math.exp((K - power_shift) * logs) * float(special.zeta(expo, K))
        if bound <= 1e-16 * max(total, 1e-300):
            return c * total
        if K > (1 << 31):
            raise ResourceError(
                "zipf pgf series did not converge; s too close to 1",
                s=s, terms=K)
        k0, chunk = K, min(chunk * 2, 1 << 22)


def _make_zipf(alpha, c):
    alpha = float(alpha)
    c = float(c)
    if not 1.0 < alpha < 2.0:
        raise DomainError(f"zipf law needs alpha in (1, 2), got {alpha}")
    z_a = float(special.zeta(alpha, 1))        # zeta(alpha)
    z_a1 = float(special.zeta(1.0 + alpha, 1))  # zeta(1 + alpha)
    mu1 = 1.0 - c * (z_a - 1.0)
    mu0 = c * (z_a - z_a1)
    if mu1 <= 0.0 or mu0 <= 0.0 or mu0 + mu1 >= 1.0:
        raise DomainError(
            f"zipf(alpha={alpha}, c={c}) is not a nondegenerate law; "
            f"mu(0)={mu0:.6f}, mu(1)={mu1:.6f}")

    def pmf(k):
        if k == 0:
            return mu0
        if k == 1:
            return mu1
        return c * k ** (-1.0 - alpha)

    def tail(k):
        if k <= 1:
            return 1.0 - (mu0 if k == 1 else 0.0)
        return c * float(special.zeta(1.0 + alpha, k))

    def pgf(s):
        if s == 1.0:
            return 1.0
        return mu0 + mu1 * s + _zipf_series(s, alpha, c, 0)

    def pgf_prime(s):
        if s == 1.0:
            return 1.0
        return mu1 + _zipf_series(s, alpha, c, 1)

    return OffspringLaw(
        "zipf", alpha,
        pmf=pmf, tail=tail, pgf=pgf, pgf_prime=pgf_prime,
        variance=math.inf,
        params={"alpha": alpha, "c": c},
        tail_constant=c / alpha,
        slowly_varying_limit=c / (2.0 - alpha),
    )


def _make_noncrossing_inner():
    # mu(k) = 4 (k+1) / 3^(k+2), negative binomial (2, 2/3); sigma^2 = 3/2
    return OffspringLaw(
        "noncrossing_inner", 2.0,
        pmf=lambda k: 4.0 * (k + 1) * 3.0 ** -(k + 2),
        tail=lambda k: (2 * k + 3) * 3.0 ** -(k + 1),
        pgf=lambda s: 4.0 / (3.0 - s) ** 2,
        pgf_prime=lambda s: 8.0 / (3.0 - s) ** 3,
        variance=1.5, slowly_varying_limit=1.5,
        pmf_fraction=lambda k: Fraction(4 * (k + 1), 3 ** (k + 2)),
    )


def _make_noncrossing_root():
    # root degree law lambda(k) = 2 / 3^k for k >= 1; mean 3/2, NOT critical
    return OffspringLaw(
        "noncrossing_root", 2.0,
        pmf=lambda k: 0.0 if k < 1 else 2.0 * 3.0 ** -k,
        tail=lambda k: 1.0 if k <= 1 else 3.0 ** (1 - k),
        pgf=lambda s: 2.0 * s / (3.0 - s),
        pgf_prime=lambda s: 6.0 / (3.0 - s) ** 2,
        variance=0.75, critical=False, mean=1.5,
        pmf_fraction=lambda k: Fraction(0) if k < 1 else Fraction(2, 3 ** k),
    )


def _self_check(law):
    """One-time construction checks: normalization, mean, tail consistency.

    Everything is checked through the exact tail formula so infinite supports
    need only a short partial sum.
    """
    K = law.max_support if law.max_support is not None else 60
    probs = [law.pmf(k) for k in range(K + 1)]
    norm = math.fsum(probs) + law.tail(K + 1)
    if abs(norm - 1.0) > 1e-12:
        raise AssertionError(f"{law.descriptor()}: pmf sums to {norm!r}")
    # tail(k) - tail(k+1) == pmf(k)
    for k in range(K + 1):
        gap = law.tail(k) - law.tail(k + 1) - probs[k]
        if abs(gap) > 1e-12:
            raise AssertionError(
                f"{law.descriptor()}: tail/pmf mismatch at k={k} ({gap:g})")
    # mean via partial sum plus an exact (zipf) or negligible remainder
    partial = math.fsum(k * probs[k] for k in range(K + 1))
    if law.name == "zipf":
        rem = law.params["c"] * float(special.zeta(law.alpha, K + 1))
    elif law.max_support is not None:
        rem = 0.0
    else:
        # exponential tails at K = 60: sum_{k>K} k mu(k) <= 3 (K+2) tail(K+1)
        rem = 3.0 * (K + 2) * law.tail(K + 1)
        if rem > 1e-13:
            raise AssertionError(
                f"{law.descriptor()}: tail remainder too large at K={K}")
        rem = 0.0
    if abs(partial + rem - law.mean) > 1e-11:
        raise AssertionError(
            f"{law.descriptor()}: mean {partial + rem!r} != {law.mean}")
    # pgf at the endpoints
    if abs(law.pgf(1.0) - 1.0) > 1e-12 or abs(law.pgf(0.0) - law.pmf(0)) > 1e-12:
        raise AssertionError(f"{law.descriptor()}: pgf endpoint mismatch")
    if law.critical and abs(law.pgf_prime(1.0) - 1.0) > 2e-12:
        raise AssertionError(f"{law.descriptor()}: G'(1) != 1")


def make_builtin(name, **params):
    """Construct one of the built-in laws.

    binary, geometric, noncrossing_inner, noncrossing_root take no
    parameters; zipf takes alpha in (1, 2) and c > 0 (default 0.1).
    """
    if name not in _BUILTIN_NAMES:
        raise UnsupportedLawError(
            f"unknown law {name!r}; built-ins: {', '.join(_BUILTIN_NAMES)}")
    if name == "zipf":
        params.setdefault("alpha", 1.5)
        params.setdefault("c", 0.1)
        key = (name, params["alpha"], params["c"])
    else:
        if params:
            raise DomainError(f"law {name!r} takes no parameters")
        key = (name,)
    if key in _LAW_CACHE:
        return _LAW_CACHE[key]
    law = {
        "binary": _make_binary,
        "geometric": _make_geometric,
        "noncrossing_inner": _make_noncrossing_inner,
        "noncrossing_root": _make_noncrossing_root,
        "zipf": lambda: _make_zipf(**params),
    }[name]()
    _self_check(law)
    _LAW_CACHE[key] = law
    return law


def law_from_descriptor(text):
    """Parse 'geometric' or 'zipf:alpha=1.5,c=0.1' into a law instance."""
    name, _, rest = text.partition(":")
    params = {}
    if rest:
        for piece in rest.split(","):
            k, _, v = piece.partition("=")
            if not v:
                raise DomainError(f"bad law descriptor {text!r}")
            params[k.strip()] = float(v)
    return make_builtin(name.strip(), **params)


def size_biased(law):
    return SizeBiasedLaw(law)


# -- survival and spine ------------------------------------------------------


def survival_probability(law, n):
    """p_n = P(Z_n > 0) via the exact recursion q_{m+1} = G(q_m), q_0 = 0."""
    if n < 0:
        raise DomainError("generation must be >= 0")
    if n == 0:
        return 1.0
    if law.name in ("binary", "geometric", "noncrossing_inner"):
        from ._kernels import survival_iterate
        code = {"binary": 0, "geometric": 1, "noncrossing_inner": 2}[law.name]
        return 1.0 - survival_iterate(code, n)
    if n > 200_000:
        raise ResourceError(
            f"survival iteration for {law.descriptor()} has no fast path; "
            f"n={n} exceeds the 200000-step budget", n=n)
    q = 0.0
    for _ in range(n):
        q = law.pgf(q)
    return 1.0 - q


def spine_generation_pgf(law, n, s):
    """E[s^{Zstar_n}] for the size-biased (Kesten) tree at generation n.

    Exact product formula: s * prod_{i=0}^{n-1} G'(f_i(s)) with f_0 = id and
    f_{i+1} = G o f_i, where G' is the pgf of Xstar - 1.
    """
    if n < 0:
        raise DomainError("generation must be >= 0")
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"pgf argument must be in [0, 1], got {s}")
    if not law.critical:
        raise UnsupportedLawError("spine pgf needs a critical law")
    if s == 0.0:
        return 0.0
    f = s
    acc = s
    for _ in range(n):
        acc *= law.pgf_prime(f)
        f = law.pgf(f)
    return acc


# -- total progeny ------------------------------------------------------------

_PROGENY_BUDGET = {"zipf": 512}
_PROGENY_DEFAULT_BUDGET = 8192

_progeny_cache = {}


def _progeny_table(law, m_max):
    """P(|tau| = m) for m = 1..m_max, exact up to float rounding.

    Uses the cycle-lemma identity P(|tau| = m) = P(W_m = -1) / m and a single
    sequential convolution pass. With the upper window capped at m_max the
    value at -1 stays exact for every m <= m_max: a path above the cap would
    need more than m_max downward unit steps to come back.
    """
    key = (law.descriptor(), m_max)
    hit = _progeny_cache.get(key)
    if hit is not None:
        return hit
    from .lattice_paths import walk_pmf_diagonal
    diag = walk_pmf_diagonal(law, m_max)
    table = diag / np.arange(1, m_max + 1, dtype=np.float64)
    _progeny_cache[key] = table
    return table


def total_progeny_pmf(law, m):
    """P(|tau| = m) by exact convolution (no sampling involved)."""
    if m < 1:
        raise DomainError("tree size must be >= 1")
    budget = _PROGENY_BUDGET.get(law.name, _PROGENY_DEFAULT_BUDGET)
    if m > budget:
        raise ResourceError(
            f"progeny convolution for {law.descriptor()} capped at m={budget}",
            budget=budget, requested=m)
    if not law.tree_size_possible(m):
        return 0.0
    return float(_progeny_table(law, m)[m - 1])


def tabulate_B_prime(law, n, budget=4096):
    """Smallest x with P(|tau| >= x) <= alpha * d_alpha(0) / n.

    Built from the exact progeny table; raises ResourceError when the table
    budget is too small to certify the crossing.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    thresh = law.alpha * stable_density_at_zero(law.alpha) / n
    table = _progeny_table(law, budget)
    # tail(x) = P(|tau| >= x) = 1 - sum_{m < x} pmf(m)
    csum = np.cumsum(table)
    if thresh >= 1.0:
        return 1
    # tail at x = k+2 is 1 - csum[k]; find the first index where it crosses
    tails = 1.0 - csum
    idx = np.nonzero(tails <= thresh)[0]
    if idx.size == 0:
        raise ResourceError(
            f"progeny table of size {budget} never reaches the threshold "
            f"{thresh:g}; increase the budget", budget=budget, n=n)
    return int(idx[0]) + 2


# -- Laplace-transform diagnostics --------------------------------------------


def laplace_asymptotics_report(law, lambda_grid):
    """Ratios of exact transforms to their stable-limit equivalents.

    For each lambda in the (decreasing, inside (0, 1/2]) grid, reports

      walk:        (E e^{-lam W} - 1)   vs  C_a * lam^alpha * L
      size_biased: (1 - E e^{-lam (Xstar-1)}) vs  alpha C_a * lam^(alpha-1) * L
      pgf_gap:     (G(s) - s) at s=1-lam vs  C_a * (1-s)^alpha * L

    with C_a = Gamma(3-alpha) / (alpha (alpha-1)) and L the limit of the
    slowly varying factor. All three ratios tend to 1 as lambda -> 0.
    """
    lams = [float(x) for x in lambda_grid]
    if not lams:
        raise DomainError("empty lambda grid")
    if any(not 0.0 < x <= 0.5 for x in lams):
        raise DomainError("lambda grid must lie in (0, 1/2]")
    if not all(b < a for a, b in zip(lams, lams[1:])):
        raise DomainError("lambda grid must be strictly decreasing")
    L = law.slowly_varying_limit
    if L is None:
        raise UnsupportedLawError(
            f"{law.descriptor()} has no recorded slowly-varying limit")
    a = law.alpha
    c_walk = math.gamma(3.0 - a) / (a * (a - 1.0))
    c_star = math.gamma(3.0 - a) / (a - 1.0)
    rows = []
    for lam in lams:
        s = math.exp(-lam)
        walk = (math.exp(lam) * law.pgf(s) - 1.0) / (c_walk * lam ** a * L)
        star = (1.0 - law.pgf_prime(s)) / (c_star * lam ** (a - 1.0) * L)
        sg = 1.0 - lam
        gap = (law.pgf(sg) - sg) / (c_walk * lam ** a * L)
        rows.append({"lambda": lam, "walk": walk, "size_biased": star,
                     "pgf_gap": gap})
    return rows
