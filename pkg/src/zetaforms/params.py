"""Parameter domain and precision policy.

Every construction in this package is driven by an integer tuple
``(k, q, r, n)``:

* ``k  >= 2``  -- the zeta weight (the forms live in values of zeta(k, .)),
* ``q  >= 3``  -- the denominator of the rational shifts a/q,
* ``r  >  2k`` -- the auxiliary degree parameter of the rational function,
* ``n  >= 1``  -- the index of the form S_n.

The arithmetic lemmas (integrality of the A/B factors, symmetry of the
coefficient table) need divisibility conditions on ``n``:

* ``strict``  mode requires ``q! | n`` (the classical hypothesis, always
  sufficient);
* ``relaxed`` mode requires ``n`` even and ``(p - 1) | n`` for every prime
  ``p | q``.  This is the weakest condition under which the prime-power
  prefactors ``p^(qn/(p-1))`` are integers and the coefficient symmetry
  argument goes through; integrality in this mode is verified empirically
  by the construction itself, which checks every exact division it does.

``PrecisionPolicy`` records the working precision in bits.  The linear form
S_n is exponentially small (or large) of scale ``e**(-alpha*n)`` while its
coefficients grow like ``e**(beta*n)``, so any floating-point route through
the coefficients must carry roughly ``(alpha + beta) * n / ln 2`` bits just
to survive the cancellation; ``required_precision`` implements that floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError

VALID_MODES = ("strict", "relaxed")


@dataclass(frozen=True)
class Params:
    """Validated parameter tuple; construct via :func:`validate`."""

    k: int
    q: int
    r: int
    n: int
    mode: str = "strict"

    def __post_init__(self) -> None:
        _check_domain(self.k, self.q, self.r, self.n, self.mode)

    @property
    def delta_k(self) -> int:
        """1 if k is odd else 0 (whether zeta(k) itself can appear)."""
        return self.k % 2

    @property
    def delta_q(self) -> int:
        """1 if q is odd else 0 (whether the shift 1/2 is absent)."""
        return self.q % 2

    @property
    def strict_n(self) -> bool:
        return self.mode == "strict"

    # Frequently used combinations.
    @property
    def qn(self) -> int:
        return self.q * self.n

    @property
    def rn(self) -> int:
        return self.r * self.n

    @property
    def rqn(self) -> int:
        return self.r * self.q * self.n

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "q": self.q,
            "r": self.r,
            "n": self.n,
            "mode": self.mode,
        }


def _check_domain(k: int, q: int, r: int, n: int, mode: str) -> None:
    for name, value in (("k", k), ("q", q), ("r", r), ("n", n)):
        if not isinstance(value, int) or isinstance(value, bool):
            raise ValidationError(f"{name} must be an int, got {value!r}")
    if k < 2:
        raise ValidationError(f"k must be >= 2, got {k}")
    if q < 3:
        raise ValidationError(f"q must be >= 3, got {q}")
    if r <= 2 * k:
        raise ValidationError(f"r must exceed 2k = {2 * k}, got {r}")
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if mode not in VALID_MODES:
        raise ValidationError(f"mode must be one of {VALID_MODES}, got {mode!r}")
    if mode == "strict":
        if n % math.factorial(q) != 0:
            raise ValidationError(
                f"strict mode needs q! = {math.factorial(q)} to divide n = {n}"
            )
    else:
        if n % 2 != 0:
            raise ValidationError(f"relaxed mode needs n even, got n = {n}")
        for p in prime_divisors(q):
            if n % (p - 1) != 0:
                raise ValidationError(
                    f"relaxed mode needs (p - 1) | n for every prime p | q; "
                    f"p = {p} fails for n = {n}"
                )


def validate(k: int, q: int, r: int, n: int, mode: str = "strict") -> Params:
    """Validate the tuple and return an immutable :class:`Params`.

    Raises :class:`ValidationError` outside the domain; has no side
    effects (same inputs always give the same outcome).
    """
    return Params(k, q, r, n, mode)


def prime_divisors(m: int) -> tuple[int, ...]:
    """Distinct prime divisors of m >= 2 in increasing order."""
    if not isinstance(m, int) or m < 2:
        raise ValidationError(f"prime_divisors needs an int >= 2, got {m!r}")
    out = []
    d = 2
    while d * d <= m:
        if m % d == 0:
            out.append(d)
            while m % d == 0:
                m //= d
        d += 1 if d == 2 else 2
    if m > 1:
        out.append(m)
    return tuple(out)


def lcm_upto(m: int) -> int:
    """d_m = lcm(1, 2, ..., m).  By the prime number theorem
    log(d_m) ~ m; consecutive quotients d_{m+1}/d_m are 1 or a prime."""
    if not isinstance(m, int) or m < 1:
        raise ValidationError(f"lcm_upto needs an int >= 1, got {m!r}")
    d = 1
    for i in range(2, m + 1):
        d = math.lcm(d, i)
    return d


@dataclass(frozen=True)
class PrecisionPolicy:
    """Working precision in bits plus the guard used to derive it."""

    bits: int
    guard: int = 64

    def __post_init__(self) -> None:
        if self.bits < 64:
            raise ValidationError(f"precision must be >= 64 bits, got {self.bits}")
        if self.guard < 0:
            raise ValidationError(f"guard must be >= 0, got {self.guard}")


def required_precision(
    params: Params,
    alpha_hint: float = 0.0,
    beta_hint: float = 0.0,
    guard: int = 64,
) -> PrecisionPolicy:
    """Bits needed so S_n (scale e^(-alpha n)) survives cancellation among
    coefficients (scale e^(beta n)), plus a guard.

    With zero hints this degrades to the floor of 64 bits plus guard.
    The hints are magnitudes; negative alpha (a growing form) only makes
    the requirement easier, so the sum is clamped at zero.
    """
    load = max(0.0, (alpha_hint + beta_hint)) * params.n / math.log(2)
    bits = max(64, math.ceil(load)) + guard
    return PrecisionPolicy(bits=bits, guard=guard)
