"""Dirichlet characters modulo odd primes, quadratic symbols and theta multipliers.

Characters mod ``r`` are stored by their discrete-log index ``j`` with respect
to the least primitive root ``g``: ``psi(g^k) = exp(2 pi i j k / (r - 1))``.
Conjugation, products and the twist ``psi -> psi^*`` are then index arithmetic
and stay exact; complex values are produced only when a table is requested.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import EvenDenominator, EvenInput, NotInGamma04, NotOddPrime


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def primes_up_to(bound: int) -> list[int]:
    if bound < 2:
        return []
    sieve = np.ones(bound + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(bound**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return [int(p) for p in np.nonzero(sieve)[0]]


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol ``(a/n)`` for odd ``n > 0``."""
    if n <= 0 or n % 2 == 0:
        raise EvenDenominator(f"Jacobi symbol needs odd positive n, got {n}")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol ``(a/n)`` for arbitrary integers."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    if n == 1:
        return result
    return result * jacobi(a, n)


def quad_residue_symbol(c: int, d: int) -> int:
    """``(c/d)`` for odd ``d``, the symbol used in the theta multiplier.

    Zero unless ``gcd(c, d) = 1``; the Jacobi symbol when ``d > 0``.  For
    ``d < 0`` it equals ``(c/|d|)`` when ``c > 0`` and ``-(c/|d|)`` when
    ``c < 0``, and ``(0/\\pm 1) = 1``.
    """
    if d % 2 == 0:
        raise EvenDenominator(f"denominator must be odd, got {d}")
    if math.gcd(c, d) != 1:
        return 0
    if d > 0:
        return jacobi(c, d)
    if c == 0:
        return 1
    sym = jacobi(c, -d)
    return sym if c > 0 else -sym


def epsilon_d(d: int) -> complex:
    """1 for ``d = 1 mod 4`` and ``i`` for ``d = 3 mod 4`` (``-1`` gives ``i``)."""
    if d % 2 == 0:
        raise EvenInput(f"epsilon_d needs odd d, got {d}")
    return 1 + 0j if d % 4 == 1 else 1j


def theta_multiplier(gamma, z: complex) -> complex:
    """``J(gamma, z) = eps_d^{-1} (c/d) (cz + d)^{1/2}`` on Gamma_0(4), principal root."""
    (a, b), (c, d) = gamma
    if a * d - b * c != 1 or c % 4:
        raise NotInGamma04(f"{gamma} is not in Gamma_0(4)")
    return quad_residue_symbol(c, d) / epsilon_d(d) * cmath.sqrt(c * z + d)


def _root_of_unity(num: int, den: int) -> complex:
    """``exp(2 pi i num / den)`` with the quarter turns exact."""
    num %= den
    if (4 * num) % den == 0:
        return (1 + 0j, 1j, -1 + 0j, -1j)[4 * num // den]
    return cmath.exp(2j * math.pi * num / den)


@lru_cache(maxsize=None)
def primitive_root(r: int) -> int:
    if r < 3 or not is_prime(r):
        raise NotOddPrime(f"{r} is not an odd prime")
    phi = r - 1
    factors = [q for q in range(2, phi + 1) if phi % q == 0 and is_prime(q)]
    for g in range(2, r):
        if all(pow(g, phi // q, r) != 1 for q in factors):
            return g
    raise AssertionError("unreachable: every prime has a primitive root")


@lru_cache(maxsize=None)
def _discrete_log(r: int) -> tuple[int, ...]:
    g = primitive_root(r)
    log = [0] * r
    x = 1
    for k in range(r - 1):
        log[x] = k
        x = x * g % r
    return tuple(log)


@dataclass(frozen=True)
class DirichletCharacter:
    """Character mod an odd prime ``r`` with log-index ``index`` (0 = principal)."""

    modulus: int
    index: int

    def __post_init__(self):
        primitive_root(self.modulus)
        object.__setattr__(self, "index", self.index % (self.modulus - 1))

    @property
    def principal(self) -> bool:
        return self.index == 0

    @property
    def order(self) -> int:
        n = self.modulus - 1
        return n // math.gcd(n, self.index)

    @property
    def is_quadratic(self) -> bool:
        return self.order == 2

    def __call__(self, k: int) -> complex:
        r = self.modulus
        k %= r
        if k == 0:
            return 0j
        return _root_of_unity(self.index * _discrete_log(r)[k], r - 1)

    @cached_property
    def values(self) -> np.ndarray:
        """Table ``psi(k)`` for ``k = 0 .. r-1``."""
        return np.array([self(k) for k in range(self.modulus)], dtype=complex)

    def conj(self) -> "DirichletCharacter":
        return DirichletCharacter(self.modulus, -self.index)

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if other.modulus != self.modulus:
            raise ValueError("characters have different moduli")
        return DirichletCharacter(self.modulus, self.index + other.index)

    def __repr__(self) -> str:
        return f"DirichletCharacter(r={self.modulus}, index={self.index})"


def enumerate_characters(r: int) -> list[DirichletCharacter]:
    """All ``r - 1`` characters mod the odd prime ``r``, principal first."""
    primitive_root(r)
    return [DirichletCharacter(r, j) for j in range(r - 1)]


def legendre_character(r: int) -> DirichletCharacter:
    """The quadratic character ``(./r)``."""
    return DirichletCharacter(r, (r - 1) // 2)


def principal_character(r: int) -> DirichletCharacter:
    return DirichletCharacter(r, 0)


def gauss_sum(psi: DirichletCharacter, n: int = 1) -> complex:
    """``tau_psi(n) = sum over units m mod r of psi(m) e(mn/r)``, summed directly."""
    r = psi.modulus
    return complex(
        sum(psi(m) * _root_of_unity(m * n, r) for m in range(1, r))
    )


def psi_star(psi: DirichletCharacter, ell: int) -> DirichletCharacter:
    """``psi^*(k) = conj(psi(k)) (k/r)^ell``."""
    r = psi.modulus
    return DirichletCharacter(r, -psi.index + ell * (r - 1) // 2)


def c_lr(ell: int, r: int) -> complex:
    """1 for even ``ell``; ``eps_r^ell`` for odd ``ell``."""
    if r < 3 or not is_prime(r):
        raise NotOddPrime(f"{r} is not an odd prime")
    if ell % 2 == 0:
        return 1 + 0j
    return epsilon_d(r) ** ell if ell >= 0 else 1 / epsilon_d(r) ** (-ell)


@dataclass(frozen=True)
class KroneckerCharacter:
    """``n -> (disc/n)``; ``disc=None`` is the principal character of Q."""

    disc: int | None

    def __call__(self, n: int) -> int:
        if self.disc is None:
            return 1 if n != 0 else 0
        return kronecker(self.disc, n)

    @property
    def principal(self) -> bool:
        return self.disc is None


def kronecker_chi(chi: KroneckerCharacter, n: int) -> int:
    return chi(n)
