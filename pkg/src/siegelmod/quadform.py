"""Half-integral symmetric matrices and their arithmetic invariants.

A form is stored through the integral matrix ``2Y`` (even diagonal), so that
``Y[v] = v^T Y v = (v^T (2Y) v) / 2``.  All invariants are computed with
exact rational arithmetic.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .errors import DimensionMismatch, NotSymmetric, OddDiagonal, Singular, ValidationError

PRINCIPAL = None  # marker for the trivial field K = Q


def _det(mat: list[list[Fraction]]) -> Fraction:
    a = [row[:] for row in mat]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] * inv
            if f:
                for c in range(col, n):
                    a[r][c] -= f * a[col][c]
    return det


def _inverse(mat: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(mat)
    a = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise Singular("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def _divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def squarefree_part(n: int) -> int:
    """Signed squarefree kernel of a nonzero integer."""
    if n == 0:
        raise ValueError("zero has no squarefree part")
    sign = -1 if n < 0 else 1
    n = abs(n)
    out = 1
    p = 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e % 2:
            out *= p
        p += 1
    return sign * out * n


def fundamental_discriminant(d: int) -> int | None:
    """Discriminant of Q(sqrt(d)), or ``PRINCIPAL`` when that field is Q."""
    s = squarefree_part(d)
    if s == 1:
        return PRINCIPAL
    return s if s % 4 == 1 else 4 * s


@dataclass(frozen=True)
class FormProfile:
    D: int
    p: int
    N: int
    dual: "QuadraticForm"
    K_disc: int | None
    K_N_disc: int | None

    @property
    def m(self) -> int:
        return self.dual.m

    @property
    def signature(self) -> tuple[int, int]:
        return self.p, self.m - self.p


@dataclass(frozen=True)
class QuadraticForm:
    """Gram data ``2Y`` of an integral quadratic form ``P(v) = Y[v]``."""

    gram2: tuple[tuple[int, ...], ...]

    def __init__(self, gram2: Sequence[Sequence[int]]):
        rows = tuple(tuple(int(x) for x in row) for row in gram2)
        m = len(rows)
        if m < 1 or any(len(r) != m for r in rows):
            raise DimensionMismatch("gram2 must be a square matrix")
        object.__setattr__(self, "gram2", rows)

    @classmethod
    def diagonal(cls, *entries: int) -> "QuadraticForm":
        """Form ``Y = diag(entries)``, i.e. ``2Y = diag(2*entries)``."""
        m = len(entries)
        return cls([[2 * entries[i] if i == j else 0 for j in range(m)] for i in range(m)])

    @classmethod
    def direct_sum(cls, *forms: "QuadraticForm") -> "QuadraticForm":
        m = sum(f.m for f in forms)
        out = [[0] * m for _ in range(m)]
        off = 0
        for f in forms:
            for i in range(f.m):
                for j in range(f.m):
                    out[off + i][off + j] = f.gram2[i][j]
            off += f.m
        return cls(out)

    @property
    def m(self) -> int:
        return len(self.gram2)

    @cached_property
    def digest(self) -> str:
        text = ";".join(",".join(str(x) for x in row) for row in self.gram2)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    @cached_property
    def _rational(self) -> list[list[Fraction]]:
        return [[Fraction(x) for x in row] for row in self.gram2]

    @cached_property
    def determinant(self) -> int:
        """``D = det(2Y)``."""
        return int(_det(self._rational))

    def neg(self) -> "QuadraticForm":
        return QuadraticForm([[-x for x in row] for row in self.gram2])

    def transform(self, U: Sequence[Sequence[int]]) -> "QuadraticForm":
        """Gram data of ``v -> P(Uv)``, i.e. ``U^T (2Y) U``."""
        m = self.m
        G = self.gram2
        GU = [[sum(G[i][k] * U[k][j] for k in range(m)) for j in range(m)] for i in range(m)]
        return QuadraticForm(
            [[sum(U[k][i] * GU[k][j] for k in range(m)) for j in range(m)] for i in range(m)]
        )

    def __repr__(self) -> str:
        return f"QuadraticForm({[list(r) for r in self.gram2]})"


def validate(form: QuadraticForm) -> FormProfile:
    """Check the invariants of ``form`` and return its full profile."""
    G = form.gram2
    m = form.m
    if m < 2:
        raise DimensionMismatch("degree must be at least 2")
    for i in range(m):
        for j in range(i + 1, m):
            if G[i][j] != G[j][i]:
                raise NotSymmetric(f"entries ({i},{j}) and ({j},{i}) differ")
    for i in range(m):
        if G[i][i] % 2:
            raise OddDiagonal(f"diagonal entry {i} of 2Y is odd")
    D = form.determinant
    if D == 0:
        raise Singular("det(2Y) = 0")
    p = signature(form)[0]
    N = level(form)
    dual = dual_form(form)
    K, K_N = field_characters(form)
    return FormProfile(D=D, p=p, N=N, dual=dual, K_disc=K, K_N_disc=K_N)


def evaluate(form: QuadraticForm, v: Sequence[int]) -> Fraction:
    """``P(v) = Y[v]`` exactly; integral whenever ``v`` is."""
    if len(v) != form.m:
        raise DimensionMismatch(f"vector has length {len(v)}, form has degree {form.m}")
    G = form.gram2
    m = form.m
    total = 0
    for i in range(m):
        if v[i]:
            total += G[i][i] * v[i] * v[i]
            for j in range(i + 1, m):
                total += 2 * G[i][j] * v[i] * v[j]
    return Fraction(total) / 2


def signature(form: QuadraticForm) -> tuple[int, int]:
    """``(p, m - p)`` by symmetric elimination over Q (Sylvester's law)."""
    a = [row[:] for row in form._rational]
    n = len(a)
    pos = 0
    neg = 0
    while n:
        piv = next((i for i in range(n) if a[i][i] != 0), None)
        if piv is None:
            pair = next(((i, j) for i in range(n) for j in range(i + 1, n) if a[i][j] != 0), None)
            if pair is None:
                raise Singular("form is degenerate")
            i, j = pair
            # e_i <- e_i + e_j makes the (i, i) entry 2 a_ij != 0
            for k in range(n):
                a[i][k] += a[j][k]
            for k in range(n):
                a[k][i] += a[k][j]
            piv = i
        d = a[piv][piv]
        if d > 0:
            pos += 1
        else:
            neg += 1
        rest = [k for k in range(n) if k != piv]
        a = [[a[r][c] - a[r][piv] * a[piv][c] / d for c in rest] for r in rest]
        n -= 1
    return pos, neg


def _is_level(inv2: list[list[Fraction]], N: int) -> bool:
    m = len(inv2)
    for i in range(m):
        x = N * inv2[i][i]
        if x.denominator != 1 or x.numerator % 2:
            return False
        for j in range(i + 1, m):
            if (N * inv2[i][j]).denominator != 1:
                return False
    return True


def level(form: QuadraticForm) -> int:
    """Smallest ``N >= 1`` with ``N (2Y)^{-1}`` integral with even diagonal."""
    inv2 = _inverse(form._rational)
    D = form.determinant
    for N in _divisors(2 * abs(D)):
        if _is_level(inv2, N):
            return N
    # N | 2|D| always holds for even 2Y; kept as a guard
    N = 2 * abs(D) + 1
    while not _is_level(inv2, N):
        N += 1
    return N


def dual_form(form: QuadraticForm) -> QuadraticForm:
    """Form with ``2Yhat = N (2Y)^{-1}``, so ``Yhat = (N/4) Y^{-1}``."""
    inv2 = _inverse(form._rational)
    N = level(form)
    rows = [[N * x for x in row] for row in inv2]
    assert all(x.denominator == 1 for row in rows for x in row)
    return QuadraticForm([[int(x) for x in row] for row in rows])


def field_characters(form: QuadraticForm) -> tuple[int | None, int | None]:
    """Fundamental discriminants of the fields K and K_N attached to the form."""
    D = form.determinant
    m = form.m
    if D == 0:
        raise Singular("det(2Y) = 0")
    if m % 2 == 0:
        d = (-1) ** (m // 2) * D
        return fundamental_discriminant(d), fundamental_discriminant(d)
    N = level(form)
    return fundamental_discriminant(2 * abs(D)), fundamental_discriminant(2 * abs(D) * N)


def require_zeta_range(profile: FormProfile) -> None:
    """Zeta-level operations need ``m >= 5`` and an indefinite form."""
    m = profile.m
    if m < 5 or profile.p * (m - profile.p) == 0:
        raise ValidationError(f"need m >= 5 and an indefinite form, got m={m}, p={profile.p}")

