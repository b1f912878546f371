"""Local representation densities by exact counting, and relative measures.

Counting ``#{v mod p^k : Y[v] = n mod p^k}`` is done without enumerating all
``p^(km)`` vectors: a change of basis that is invertible over Z_(p) splits the
form into blocks of size one (and size two at p = 2), each block's value
distribution mod ``p^k`` is enumerated directly, and the distributions are
combined by cyclic convolution.  The result is the full histogram over every
residue class, so one pass serves all ``n``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .characters import primes_up_to
from .errors import BudgetExceeded, NotStabilized, ValidationError
from .quadform import QuadraticForm, require_zeta_range, validate

DEFAULT_BUDGET = 10**8


def _val(x: Fraction, p: int) -> float:
    if x == 0:
        return math.inf
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def jordan_blocks(form: QuadraticForm, p: int) -> list[tuple[Fraction, ...]]:
    """Split ``P`` over Z_(p) into blocks ``a x^2`` or ``a x^2 + b x y + c y^2``.

    Each block is returned as its coefficient tuple ``(a,)`` or ``(a, b, c)``;
    all coefficients are p-integral and ``P`` is equivalent to the orthogonal
    sum of the blocks under a basis change invertible over Z_(p).
    """
    B = [[Fraction(x) for x in row] for row in form.gram2]
    idx = list(range(form.m))
    blocks: list[tuple[Fraction, ...]] = []
    while idx:
        best = min(((_val(B[i][j], p), i != j, i, j) for i in idx for j in idx if i <= j))
        v, offdiag, i, j = best
        if v == math.inf:
            raise ValidationError("form is degenerate at p")
        if offdiag and p != 2:
            # e_i <- e_i + e_j gives a diagonal entry of minimal valuation
            for k in idx:
                B[i][k] += B[j][k]
            for k in idx:
                B[k][i] += B[k][j]
            offdiag = False
        if not offdiag:
            piv = B[i][i]
            blocks.append((piv / 2,))
            rest = [k for k in idx if k != i]
            for r in rest:
                f = B[r][i] / piv
                if f:
                    for c in rest:
                        B[r][c] -= f * B[i][c]
            idx = rest
        else:
            a, b, c = B[i][i], B[i][j], B[j][j]
            det = a * c - b * b
            blocks.append((a / 2, b, c / 2))
            rest = [k for k in idx if k not in (i, j)]
            for r in rest:
                # coefficients of e_r projected onto span(e_i, e_j)
                x = (c * B[i][r] - b * B[j][r]) / det
                y = (a * B[j][r] - b * B[i][r]) / det
                for s in rest:
                    B[r][s] -= x * B[i][s] + y * B[j][s]
            idx = rest
    return blocks


def _mod(x: Fraction, q: int) -> int:
    return x.numerator % q * pow(x.denominator, -1, q) % q


@lru_cache(maxsize=4096)
def _block_histogram(coeffs: tuple[int, ...], q: int) -> np.ndarray:
    x = np.arange(q, dtype=np.int64)
    if len(coeffs) == 1:
        vals = coeffs[0] * (x * x % q) % q
    else:
        a, b, c = coeffs
        X, Y = np.meshgrid(x, x, indexing="ij")
        vals = (a * (X * X % q) + b * (X * Y % q) % q + c * (Y * Y % q)) % q
    return np.bincount(vals.ravel(), minlength=q).astype(np.int64)


def _pack(hist, width: int) -> int:
    return int.from_bytes(b"".join(int(x).to_bytes(width, "little") for x in hist), "little")


def _unpack(value: int, q: int, width: int) -> list[int]:
    raw = value.to_bytes(2 * q * width, "little")
    return [int.from_bytes(raw[i * width : (i + 1) * width], "little") for i in range(2 * q)]


def _cyclic_convolve(h1, h2, q: int) -> list[int]:
    """Exact cyclic convolution mod ``q`` via one big-integer product.

    Each histogram is packed into an integer with fixed-width slots wide
    enough that no slot of the product overflows (Kronecker substitution).
    """
    bound = max(h1) * max(h2) * q
    width = (bound.bit_length() + 8) // 8
    full = _unpack(_pack(h1, width) * _pack(h2, width), q, width)
    return [full[i] + full[i + q] for i in range(q)]


@lru_cache(maxsize=256)
def _square_classes(p: int, k: int) -> np.ndarray:
    """Label of every residue mod ``p^k`` (odd p) under unit-square scaling.

    Label 0 is the residue 0; ``1 + 2v + s`` is valuation ``v`` with unit part
    a square (``s = 0``) or a non-square (``s = 1``) mod ``p``.
    """
    q = p**k
    x = np.arange(q, dtype=np.int64)
    v = np.zeros(q, dtype=np.int64)
    unit = x.copy()
    for _ in range(k - 1):
        div = (unit % p == 0) & (x != 0)
        v += div
        unit = np.where(div, unit // p, unit)
    squares = np.zeros(p, dtype=bool)
    squares[(np.arange(1, p) ** 2) % p] = True
    labels = 1 + 2 * v + (~squares[unit % p]).astype(np.int64)
    labels[0] = 0
    return labels


@lru_cache(maxsize=256)
def _class_structure(p: int, k: int) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Class sizes, representatives and ``S[c3, c1, c2] = #{x in c1 : t - x in c2}``
    for any fixed ``t`` in class ``c3``."""
    q = p**k
    labels = _square_classes(p, k)
    n_cls = 2 * k + 1
    sizes = np.bincount(labels, minlength=n_cls)
    reps = [int(np.argmax(labels == c)) for c in range(n_cls)]
    x = np.arange(q, dtype=np.int64)
    S = np.zeros((n_cls, n_cls, n_cls), dtype=object)
    for c3, t in enumerate(reps):
        if sizes[c3] == 0:
            continue
        pair = labels * n_cls + labels[(t - x) % q]
        S[c3] = np.bincount(pair, minlength=n_cls * n_cls).reshape(n_cls, n_cls).astype(object)
    return sizes, np.array(reps), S


class ValueHistogram:
    """Counts ``H[t]`` for every residue ``t`` mod ``q``, stored densely or by class."""

    def __init__(self, q: int, dense=None, classes=None, per_class=None):
        self.q = q
        self._dense = dense
        self._classes = classes
        self._per_class = per_class

    def __getitem__(self, t: int) -> int:
        t %= self.q
        if self._dense is not None:
            return self._dense[t]
        return self._per_class[self._classes[t]]

    def dense(self) -> list[int]:
        if self._dense is not None:
            return list(self._dense)
        return [self._per_class[c] for c in self._classes]

    @property
    def total(self) -> int:
        return sum(self.dense())


def _work_estimate(blocks, p: int, q: int) -> int:
    if p == 2:
        enum = sum(q if len(b) == 1 else q * q for b in blocks)
        return enum + len(blocks) * q * max(1, q.bit_length()) * 8
    k = round(math.log(q, p))
    return (len(blocks) + 2 * k + 1) * q


@lru_cache(maxsize=1024)
def value_histogram(form: QuadraticForm, p: int, k: int, budget: int = DEFAULT_BUDGET) -> ValueHistogram:
    """``H[t] = #{v mod p^k : Y[v] = t mod p^k}`` for every residue ``t``.

    ``budget`` caps the estimated work of block enumeration and convolution.
    """
    q = p**k
    blocks = jordan_blocks(form, p)
    cost = _work_estimate(blocks, p, q)
    if cost > budget:
        raise BudgetExceeded(f"counting mod {p}^{k} needs ~{cost} operations (> {budget})")
    if p == 2:
        hist = None
        for b in blocks:
            h = [int(x) for x in _block_histogram(tuple(_mod(c, q) for c in b), q)]
            hist = h if hist is None else _cyclic_convolve(hist, h, q)
        return ValueHistogram(q, dense=tuple(hist))
    labels = _square_classes(p, k)
    sizes, reps, S = _class_structure(p, k)
    acc = None
    for b in blocks:
        h = _block_histogram(tuple(_mod(c, q) for c in b), q)
        cls = np.array([int(h[t]) for t in reps], dtype=object)
        acc = cls if acc is None else np.einsum("cij,i,j->c", S, acc, cls)
    return ValueHistogram(q, classes=labels, per_class=[int(x) for x in acc])


def count_solutions(form: QuadraticForm, n: int, p: int, k: int, budget: int = DEFAULT_BUDGET) -> int:
    """Exact ``#{v mod p^k : Y[v] = n mod p^k}``."""
    if k < 1:
        raise ValidationError("k must be positive")
    return int(value_histogram(form, p, k, budget)[n])


@dataclass(frozen=True)
class DensityRecord:
    p: int
    k: int
    count: int
    alpha: Fraction
    stabilized: bool


def _vp(n: int, p: int) -> int:
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def local_density(
    form: QuadraticForm,
    n: int,
    p: int,
    k_max: int = 12,
    *,
    budget: int = DEFAULT_BUDGET,
    counter=None,
    strict: bool = True,
    hensel_above: int | None = None,
) -> DensityRecord:
    """Stabilized ``alpha_p(n) = count(k) / p^(k(m-1))``.

    ``k`` starts at ``v_p(n) + 1`` (below that ``n = 0 mod p^k`` and the count
    measures representations of zero) and increases until two consecutive
    values agree.  ``counter(n, p, k)`` may replace direct counting, e.g. to
    consult a cache.

    For ``p > hensel_above`` with ``p`` not dividing ``2nD`` every solution mod
    ``p`` lifts uniquely at each step (Hensel), so the ``k = 1`` count is
    accepted without recounting mod ``p^2``.  By default every prime is
    verified.
    """
    if n == 0:
        raise ValidationError("n must be nonzero")
    count = counter or (lambda n_, p_, k_: count_solutions(form, n_, p_, k_, budget))
    m = form.m
    k = _vp(n, p) + 1
    c_prev = count(n, p, k)
    a_prev = Fraction(c_prev, p ** (k * (m - 1)))
    if hensel_above is not None and p > hensel_above and (2 * n * form.determinant) % p:
        return DensityRecord(p, k, c_prev, a_prev, True)
    while k < k_max:
        c_next = count(n, p, k + 1)
        a_next = Fraction(c_next, p ** ((k + 1) * (m - 1)))
        if a_next == a_prev:
            return DensityRecord(p, k, c_prev, a_prev, True)
        k += 1
        c_prev, a_prev = c_next, a_next
    if strict:
        raise NotStabilized(f"alpha_{p}({n}) did not stabilize by k_max={k_max}")
    return DensityRecord(p, k, c_prev, a_prev, False)


@dataclass(frozen=True)
class MeasureEntry:
    n: int
    value: float
    prime_bound: int
    records: tuple[DensityRecord, ...] = field(repr=False)

    @property
    def euler_product(self) -> float:
        out = 1.0
        for rec in self.records:
            out *= float(rec.alpha)
        return out


def measure_relative(
    form: QuadraticForm,
    n: int,
    prime_bound: int = 50,
    k_max: int = 12,
    *,
    budget: int = DEFAULT_BUDGET,
    counter=None,
    hensel_above: int | None = None,
) -> MeasureEntry:
    """``|n|^(m/2-1) * prod_{p <= prime_bound} alpha_p(n)``.

    This equals the measure of representation ``M(P; n)`` up to one constant
    that does not depend on ``n``.
    """
    profile = validate(form)
    require_zeta_range(profile)
    if n == 0:
        raise ValidationError("n must be nonzero")
    records = tuple(
        local_density(form, n, p, k_max, budget=budget, counter=counter, hensel_above=hensel_above)
        for p in primes_up_to(prime_bound)
    )
    prod = 1.0
    for rec in records:
        prod *= float(rec.alpha)
    value = abs(n) ** (form.m / 2 - 1) * prod
    return MeasureEntry(n=n, value=value, prime_bound=prime_bound, records=records)


@dataclass(frozen=True)
class MeasureTable:
    """Relative measures of representation of ``sign * n`` for ``n = 1..n_max``."""

    form: QuadraticForm
    sign: int
    entries: dict[int, MeasureEntry]
    prime_bound: int
    k_max: int
    normalization: str = "relative"

    def __getitem__(self, n: int) -> float:
        return self.entries[n].value

    def __len__(self) -> int:
        return len(self.entries)

    def values(self, n_max: int | None = None) -> np.ndarray:
        n_max = len(self.entries) if n_max is None else n_max
        return np.array([self.entries[n].value for n in range(1, n_max + 1)])


def measure_table(
    form: QuadraticForm,
    sign: int,
    n_max: int,
    prime_bound: int = 50,
    k_max: int = 12,
    *,
    cache=None,
    threads: int = 1,
    budget: int = DEFAULT_BUDGET,
    hensel_above: int | None = None,
) -> MeasureTable:
    """Relative measures for ``P(v) = sign * n``, ``n = 1..n_max``.

    With a :class:`~siegelmod.cache.DensityCache`, every count is looked up
    before it is computed and appended after.  Work is spread over primes;
    the result does not depend on evaluation order.
    """
    if sign not in (1, -1):
        raise ValidationError("sign must be +1 or -1")
    profile = validate(form)
    if n_max > 0:
        require_zeta_range(profile)
    counter = cache.counter(form, budget) if cache is not None else None
    primes = primes_up_to(prime_bound)

    def per_prime(p: int) -> list[DensityRecord]:
        return [
            local_density(form, sign * n, p, k_max, budget=budget, counter=counter, hensel_above=hensel_above)
            for n in range(1, n_max + 1)
        ]

    if threads > 1 and n_max > 0:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            by_prime = list(pool.map(per_prime, primes))
    else:
        by_prime = [per_prime(p) for p in primes]
    if cache is not None:
        cache.flush()
    entries = {}
    for i, n in enumerate(range(1, n_max + 1)):
        records = tuple(col[i] for col in by_prime)
        prod = 1.0
        for rec in records:
            prod *= float(rec.alpha)
        entries[n] = MeasureEntry(n=sign * n, value=n ** (form.m / 2 - 1) * prod, prime_bound=prime_bound, records=records)
    return MeasureTable(form=form, sign=sign, entries=entries, prime_bound=prime_bound, k_max=k_max)
