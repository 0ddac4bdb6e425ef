"""Exact multiplicative-arithmetic substrate.

Primes, 64-bit factorization, the unit-group structure of (Z/fZ)^*, and
Dirichlet characters whose values are tracked as exponents: a character of
order dividing n is stored as a vector (k_1, ..., k_r) with

    chi(g_i) = zeta_n^{k_i},    zeta_n = exp(2*pi*i/n),

one exponent per generator g_i of (Z/fZ)^*.  Everything downstream works with
these exponents; complex values appear only in floating-point reporting code.

Unit-group convention: (Z/p^kZ)^* for odd p is cyclic, generated by the
smallest primitive root mod p^k.  For p = 2 the two-generator presentation
{-1, 5} is used (empty for modulus 2, the single generator -1 for 4).
Generators of a composite modulus are CRT lifts, ordered by increasing prime.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd, isqrt, lcm, prod

import numpy as np

__all__ = [
    "is_prime",
    "primes_up_to",
    "Factorization",
    "factorize",
    "primitive_root",
    "ResidueUnitGroup",
    "unit_group",
    "DirichletCharacter",
    "characters_of_order_dividing",
    "char_eval",
    "primitive_part",
    "divisors",
    "euler_phi",
    "moebius",
]

_TRIAL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

# Witness set making Miller-Rabin deterministic for all n < 3.3 * 10^24,
# which covers the 64-bit inputs this package deals with.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic primality test for 0 <= n < 2^64."""
    if n < 2:
        return False
    for p in _TRIAL_PRIMES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_up_to(limit: int) -> np.ndarray:
    """All primes <= limit as an int64 array (simple Eratosthenes sieve)."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.nonzero(sieve)[0].astype(np.int64)


@dataclass(frozen=True)
class Factorization:
    """A positive integer together with its prime factorization."""

    value: int
    factors: tuple  # ((p1, e1), (p2, e2), ...) with p1 < p2 < ...

    def __post_init__(self):
        if prod(p**e for p, e in self.factors) != self.value:
            raise ValueError("factors do not multiply back to value")
        ps = [p for p, _ in self.factors]
        if ps != sorted(set(ps)):
            raise ValueError("primes must be strictly increasing")

    @property
    def primes(self):
        return tuple(p for p, _ in self.factors)

    def exponent(self, p: int) -> int:
        for q, e in self.factors:
            if q == p:
                return e
        return 0


def _pollard_brent(n: int) -> int:
    """A nontrivial factor of composite odd n (Brent's cycle variant).

    Deterministic: the (y0, c) parameters are swept in a fixed order.
    """
    if n % 2 == 0:
        return 2
    for c in range(1, 100):
        y, m, g, r, q = 2, 128, 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ArithmeticError(f"failed to factor {n}")  # not reachable for 64-bit inputs


def factorize(value: int) -> Factorization:
    """Prime factorization of value, 1 <= value <= 2^63 - 1."""
    if not isinstance(value, (int, np.integer)):
        raise TypeError("value must be an integer")
    value = int(value)
    if value < 1:
        raise ValueError("factorize requires a positive integer")
    if value > 2**63 - 1:
        raise ValueError("value exceeds the 63-bit range limit")
    n = value
    factors = {}
    for p in _TRIAL_PRIMES:
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
    p = 41
    while p * p <= n and p < 10_000:
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
        p += 2
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            factors[m] = factors.get(m, 0) + 1
            continue
        d = _pollard_brent(m)
        stack.append(d)
        stack.append(m // d)
    return Factorization(value, tuple(sorted(factors.items())))


def divisors(n: int) -> list:
    """Sorted list of positive divisors of n."""
    divs = [1]
    for p, e in factorize(n).factors:
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def euler_phi(n: int) -> int:
    return prod(p ** (e - 1) * (p - 1) for p, e in factorize(n).factors)


def moebius(n: int) -> int:
    f = factorize(n).factors
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


@lru_cache(maxsize=None)
def primitive_root(q: int) -> int:
    """Smallest primitive root mod q, for q an odd prime power or 2 or 4."""
    if q in (2, 4):
        return q - 1
    fac = factorize(q)
    if len(fac.factors) != 1 or fac.primes[0] == 2:
        raise ValueError("primitive roots exist only mod odd prime powers, 2 and 4")
    p, k = fac.factors[0]
    m = (p - 1) * p ** (k - 1)
    prime_divs = [r for r, _ in factorize(m).factors]
    g = 2
    while True:
        if q % g != 0 and all(pow(g, m // r, q) != 1 for r in prime_divs):
            return g
        g += 1


def _dlog_bsgs(base: int, target: int, order: int, mod: int, table_cache: dict) -> int:
    """x with base^x = target (mod mod), 0 <= x < order.  Baby-step giant-step."""
    m = isqrt(order - 1) + 1
    key = (base, mod, m)
    baby = table_cache.get(key)
    if baby is None:
        baby = {}
        e = 1
        for j in range(m):
            baby.setdefault(e, j)
            e = e * base % mod
        table_cache[key] = baby
    giant = pow(base, (order - m) % order if order else 0, mod)  # base^(-m)
    giant = pow(base, order - (m % order), mod) if order > 0 else 1
    y = target % mod
    for i in range(m + 1):
        j = baby.get(y)
        if j is not None:
            x = (i * m + j) % order
            if pow(base, x, mod) == target % mod:
                return x
        y = y * giant % mod
    raise ArithmeticError("discrete log not found (inconsistent inputs)")


def _dlog_cyclic(g: int, a: int, order: int, mod: int, cache: dict) -> int:
    """Discrete log in the cyclic group <g> of the given order, Pohlig-Hellman."""
    if order == 1:
        return 0
    x = 0
    m = 1
    for p, e in factorize(order).factors:
        pe = p**e
        # solve in the subgroup of order p^e
        gp = pow(g, order // pe, mod)
        ap = pow(a, order // pe, mod)
        xk = 0
        gamma = pow(gp, pe // p, mod)  # order p
        for k in range(e):
            h = pow(ap * pow(gp, (pe - xk) % pe, mod) % mod, pe // p ** (k + 1), mod)
            d = _dlog_bsgs(gamma, h, p, mod, cache)
            xk += d * p**k
        # CRT combine
        r = pe
        inv = pow(m % r, -1, r) if m % r else 0
        x = x + m * (((xk - x) * inv) % r)
        m *= r
    return x % order


class ResidueUnitGroup:
    """Generator/order presentation of (Z/fZ)^*.

    generators are residues mod f, CRT-lifted from the prime-power components
    of f; orders[i] is the multiplicative order of generators[i].  The product
    of the orders is phi(f) and every unit has a unique exponent vector.
    """

    def __init__(self, modulus: int):
        if modulus < 1:
            raise ValueError("modulus must be positive")
        self.modulus = modulus
        fac = factorize(modulus)
        self.prime_powers = tuple((p, e) for p, e in fac.factors)
        gens = []
        orders = []
        comp = []  # (p, k, q=p^k, local generators, local orders)
        for p, k in self.prime_powers:
            q = p**k
            if p == 2:
                if k == 1:
                    local = []
                elif k == 2:
                    local = [(q - 1, 2)]
                else:
                    local = [(q - 1, 2), (5, 2 ** (k - 2))]
            else:
                local = [(primitive_root(q), (p - 1) * p ** (k - 1))]
            comp.append((p, k, q, tuple(g for g, _ in local), tuple(o for _, o in local)))
            cofactor = modulus // q
            if cofactor > 1:
                inv = pow(cofactor, -1, q)
                for g, o in local:
                    # CRT lift: g mod q, 1 mod (f/q)
                    lifted = (1 + cofactor * ((g - 1) * inv % q)) % modulus
                    gens.append(lifted)
                    orders.append(o)
            else:
                for g, o in local:
                    gens.append(g % modulus)
                    orders.append(o)
        self.generators = tuple(gens)
        self.orders = tuple(orders)
        self.components = tuple(comp)
        self._bsgs_cache = {}
        assert prod(self.orders) == euler_phi(modulus)

    def __repr__(self):
        return f"ResidueUnitGroup({self.modulus}, gens={self.generators}, orders={self.orders})"

    def dlog(self, a: int) -> tuple:
        """Exponent vector of a unit a: a = prod generators[i]^v[i] mod f."""
        a = a % self.modulus
        if gcd(a, self.modulus) != 1:
            raise ValueError(f"{a} is not a unit mod {self.modulus}")
        vec = []
        for p, k, q, local_gens, local_orders in self.components:
            aq = a % q
            if p == 2:
                if k == 1:
                    continue
                if k == 2:
                    vec.append(0 if aq == 1 else 1)
                    continue
                s = 0 if aq % 4 == 1 else 1
                if s:
                    aq = (-aq) % q
                vec.append(s)
                vec.append(_dlog_cyclic(5, aq, 2 ** (k - 2), q, self._bsgs_cache))
            else:
                g = local_gens[0]
                vec.append(_dlog_cyclic(g, aq, local_orders[0], q, self._bsgs_cache))
        return tuple(vec)


@lru_cache(maxsize=256)
def unit_group(modulus: int) -> ResidueUnitGroup:
    return ResidueUnitGroup(modulus)


@dataclass(frozen=True)
class DirichletCharacter:
    """A character of (Z/fZ)^* with values in the n-th roots of unity.

    exponents[i] is the exponent k_i with chi(g_i) = zeta_n^{k_i}; validity
    requires k_i * orders[i] = 0 (mod n).  chi(a) is undefined (None) when
    gcd(a, f) > 1.
    """

    modulus: int
    n: int
    exponents: tuple
    group: ResidueUnitGroup = field(repr=False, compare=False, hash=False, default=None)

    def __post_init__(self):
        g = self.group if self.group is not None else unit_group(self.modulus)
        object.__setattr__(self, "group", g)
        if len(self.exponents) != len(g.generators):
            raise ValueError("exponent vector length does not match generator count")
        for k, o in zip(self.exponents, g.orders):
            if (k * o) % self.n != 0:
                raise ValueError("exponent inconsistent with generator order")

    def __call__(self, a: int):
        return self.eval(a)

    def eval(self, a: int):
        """chi(a) as an exponent in Z/nZ, or None when gcd(a, f) > 1."""
        if gcd(a, self.modulus) != 1:
            return None
        if self.modulus == 1:
            return 0
        vec = self.group.dlog(a)
        return sum(k * v for k, v in zip(self.exponents, vec)) % self.n

    def order(self) -> int:
        """Exact order of the character (divides n)."""
        o = 1
        for k in self.exponents:
            o = lcm(o, self.n // gcd(self.n, k))
        return o

    def power(self, a: int) -> "DirichletCharacter":
        return DirichletCharacter(
            self.modulus, self.n, tuple(k * a % self.n for k in self.exponents), self.group
        )

    def __pow__(self, a: int) -> "DirichletCharacter":
        return self.power(a)

    def conductor(self) -> int:
        """Smallest modulus through which the character factors."""
        cond = 1
        idx = 0
        for p, k, q, local_gens, local_orders in self.group.components:
            if p == 2:
                if k == 1:
                    continue
                if k == 2:
                    e_m1 = self.exponents[idx]
                    idx += 1
                    cond *= 4 if e_m1 % self.n else 1
                    continue
                e_m1 = self.exponents[idx]
                e_5 = self.exponents[idx + 1]
                idx += 2
                d5 = self.n // gcd(self.n, e_5)
                local = 1
                if e_m1 % self.n:
                    local = 4
                if d5 > 1:
                    v2 = (d5 & -d5).bit_length() - 1  # d5 is a power of 2 here
                    local = max(local, 2 ** (2 + v2))
                cond *= local
            else:
                e = self.exponents[idx]
                idx += 1
                d = self.n // gcd(self.n, e)
                if d > 1:
                    vp = 0
                    while d % p == 0:
                        d //= p
                        vp += 1
                    cond *= p ** (1 + vp)
        return cond

    @property
    def is_primitive(self) -> bool:
        return self.conductor() == self.modulus

    def is_zero_at(self, a: int) -> bool:
        return gcd(a, self.modulus) != 1


def characters_of_order_dividing(f: int, n: int) -> list:
    """All Dirichlet characters mod f with order dividing n.

    The count is prod_i gcd(n, orders[i]) over the generators of (Z/fZ)^*.
    """
    if f < 1:
        raise ValueError("modulus must be >= 1")
    if n < 2:
        raise ValueError("order bound must be >= 2")
    g = unit_group(f)
    choice_lists = []
    for o in g.orders:
        d = gcd(n, o)
        step = n // d
        choice_lists.append(range(0, n, step))
    chars = []
    stack = [()]
    for choices in choice_lists:
        stack = [vec + (c,) for vec in stack for c in choices]
    for vec in stack:
        chars.append(DirichletCharacter(f, n, vec, g))
    return chars


def char_eval(chi: DirichletCharacter, a: int):
    """chi(a) as an exponent in Z/nZ; None is the zero-marker for gcd(a,f)>1."""
    return chi.eval(a)


def primitive_part(chi: DirichletCharacter) -> DirichletCharacter:
    """The primitive character inducing chi (same values on units coprime to
    the modulus, smallest possible modulus)."""
    f = chi.conductor()
    if f == chi.modulus:
        return chi
    g = unit_group(f)
    exps = []
    for gen in g.generators:
        a = gen
        while gcd(a, chi.modulus) != 1:
            a += f
        exps.append(chi.eval(a))
    return DirichletCharacter(f, chi.n, tuple(exps), g)
