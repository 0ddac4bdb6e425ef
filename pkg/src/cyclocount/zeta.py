"""Two independent computations of the discriminant zeta function

    D(Lambda, P; s) = sum over surjective characters chi (order exactly n,
                      family-admissible, split at P, local conditions Lambda)
                      of NDelta(chi)^(-s),

as exact Dirichlet coefficient arrays a_1..a_M:

  * brute force: enumerate the fields and count phi(n) characters each;
  * Euler side: Moebius inversion over d | n removes the surjectivity
    condition; the full-character series F_n is unfolded by Poisson summation
    into a finite sum over x in U_S(n) of Euler products whose local factors
    are explicit:

      - p in P:                      1/n
      - p coprime to nP, p != 1 (n): 1
      - p coprime to nP, p  = 1 (n): 1 + (sum_{d | d_p(x)} mu(n/d) d) p^(-(n-1)s)
      - p | n, infinity:             finite sums over the local characters
                                     allowed by Lambda, weighted by the
                                     conductor-discriminant exponent.

    Here d_p(x) is the largest divisor d of n with x a d-th power mod p.
    The proper divisors d < n contribute finitely many characters unramified
    outside n (entire corrections).

Cyclotomic bookkeeping: coefficients live in Z[zeta_n], represented as length-n
integer vectors c with value sum c_k zeta_n^k (group-ring arithmetic); a final
reduction mod the n-th cyclotomic polynomial certifies that every Dirichlet
coefficient is a rational integer before the exact division by the Poisson
normalization.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import gcd, isqrt, prod

import numpy as np

from .arith import (
    DirichletCharacter,
    characters_of_order_dividing,
    divisors,
    euler_phi,
    factorize,
    moebius,
    primes_up_to,
    primitive_part,
    unit_group,
)
from .family import (
    ARCH_COMPLEX,
    ARCH_SPLIT,
    LambdaSpec,
    LocalBehavior,
    _prime_to_p_value,
    cubic_census_table,
    enumerate_family,
    quadratic_discriminants,
    quadratic_lambda_mask,
    quadratic_split_mask,
    wild_character_options,
)

__all__ = [
    "UsElement",
    "us_group",
    "power_residue_degree",
    "tame_local_factor",
    "character_sum_identity_value",
    "FrobeniusCheck",
    "frobenius_char_sum_check",
    "frobenius_sweep",
    "cyclotomic_power_degree",
    "is_nth_power_in_cyclotomic",
    "DirichletCoeffs",
    "coeffs_bruteforce",
    "coeffs_eulerside",
    "unram_outside_S_count",
    "f_hat_wild",
    "f_hat_arch",
]


# ---------------------------------------------------------------------------
# Exact cyclotomic vectors (group ring Z[Z/nZ])
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple:
    """Coefficients (low degree first) of the n-th cyclotomic polynomial."""
    # divide x^n - 1 by Phi_d for all proper divisors d of n
    poly = [-1] + [0] * (n - 1) + [1]
    for d in divisors(n)[:-1]:
        phi_d = cyclotomic_polynomial(d)
        poly = _poly_divide_exact(poly, list(phi_d))
    return tuple(poly)


def _poly_divide_exact(num, den):
    num = list(num)
    q = [0] * (len(num) - len(den) + 1)
    for i in range(len(q) - 1, -1, -1):
        c = num[i + len(den) - 1]
        assert c % den[-1] == 0
        q[i] = c // den[-1]
        for j, dj in enumerate(den):
            num[i + j] -= q[i] * dj
    assert all(c == 0 for c in num)
    return q


def _cyc_mul(a, b, n):
    """Product in the group ring; int operands are scalars."""
    if isinstance(a, int) and isinstance(b, int):
        return a * b
    if isinstance(a, int):
        a, b = b, a
    if isinstance(b, int):
        return tuple(c * b for c in a)
    out = [0] * n
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    out[(i + j) % n] += ai * bj
    return tuple(out)


def _cyc_add(a, b, n):
    if isinstance(a, int) and isinstance(b, int):
        return a + b
    if isinstance(a, int):
        a = (a,) + (0,) * (n - 1)
    if isinstance(b, int):
        b = (b,) + (0,) * (n - 1)
    return tuple(x + y for x, y in zip(a, b))


def _cyc_rational(a, n) -> int:
    """The rational integer a represents; raises if a is irrational."""
    if isinstance(a, int):
        return a
    rem = list(a)
    phi = list(cyclotomic_polynomial(n))
    d = len(phi) - 1
    for i in range(len(rem) - 1, d - 1, -1):
        c = rem[i]
        if c:
            for j in range(d + 1):
                rem[i - d + j] -= c * phi[j]
    if any(rem[1:]):
        raise AssertionError(f"coefficient is not rational: {a}")
    return rem[0]


def _zeta_pow(k: int, n: int):
    """zeta_n^k as a group-ring vector (or the integer 1/-1 when rational)."""
    k %= n
    if k == 0:
        return 1
    if n % 2 == 0 and k == n // 2:
        return -1
    v = [0] * n
    v[k] = 1
    return tuple(v)


# ---------------------------------------------------------------------------
# U_S(n) and the tame local data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UsElement:
    """A class of Q^* / (Q^*)^n generated by -1 and the primes of S."""

    value: int  # signed integer representative
    sign: int  # 0 or 1; the factor (-1)^sign (only nontrivial for n even)
    exponents: tuple  # ((p, e_p), ...) with 0 <= e_p < n

    def vp(self, p: int) -> int:
        for q, e in self.exponents:
            if q == p:
                return e
        return 0


def us_group(n: int, S) -> list:
    """Representatives of the subgroup of Q^*/(Q^*)^n generated by -1 and the
    primes of S; size n^|S| times (2 if n even else 1).  S must contain every
    prime divisor of n."""
    S = sorted(set(int(p) for p in S))
    for p, _ in factorize(n).factors:
        if p not in S:
            raise ValueError(f"S must contain the prime {p} dividing n")
    signs = (0, 1) if n % 2 == 0 else (0,)
    out = []
    combos = [()]
    for p in S:
        combos = [c + ((p, e),) for c in combos for e in range(n)]
    for s in signs:
        for c in combos:
            val = (-1) ** s * prod(p**e for p, e in c)
            out.append(UsElement(val, s, tuple((p, e) for p, e in c if e)))
    return out


def power_residue_degree(x, p: int, n: int) -> int:
    """Largest d | n with x a d-th power mod p (requires p = 1 mod n)."""
    xv = x.value if isinstance(x, UsElement) else int(x)
    if p % n != 1:
        raise ValueError("power_residue_degree requires p = 1 (mod n)")
    if xv % p == 0:
        raise ValueError("x must be a unit at p")
    best = 1
    for d in divisors(n):
        if pow(xv % p, (p - 1) // d, p) == 1:
            best = d
    return best


def tame_local_factor(x, p: int, n: int):
    """Coefficient c_p of p^(-(n-1)s) in the tame local factor at p, or None
    when p != 1 (mod n) so the factor is identically 1."""
    if n % p == 0:
        raise ValueError("tame factors live at primes not dividing n")
    if p % n != 1:
        return None
    dv = power_residue_degree(x, p, n)
    return sum(moebius(n // d) * d for d in divisors(dv))


def character_sum_identity_value(dv: int, n: int) -> int:
    """phi(n) mu(n_v) / phi(n_v) with n_v = n/dv; equals the tame coefficient."""
    nv = n // dv
    return euler_phi(n) * moebius(nv) // euler_phi(nv)


# ---------------------------------------------------------------------------
# Global power degree in Q(zeta_n), by sampling split primes
# ---------------------------------------------------------------------------


def cyclotomic_power_degree(x, n: int, samples: int = 120) -> int:
    """Largest d | n such that x is a d-th power in Q(zeta_n).

    Determined by intersecting the local power-residue degrees d_p(x) over
    `samples` primes p = 1 (mod n); by Chebotarev the true degree is attained
    on a positive-density set, so the sampled gcd stabilizes immediately in
    practice.  x = 1 short-circuits exactly.
    """
    xv = x.value if isinstance(x, UsElement) else int(x)
    return _power_degree_cached(xv, n, samples)


@lru_cache(maxsize=None)
def _power_degree_cached(xv: int, n: int, samples: int) -> int:
    if xv == 1:
        return n
    d0 = n
    count = 0
    p = n + 1
    while count < samples:
        if xv % p != 0 and _is_prime_cached(p):
            d0 = gcd(d0, power_residue_degree(xv, p, n))
            count += 1
            if d0 == 1:
                return 1
        p += n
    return d0


@lru_cache(maxsize=None)
def _is_prime_cached(p: int) -> bool:
    from .arith import is_prime

    return is_prime(p)


def is_nth_power_in_cyclotomic(x, n: int) -> bool:
    return cyclotomic_power_degree(x, n) == n


# ---------------------------------------------------------------------------
# Frobenius / character-sum identity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrobeniusCheck:
    ok: bool
    multiplicity_ok: bool  # every order-n_v element hit phi(n)/phi(n_v) times
    char_sum_ok: bool  # sum chi(sigma_w) = sum_{d | d_v} mu(n/d) d, all full-order chi
    p: int
    x: int
    n_v: int
    d_v: int
    detail: str = ""


def frobenius_char_sum_check(x, p: int, n: int) -> FrobeniusCheck:
    """Exact verification, inside F_p, of the Frobenius multiset and the
    character-sum identity for the Kummer extension attached to x.

    The phi(n) embeddings of the n-th roots of unity into F_p are indexed by
    u in (Z/nZ)^*; under embedding u the Frobenius at the corresponding place
    acts on x^(1/n) by zeta_n^(m u^(-1)) where x^((p-1)/n) = z^m for the
    reference root z.  The identity is checked for every full-order character.
    """
    from .arith import primitive_root

    xv = x.value if isinstance(x, UsElement) else int(x)
    if p % n != 1:
        raise ValueError("requires p = 1 (mod n)")
    if xv % p == 0 or n % p == 0:
        raise ValueError("p must be unramified in the Kummer extension")
    g = primitive_root(p)
    z = pow(g, (p - 1) // n, p)
    dlog = {}
    t = 1
    for k in range(n):
        dlog[t] = k
        t = t * z % p
    m = dlog[pow(xv % p, (p - 1) // n, p)]
    d_v = gcd(n, m) if m else n
    n_v = n // d_v
    d0 = cyclotomic_power_degree(xv, n)
    nprime = n // d0  # [F_x : Q(zeta_n)]

    units = [u for u in range(1, n) if gcd(u, n) == 1]
    frob = [m * pow(u, -1, n) % n for u in units]
    # (i) multiplicities: each a with n/gcd(n,a) = n_v and (n/n') | a must be
    # hit exactly phi(n)/phi(n_v) times, and nothing else is hit
    expected = euler_phi(n) // euler_phi(n_v)
    targets = [
        a
        for a in range(n)
        if (n // gcd(n, a) if a else 1) == n_v and a % (n // nprime) == 0
    ]
    mult_ok = all(frob.count(a) == expected for a in targets) and sorted(
        set(frob)
    ) == sorted(targets)

    rhs = sum(moebius(n // d) * d for d in divisors(d_v))
    char_ok = True
    detail = ""
    for r in [u for u in range(1, nprime + 1) if gcd(u, nprime) == 1]:
        total = 0
        for a in frob:
            total = _cyc_add(total, _zeta_pow(r * a % n, n), n)
        try:
            lhs = _cyc_rational(total, n)
        except AssertionError:
            char_ok, detail = False, "character sum is irrational"
            break
        if lhs != rhs:
            char_ok, detail = False, f"char sum {lhs} != {rhs} at twist {r}"
            break
    return FrobeniusCheck(mult_ok and char_ok, mult_ok, char_ok, p, xv, n_v, d_v, detail)


@lru_cache(maxsize=None)
def _identity_check_cached(n: int, m: int, nprime: int):
    """The multiset and character-sum checks depend only on (n, m mod n, n');
    returns (mult_ok, char_ok, detail)."""
    units = [u for u in range(1, n) if gcd(u, n) == 1]
    frob = [m * pow(u, -1, n) % n for u in units]
    d_v = gcd(n, m) if m else n
    n_v = n // d_v
    expected = euler_phi(n) // euler_phi(n_v)
    targets = [
        a
        for a in range(n)
        if (n // gcd(n, a) if a else 1) == n_v and a % (n // nprime) == 0
    ]
    mult_ok = all(frob.count(a) == expected for a in targets) and sorted(
        set(frob)
    ) == sorted(targets)
    rhs = sum(moebius(n // d) * d for d in divisors(d_v))
    for r in [u for u in range(1, nprime + 1) if gcd(u, nprime) == 1]:
        total = 0
        for a in frob:
            total = _cyc_add(total, _zeta_pow(r * a % n, n), n)
        try:
            lhs = _cyc_rational(total, n)
        except AssertionError:
            return mult_ok, False, "character sum is irrational"
        if lhs != rhs:
            return mult_ok, False, f"char sum {lhs} != {rhs} at twist {r}"
    return mult_ok, True, ""


def frobenius_sweep(n: int, S, pmax: int) -> dict:
    """Run the Frobenius/character-sum verification for every x in U_S(n) and
    every prime p = 1 (mod n), p <= pmax, p coprime to the support of x.

    One modular exponentiation per (x, p) pair; the exact identity checks are
    deduplicated through (n, m, n').  Returns counts and failure witnesses.
    """
    from .arith import primitive_root

    xs = us_group(n, S)
    ps = [int(p) for p in primes_up_to(pmax) if p % n == 1 and n % int(p) != 0]
    mvals = {x.value: {} for x in xs}
    for p in ps:
        g = primitive_root(p)
        z = pow(g, (p - 1) // n, p)
        dlog = {}
        t = 1
        for k in range(n):
            dlog[t] = k
            t = t * z % p
        e = (p - 1) // n
        for x in xs:
            if x.value % p == 0:
                continue
            mvals[x.value][p] = dlog[pow(x.value % p, e, p)]
    total = 0
    failures = []
    for x in xs:
        mm = mvals[x.value]
        if not mm:
            continue
        d0 = n
        for m in mm.values():
            d0 = gcd(d0, gcd(n, m) if m else n)
        nprime = n // d0
        for p, m in mm.items():
            total += 1
            mult_ok, char_ok, detail = _identity_check_cached(n, m % n, nprime)
            if not (mult_ok and char_ok):
                failures.append((x.value, p, detail or "multiplicity mismatch"))
    return {"total": total, "failures": failures, "n": n, "pmax": pmax}


# ---------------------------------------------------------------------------
# Local Fourier factors at p | n and at infinity
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _wild_unit_eval_table(p: int, n: int):
    """Character objects mod p^K for evaluating unit parts of wild options."""
    opts = wild_character_options(p, n)
    K = opts[0].level
    group = unit_group(p**K)
    return {o.exponents: DirichletCharacter(p**K, n, o.exponents, group) for o in opts}, p**K


def wild_local_characters(p: int, n: int, lam: LambdaSpec) -> list:
    """All local characters (unit part, unramified value t) at p | n allowed
    by Lambda, as (option, t, behavior) triples."""
    out = []
    for opt in wild_character_options(p, n):
        sub = n // opt.order  # image of the unit part is sub * Z/nZ
        for t in range(n):
            fdeg = sub // gcd(sub, t)
            beh = LocalBehavior(opt.order, fdeg, opt.cond_exp)
            if lam.allows_wild(p, beh):
                out.append((opt, t, beh))
    return out


def _wild_value_exponent(opt, t: int, x: UsElement, p: int, n: int) -> int:
    """Exponent of phi(x) for the local character (opt, t) at p."""
    table, q = _wild_unit_eval_table(p, n)
    chi = table[opt.exponents]
    v = x.vp(p)
    unit = x.value // p**v if v else x.value
    return (t * v + chi.eval(unit % q)) % n


def f_hat_wild(p: int, n: int, lam: LambdaSpec, x: UsElement, s):
    """Local Fourier factor at p | n evaluated at a real s (used for the
    leading constant): (1/n) sum over allowed characters of phi(x) p^(-w s)."""
    import mpmath as mp

    total = mp.mpc(0)
    for opt, t, _ in wild_local_characters(p, n, lam):
        k = _wild_value_exponent(opt, t, x, p, n)
        total += mp.expjpi(mp.mpf(2 * k) / n) * mp.mpf(p) ** (-opt.phi_exp * s)
    return total / n


def f_hat_arch(n: int, lam: LambdaSpec, x: UsElement) -> int:
    """Archimedean factor: sum of phi(sign x) over allowed real-place
    behaviors (trivial always contributes 1; the order-2 behavior, available
    for even n, contributes sign(x))."""
    total = 0
    if lam.allows_arch(ARCH_SPLIT):
        total += 1
    if n % 2 == 0 and lam.allows_arch(ARCH_COMPLEX):
        total += 1 if x.value > 0 else -1
    return total


# ---------------------------------------------------------------------------
# Dirichlet coefficients: brute force side
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DirichletCoeffs:
    bound: int
    coeffs: np.ndarray  # index m in 0..bound; a_0 = 0
    provenance: str

    def __eq__(self, other):
        return (
            self.bound == other.bound
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def nonzero(self):
        idx = np.nonzero(self.coeffs)[0]
        return [(int(m), int(self.coeffs[m])) for m in idx]


def coeffs_bruteforce(n: int, lam=None, P=(), M: int = 1000, range_limit=10**7) -> DirichletCoeffs:
    """a_m = phi(n) * #{fields with NDelta = m passing all filters}."""
    lam = lam or LambdaSpec.unrestricted(n)
    P = tuple(sorted(P))
    phi_n = euler_phi(n)
    out = np.zeros(M + 1, dtype=np.int64)
    if n == 2:
        D = quadratic_discriminants(M)
        mask = quadratic_lambda_mask(D, lam)
        for p in P:
            mask &= quadratic_split_mask(D, p)
        np.add.at(out, np.abs(D[mask]), 1)
    elif n == 3:
        table = cubic_census_table(isqrt(M), require=P, lam=lam)
        np.add.at(out, table["delta"], 2)
    else:
        for d in enumerate_family(n, lam, M, P, range_limit=range_limit):
            out[d.discriminant] += phi_n
    return DirichletCoeffs(M, out, "brute-force")


# ---------------------------------------------------------------------------
# Dirichlet coefficients: Euler / Poisson side
# ---------------------------------------------------------------------------


def _poly_multiply_factor(poly: dict, terms, M: int, n: int) -> dict:
    """Multiply a Dirichlet polynomial {m: coeff} by sum of (m_i, c_i)."""
    out = {}
    for m, c in poly.items():
        for mi, ci in terms:
            mm = m * mi
            if mm > M:
                continue
            v = _cyc_mul(c, ci, n)
            if mm in out:
                out[mm] = _cyc_add(out[mm], v, n)
            else:
                out[mm] = v
    return out


def _apply_tame_factor(poly: dict, pk: int, c: int, M: int) -> None:
    """In-place multiply by (1 + c * [at pk]).  No index collisions occur:
    primes are applied in increasing order, so m*pk is p-free in poly."""
    for m in sorted(poly.keys(), reverse=True):
        mm = m * pk
        if mm <= M:
            add = poly[m] * c if isinstance(poly[m], int) else tuple(v * c for v in poly[m])
            assert mm not in poly
            poly[mm] = add


def coeffs_eulerside(n: int, lam=None, P=(), M: int = 1000) -> DirichletCoeffs:
    """Euler/Poisson-side coefficients of D(Lambda, P; s), truncated at M.

    Exact: all arithmetic is integer group-ring arithmetic; the final
    normalization division and rationality reduction are asserted.
    """
    lam = lam or LambdaSpec.unrestricted(n)
    P = tuple(sorted(P))
    for p in P:
        if n % p == 0:
            raise ValueError("split primes must be coprime to n")
    wild_ps = list(factorize(n).primes)
    S = sorted(set(wild_ps) | set(P))
    units = 2 if n % 2 == 0 else 1
    # each wild place carries a 1/n normalization; each P place a bare 1/n
    scale = units * n ** (len(wild_ps) + len(P))

    # tame primes: p = 1 mod n, p^(n-1) <= M, p not in S
    tame = [
        int(p)
        for p in primes_up_to(isqrt(M) if n == 3 else int(round(M ** (1.0 / (n - 1)))) + 1)
        if p % n == 1 and int(p) ** (n - 1) <= M and int(p) not in S
    ]

    total = {}
    for x in us_group(n, S):
        poly = {1: 1}
        for p in wild_ps:
            terms = []
            for opt, t, _ in wild_local_characters(p, n, lam):
                w = p**opt.phi_exp
                if w > M:
                    continue
                k = _wild_value_exponent(opt, t, x, p, n)
                terms.append((w, _zeta_pow(k, n)))
            poly = _poly_multiply_factor(poly, terms, M, n)
            if not poly:
                break
        if not poly:
            continue
        arch = f_hat_arch(n, lam, x)
        if arch == 0:
            continue
        poly = {m: _cyc_mul(c, arch, n) for m, c in poly.items()}
        for p in tame:
            c = tame_local_factor(x, p, n)
            if c:
                _apply_tame_factor(poly, p ** (n - 1), c, M)
        for m, c in poly.items():
            total[m] = _cyc_add(total.get(m, 0), c, n)

    out = np.zeros(M + 1, dtype=np.int64)
    for m, c in total.items():
        val = _cyc_rational(c, n)
        if val % scale != 0:
            raise AssertionError(f"coefficient at {m} not divisible by normalization")
        out[m] = val // scale

    # Moebius corrections from the proper divisors d < n: finitely many
    # characters unramified outside n
    for d in divisors(n)[:-1]:
        mu = moebius(n // d)
        if mu == 0:
            continue
        for chi, mval in _unramified_outside_n_chars(n, d, M):
            if not _char_passes(chi, n, lam, P):
                continue
            out[mval] += mu
    if (out < 0).any():
        raise AssertionError("negative Dirichlet coefficient on the Euler side")
    return DirichletCoeffs(M, out, "euler-side")


def _wild_levels(n: int) -> int:
    q = 1
    for p, _ in factorize(n).factors:
        vp = 0
        m = n
        while m % p == 0:
            m //= p
            vp += 1
        q *= p ** (vp + 2)
    return q


def _unramified_outside_n_chars(n: int, d: int, M: int):
    """(chi, Phi_n(chi)) for characters of order dividing d with conductor
    supported on the primes dividing n, Phi_n <= M; chi carried as a
    mu_n-valued character."""
    Q = _wild_levels(n)
    if d == 1:
        yield DirichletCharacter(1, n, ()), 1
        return
    for chi_d in characters_of_order_dividing(Q, d):
        chi = DirichletCharacter(Q, n, tuple(e * (n // d) % n for e in chi_d.exponents))
        mval = prod((chi**a).conductor() for a in range(1, n))
        if mval <= M:
            yield chi, mval


def _char_passes(chi: DirichletCharacter, n: int, lam: LambdaSpec, P) -> bool:
    """The local-conditions indicator f for a character unramified outside n."""
    star = primitive_part(chi)
    for p in factorize(n).primes:
        comp = _component_exps(star, p)
        sub = gcd(n, *comp) if comp else n
        e = n // sub
        t = _prime_to_p_value(star, p)
        fdeg = sub // gcd(sub, t)
        c = 0
        cond = star.modulus
        while cond % p == 0:
            cond //= p
            c += 1
        if not lam.allows_wild(p, LocalBehavior(e, fdeg, c)):
            return False
    if star.modulus > 1 and n % 2 == 0:
        arch = ARCH_COMPLEX if star.eval(star.modulus - 1) else ARCH_SPLIT
    else:
        arch = ARCH_SPLIT
    if not lam.allows_arch(arch):
        return False
    for p in P:
        if star.modulus % p == 0 or star.eval(p) != 0:
            return False
    return True


def _component_exps(chi: DirichletCharacter, p: int) -> tuple:
    idx = 0
    for q, k, qk, gens, orders in chi.group.components:
        cnt = len(gens)
        if q == p:
            return chi.exponents[idx : idx + cnt]
        idx += cnt
    return ()


# ---------------------------------------------------------------------------
# Fields unramified outside S
# ---------------------------------------------------------------------------


def unram_outside_S_count(n: int, S) -> int:
    """Number of cyclic degree-n fields unramified outside S (S must contain
    the primes dividing n); exact, via character enumeration."""
    S = sorted(set(int(p) for p in S))
    for p in factorize(n).primes:
        if p not in S:
            raise ValueError(f"S must contain the prime {p} dividing n")
    Q = _wild_levels(n)
    for p in S:
        if n % p != 0:
            Q *= p
    count = 0
    for chi in characters_of_order_dividing(Q, n):
        if chi.order() != n:
            continue
        count += 1
    assert count % euler_phi(n) == 0
    return count // euler_phi(n)
