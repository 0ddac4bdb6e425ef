"""Cyclic degree-n extensions of Q in which every prime p not dividing n is
unramified or totally ramified, enumerated by discriminant with local
conditions.

A field K of this kind corresponds to a phi(n)-orbit {chi^a : gcd(a,n)=1} of
primitive Dirichlet characters chi of order exactly n whose local component at
every ramified prime p coprime to n has exact order n (equivalently p = 1
mod n and the tame conductor exponent is 1).  The discriminant is given by the
conductor-discriminant formula

    Delta = prod_{a=1}^{n-1} cond(chi^a),

so for a conductor f = m * w with squarefree tame part m (primes = 1 mod n)
and wild part w supported on p | n, Delta = m^(n-1) * prod_{p|n} p^{w_p} with
w_p the summed conductor exponents of the powers of the wild component.

Local conditions at p | n are keyed by the invariants
(ramification index e, residue degree f, conductor exponent); at the real
place by "split" (trivial) versus "complex" (order-2 complex conjugation).
"""

from dataclasses import dataclass
from functools import lru_cache
from math import gcd, isqrt, lcm, prod
from typing import NamedTuple

import numpy as np

from .arith import (
    DirichletCharacter,
    euler_phi,
    factorize,
    primes_up_to,
    unit_group,
)

__all__ = [
    "ARCH_SPLIT",
    "ARCH_COMPLEX",
    "LocalBehavior",
    "TRIVIAL_BEHAVIOR",
    "LambdaSpec",
    "wild_character_options",
    "wild_behaviors",
    "CyclicFieldDescriptor",
    "discriminant_of",
    "LocalClass",
    "local_behavior",
    "enumerate_family",
    "splits_completely",
    "quadratic_discriminants",
    "quadratic_split_mask",
    "quadratic_lambda_mask",
    "cubic_census_table",
    "RangeLimitError",
]

ARCH_SPLIT = "split"
ARCH_COMPLEX = "complex"


class RangeLimitError(ValueError):
    """Requested bound exceeds the configured enumeration range."""


class LocalBehavior(NamedTuple):
    """Invariants of a local character at a finite place."""

    e: int  # ramification index = order of the unit-part character
    f: int  # residue degree = order of Frobenius in the unramified quotient
    cond_exp: int  # conductor exponent of the unit-part character


TRIVIAL_BEHAVIOR = LocalBehavior(1, 1, 0)


class LambdaSpec:
    """Allowed local behaviors at the places dividing n and at infinity.

    wild maps each prime p | n to a frozenset of LocalBehavior triples, or to
    None for "no restriction"; arch is a frozenset drawn from
    {"split", "complex"} (None again meaning unrestricted).  The counting
    theory assumes the trivial behavior is allowed everywhere; the enumerator
    itself accepts arbitrary nonempty sets (e.g. imaginary-only censuses).
    """

    def __init__(self, n: int, wild: dict = None, arch=None):
        self.n = n
        wild = dict(wild or {})
        for p in wild:
            if n % p != 0:
                raise ValueError(f"wild condition at p={p} but p does not divide n={n}")
            if wild[p] is not None:
                wild[p] = frozenset(LocalBehavior(*t) for t in wild[p])
        self.wild = {p: wild.get(p) for p in _prime_divisors(n)}
        self.arch = None if arch is None else frozenset(arch)
        if self.arch is not None and not self.arch <= {ARCH_SPLIT, ARCH_COMPLEX}:
            raise ValueError("arch behaviors must be drawn from {'split', 'complex'}")

    @classmethod
    def unrestricted(cls, n: int) -> "LambdaSpec":
        return cls(n)

    @classmethod
    def totally_real(cls, n: int) -> "LambdaSpec":
        return cls(n, arch={ARCH_SPLIT})

    @classmethod
    def imaginary_only(cls, n: int) -> "LambdaSpec":
        return cls(n, arch={ARCH_COMPLEX})

    def with_wild(self, p: int, behaviors) -> "LambdaSpec":
        wild = dict(self.wild)
        wild[p] = behaviors
        return LambdaSpec(self.n, wild, self.arch)

    def allows_arch(self, t: str) -> bool:
        return self.arch is None or t in self.arch

    def allows_wild(self, p: int, behavior: LocalBehavior) -> bool:
        allowed = self.wild.get(p)
        return allowed is None or behavior in allowed

    def contains_trivial(self) -> bool:
        ok = self.allows_arch(ARCH_SPLIT)
        for p in self.wild:
            ok = ok and self.allows_wild(p, TRIVIAL_BEHAVIOR)
        return ok

    def digest(self) -> str:
        """Stable short description, embedded in reports."""
        parts = []
        for p in sorted(self.wild):
            allowed = self.wild[p]
            if allowed is None:
                parts.append(f"{p}:all")
            else:
                parts.append(f"{p}:" + "|".join(f"{b.e},{b.f},{b.cond_exp}" for b in sorted(allowed)))
        parts.append("inf:" + ("all" if self.arch is None else "|".join(sorted(self.arch))))
        return ";".join(parts)

    def __repr__(self):
        return f"LambdaSpec(n={self.n}, {self.digest()})"


def _prime_divisors(n: int) -> tuple:
    return factorize(n).primes


class WildOption(NamedTuple):
    """One unit-part character of Q_p^* (p | n) that can appear in the family."""

    p: int
    level: int  # K with the option represented mod p^K
    exponents: tuple  # exponents on the generators of (Z/p^K)^*, values in Z/nZ
    cond_exp: int  # conductor exponent c: conductor of the unit part is p^c
    order: int  # e = ramification index
    phi_exp: int  # sum over a=1..n-1 of the conductor exponent of the a-th power
    local_exps: tuple  # exponents w.r.t. generators of (Z/p^c)^*


@lru_cache(maxsize=None)
def wild_character_options(p: int, n: int) -> tuple:
    """All unit-part characters at p | n of order dividing n, by brute force
    over characters mod p^K with K = v_p(n) + 2 (large enough for order n)."""
    if n % p != 0:
        raise ValueError("wild options only exist at primes dividing n")
    vp = 0
    m = n
    while m % p == 0:
        m //= p
        vp += 1
    K = vp + 2
    q = p**K
    group = unit_group(q)
    options = []
    seen = set()
    choice_lists = []
    for o in group.orders:
        d = gcd(n, o)
        choice_lists.append(range(0, n, n // d))
    vecs = [()]
    for choices in choice_lists:
        vecs = [v + (c,) for v in vecs for c in choices]
    for vec in vecs:
        chi = DirichletCharacter(q, n, vec, group)
        cond = chi.conductor()
        c = 0
        cc = cond
        while cc % p == 0:
            cc //= p
            c += 1
        key = vec
        if key in seen:
            continue
        seen.add(key)
        phi_exp = 0
        for a in range(1, n):
            ca = (chi**a).conductor()
            while ca % p == 0:
                ca //= p
                phi_exp += 1
        # exponents w.r.t. the generators of (Z/p^c)^* (the conductor level)
        if c == 0:
            local = ()
        else:
            small = unit_group(p**c)
            local = tuple(chi.eval(g) for g in small.generators)
        options.append(WildOption(p, K, vec, c, chi.order(), phi_exp, local))
    options.sort(key=lambda o: (o.cond_exp, o.exponents))
    return tuple(options)


def wild_behaviors(p: int, n: int) -> list:
    """All attainable (e, f, cond_exp) triples at p | n."""
    out = set()
    for opt in wild_character_options(p, n):
        for fdeg in _divisors_of(n // opt.order):
            out.add(LocalBehavior(opt.order, fdeg, opt.cond_exp))
    return sorted(out)


def _divisors_of(n: int) -> list:
    return [d for d in range(1, n + 1) if n % d == 0]


@dataclass(frozen=True)
class CyclicFieldDescriptor:
    """One field of the family: the canonical orbit representative of its
    character, with conductor, discriminant and local data."""

    n: int
    conductor: int
    discriminant: int
    character: DirichletCharacter
    tame_primes: tuple  # ramified primes not dividing n (all totally ramified)
    wild: dict  # p | n -> LocalBehavior
    arch: str  # "split" or "complex"

    @property
    def exponent_vector(self) -> tuple:
        return self.character.exponents

    def sort_key(self):
        return (self.discriminant, self.conductor, self.exponent_vector)

    def to_row(self) -> dict:
        return {
            "n": self.n,
            "f": self.conductor,
            "delta": self.discriminant,
            "exponent_vector": " ".join(map(str, self.exponent_vector)),
            "ram_primes": " ".join(map(str, self.tame_primes)),
            "arch_type": self.arch,
        }


def discriminant_of(chi: DirichletCharacter) -> int:
    """prod_{a=1}^{n-1} cond(chi^a) for a primitive character of exact order n."""
    if chi.order() != chi.n:
        raise ValueError("character is not surjective onto the n-th roots of unity")
    if not chi.is_primitive:
        raise ValueError("character must be primitive")
    return prod((chi**a).conductor() for a in range(1, chi.n))


class LocalClass(NamedTuple):
    kind: str  # "unramified" | "totally_ramified" | "forbidden" | "wild"
    behavior: LocalBehavior
    frobenius: int  # chi(p) exponent for unramified p, else 0


def _component_exponents(chi: DirichletCharacter, p: int) -> tuple:
    """Exponent slice of chi at the p-component of its modulus."""
    idx = 0
    for q, k, _, gens, orders in chi.group.components:
        cnt = len(gens)
        if q == p:
            return chi.exponents[idx : idx + cnt]
        idx += cnt
    return ()


def _prime_to_p_value(chi: DirichletCharacter, p: int) -> int:
    """Exponent of chi^(p)(p): the prime-to-p part of chi evaluated at p."""
    t = 0
    idx = 0
    for q, k, qk, gens, orders in chi.group.components:
        cnt = len(gens)
        if q != p:
            sub = unit_group(qk)
            vec = sub.dlog(p % qk)
            t += sum(e * v for e, v in zip(chi.exponents[idx : idx + cnt], vec))
        idx += cnt
    return t % chi.n


def local_behavior(chi: DirichletCharacter, p: int) -> LocalClass:
    """Classify the splitting/ramification of p in the field cut out by chi."""
    n = chi.n
    if chi.order() != n:
        raise ValueError("character is not surjective")
    comp = _component_exponents(chi, p)
    if n % p == 0:
        sub = gcd(n, *comp) if comp else n  # image of the unit part is (n/e)Z/nZ, sub = n/e
        e = n // sub
        t = _prime_to_p_value(chi, p)
        fdeg = sub // gcd(sub, t)
        cexp = 0
        if comp:
            cond = chi.conductor()
            while cond % p == 0:
                cond //= p
                cexp += 1
        return LocalClass("wild", LocalBehavior(e, fdeg, cexp), 0)
    if chi.modulus % p == 0:
        sub = gcd(n, *comp)
        e = n // sub
        if e == n:
            return LocalClass("totally_ramified", LocalBehavior(n, 1, 1), 0)
        return LocalClass("forbidden", LocalBehavior(e, 0, 1), 0)
    frob = chi.eval(p)
    fdeg = n // gcd(n, frob)
    return LocalClass("unramified", LocalBehavior(1, fdeg, 0), frob)


def splits_completely(desc: CyclicFieldDescriptor, p: int) -> bool:
    """True iff p (coprime to n) is unramified with trivial Frobenius."""
    if desc.n % p == 0:
        raise ValueError("splitting is only classified at primes not dividing n")
    if desc.conductor % p == 0:
        return False
    return desc.character.eval(p) == 0


def _canonical_orbit_vector(exponents: tuple, n: int) -> tuple:
    units = [a for a in range(1, n) if gcd(a, n) == 1]
    return min(tuple(a * e % n for e in exponents) for a in units)


def _squarefree_products(primes, bound, prefix=1, start=0):
    """DFS over squarefree products of the given sorted primes, <= bound."""
    yield prefix
    for i in range(start, len(primes)):
        p = primes[i]
        nxt = prefix * p
        if nxt > bound:
            break
        yield from _squarefree_products(primes, bound, nxt, i + 1)


def enumerate_family(n, lam=None, X=None, P=(), range_limit=10**7):
    """All fields of the family with discriminant <= X, as a sorted list of
    CyclicFieldDescriptor (one canonical character orbit per field).

    P is a set of primes (coprime to n) required to split completely.
    """
    if n < 2:
        raise ValueError("degree must be >= 2")
    if X is None:
        raise ValueError("a discriminant bound X is required")
    if X > range_limit:
        raise RangeLimitError(f"X={X} exceeds range_limit={range_limit}")
    lam = lam or LambdaSpec.unrestricted(n)
    P = tuple(sorted(P))
    for p in P:
        if n % p == 0:
            raise ValueError("split primes must not divide n")
    phi_n = euler_phi(n)
    units = [a for a in range(1, n) if gcd(a, n) == 1]

    wild_ps = _prime_divisors(n)
    per_prime_opts = []
    for p in wild_ps:
        opts = []
        for opt in wild_character_options(p, n):
            # (e, cond_exp) must be compatible with some allowed residue degree
            if lam.wild.get(p) is None or any(
                lam.allows_wild(p, LocalBehavior(opt.order, fd, opt.cond_exp))
                for fd in _divisors_of(n // opt.order)
            ):
                opts.append(opt)
        per_prime_opts.append(opts)

    wild_combos = [()]
    for opts in per_prime_opts:
        wild_combos = [c + (o,) for c in wild_combos for o in opts]

    tmax = int(round(X ** (1.0 / (n - 1)))) + 1
    while tmax ** (n - 1) > X:
        tmax -= 1
    tame_primes = [int(p) for p in primes_up_to(tmax) if p % n == 1]

    out = []
    for combo in wild_combos:
        W = prod(p**o.phi_exp for p, o in zip(wild_ps, combo))
        if W > X:
            continue
        wild_cond = prod(p**o.cond_exp for p, o in zip(wild_ps, combo))
        mbound = int((X // W) ** (1.0 / (n - 1))) + 1
        while mbound ** (n - 1) * W > X:
            mbound -= 1
        usable = [p for p in tame_primes if p <= mbound]
        for m in _squarefree_products(usable, mbound):
            delta = m ** (n - 1) * W
            if delta > X:
                continue
            f = m * wild_cond
            tames = tuple(q for q, _ in factorize(m).factors) if m > 1 else ()
            out.extend(
                _fields_for_conductor(n, f, delta, combo, wild_ps, tames, lam, P, units, phi_n)
            )
    out.sort(key=CyclicFieldDescriptor.sort_key)
    return out


def _fields_for_conductor(n, f, delta, combo, wild_ps, tames, lam, P, units, phi_n):
    """Descriptors with conductor f: iterate tame exponent twists, dedupe the
    phi(n)-orbits by the lexicographically least exponent vector."""
    if f == 1:
        return
    group = unit_group(f)
    # positions of each prime's exponent slice in the flat generator list
    slices = {}
    idx = 0
    for q, k, qk, gens, orders in group.components:
        slices[q] = (idx, idx + len(gens))
        idx += len(gens)

    active_wild = [(p, o) for p, o in zip(wild_ps, combo)]
    base = [0] * idx
    wild_orders = []
    for p, o in active_wild:
        if o.cond_exp > 0:
            s, e = slices[p]
            base[s:e] = list(o.local_exps)
        wild_orders.append(o.order)

    tame_choices = [units] * len(tames)
    vecs = [()]
    for choices in tame_choices:
        vecs = [v + (c,) for v in vecs for c in choices]

    for tv in vecs:
        exps = list(base)
        for q, u in zip(tames, tv):
            s, e = slices[q]
            exps[s] = u
        exps = tuple(exps)
        if _canonical_orbit_vector(exps, n) != exps:
            continue
        order = 1
        for k in exps:
            order = lcm(order, n // gcd(n, k))
        if order != n:
            continue
        chi = DirichletCharacter(f, n, exps, group)
        arch = ARCH_SPLIT
        if n % 2 == 0 and f > 1:
            arch = ARCH_COMPLEX if chi.eval(f - 1) else ARCH_SPLIT
        if not lam.allows_arch(arch):
            continue
        wild_data = {}
        ok = True
        for p, o in active_wild:
            t = _prime_to_p_value(chi, p)
            sub = n // o.order  # index of the image subgroup of the unit part
            fdeg = sub // gcd(sub, t)
            beh = LocalBehavior(o.order, fdeg, o.cond_exp)
            if not lam.allows_wild(p, beh):
                ok = False
                break
            wild_data[p] = beh
        if not ok:
            continue
        if any(f % q == 0 or chi.eval(q) != 0 for q in P):
            continue
        yield CyclicFieldDescriptor(n, f, delta, chi, tames, wild_data, arch)


# ---------------------------------------------------------------------------
# Bulk array paths for the quadratic and cubic censuses
# ---------------------------------------------------------------------------


@lru_cache(maxsize=4)
def quadratic_discriminants(X: int) -> np.ndarray:
    """All fundamental discriminants D with 3 <= |D| <= X, sorted by |D|."""
    sqfree = np.ones(X + 1, dtype=bool)
    for p in range(2, isqrt(X) + 1):
        sqfree[p * p :: p * p] = False
    k = np.arange(X + 1)
    pos = np.zeros(X + 1, dtype=bool)
    neg = np.zeros(X + 1, dtype=bool)
    pos[5::4] = sqfree[5::4]  # k = 1 mod 4, squarefree (k >= 5)
    neg[3::4] = sqfree[3::4]  # k = 3 mod 4 squarefree -> D = -k
    k4 = k[::4][1:]  # multiples of 4
    m = k4 // 4
    msq = sqfree[m]
    pos[k4[msq & ((m % 4 == 2) | (m % 4 == 3))]] = True
    neg[k4[msq & ((m % 4 == 1) | (m % 4 == 2))]] = True
    absd = np.nonzero(pos | neg)[0]
    sign = np.where(pos[absd], 1, -1)
    both = pos & neg
    extra = np.nonzero(both)[0]
    D = absd * sign
    if extra.size:
        D = np.concatenate([D, -extra])
    order = np.argsort(np.abs(D), kind="stable")
    return D[order].astype(np.int64)


def quadratic_split_mask(D: np.ndarray, p: int) -> np.ndarray:
    """Kronecker symbol (D/p) == +1, vectorized (p an odd prime here; p=2 uses
    the D mod 8 rule)."""
    if p == 2:
        return (np.abs(D) % 2 == 1) & (D % 8 == 1)
    table = np.zeros(p, dtype=np.int8)
    for r in range(1, p):
        table[r] = 1 if pow(r, (p - 1) // 2, p) == 1 else -1
    return table[np.mod(D, p)] == 1


def quadratic_lambda_mask(D: np.ndarray, lam: LambdaSpec) -> np.ndarray:
    """Membership of each fundamental discriminant in the Lambda-restricted
    family (n = 2: wild slot at 2, archimedean slot)."""
    mask = np.ones(D.shape, dtype=bool)
    if lam.arch is not None:
        arch_ok = np.zeros(D.shape, dtype=bool)
        if ARCH_SPLIT in lam.arch:
            arch_ok |= D > 0
        if ARCH_COMPLEX in lam.arch:
            arch_ok |= D < 0
        mask &= arch_ok
    allowed = lam.wild.get(2)
    if allowed is not None:
        a = np.abs(D)
        odd = a % 2 == 1
        v2 = np.where(odd, 0, np.where(a % 8 == 4, 2, 3))
        ok = np.zeros(D.shape, dtype=bool)
        if LocalBehavior(1, 1, 0) in allowed:
            ok |= odd & (D % 8 == 1)
        if LocalBehavior(1, 2, 0) in allowed:
            ok |= odd & (D % 8 == 5)
        if LocalBehavior(2, 1, 2) in allowed:
            ok |= v2 == 2
        if LocalBehavior(2, 1, 3) in allowed:
            ok |= v2 == 3
        mask &= ok
    return mask


_IND9_MOD3 = {1: 0, 2: 1, 4: 2, 8: 0, 7: 1, 5: 2}  # ind_2(q mod 9) mod 3


def _cubic_ref_exponent(q: int, p: int, omega_pow) -> int:
    """Exponent u with q^((p-1)/3) = omega^u mod p."""
    t = pow(q, (p - 1) // 3, p)
    if t == 1:
        return 0
    if t == omega_pow:
        return 1
    return 2


def cubic_census_table(fmax: int, track=(), require=(), lam=None):
    """Cyclic cubic fields with conductor <= fmax, as parallel arrays.

    track: primes (!= 3) whose complete-splitting indicator is recorded per
    field; require: primes that must split completely (fields failing the
    condition are dropped).  Returns dict with 'f', 'delta' (= f^2), 'split'
    (q -> bool array over track+require) and 'count'.  One entry per field;
    character orbits are deduplicated by fixing the first component exponent.
    """
    lam = lam or LambdaSpec.unrestricted(3)
    require = tuple(sorted(set(require)))
    qs = tuple(sorted(set(track) | set(require)))
    if any(q % 3 == 0 for q in qs):
        raise ValueError("tracked primes must not divide n = 3")
    empty = {
        "f": np.empty(0, np.int64),
        "delta": np.empty(0, np.int64),
        "split": {q: np.empty(0, bool) for q in qs},
        "count": 0,
    }
    if not lam.allows_arch(ARCH_SPLIT):
        return empty
    allowed3 = lam.wild.get(3)
    allow_unram = {
        1: allowed3 is None or LocalBehavior(1, 1, 0) in allowed3,
        3: allowed3 is None or LocalBehavior(1, 3, 0) in allowed3,
    }
    allow_ram3 = allowed3 is None or LocalBehavior(3, 1, 2) in allowed3
    need_t3 = not (allow_unram[1] and allow_unram[3])

    primes = [int(p) for p in primes_up_to(fmax) if p % 3 == 1]
    ref = {}
    for p in primes:
        a = 2
        while True:
            w = pow(a, (p - 1) // 3, p)
            if w != 1:
                break
            a += 1
        u = {q: _cubic_ref_exponent(q, p, w) for q in qs if q % p != 0}
        ref[p] = (u, _cubic_ref_exponent(3, p, w))

    fs, deltas = [], []
    splits = {q: [] for q in qs}

    def emit(m_primes, wild9):
        f = prod(m_primes) * (9 if wild9 else 1)
        if f > fmax or f == 1:
            return
        comps = ([9] if wild9 else []) + list(m_primes)
        uq = {q: [] for q in qs}
        u3l = []
        for c in comps:
            if c == 9:
                for q in qs:
                    uq[q].append(_IND9_MOD3[q % 9])
                u3l.append(0)
            else:
                u, u3 = ref[c]
                for q in qs:
                    if q == c:
                        return  # a tracked prime ramifies in every field here
                    uq[q].append(u[q])
                u3l.append(u3)
        k = len(comps)
        for bits in range(1 << (k - 1)):
            evec = [1] + [2 if (bits >> i) & 1 else 1 for i in range(k - 1)]
            if need_t3 and not wild9:
                t3 = sum(e * u for e, u in zip(evec, u3l)) % 3
                if not allow_unram[1 if t3 == 0 else 3]:
                    continue
            svals = {q: sum(e * u for e, u in zip(evec, uq[q])) % 3 == 0 for q in qs}
            if any(not svals[q] for q in require):
                continue
            fs.append(f)
            deltas.append(f * f)
            for q in qs:
                splits[q].append(svals[q])

    def dfs(prefix, prefix_primes, start):
        for i in range(start, len(primes)):
            p = primes[i]
            nxt = prefix * p
            if nxt > fmax:
                break
            comb = prefix_primes + (p,)
            emit(comb, False)
            if allow_ram3 and 9 * nxt <= fmax:
                emit(comb, True)
            dfs(nxt, comb, i + 1)

    if allow_ram3:
        emit((), True)  # the conductor-9 field
    dfs(1, (), 0)

    if not fs:
        return empty
    f_arr = np.array(fs, dtype=np.int64)
    order = np.argsort(f_arr, kind="stable")
    return {
        "f": f_arr[order],
        "delta": np.array(deltas, dtype=np.int64)[order],
        "split": {q: np.array(splits[q], dtype=bool)[order] for q in qs},
        "count": len(fs),
    }
