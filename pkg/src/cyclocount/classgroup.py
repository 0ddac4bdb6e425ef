"""Class groups of quadratic fields via binary quadratic forms.

A primitive form (a, b, c) of fundamental discriminant D = b^2 - 4ac
represents an ideal class; Gauss composition makes the classes of reduced
forms (D < 0) or of rho-cycles of reduced forms (D > 0) a finite abelian
group.  Everything here is exact integer arithmetic: class numbers come from
counting reduced forms, group structure from Sylow subgroups generated by
prime forms (no analytic class number formula anywhere).

For D > 0 the form classes give the narrow class group; the usual (wide)
class group is its quotient by the class of a form of negative leading
coefficient representing -1.  Reported torsion always refers to the wide
group.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import gcd, isqrt, prod

import numpy as np

from .arith import factorize, is_prime
from .family import quadratic_discriminants

__all__ = [
    "is_fundamental",
    "QuadForm",
    "principal_form",
    "reduce_form",
    "compose_forms",
    "form_inverse",
    "reduced_forms",
    "rho_cycle",
    "QuadraticClassGroup",
    "class_group",
    "torsion_count",
    "class_number_sieve",
    "imaginary_torsion_table",
    "prime_form",
]


def is_fundamental(D: int) -> bool:
    if D == 1 or D == 0:
        return False
    if D % 4 == 1:
        return _squarefree(abs(D))
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and _squarefree(abs(m))
    return False


def _squarefree(n: int) -> bool:
    return all(e == 1 for _, e in factorize(n).factors)


@dataclass(frozen=True)
class QuadForm:
    a: int
    b: int
    c: int

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def __iter__(self):
        return iter((self.a, self.b, self.c))

    def is_primitive(self) -> bool:
        return gcd(gcd(self.a, self.b), self.c) == 1


def principal_form(D: int) -> QuadForm:
    k = D % 2
    return QuadForm(1, k, (k * k - D) // 4)


def form_inverse(f: QuadForm) -> QuadForm:
    return QuadForm(f.a, -f.b, f.c)


def _check_form(f: QuadForm):
    D = f.discriminant
    if not is_fundamental(D):
        raise ValueError(f"discriminant {D} is not fundamental")
    return D


def _reduce_imag(a: int, b: int, c: int) -> QuadForm:
    while True:
        if -a < b <= a:
            if a > c:
                a, b, c = c, -b, a
                continue
            if a == c and b < 0:
                b = -b
            return QuadForm(a, b, c)
        r = (a - b) // (2 * a)
        b2 = b + 2 * r * a
        c = a * r * r + b * r + c
        b = b2


def _real_reduced(a: int, b: int, c: int, s: int) -> bool:
    # 0 < b < sqrt(D) and sqrt(D) - b < 2|a| < sqrt(D) + b
    return 0 < b <= s and s - b < 2 * abs(a) <= s + b and s - b < 2 * abs(c) <= s + b


def _rho_real(a: int, b: int, c: int, D: int, s: int):
    # step to the right neighbour in the cycle of (a, b, c)
    ac = abs(c)
    if ac > s:
        lo, hi = -ac, ac  # b' in (-|c|, |c|]
    else:
        lo, hi = s - 2 * ac, s  # b' in (sqrt(D) - 2|c|, sqrt(D)]
    b2 = -b % (2 * ac)
    b2 += ((hi - b2) // (2 * ac)) * 2 * ac
    if b2 <= lo:
        b2 += 2 * ac
    c2 = (b2 * b2 - D) // (4 * c)
    return c, b2, c2


def reduce_form(f: QuadForm) -> QuadForm:
    """An equivalent reduced form (D < 0: the unique one; D > 0: a member of
    the reduced cycle of the class)."""
    D = _check_form(f)
    a, b, c = f.a, f.b, f.c
    if D < 0:
        if a < 0:
            raise ValueError("positive definite forms require a > 0")
        return _reduce_imag(a, b, c)
    s = isqrt(D)
    seen = 0
    while not _real_reduced(a, b, c, s):
        a, b, c = _rho_real(a, b, c, D, s)
        seen += 1
        if seen > 10000:
            raise AssertionError("rho reduction failed to terminate")
    return QuadForm(a, b, c)


def rho_cycle(f: QuadForm) -> tuple:
    """The full cycle of reduced forms equivalent to f (D > 0)."""
    D = _check_form(f)
    if D < 0:
        raise ValueError("cycles exist only for positive discriminants")
    s = isqrt(D)
    g = reduce_form(f)
    cyc = [g]
    a, b, c = g.a, g.b, g.c
    while True:
        a, b, c = _rho_real(a, b, c, D, s)
        if (a, b, c) == (g.a, g.b, g.c):
            return tuple(cyc)
        cyc.append(QuadForm(a, b, c))


def _canonical(f: QuadForm) -> tuple:
    """Class key: the reduced form (D < 0) or the minimal cycle member."""
    D = f.discriminant
    if D < 0:
        g = reduce_form(f)
        return (g.a, g.b, g.c)
    return min((g.a, g.b, g.c) for g in rho_cycle(f))


def compose_forms(f1: QuadForm, f2: QuadForm) -> QuadForm:
    """Gauss composition of primitive forms of equal fundamental discriminant
    (Cohen's composition algorithm), returned reduced."""
    D = _check_form(f1)
    if f2.discriminant != D:
        raise ValueError("forms must share a discriminant")
    if f1.a > f2.a:
        f1, f2 = f2, f1
    a1, b1, c1 = f1.a, f1.b, f1.c
    a2, b2, c2 = f2.a, f2.b, f2.c
    s = (b1 + b2) // 2
    nn = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        d, u, _ = _xgcd(a2, a1)
        y1 = u
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        d1, u2, v2 = _xgcd(s, d)
        x2, y2 = u2, -v2
    v1 = a1 // d1
    v2_ = a2 // d1
    r = (y1 * y2 * nn - x2 * c2) % v1
    b3 = b2 + 2 * v2_ * r
    a3 = v1 * v2_
    c3 = (c2 * d1 + r * (b2 + v2_ * r)) // v1
    out = QuadForm(a3, b3, c3)
    return reduce_form(out)


def _xgcd(a: int, b: int):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _pow_form(f: QuadForm, k: int) -> QuadForm:
    D = f.discriminant
    out = reduce_form(principal_form(D))
    base = reduce_form(f)
    while k:
        if k & 1:
            out = compose_forms(out, base)
        base = compose_forms(base, base)
        k >>= 1
    return out


def reduced_forms(D: int) -> list:
    """All reduced forms of discriminant D (for D < 0 their number is h)."""
    if not is_fundamental(D):
        raise ValueError("discriminant must be fundamental")
    out = []
    if D < 0:
        amax = isqrt(-D // 3)
        for a in range(1, amax + 1):
            for b in range(0, a + 1):
                if (b * b - D) % (4 * a):
                    continue
                c = (b * b - D) // (4 * a)
                if c < a:
                    continue
                out.append(QuadForm(a, b, c))
                if 0 < b < a < c:
                    out.append(QuadForm(a, -b, c))
        return out
    s = isqrt(D)
    for b in range(1, s + 1):
        if (D - b * b) % 4:
            continue
        t = (b * b - D) // 4  # = a*c < 0
        lo = (s - b) // 2 + 1
        hi = (s + b) // 2
        for aa in range(max(lo, 1), hi + 1):
            if t % aa == 0:
                c = t // aa
                out.append(QuadForm(aa, b, c))
                out.append(QuadForm(-aa, b, -c))
    return [f for f in out if _real_reduced(f.a, f.b, f.c, s) and f.is_primitive()]


def prime_form(D: int, q: int):
    """A primitive form (q, b, c) of discriminant D, or None if q is inert."""
    for b in range(q == 2, 2 * q + 1):
        if (b * b - D) % (4 * q) == 0:
            c = (b * b - D) // (4 * q)
            f = QuadForm(q, b, c)
            if f.is_primitive():
                return f
    return None


# ---------------------------------------------------------------------------
# Group structure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadraticClassGroup:
    D: int
    h: int  # wide class number (the class group of the field)
    divisors: tuple  # elementary divisors d_1 | d_2 | ... (ascending)
    generators: tuple  # forms whose classes generate the (narrow) group
    narrow_h: int  # equals h for D < 0
    narrow_divisors: tuple

    def __post_init__(self):
        assert prod(self.divisors) == self.h if self.divisors else self.h == 1
        for d1, d2 in zip(self.divisors, self.divisors[1:]):
            assert d2 % d1 == 0


def _group_elements(D: int) -> dict:
    """Canonical class keys -> a representative reduced form."""
    if D < 0:
        return {(f.a, f.b, f.c): f for f in reduced_forms(D)}
    classes = {}
    for f in reduced_forms(D):
        classes.setdefault(_canonical(f), f)
    return classes


def _mul_key(k1, k2, D):
    return _canonical(compose_forms(QuadForm(*k1), QuadForm(*k2)))


def _pow_key(k, e, D):
    ident = _canonical(principal_form(D))
    out = ident
    base = k
    while e:
        if e & 1:
            out = _mul_key(out, base, D)
        base = _mul_key(base, base, D)
        e >>= 1
    return out


def _sylow_subgroup(D: int, p: int, vp: int, h: int, generators_out=None):
    """The full p-Sylow subgroup as a set of class keys, generated by prime
    forms.  Forms with q <= sqrt(|D|/3) generate the class group, so the
    loop is guaranteed to terminate with the whole Sylow subgroup."""
    target = p**vp
    ident = _canonical(principal_form(D))
    H = {ident}
    cof = h // target
    qmax = isqrt(abs(D) // 3) + 1
    q = 2
    while len(H) < target:
        if q > qmax:
            break
        if is_prime(q):
            g = prime_form(D, q)
            if g is not None:
                e = _pow_key(_canonical(g), cof, D)
                if e not in H:
                    if generators_out is not None:
                        generators_out.append((q, e))
                    # close H under the new generator
                    new = H | set()
                    cur = e
                    while cur != ident:
                        new |= {_mul_key(cur, x, D) for x in H}
                        cur = _mul_key(cur, e, D)
                    H = new
        q += 1
    assert len(H) == target, f"Sylow generation incomplete at D={D}, p={p}"
    return H


def _sylow_basis(H: set, p: int, D: int) -> list:
    """Greedy basis of a small abelian p-group given by its element set:
    repeatedly take an element of maximal order in the current quotient."""
    ident = _canonical(principal_form(D))
    basis = []
    sub = {ident}
    while len(sub) < len(H):
        best, best_ord = None, 0
        for x in H:
            if x in sub:
                continue
            o, y = 1, x
            while y not in sub:
                y = _pow_key(y, p, D)
                o *= p
            if o > best_ord:
                best, best_ord = x, o
        basis.append((best, best_ord))
        new = set(sub)
        cur = best
        while cur not in sub:
            new |= {_mul_key(cur, s, D) for s in sub}
            cur = _mul_key(cur, best, D)
        sub = new
    return basis  # [(key, order)] with orders descending by construction


def _structure_from_sylows(D: int, h: int):
    """Elementary divisors and generator forms from the Sylow subgroups."""
    if h == 1:
        return (), ()
    parts = {}
    bases = {}
    for p, vp in factorize(h).factors:
        H = _sylow_subgroup(D, p, vp, h)
        basis = _sylow_basis(H, p, D)
        bases[p] = basis
        parts[p] = [o for _, o in basis]  # p-power orders, descending
    width = max(len(v) for v in parts.values())
    divisors = []
    gens = []
    for i in range(width):
        d = 1
        g = _canonical(principal_form(D))
        for p, orders in parts.items():
            if i < len(orders):
                d *= orders[i]
                g = _mul_key(g, bases[p][i][0], D)
        divisors.append(d)
        gens.append(QuadForm(*g))
    divisors.reverse()  # ascending chain d_1 | d_2 | ...
    gens.reverse()
    return tuple(divisors), tuple(gens)


def class_group(D: int, bound: int = 10**8) -> QuadraticClassGroup:
    """Class number and elementary divisors of Q(sqrt(D)), exactly."""
    if abs(D) > bound:
        raise ValueError(f"|D| exceeds the configured bound {bound}")
    if not is_fundamental(D):
        raise ValueError("discriminant must be fundamental")
    if D < 0:
        h = len(reduced_forms(D))
        divisors, gens = _structure_from_sylows(D, h)
        return QuadraticClassGroup(D, h, divisors, gens, h, divisors)
    # D > 0: classes of cycles give the narrow group
    classes = _group_elements(D)
    h_narrow = len(classes)
    ndiv, gens = _structure_from_sylows(D, h_narrow)
    # the wide group is the quotient by the class of a form representing -1
    sigma = D % 2
    nu = _canonical(QuadForm(-1, sigma, (D - sigma * sigma) // 4))
    ident = _canonical(principal_form(D))
    if nu == ident:
        return QuadraticClassGroup(D, h_narrow, ndiv, gens, h_narrow, ndiv)
    h = h_narrow // 2
    wdiv = _quotient_divisors(classes, nu, D, h)
    return QuadraticClassGroup(D, h, wdiv, gens, h_narrow, ndiv)


def _quotient_divisors(classes: dict, nu, D: int, h: int) -> tuple:
    """Elementary divisors of the quotient of the narrow group by {1, nu},
    from the element-order profile N(d) = #{cosets x : x^d in {1, nu}}."""
    if h == 1:
        return ()
    ident = _canonical(principal_form(D))
    reps = {}
    for k in classes:
        reps.setdefault(min(k, _mul_key(k, nu, D)), k)
    keys = list(reps.values())
    per_prime = []
    for p, vp in factorize(h).factors:
        counts = [1]
        for k in range(1, vp + 1):
            pk = p**k
            cnt = sum(1 for x in keys if _pow_key(x, pk, D) in (ident, nu))
            counts.append(cnt)
        # #{i : e_i >= k} = log_p(N(p^k) / N(p^(k-1)))
        ge = []
        for k in range(1, vp + 1):
            ratio = counts[k] // counts[k - 1]
            cnt = 0
            while ratio > 1:
                ratio //= p
                cnt += 1
            ge.append(cnt)
        orders = []
        for k in range(1, vp + 1):
            nxt = ge[k] if k < len(ge) else 0
            orders.extend([p**k] * (ge[k - 1] - nxt))
        per_prime.append(sorted(orders, reverse=True))
    width = max(len(v) for v in per_prime)
    out = []
    for i in range(width):
        d = 1
        for orders in per_prime:
            if i < len(orders):
                d *= orders[i]
        out.append(d)
    out.reverse()
    return tuple(out)


def torsion_count(D: int, ell: int, group: QuadraticClassGroup = None) -> int:
    """#Cl_K[ell] = prod_i gcd(ell, d_i) over the elementary divisors."""
    if ell < 1:
        raise ValueError("ell must be positive")
    if group is None:
        group = class_group(D)
    return prod(gcd(ell, d) for d in group.divisors) if group.divisors else 1


# ---------------------------------------------------------------------------
# Bulk scans over all imaginary fundamental discriminants
# ---------------------------------------------------------------------------


@lru_cache(maxsize=2)
def class_number_sieve(X: int):
    """h(|D|) and the number of ambiguous reduced forms (= #Cl[2]) for every
    fundamental -X <= D < 0, by one pass over all reduced forms (a, b, c)."""
    h = np.zeros(X + 1, dtype=np.int32)
    amb = np.zeros(X + 1, dtype=np.int32)
    amax = isqrt(X // 3)
    for a in range(1, amax + 1):
        cmax = (X + a * a) // (4 * a)
        if cmax < a:
            continue
        b = np.arange(0, a + 1, dtype=np.int64)
        c = np.arange(a, cmax + 1, dtype=np.int64)
        absd = 4 * a * c[None, :] - (b * b)[:, None]
        ok = (absd >= 3) & (absd <= X)
        ambmask = ((b[:, None] == 0) | (b[:, None] == a) | (c[None, :] == a)) & ok
        wts = np.where(ambmask, 1, 2) * ok
        flat = absd.ravel()
        w = wts.ravel()
        h[: X + 1] += np.bincount(flat[w > 0], weights=w[w > 0], minlength=X + 1).astype(
            np.int32
        )[: X + 1]
        aw = ambmask.ravel()
        amb[: X + 1] += np.bincount(flat[aw], minlength=X + 1).astype(np.int32)[: X + 1]
    return h, amb


@lru_cache(maxsize=4)
def imaginary_torsion_table(X: int, ell: int):
    """(|D| ascending, #Cl[ell]) over all fundamental -X <= D < 0."""
    D = quadratic_discriminants(X)
    absd = np.abs(D[D < 0]).astype(np.int64)
    absd.sort()
    hfull, amb = class_number_sieve(X)
    hvals = hfull[absd]
    tors = np.ones(len(absd), dtype=np.int64)
    for p, k in factorize(ell).factors:
        if p == 2 and k == 1:
            tors *= amb[absd]
            continue
        pk = p**k
        vfull = np.zeros(len(absd), dtype=np.int32)
        hv = hvals.astype(np.int64).copy()
        while True:
            m = hv % p == 0
            if not m.any():
                break
            vfull[m] += 1
            hv[m] //= p
        tp = np.ones(len(absd), dtype=np.int64)
        tp[vfull == 1] = p**min(k, 1)
        hard = np.nonzero(vfull >= 2)[0]
        for i in hard:
            Dv = -int(absd[i])
            hval = int(hvals[i])
            vp = int(vfull[i])
            H = _sylow_subgroup(Dv, p, vp, hval)
            ident = _canonical(principal_form(Dv))
            tp[i] = sum(1 for x in H if _pow_key(x, pk, Dv) == ident)
        tors *= tp
    return absd, tors
