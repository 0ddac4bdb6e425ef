"""Weil heights via Mahler measures, counts of small generators, and the
minimal-generator-height invariant of quadratic fields.

For an algebraic number alpha with primitive integer minimal polynomial f of
degree n, the relative multiplicative Weil height of alpha over K = Q(alpha)
equals the Mahler measure

    M(f) = |lead(f)| * prod over roots r of max(1, |r|),

which is >= 1 with equality exactly for (products of) cyclotomic polynomials
and powers of x (Kronecker).  M(f) is bounded below by 2^(-n) times the
max-norm of the coefficient vector, and coefficientwise |a_i| <= C(n,i) M(f),
which turns "height <= X" into a finite coefficient box.

eta(K/Q) = inf of H_K over generators of K is approached from above by
searching quadratic polynomials of discriminant D * square; every such
Mahler measure is >= sqrt(|disc|)/2, which pins the Silverman-type ratio
eta_upper / |D|^(1/2) away from 0.
"""

from dataclasses import dataclass
from math import comb, gcd, isqrt, sqrt

import mpmath as mp
import numpy as np

from .arith import factorize
from .family import quadratic_discriminants

__all__ = [
    "mahler_measure",
    "is_kronecker",
    "count_small_generators",
    "EtaEstimate",
    "eta_upper_quadratic",
    "silverman_scan",
    "ev_bound_report",
    "SILVERMAN_RATIO_FLOOR",
]

# Frozen lower bound for min over |D| of eta_upper / |D|^(1/2); any genuine
# Mahler measure of a disc D t^2 polynomial is >= sqrt(|D|)/2, so 0.45 holds
# with slack.
SILVERMAN_RATIO_FLOOR = 0.45


def _trim(coeffs):
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    shift = 0
    while c and c[0] == 0:
        c.pop(0)
        shift += 1
    return c, shift


def _cyclotomic_coeffs(k: int):
    from .zeta import cyclotomic_polynomial

    return list(cyclotomic_polynomial(k))


def _poly_divmod(num, den):
    num = list(num)
    q = [0] * (len(num) - len(den) + 1)
    for i in range(len(q) - 1, -1, -1):
        c = num[i + len(den) - 1]
        if c % den[-1]:
            return None
        q[i] = c // den[-1]
        for j, dj in enumerate(den):
            num[i + j] -= q[i] * dj
    if any(num):
        return None
    return q


def _strip_cyclotomic(coeffs):
    """Divide out all cyclotomic factors, exactly; returns (rest, stripped?)."""
    c = list(coeffs)
    stripped = False
    k = 1
    while k == 1 or len(_cyclotomic_coeffs(k)) - 1 <= len(c) - 1:
        phi = _cyclotomic_coeffs(k)
        if len(phi) - 1 > len(c) - 1:
            break
        q = _poly_divmod(c, phi)
        if q is not None and len(q) >= 1:
            c = q
            stripped = True
            continue  # the same factor may divide again
        k += 1
    return c, stripped


def is_kronecker(coeffs) -> bool:
    """True iff the polynomial is +-x^k times a product of cyclotomics,
    i.e. Mahler measure exactly 1 (decided exactly)."""
    c, _ = _trim(coeffs)
    if not c:
        raise ValueError("zero polynomial")
    c, _ = _strip_cyclotomic(c)
    return len(c) == 1 and abs(c[0]) == 1


def mahler_measure(coeffs, rel_tol: float = 1e-9):
    """(value, error_bound): |lead| * prod max(1, |root|) of an integer
    polynomial, with a certified relative error bound <= rel_tol.

    Cyclotomic factors and powers of x are removed exactly first, so the
    measure-1 case is decided exactly; the remaining factor is handled by
    arbitrary-precision root finding.
    """
    c, _ = _trim(coeffs)
    if not c:
        raise ValueError("zero polynomial")
    if len(c) == 1:
        return abs(c[0]), 0.0
    c, _ = _strip_cyclotomic(c)
    if len(c) == 1:
        return abs(c[0]), 0.0
    deg = len(c) - 1
    if deg == 2:
        a, b, cc = c[2], c[1], c[0]
        disc = b * b - 4 * a * cc
        if disc < 0:
            m = max(abs(a), abs(cc))
            return float(m), 0.0
        s = mp.sqrt(mp.mpf(disc))
        r1 = (-b + s) / (2 * a)
        r2 = (-b - s) / (2 * a)
        val = abs(a) * max(1, abs(r1)) * max(1, abs(r2))
        return float(val), float(val) * 1e-15
    with mp.workdps(40):
        roots, err = mp.polyroots(list(reversed(c)), maxsteps=200, error=True)
        val = mp.mpf(abs(c[-1]))
        for r in roots:
            val *= max(1, abs(r))
        bound = float(val) * max(float(err) * deg * 4, 1e-20)
    if bound > rel_tol * float(val):
        raise ArithmeticError("could not certify the Mahler measure to tolerance")
    return float(val), bound


# ---------------------------------------------------------------------------
# Counting algebraic numbers of bounded height
# ---------------------------------------------------------------------------


def _quadratic_measures(a, b, c):
    """Vectorized Mahler measures of a x^2 + b x + c (a > 0), with the
    branches chosen so that boundary values M = integer are exact."""
    disc = b * b - 4 * a * c
    m = np.empty(a.shape, dtype=np.float64)
    neg = disc < 0
    m[neg] = np.maximum(a[neg], c[neg]).astype(np.float64)
    pos = ~neg
    with np.errstate(invalid="ignore"):
        s = np.sqrt(disc[pos].astype(np.float64))
        r1 = np.abs((-b[pos] + s) / (2 * a[pos]))
        r2 = np.abs((-b[pos] - s) / (2 * a[pos]))
        big1, big2 = r1 > 1, r2 > 1
        val = a[pos].astype(np.float64)
        both = big1 & big2
        val = np.where(both, np.abs(c[pos]).astype(np.float64), val)
        one = big1 ^ big2
        val = np.where(one, a[pos] * np.maximum(r1, r2), val)
    m[pos] = val
    return m


def count_small_generators(n: int, X: float, cap: float = 200.0) -> int:
    """N_H(X): algebraic numbers of degree n over Q with relative height
    (= Mahler measure of the minimal polynomial) at most X.

    Counts n * #{primitive irreducible degree-n polynomials, positive leading
    coefficient, M <= X}; the coefficient box |a_i| <= C(n,i) X is exhaustive
    since every coefficient is at most binom(n,i) times the measure.
    """
    if n not in (2, 3):
        raise ValueError("only degrees 2 and 3 are enumerated")
    if X > cap:
        raise ValueError(f"X exceeds the configured cap {cap}")
    if X < 1:
        return 0
    B = int(X)
    if n == 2:
        a = np.arange(1, B + 1)
        b = np.arange(-2 * B, 2 * B + 1)
        c = np.arange(-B, B + 1)
        A, Bb, Cc = np.meshgrid(a, b, c, indexing="ij", sparse=False)
        A, Bb, Cc = A.ravel(), Bb.ravel(), Cc.ravel()
        disc = Bb * Bb - 4 * A * Cc
        sq = np.zeros(disc.shape, dtype=bool)
        nn = disc >= 0
        r = np.zeros(disc.shape, dtype=np.int64)
        r[nn] = np.sqrt(disc[nn].astype(np.float64)).astype(np.int64)
        for dd in (-1, 0, 1):
            sq[nn] |= (r[nn] + dd) ** 2 == disc[nn]
        irred = ~sq
        g = np.gcd(np.gcd(A, np.abs(Bb)), np.abs(Cc))
        prim = g == 1
        keep = irred & prim
        m = _quadratic_measures(A[keep], Bb[keep], Cc[keep])
        return int(np.sum(m <= X + 1e-12)) * 2
    # degree 3: rational-root filter, then batched companion eigenvalues;
    # the all-roots-outside and no-roots-outside branches are exact integers
    polys = []
    for a in range(1, B + 1):
        for b in range(-3 * B, 3 * B + 1):
            for c in range(-3 * B, 3 * B + 1):
                for d in range(-B, B + 1):
                    if d == 0:
                        continue  # 0 is a rational root
                    if gcd(gcd(a, abs(b)), gcd(abs(c), abs(d))) != 1:
                        continue
                    if abs(d) > X or abs(b) > 3 * X or abs(c) > 3 * X:
                        continue
                    if _has_rational_root(a, b, c, d):
                        continue
                    polys.append((a, b, c, d))
    if not polys:
        return 0
    arr = np.array(polys, dtype=np.float64)
    k = len(polys)
    comp = np.zeros((k, 3, 3))
    comp[:, 1, 0] = 1.0
    comp[:, 2, 1] = 1.0
    comp[:, 0, 2] = -arr[:, 3] / arr[:, 0]
    comp[:, 1, 2] = -arr[:, 2] / arr[:, 0]
    comp[:, 2, 2] = -arr[:, 1] / arr[:, 0]
    roots = np.linalg.eigvals(comp)
    mods = np.abs(roots)
    out = mods > 1.0  # irreducible cubics have no roots on the unit circle
    n_out = out.sum(axis=1)
    m = np.where(
        n_out == 0,
        arr[:, 0],
        np.where(n_out == 3, np.abs(arr[:, 3]), arr[:, 0] * np.prod(np.where(out, mods, 1.0), axis=1)),
    )
    return int(np.sum(m <= X + 1e-9)) * 3


def _has_rational_root(a, b, c, d):
    for p in _divisors_signed(d):
        for q in _divisors_pos(a):
            if gcd(abs(p), q) == 1 and a * p**3 + b * p**2 * q + c * p * q**2 + d * q**3 == 0:
                return True
    return False


def _divisors_pos(n):
    n = abs(n)
    return [d for d in range(1, n + 1) if n % d == 0]


def _divisors_signed(n):
    ds = _divisors_pos(n)
    return [d for a in ds for d in (a, -a)]


# ---------------------------------------------------------------------------
# eta(K/Q) upper bounds for quadratic fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EtaEstimate:
    D: int
    eta_upper: float
    witness: tuple  # (a, b, c) of the minimizing polynomial
    silverman_ratio: float  # eta_upper / |D|^(1/2)


def eta_upper_quadratic(D: int, box_factor: float = 4.0) -> EtaEstimate:
    """Minimum Mahler measure over integer quadratics of discriminant
    D * square with all coefficients bounded by box_factor * sqrt(|D|).

    M(a,b,c) = M(a,-b,c), so only b >= 0 is searched and the witness is
    reported with nonnegative middle coefficient."""
    from .classgroup import is_fundamental

    if not is_fundamental(D):
        raise ValueError("D must be a fundamental discriminant")
    B = int(box_factor * sqrt(abs(D))) + 1
    tmax = isqrt(5 * B * B // abs(D)) + 1
    best, wit = None, None
    for t in range(1, tmax + 1):
        disc = D * t * t
        for a in range(1, B + 1):
            bs = np.arange(abs(disc) % 2, B + 1, 2, dtype=np.int64)
            ok = (bs * bs - disc) % (4 * a) == 0
            if not ok.any():
                continue
            bs = bs[ok]
            cs = (bs * bs - disc) // (4 * a)
            inbox = np.abs(cs) <= B
            bs, cs = bs[inbox], cs[inbox]
            if not len(bs):
                continue
            aa = np.full(len(bs), a, dtype=np.int64)
            m = _quadratic_measures(aa, bs, cs)
            i = int(np.argmin(m))
            if best is None or m[i] < best:
                best = float(m[i])
                wit = (a, int(bs[i]), int(cs[i]))
    ratio = best / sqrt(abs(D))
    return EtaEstimate(D, best, wit, ratio)


def silverman_scan(limit: int):
    """Witness-based eta upper bounds for every fundamental |D| <= limit
    (both signs), via one pass over the form space a >= 1, 0 <= b <= a.

    For D < 0 this is the exact box minimum (the imaginary-case measure
    max(a, c) is minimized at |b| <= a <= c); for D > 0 the witnesses include
    all monic translates, so the recorded values are honest upper bounds
    (every such value is >= sqrt(|D|)/2 regardless).  Returns (D array,
    ratio array eta_upper/sqrt(|D|)).
    """
    eta_pos = np.full(limit + 1, np.inf)
    eta_neg = np.full(limit + 1, np.inf)
    fpos, fneg = _fundamental_kernel_tables(limit)
    amax = isqrt(limit) + 1
    for a in range(1, amax + 1):
        cmax = (limit + a * a) // (4 * a) + 1
        b = np.arange(0, a + 1, dtype=np.int64)
        c = np.arange(-cmax, cmax + 1, dtype=np.int64)
        C, Bb = np.meshgrid(c, b, indexing="ij")
        disc = (Bb * Bb - 4 * a * C).ravel()
        Bb, C = Bb.ravel(), C.ravel()
        ok = (np.abs(disc) <= limit) & (disc != 0)
        disc, Bb, C = disc[ok], Bb[ok], C[ok]
        pos = disc > 0
        A = np.full(len(Bb), a, dtype=np.int64)
        m = _quadratic_measures(A, Bb, C)
        dp = fpos[disc[pos]]
        vp = dp > 0
        np.minimum.at(eta_pos, dp[vp], m[pos][vp])
        dn = fneg[-disc[~pos]]
        vn = dn > 0
        np.minimum.at(eta_neg, dn[vn], m[~pos][vn])
    D = quadratic_discriminants(limit)
    ratios = np.empty(len(D))
    for i, d in enumerate(D):
        e = eta_pos[d] if d > 0 else eta_neg[-d]
        ratios[i] = e / sqrt(abs(d))
    return D, ratios


def _fundamental_kernel_tables(limit: int):
    """fpos[k] = |fundamental discriminant| attached to disc = +k, fneg[k]
    the same for disc = -k (0 when it exceeds the limit)."""
    sqf = np.arange(limit + 1, dtype=np.int64)
    for p in range(2, isqrt(limit) + 1):
        p2 = p * p
        idx = np.arange(p2, limit + 1, p2)
        while True:
            m = sqf[idx] % p2 == 0
            if not m.any():
                break
            sqf[idx[m]] //= p2
    s = sqf[1:]
    pos_f = np.where(s % 4 == 1, s, 4 * s)  # fund of +s is s iff s = 1 mod 4
    neg_f = np.where(s % 4 == 3, s, 4 * s)  # fund of -s is -s iff s = 3 mod 4
    fpos = np.zeros(limit + 1, dtype=np.int64)
    fneg = np.zeros(limit + 1, dtype=np.int64)
    fpos[1:] = np.where(pos_f <= limit, pos_f, 0)
    fneg[1:] = np.where(neg_f <= limit, neg_f, 0)
    return fpos, fneg


def _fundamental_of(disc: int) -> int:
    """Fundamental discriminant of Q(sqrt(disc))."""
    s = 1
    for p, e in factorize(abs(disc)).factors:
        if e % 2:
            s *= p
    s *= 1 if disc > 0 else -1
    return s if s % 4 == 1 else 4 * s


# ---------------------------------------------------------------------------
# Ellenberg-Venkatesh style report
# ---------------------------------------------------------------------------


def ev_bound_report(D: int, ell: int, delta: float) -> dict:
    """Compare the predicted torsion bound |D|^(1/2)/M (from M small split
    primes) against the actual #Cl[ell], for an imaginary quadratic field."""
    from .arith import primes_up_to
    from .classgroup import class_group, torsion_count
    from .family import quadratic_split_mask

    hypothesis_ok = delta < 0.5 / ell  # the bound's proof needs delta < gamma/ell
    cutoff = abs(D) ** delta
    M = 0
    for p in primes_up_to(int(cutoff)):
        p = int(p)
        if p == 2:
            split = abs(D) % 2 == 1 and D % 8 == 1
        else:
            split = D % p != 0 and pow(D % p, (p - 1) // 2, p) == 1
        if split:
            M += 1
    tc = torsion_count(D, ell)
    predicted = sqrt(abs(D)) / M if M else float("inf")
    return {
        "D": D,
        "ell": ell,
        "delta": delta,
        "M": M,
        "predicted_bound": predicted,
        "vacuous": M == 0,
        "torsion": tc,
        "ratio": tc / predicted if M else 0.0,
        "hypothesis_satisfied": hypothesis_ok,
    }
