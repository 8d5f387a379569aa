# core/precision.py
"""
Double-double helpers for phase-accurate cosine sums.

A phase lambda*x is carried as a number of turns t = lambda*x / (2*pi) held
as an unevaluated sum hi + lo of two float64 values. Only frac(t) reaches
cos(), so the integer part never costs precision, even for lambda*x near 2**50.
All helpers are numpy-vectorised.
"""

import numpy as np
from mpmath import mp

# -- Split constants -----------------------------------
# hi + lo reproduces the constant to ~106 bits
with mp.workprec(256):
    _two_pi = 2 * mp.pi
    _inv_two_pi = 1 / _two_pi
    TWO_PI_HI = float(_two_pi)
    TWO_PI_LO = float(_two_pi - mp.mpf(TWO_PI_HI))
    INV_TWO_PI_HI = float(_inv_two_pi)
    INV_TWO_PI_LO = float(_inv_two_pi - mp.mpf(INV_TWO_PI_HI))

_SPLITTER = 134217729.0  # 2**27 + 1
PHASE_LIMIT = 2.0 ** 50  # |lambda * x| must stay below this


# -- Error-free transforms -----------------------------
def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def quick_two_sum(a, b):
    """Requires |a| >= |b|"""
    s = a + b
    return s, b - (s - a)


def split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def dd_mul(ah, al, bh, bl):
    p, e = two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return quick_two_sum(p, e)


def dd_mul_d(ah, al, b):
    p, e = two_prod(ah, b)
    e = e + al * b
    return quick_two_sum(p, e)


# -- Roots of integers ---------------------------------
def dd_root(n, q):
    """
    q-th root of exact integers n as a double-double pair.

    Start from the float64 root, then one Newton step with the residual
    n - r**q evaluated in double-double.
    """
    n = np.asarray(n, dtype=np.float64)
    if q == 2:
        r = np.sqrt(n)
    else:
        r = np.power(n, 1.0 / q)

    # r**q and r**(q-1) in double-double
    ph, pl = r, np.zeros_like(r)
    for _ in range(q - 2):
        ph, pl = dd_mul_d(ph, pl, r)
    deriv = q * ph  # q * r**(q-1), plain double is enough for the correction
    ph, pl = dd_mul_d(ph, pl, r)

    residual = (n - ph) - pl
    with np.errstate(divide='ignore', invalid='ignore'):
        lo = np.where(n > 0, residual / deriv, 0.0)
    return quick_two_sum(r, lo)


def turns_from_frequency(freq):
    """lambda / (2*pi) in double-double for float64 frequencies"""
    freq = np.asarray(freq, dtype=np.float64)
    return dd_mul(freq, np.zeros_like(freq), INV_TWO_PI_HI, INV_TWO_PI_LO)


def turns_from_root(n, q, coeff):
    """coeff * n**(1/q) in double-double; coeff must be a small exact integer"""
    rh, rl = dd_root(n, q)
    return dd_mul_d(rh, rl, float(coeff))


def frac_turns(th, tl, x):
    """
    frac(t * x) in [0, 1) for t = th + tl (double-double) and float64 x.

    Broadcasts th/tl against x, so a (m, 1) x against (T,) turns gives (m, T).
    """
    ph, pl = dd_mul_d(th, tl, x)
    f = ph - np.floor(ph)
    f = f + pl
    return f - np.floor(f)


def phase_angle(th, tl, x, beta=0.0):
    """2*pi*frac(t*x) + beta, accurate to a few ulps of 2*pi"""
    return TWO_PI_HI * frac_turns(th, tl, x) + beta


def reduce_angle(beta):
    """Map an angle into (-pi, pi]"""
    b = float(np.fmod(beta, TWO_PI_HI))
    if b <= -np.pi:
        b += TWO_PI_HI
    elif b > np.pi:
        b -= TWO_PI_HI
    # snap values that are pi up to rounding
    if abs(b - np.pi) < 1e-12 or abs(b + np.pi) < 1e-12:
        b = np.pi
    return b
