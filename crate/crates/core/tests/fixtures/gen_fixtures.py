"""Regenerates reference.json with mpmath at 50 digits.

    python3 gen_fixtures.py > reference.json
"""
import json
from mpmath import mp, mpf, pi, gamma, ellipk, quad, sqrt, log

mp.dps = 50


def sphere(n):
    # |S^{n-1}|
    return 2 * pi ** (mpf(n) / 2) / gamma(mpf(n) / 2)


def k_sc(d, q):
    return mpf(d) / (d + 2) * (d * (2 * pi) ** d / (q * sphere(d))) ** (mpf(2) / d)


def l_sc(d, q):
    return 2 * q * sphere(d) / (d * (d + 2) * (2 * pi) ** d)


def phi1(x):
    x = mpf(x)
    if x < 2:
        return ellipk(x * x / 4)
    return 2 / x * ellipk(4 / (x * x))


def phi_d(k, d):
    k = mpf(k)
    f = lambda r: r ** (d - 2) / sqrt(1 - r * r) * phi1(k / sqrt(1 - r * r))
    pts = [0, 1] if k >= 2 else [0, sqrt(1 - k * k / 4), 1]
    return sphere(d - 1) * quad(f, pts)


def psi_d(k, d):
    k = mpf(k)
    f = lambda r: log((2 * sqrt(1 - r * r) + k) / abs(2 * sqrt(1 - r * r) - k)) * r ** (d - 2)
    pts = [0, 1] if k >= 2 else [0, sqrt(1 - k * k / 4), 1]
    return sphere(d - 1) / (2 * k * (2 * pi) ** d) * quad(f, pts)


def s(x):
    return mp.nstr(x, 40, strip_zeros=False)


out = {
    "constants": [
        {"d": d, "q": q, "k_sc": s(k_sc(d, q)), "l_sc": s(l_sc(d, q))}
        for d in range(1, 7)
        for q in (1, 2)
    ],
    "phi1": [{"x": x, "value": s(phi1(x))} for x in (0.1, 0.5, 1.0, 1.9, 2.1, 3.0, 10.0)],
    "phi_d": [{"d": d, "k": k, "value": s(phi_d(k, d))} for d in (2, 3, 4) for k in (0.5, 1.0, 1.5, 2.5, 4.0)],
    "psi_d": [{"d": d, "k": k, "value": s(psi_d(k, d))} for d in (2, 3, 4, 5) for k in (0.3, 1.0, 1.7, 2.5, 4.0)],
}
print(json.dumps(out, indent=1))
