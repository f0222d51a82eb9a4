"""Regenerate the embedded Daubechies lowpass table in ``aggwave/_filters.py``.

Extremal-phase construction: factor the Daubechies half-band polynomial and
keep the roots inside the unit circle. Runs at 60 digits with mpmath.
"""

import mpmath as mp

mp.mp.dps = 60


def daubechies_lowpass(n):
    # P(y) = sum_k C(n-1+k, k) y^k with y = sin^2(w/2) = (2 - z - 1/z) / 4
    # roots in y -> roots in z via z^2 - (2 - 4y) z + 1 = 0
    coeffs = [mp.binomial(n - 1 + k, k) for k in range(n)]
    zeros = []
    if n > 1:
        yroots = mp.polyroots(list(reversed(coeffs)), maxsteps=500, extraprec=200)
        for y in yroots:
            b = 2 - 4 * y
            disc = mp.sqrt(b * b - 4)
            z1, z2 = (b + disc) / 2, (b - disc) / 2
            zeros.append(z1 if abs(z1) < 1 else z2)
    poly = [mp.mpc(1)]
    for z0 in [-1] * n + zeros:
        nxt = [mp.mpc(0)] * (len(poly) + 1)
        for i, c in enumerate(poly):
            nxt[i] += c
            nxt[i + 1] -= c * z0
        poly = nxt
    taps = [mp.re(c) for c in poly]
    scale = mp.sqrt(2) / mp.fsum(taps)
    return [t * scale for t in taps]


if __name__ == "__main__":
    print("LOWPASS = {")
    for n in range(1, 11):
        taps = daubechies_lowpass(n)
        print(f"    {n}: (")
        for t in taps:
            print(f"        {mp.nstr(t, 20, min_fixed=-5, max_fixed=5)},")
        print("    ),")
    print("}")
