"""Regenerates the frozen high-precision constants used by the test suite.

Run directly; copy the printed values into the tests when they change (they
should never change). Everything here uses mpmath at 40 significant digits,
entirely independent of the package's own quadrature.
"""

import mpmath as mp

mp.mp.dps = 40

# Meijer weight at x=1 for two Gamma factors equals 2*K0(2)
g2_at_1 = 2 * mp.besselk(0, 2)
print("G_2(1) = 2*K0(2) =", mp.nstr(g2_at_1, 25))

# same object for three factors, via the defining Mellin-Barnes integral on
# the vertical line Re s = 1 (mpmath handles the oscillatory tail)
def g_m(x, m):
    f = lambda t: (mp.gamma(1 + 1j * t) ** m) * mp.power(x, -(1 + 1j * t))
    val = mp.quad(f, [-60, 0, 60]) / (2 * mp.pi)
    return mp.re(val)

print("G_3(1) =", mp.nstr(g_m(mp.mpf(1), 3), 25))
print("G_2(4) =", mp.nstr(2 * mp.besselk(0, 4), 25))

# bump normalization: raw mass integral and its reciprocal
raw = mp.quad(lambda t: mp.e ** (-1 / (1 - t ** 2)), [-1, 1])
print("bump raw mass =", mp.nstr(raw, 25))
print("bump C        =", mp.nstr(1 / raw, 25))

# semicircle density values for the z=0 Stieltjes checks
print("semicircle(0)  =", mp.nstr(1 / mp.pi, 25))
print("semicircle(1)  =", mp.nstr(mp.sqrt(3) / (2 * mp.pi), 25))
