"""Independent reference values frozen into the C++ test suites.

Everything here is computed with mpmath (50 digits) or plain numpy on code
paths that share nothing with the C++ implementation. Re-run with

    python3 tests/oracles/compute_oracles.py

and compare against the constants in tests/oracle_values.hpp.
"""

import math

import mpmath as mp
import numpy as np

mp.mp.dps = 50


def zipf_weights(alpha, J):
    j = np.arange(1, J + 1, dtype=np.float64)
    return j ** (-1.0 / alpha)


def zipf_masses(alpha, J):
    w = zipf_weights(alpha, J)
    return w / math.fsum(w)


def report(name, value):
    print(f"{name} = {mp.nstr(value, 20) if isinstance(value, mp.mpf) else repr(value)}")


# log B(100.5, 200.5)
report("log_beta_100_5_200_5", mp.log(mp.beta(mp.mpf("100.5"), mp.mpf("200.5"))))

# Beta(300, 700) density at its mode 299/998.
a, b = mp.mpf(300), mp.mpf(700)
mode = (a - 1) / (a + b - 2)
report("beta_300_700_pdf_at_mode", mode ** (a - 1) * (1 - mode) ** (b - 1) / mp.beta(a, b))

# Regularized incomplete beta spot values.
for (pa, pb, x) in [(0.5, 5.0, 0.2), (2.5, 3.5, 0.4), (50.0, 70.0, 0.45), (1000.0, 3000.0, 0.251),
                    (0.3, 0.7, 0.9)]:
    report(f"ibeta_{pa}_{pb}_{x}", mp.betainc(pa, pb, 0, x, regularized=True))

# Zipf alpha = 0.7, J = 1e6: exact relative tail sum via the Hurwitz zeta.
s = 1 / mp.mpf("0.7")
J = 10**6
tail = mp.zeta(s, J + 1)
Z_J = mp.zeta(s) - tail
report("zipf_0_7_1e6_residual", tail / Z_J)

# Karlin ratio, alpha = 0.5, J = 1e7: E K_{n,1} = n sum p (1-p)^{n-1}.
alpha = 0.5
p = zipf_masses(alpha, 10**7)
Z = math.fsum(zipf_weights(alpha, 10**7))
ell = Z ** (-alpha)
for n in (10, 100, 10**5):
    ek1 = n * math.fsum(p * np.exp((n - 1) * np.log1p(-p)))
    report(f"karlin_ratio_0_5_1e7_n{n}", ek1 / (alpha * math.gamma(1 - alpha) * ell * n ** alpha))

# GT bias for zipf(0.5, 1e4), n = 100.
p = zipf_masses(0.5, 10**4)
report("gt_bias_zipf_0_5_1e4_n100", math.fsum(p * p * np.exp(99 * np.log1p(-p))))

# A_n for zipf(0.5, 1e6), n = 1e4.
p = zipf_masses(0.5, 10**6)
n = 10**4
ek1 = n * math.fsum(p * np.exp((n - 1) * np.log1p(-p)))
ek2 = n * (n - 1) / 2 * math.fsum(p * p * np.exp((n - 2) * np.log1p(-p)))
report("ek1_zipf_0_5_1e6_n1e4", ek1)
report("ek2_zipf_0_5_1e6_n1e4", ek2)
report("a_n_zipf_0_5_1e6_n1e4", ek1 / math.sqrt(8 * max(ek1, 2 * ek2) + 4 / 3))

# Expected missing mass for zipf(0.5, 1e5), n = 1000.
p = zipf_masses(0.5, 10**5)
report("emm_zipf_0_5_1e5_n1000", math.fsum(p * np.exp(1000 * np.log1p(-p))))


# Impossibility profile: inf_x P(|Z/x - 1| > eps), Z ~ Beta(1, n), by direct
# minimization of the closed form with mpmath.
def miss(n, eps, x):
    n = mp.mpf(n)
    sv = lambda z: mp.mpf(0) if z >= 1 else (1 - z) ** n
    return sv((1 + eps) * x) + 1 - sv((1 - eps) * x)


def profile(n, eps):
    eps = mp.mpf(eps)
    f = lambda x: miss(n, eps, x)
    # The lower-branch minimizer lies at x ~ 1/n scale; scan then refine.
    xs = [mp.mpf(10) ** (mp.mpf(k) / 200 - 8) for k in range(0, 1601)]
    xs = [x for x in xs if x < 1 / (1 + eps)]
    best = min(xs, key=f)
    lo, hi = best / mp.mpf("1.05"), best * mp.mpf("1.05")
    for _ in range(200):
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if f(m1) < f(m2):
            hi = m2
        else:
            lo = m1
    x = (lo + hi) / 2
    upper_limit = 1 - (2 * eps / (1 + eps)) ** n
    return min(f(x), upper_limit)


report("impossibility_eps0_1_n1e4", profile(10**4, "0.1"))
report("impossibility_eps0_2_n2", profile(2, "0.2"))


# Lemma 2 floor: min over the admissible geometric grid of sqrt(a) * gap,
# gap = I_{m(a,b)}(a,b) - I_{m(a-1,b)}(a,b) = 1/2 - I_{m(a-1,b)}(a,b).
mp.mp.dps = 30


def median(pa, pb):
    g = lambda x: mp.betainc(pa, pb, 0, x, regularized=True) - mp.mpf("0.5")
    lo, hi = mp.mpf(0), mp.mpf(1)
    for _ in range(80):
        mid = (lo + hi) / 2
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def grid(start, stop, ratio):
    out, x = [], start
    while x <= stop * (1 + 1e-12):
        out.append(x)
        x *= ratio
    return out


floor = None
arg = None
for pa in grid(4.0, 1000.0, 1.5):
    for pb in grid(4.0, 10000.0, 1.5):
        if not pa < pb / 2:
            continue
        gap = mp.mpf("0.5") - mp.betainc(pa, pb, 0, median(pa - 1, pb), regularized=True)
        v = mp.sqrt(pa) * gap
        if floor is None or v < floor:
            floor, arg = v, (pa, pb)
report("lemma2_floor_grid_ratio_1_5", floor)
print("lemma2_floor_argmin", arg)
