"""High-precision reference values frozen into the Rust tests.

Run with `python3 tools/oracles.py`; needs mpmath.
"""
from mpmath import mp, mpf, quad, sqrt, exp, pi, erfc, log, e, inf

mp.dps = 50


def phi(x):
    return exp(-x * x / 2) / sqrt(2 * pi)


def cdf(x):
    return erfc(-x / sqrt(2)) / 2


def sf(x):
    return erfc(x / sqrt(2)) / 2


def mills(x):
    return sf(x) / phi(x)


def mean_mt(a, t):
    return quad(lambda s: exp((a + mpf(1) / 2) * s), [0, t])


def var_sigma2(a, t):
    b = a + mpf(1) / 2
    # Cov(e^{as+B_s}, e^{au+B_u}) = e^{b(s+u)} (e^{min(s,u)} - 1)
    return 2 * quad(lambda u: quad(lambda s: exp(b * (s + u)) * (exp(s) - 1), [0, u]), [0, t])


def show(name, v):
    print(f"{name} = {mp.nstr(v, 20)}")


show("Phi(1)", cdf(1))
show("Phi(1) by quadrature", quad(phi, [0, 1]) + mpf(1) / 2)
show("tail(2)", sf(2))
show("tail(30)", sf(30))
show("tail(8)", sf(8))
show("tail(35)", sf(35))
show("scaled_tail(100)", mills(100))
show("scaled_tail(40)", mills(40))
show("scaled_tail(-2)", sqrt(2 * pi) * exp(2) * cdf(2))
show("f_1(-40)", mills(40) * sf(1))
show("tail(1)/40", sf(1) / 40)
show("2Phi(1)-1", 2 * cdf(1) - 1)
for a in [-2, -1.5, -1, -0.5, 0, 1]:
    for t in [0.001, 0.01, 0.05, 0.1, 1]:
        a_ = mpf(a)
        t_ = mpf(t)
        print(f"a={a} t={t} m={mp.nstr(mean_mt(a_, t_), 20)} s2={mp.nstr(var_sigma2(a_, t_), 20)}")
show("s2 a=0 t=1 (spec closed form)",
     mpf(4) / 3 * ((e**2 - 1) / 2 - 2 * (sqrt(e) - 1)) - (2 * (sqrt(e) - 1)) ** 2)

# q=2 rank-one chaos F = (N^2-1)/sqrt(2)


def chaos_cdf(z):
    if z < -1 / sqrt(2):
        return mpf(0)
    return 1 - 2 * sf(sqrt(1 + sqrt(2) * z))


def chaos_abs_tail(x):
    return 1 - chaos_cdf(x) + chaos_cdf(-x)


show("P(|F|>2)", chaos_abs_tail(2))
show("chaos bound z=4", sqrt(2) * (sqrt(chaos_abs_tail(2)) + 2 * exp(-4)))

# crossover of the exact-tail q=2 curve below sqrt(2) on a 161-point grid
zs = [mpf(-8) + mpf(16) * i / 160 for i in range(161)]
below = [sqrt(2) * (sqrt(min(1, chaos_abs_tail(abs(z) / 2))) + 2 * exp(-z * z / 4)) < sqrt(2) for z in zs]
zstar = None
for z, b in sorted(zip(zs, below), key=lambda p: abs(p[0])):
    pass
cands = [abs(z) for z in zs if all(bb for zz, bb in zip(zs, below) if abs(zz) >= abs(z))]
show("crossover z*", min(cands))

# moments of (N^2-1)/sqrt(2)
show("E F^6", quad(lambda x: ((x * x - 1) / sqrt(2)) ** 6 * phi(x), [-inf, inf]))
show("E F^8", quad(lambda x: ((x * x - 1) / sqrt(2)) ** 8 * phi(x), [-inf, inf]))

# exponential functional, t = 1e-3 limits
t = mpf("0.001")
m = mean_mt(mpf(0), t)
s2 = var_sigma2(mpf(0), t)
show("m/t", m / t)
show("3 s2/t^3", 3 * s2 / t**3)
show("prefactor/6", 2 * exp(4 * t) * t**3 / s2 / 6)
show("ln-ratio z=1", log(1 + sqrt(s2) / (2 * m)) ** 2 / (4 * t) / (mpf(1) / 48))

t = mpf("0.1")
m = mean_mt(mpf(0), t)
s2 = var_sigma2(mpf(0), t)
show("dk1(2) a=0 t=0.1", exp(-log(1 + 2 * sqrt(s2) / m) ** 2 / (2 * t)))
show("dk1(1) a=0 t=0.1", exp(-log(1 + sqrt(s2) / m) ** 2 / (2 * t)))
t = mpf(1)
s2 = var_sigma2(mpf(0), t)
show("gamma upper a=0 t=1", 4 * exp(8) / s2**2)
t = mpf("0.05")
m = mean_mt(mpf(0), t)
s2 = var_sigma2(mpf(0), t)
pre = 2 * exp(4 * t) * t**3 * sqrt(t) / s2
show("vnms t=0.05 z=3", pre * (exp(-log(1 + 3 * sqrt(s2) / (2 * m)) ** 2 / (4 * t)) + exp(-mpf(9) / 16) + 2 * exp(-mpf(9) / 4)))
show("vnms t=0.05 z=0", pre * 4)
