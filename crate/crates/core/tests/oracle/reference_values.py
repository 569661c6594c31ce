"""High-precision reference values for the analytic evaluators.

Recomputes every formula at 60 significant digits with mpmath, independently
of the Rust code path. The output is frozen into tests/acceptance.rs and
tests/bounds.rs; rerun this script if a pinned input changes.

    python3 reference_values.py
"""
from mpmath import mp, mpf, log, exp, ceil
from sympy import primerange, totient

mp.dps = 60


def theorem1(x, c):
    x, c = mpf(x), mpf(c)
    ll = log(log(x))
    return x * exp(-c * ll**2 * log(ll))


def ck(k, q, x, y, d1, d2):
    x, y = mpf(x), mpf(y)
    ratio = mpf(q) / totient(q)
    return mpf(d1) * ratio * (mpf(d2) * k * log(k))**k * log(log(x / y))**(k - 1)


def e_const(k, d1, d2, c0):
    return mpf(d1) * (mpf(c0) * mpf(d2) * k * log(k + 1))**k


def lasteq(x, q, d1=1, d2=1, c0=1):
    x = mpf(x)
    lx = log(x)
    llx = log(lx)
    big_k = max(2, int(ceil(llx)))
    e0 = 4 * mpf(d1)
    ek = e_const(big_k, d1, d2, c0)
    return (mpf(q) / (e0 * big_k) * (llx / lx)**(1 - mpf(1) / big_k) * x
            * exp(-(ek * lx / llx)**(mpf(1) / big_k) * llx))


def mertens(z):
    acc = mpf(1)
    for p in primerange(2, z + 1):
        acc *= mpf(p) / (p - 1)
    return acc


def show(name, args, value):
    print(f"{name}{args}: {mp.nstr(value, 25)}")


for x, c in [(mpf(10)**6, 1), (mpf(10)**10, 1), (mpf(10)**20, 0.5),
             (mpf(10)**50, 0.1), (mpf(10)**100, 0.01)]:
    show("theorem1", (mp.nstr(x, 5), c), theorem1(x, c))

for args in [(2, 2, mpf(2)**64, mpf(2)**16, 1, 1), (3, 2, mpf(10)**30, mpf(10)**10, 1, 1),
             (4, 3, mpf(10)**40, mpf(10)**8, 2, 0.5), (5, 10, mpf(10)**60, mpf(10)**20, 1, 1),
             (2, 6, mpf(10)**12, mpf(10)**3, 1.5, 2)]:
    show("ck", tuple(mp.nstr(a, 5) for a in args), ck(*args))

for x, q in [(mpf(10)**6, 2), (mpf(10)**12, 2), (mpf(10)**20, 3), (mpf(10)**30, 10), (mpf(10)**50, 2)]:
    show("lasteq", (mp.nstr(x, 5), q), lasteq(x, q))

for z in [2, 10, 100, 1000, 100000]:
    show("mertens", (z,), mertens(z))
