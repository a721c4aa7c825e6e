"""Independent high-precision oracles for the frozen golden values in the unit tests.

Uses mpmath only (no code shared with the C++ implementation). Run:
    python3 tests/oracles/golden_values.py
"""
import mpmath as mp

mp.mp.dps = 40


def psi(r, x):
    # upper Poisson tail via the regularized lower incomplete gamma: P(Po(x) >= r) = P(r, x)
    if r == 0:
        return mp.mpf(1)
    if x == 0:
        return mp.mpf(0)
    return mp.gammainc(r, 0, x, regularized=True)


def smallest_root(f, lo, hi, step):
    """Dense left-to-right scan, then bisection to 1e-30."""
    y = mp.mpf(lo)
    fy = f(y)
    while y < hi:
        y2 = min(y + step, mp.mpf(hi))
        f2 = f(y2)
        if f2 <= 0 < fy or f2 == 0:
            a, b = y, y2
            for _ in range(200):
                m = (a + b) / 2
                if f(m) > 0:
                    a = m
                else:
                    b = m
            return (a + b) / 2
        y, fy = y2, f2
    return None


def point_mass(d, r, p):
    f = lambda y: (1 - p) * psi(r, d * y) + p - y
    y = smallest_root(f, mp.mpf('1e-12'), 1, mp.mpf('1e-4'))
    # refine the scan locally at 1e-6 to confirm no earlier crossing was skipped
    y_fine = smallest_root(f, max(mp.mpf('1e-12'), y - mp.mpf('2e-4')), y + mp.mpf('1e-5'), mp.mpf('1e-6'))
    assert abs(y - y_fine) < mp.mpf('1e-25')
    return y, (1 - p) * psi(r, d * y) + p


def mixture(values, probs, r, p):
    d = sum(v * q for v, q in zip(values, probs))
    star = [(v, v * q / d) for v, q in zip(values, probs)]
    f = lambda y: (1 - p) * sum(q * psi(r, v * y) for v, q in star) + p - y
    y = smallest_root(f, mp.mpf('1e-12'), 1, mp.mpf('1e-4'))
    frac = (1 - p) * sum(q * psi(r, v * y) for v, q in zip(values, probs)) + p
    return y, frac


def powerlaw_expect_star(beta, x0, r, y):
    # size-biased density (beta-2) x0^(beta-2) w^(1-beta) on [x0, inf)
    g = lambda w: (beta - 2) * x0 ** (beta - 2) * w ** (1 - beta)
    return mp.quad(lambda w: psi(r, w * y) * g(w), [x0, 10 * x0, 1000 * x0 / (y + 1e-30), mp.inf])


def powerlaw_expect(beta, x0, r, y):
    c = x0 ** (beta - 1)
    f = lambda w: (beta - 1) * c * w ** (-beta)
    return mp.quad(lambda w: psi(r, w * y) * f(w), [x0, 10 * x0, 1000 * x0 / (y + 1e-30), mp.inf])


def powerlaw(beta, x0, r, p=0):
    f = lambda y: (1 - p) * powerlaw_expect_star(beta, x0, r, y) + p - y
    y = smallest_root(f, mp.mpf('1e-6'), 1, mp.mpf('1e-2'))
    return y, (1 - p) * powerlaw_expect(beta, x0, r, y) + p


if __name__ == '__main__':
    print('psi_2(1)            =', mp.nstr(psi(2, 1), 20))
    y, fr = point_mass(10, 2, mp.mpf('0.2'))
    print('point mass d=10 r=2 p=0.2: y_hat =', mp.nstr(y, 20), ' fraction =', mp.nstr(fr, 20))
    y, fr = mixture([1, 3], [mp.mpf('0.5'), mp.mpf('0.5')], 2, mp.mpf('0.3'))
    print('mixture {1,3}x{.5,.5} r=2 p=0.3: y_hat =', mp.nstr(y, 20), ' fraction =', mp.nstr(fr, 20))
    y, fr = mixture([1, 10], [mp.mpf('0.7'), mp.mpf('0.3')], 2, mp.mpf('0.3'))
    print('mixture {1,10}x{.7,.3} r=2 p=0.3: y_hat =', mp.nstr(y, 20), ' fraction =', mp.nstr(fr, 20))
    y, fr = powerlaw(mp.mpf('2.5'), 1, 2)
    print('power law beta=2.5 x0=1 r=2 p=0: y_hat =', mp.nstr(y, 20), ' fraction =', mp.nstr(fr, 20))
