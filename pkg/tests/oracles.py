"""High-precision reference values (mpmath, 50 digits) behind the frozen goldens."""

import mpmath as mp

mp.mp.dps = 50


def theta(t, beta=1, sigma=3):
    t, beta, sigma = mp.mpf(t), mp.mpf(beta), mp.mpf(sigma)
    return 2 * sigma**2 / beta**2 * (beta * t - 1 + mp.exp(-beta * t))


def pdf(r, t, mu=1):
    v = theta(t)
    return mp.exp(-(mp.mpf(r) - mu * t) ** 2 / (2 * v)) / mp.sqrt(2 * mp.pi * v)


def mass(r, t, mu=1):
    # closed-form normal mass on [0, r]
    v = theta(t)
    sd = mp.sqrt(v)
    return mp.ncdf((r - mu * t) / sd) - mp.ncdf(-mu * t / sd)


def conditional(r, t):
    return pdf(r, t) / mass(r, t)


def time_averaged(r, t):
    def ratio(z):
        # below ~1e-20 the variance cancels to zero at this precision; the
        # density at r is then exp(-huge) anyway
        if z < mp.mpf("1e-20"):
            return mp.mpf(0)
        return conditional(r, z)
    return mp.quad(ratio, [0, r / 4, r / 2, r, t] if t > r else [0, t]) / t


def steady_closed_form(r, beta=1, sigma=3, mu=1):
    k = mp.mpf(mu) * beta / (2 * mp.mpf(sigma) ** 2)
    return k / (1 - mp.exp(-k * r))


def friis(d, p_tx=0.1, lam=0.0508):
    return p_tx * mp.mpf(lam) ** 2 / (16 * mp.pi**2 * mp.mpf(d) ** 2)
