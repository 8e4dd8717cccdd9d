"""Regenerates the frozen constants in tests/oracles.hpp at 30 significant digits.

Every value comes from direct series or quadrature in mpmath, independent of the
library's code paths.
"""
import mpmath as mp

mp.mp.dps = 40


def poch_inf(z, q):
    return mp.qp(z, q)


def phi(n, w, q):
    r = {
        0: lambda u: u / (1 - u),
        1: lambda u: u / (1 - u) ** 2,
        2: lambda u: u * (1 + u) / (1 - u) ** 3,
        3: lambda u: u * (1 + 4 * u + u ** 2) / (1 - u) ** 4,
    }[n]
    return mp.nsum(lambda k: r(q ** k * w), [0, mp.inf])


def fig1_Phi(n, w, x, q):
    # xi = 1 on (0, 0.2), 0.4 beyond
    a = min(x, mp.mpf("0.2"))
    b = max(x - mp.mpf("0.2"), 0)
    return a * phi(n, w, q) + b * phi(n, w / mp.mpf("0.4"), q)


def airy_F2(r, n=80):
    # Nystrom on (r, r + 16) with Gauss-Legendre, Airy kernel; mpmath precision.
    nodes, weights = zip(*[(x, w) for x, w in zip(*gl(n))])
    L = 16
    xs = [r + (x + 1) * L / 2 for x in nodes]
    ws = [w * L / 2 for w in weights]
    ai = [mp.airyai(x) for x in xs]
    aip = [mp.airyai(x, 1) for x in xs]
    M = mp.matrix(n, n)
    for i in range(n):
        for j in range(n):
            if i == j:
                k = aip[i] ** 2 - xs[i] * ai[i] ** 2
            else:
                k = (ai[i] * aip[j] - aip[i] * ai[j]) / (xs[i] - xs[j])
            M[i, j] = (1 if i == j else 0) - mp.sqrt(ws[i] * ws[j]) * k
    return mp.det(M)


def gl(n):
    # Double-precision Gauss-Legendre rule; exact to rounding for the smooth integrand.
    import numpy as np

    x, w = np.polynomial.legendre.leggauss(n)
    return [mp.mpf(v) for v in x], [mp.mpf(v) for v in w]


def main():
    q = mp.mpf("0.5")
    out = {}
    out["qq_inf_half"] = poch_inf(q, q)
    out["phi1_half"] = phi(1, mp.mpf("0.5"), q)
    out["phi0_minus1"] = phi(0, mp.mpf(-1), q)
    out["phi3_minus_phi2_half"] = phi(3, mp.mpf("0.5"), q) - phi(2, mp.mpf("0.5"), q)
    out["phi1_inverse_1e6"] = mp.findroot(lambda w: phi(1, w, q) - 10 ** 6, (mp.mpf("0.99"), mp.mpf("0.99999")), solver="anderson")
    out["fig1_Phi2_w02_x03"] = fig1_Phi(2, mp.mpf("0.2"), mp.mpf("0.3"), q)
    out["omega_hom_tau4_x1"] = mp.findroot(lambda w: 4 * w - phi(2, w, q), mp.mpf("0.5"))
    # Fig. 1 transition: omega_circ(3, sigma) = 0.7 means 3 * 0.7 = sigma * phi_2(0.7).
    out["fig1_sigma"] = 3 * mp.mpf("0.7") / phi(2, mp.mpf("0.7"), q)
    # log g at w = 0.2 + 0.1i, Fig. 1 field, lambda = 5, t = 15, x = 0.3.
    w = mp.mpc("0.2", "0.1")
    lg = -15 * w - mp.log(poch_inf(w / mp.mpf("0.7"), q)) + 5 * fig1_Phi(0, w, mp.mpf("0.3"), q)
    out["fig1_g_re"] = mp.re(mp.exp(lg))
    out["fig1_g_im"] = mp.im(mp.exp(lg))
    out["F2_minus2"] = airy_F2(mp.mpf(-2))
    for k, v in out.items():
        print(f"{k} = {mp.nstr(v, 30)}")


if __name__ == "__main__":
    main()
