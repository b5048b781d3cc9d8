#!/usr/bin/env python3
"""Derive the golden constants used by the C++ test suites.

Every value is computed here by a route that does not share code with the
library: hand formulas in arbitrary precision (mpmath), brute-force sums, or
numerical quadrature. The output is a C++ header with 12 significant digits.

    python3 tools/golden/derive_constants.py > tests/support/golden_constants.hpp
"""

import sys

import mpmath as mp
from scipy import integrate
import numpy as np

mp.mp.dps = 40


def fmt(x):
    return mp.nstr(mp.mpf(x), 12, min_fixed=-30, max_fixed=30, strip_zeros=False)


# --- Heston reverse coefficients at y = (10, 0.25) ---------------------------
# b = sigma sigma^T with sigma = [[sqrt(v) S, 0], [xi sqrt(v) rho, xi sqrt(v) sqrt(1-rho^2)]]
# b11 = v S^2, b12 = b21 = rho xi v S, b22 = xi^2 v, a = (mu S, gamma v + beta).
def heston_reverse(S, v, mu, gamma, beta, xi, rho):
    S, v = mp.mpf(S), mp.mpf(v)
    b11 = lambda S_, v_: v_ * S_ ** 2
    b12 = lambda S_, v_: rho * xi * v_ * S_
    b22 = lambda S_, v_: xi ** 2 * v_
    d = mp.diff
    div_b1 = d(lambda s: b11(s, v), S) + d(lambda w: b12(S, w), v)
    div_b2 = d(lambda s: b12(s, v), S) + d(lambda w: b22(S, w), v)
    alpha1 = div_b1 - mu * S
    alpha2 = div_b2 - (gamma * v + beta)
    hess = (d(lambda s: b11(s, v), S, 2)
            + 2 * mp.diff(lambda s, w: b12(s, w), (S, v), (1, 1))
            + d(lambda w: b22(S, w), v, 2))
    c = hess / 2 - (mu + gamma)
    return alpha1, alpha2, c


H = dict(mu=mp.mpf("0.05"), gamma=mp.mpf("-0.15"), beta=mp.mpf("-0.045"),
         xi=mp.mpf("0.3"), rho=mp.mpf("-0.7"))
heston_a1, heston_a2, heston_c = heston_reverse(10, "0.25", **H)

# --- Kernel / bandwidth -------------------------------------------------------
# Solve (2 pi)^{-1} exp(-r^2/2) = 1e-3 by root finding rather than the closed form.
trunc_r_d2 = mp.findroot(lambda r: mp.exp(-r ** 2 / 2) / (2 * mp.pi) - mp.mpf("1e-3"), 3)
bw_d2 = mp.power(10, 4 * mp.mpf("-0.4"))
bw_d6_auto = mp.power(10, 4 * (-mp.mpf(2) / 10))

# --- Brownian bridge functional truth by covariance summation -----------------
# Bridge covariance min(s,t)(1-max(s,t)); E[(mean)^2] per coordinate, two coordinates.
def bb_truth_by_covariance(l):
    total = mp.mpf(0)
    for i in range(1, l):
        for j in range(1, l):
            s, t = mp.mpf(i) / l, mp.mpf(j) / l
            total += min(s, t) * (1 - max(s, t))
    return 2 * total / (l - 1) ** 2


bb10 = bb_truth_by_covariance(10)
bb2 = bb_truth_by_covariance(2)
assert abs(bb10 - mp.mpf(11) / 54) < mp.mpf("1e-30")
assert abs(bb2 - mp.mpf(1) / 2) < mp.mpf("1e-30")

# --- OU mean / variance of h_hat ---------------------------------------------
def sig2(alpha, s):
    return (1 - mp.exp(-2 * alpha * s)) / (2 * alpha)


def ou_mean_printed(alpha, T, ts, x, y, eps):
    v = eps ** 2 * mp.exp(-2 * alpha * (T - ts)) + sig2(alpha, T)
    return mp.exp(-(mp.exp(-alpha * T) * x - y) ** 2 / (2 * v)) / mp.sqrt(2 * mp.pi * v)


def ou_var_printed(alpha, T, ts, x, y, eps, N):
    A = (mp.exp(-alpha * T) * x - y) ** 2
    B = eps ** 2 * mp.exp(-2 * alpha * (T - ts))
    sT, sR = sig2(alpha, T), sig2(alpha, T - ts)
    t1 = -(2 * N - 1) / (2 * mp.pi * N ** 2 * (B + sT)) * mp.exp(-A / (B + sT))
    t2 = ((N - 1) / (2 * mp.pi * N ** 2 * mp.sqrt(B + sR) * mp.sqrt(B + 2 * sT - sR))
          * mp.exp(-A / (B + 2 * sT - sR)))
    t3 = ((N - 1) / (2 * mp.pi * N ** 2 * mp.sqrt(B + sT - sR) * mp.sqrt(B + sT + sR))
          * mp.exp(-A / (B + sT + sR)))
    t4 = (mp.exp(alpha * (T - ts)) / (2 * mp.pi * N ** 2 * eps * mp.sqrt(B + 2 * sT))
          * mp.exp(-A / (B + 2 * sT)))
    return t1 + t2 + t3 + t4


def ou_var_by_quadrature(alpha, T, ts, x, y, eps, N):
    """Independent route: U-statistic variance of (1/N^2) sum Z_nm with
    Z = w K_eps(Y - X), X ~ N(mx, sx2), Y ~ N(my, sy2), w = e^{alpha tau}.
    Moments are computed by numerical quadrature over X or Y."""
    alpha, T, ts, x, y, eps = map(float, (alpha, T, ts, x, y, eps))
    tau = T - ts
    w = np.exp(alpha * tau)
    mx, sx2 = np.exp(-alpha * ts) * x, (1 - np.exp(-2 * alpha * ts)) / (2 * alpha)
    my, sy2 = np.exp(alpha * tau) * y, (np.exp(2 * alpha * tau) - 1) / (2 * alpha)
    npdf = lambda u, m, v: np.exp(-(u - m) ** 2 / (2 * v)) / np.sqrt(2 * np.pi * v)
    kw = dict(epsabs=1e-14, epsrel=1e-12, limit=200)
    mean_z = w * npdf(my - mx, 0.0, sx2 + sy2 + eps ** 2)
    # E[Z^2] = w^2 E[K_eps(Y-X)^2]; K_eps^2(u) = npdf(u,0,eps^2/2)/(2 sqrt(pi) eps)
    ez2 = w ** 2 * npdf(my - mx, 0.0, sx2 + sy2 + eps ** 2 / 2) / (2 * np.sqrt(np.pi) * eps)
    # same n, different m: E_X[(E_Y[Z|X])^2]
    same_n = integrate.quad(lambda u: npdf(u, mx, sx2) * (w * npdf(u, my, sy2 + eps ** 2)) ** 2,
                            -np.inf, np.inf, **kw)[0]
    # same m, different n: E_Y[(E_X[Z|Y])^2]
    same_m = integrate.quad(lambda u: npdf(u, my, sy2) * (w * npdf(u, mx, sx2 + eps ** 2)) ** 2,
                            -np.inf, np.inf, **kw)[0]
    N = float(N)
    return (ez2 + (N - 1) * (same_n + same_m) - (2 * N - 1) * mean_z ** 2) / N ** 2


ou_args = (mp.mpf(1), mp.mpf(1), mp.mpf("0.5"), mp.mpf(0), mp.mpf(0), mp.mpf("0.1"))
ou_mean_eps0 = ou_mean_printed(mp.mpf(1), mp.mpf(1), mp.mpf("0.5"), 0, 0, 0)
ou_mean_eps01 = ou_mean_printed(*ou_args)
ou_var_1000 = ou_var_printed(*ou_args, mp.mpf(1000))
ou_var_quad = ou_var_by_quadrature(*ou_args, 1000)
rel = abs(float(ou_var_1000) - ou_var_quad) / ou_var_quad
if rel > 1e-8:
    print(f"warning: printed OU variance disagrees with quadrature: rel {rel:.3e}", file=sys.stderr)

# nonzero-A case to pin the exponential factors as well
ou_args_b = (mp.mpf("0.7"), mp.mpf("1.5"), mp.mpf("0.6"), mp.mpf("1.2"), mp.mpf("-0.3"), mp.mpf("0.2"))
ou_mean_b = ou_mean_printed(*ou_args_b)
ou_var_b = ou_var_printed(*ou_args_b, mp.mpf(500))
ou_var_b_quad = ou_var_by_quadrature(*ou_args_b, 500)
rel_b = abs(float(ou_var_b) - ou_var_b_quad) / ou_var_b_quad
if rel_b > 1e-8:
    print(f"warning: printed OU variance (case b) disagrees with quadrature: rel {rel_b:.3e}",
          file=sys.stderr)

consts = [
    ("kHestonRevDriftS", heston_a1, "Heston reverse drift, S component, at (10, 0.25)"),
    ("kHestonRevDriftV", heston_a2, "Heston reverse drift, v component, at (10, 0.25)"),
    ("kHestonWeightRate", heston_c, "Heston weight rate c at (10, 0.25)"),
    ("kGaussTruncRadiusD2Eta1e3", trunc_r_d2, "Gaussian d=2 truncation radius, eta=1e-3 (root find)"),
    ("kBandwidthN1e4D2Alpha04", bw_d2, "C N^-0.4 at N=1e4"),
    ("kBandwidthN1e4D6Auto", bw_d6_auto, "N^(-2/(4+d)) at N=1e4, d=6"),
    ("kBridgeTruthL10", bb10, "bridge functional truth l=10 by covariance summation"),
    ("kOuMeanEps0", ou_mean_eps0, "E h_hat, alpha=1 T=1 t*=0.5 x=y=0 eps=0"),
    ("kOuMeanEps01", ou_mean_eps01, "E h_hat, alpha=1 T=1 t*=0.5 x=y=0 eps=0.1"),
    ("kOuVarN1000", ou_var_1000, "Var h_hat, alpha=1 T=1 t*=0.5 x=y=0 eps=0.1 N=1000 (term by term)"),
    ("kOuVarN1000Quadrature", ou_var_quad, "same, by U-statistic quadrature"),
    ("kOuMeanCaseB", ou_mean_b, "E h_hat, alpha=0.7 T=1.5 t*=0.6 x=1.2 y=-0.3 eps=0.2"),
    ("kOuVarCaseB", ou_var_b, "Var h_hat, same parameters, N=500"),
    ("kOuVarCaseBQuadrature", ou_var_b_quad, "same, by U-statistic quadrature"),
]

print("// Generated by tools/golden/derive_constants.py. Do not edit by hand.")
print("#pragma once")
print()
print("namespace frmc::golden {")
print()
for name, value, doc in consts:
    print(f"// {doc}")
    print(f"inline constexpr double {name} = {fmt(value)};")
print()
print("}  // namespace frmc::golden")
