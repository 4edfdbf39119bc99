"""End-to-end verification suites (``scatlen verify --suite NAME``).

Each suite returns a list of :class:`Outcome`; a suite passes iff all of its
outcomes pass. Tolerances are fixed here and mirror the acceptance tests.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import corpus, hardcore
from .fk import McConfig, estimate_g, sandwich_check
from .gibbs import solve_ebeta, theorem1_bound
from .hardcore import HardCoreParams, bessel_k, ebeta_hardcore
from .potential import finiteness_check
from .scatter import check_tail_bound, scattering_length, scattering_length_at

DOMINANCE_BETAS = (0.5, 1.0, 10.0, 100.0)
SANDWICH_SEED = 20111107


@dataclass(frozen=True)
class Outcome:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def bessel_oracle(order: int, x: float) -> float:
    """``K_n(x) = int_0^inf exp(-x cosh t) cosh(n t) dt`` by adaptive quadrature."""
    # integrand is negligible once x (cosh t - 1) > 800
    t_max = math.acosh(1.0 + 800.0 / x)
    f = lambda t: math.exp(-x * (math.cosh(t) - 1.0)) * math.cosh(order * t)
    val, _ = integrate.quad(f, 0.0, t_max, epsabs=0.0, epsrel=1e-13, limit=400)
    return val * math.exp(-x)


def _rel(a, b):
    return abs(a / b - 1.0)


def check_hardcore_ebeta(d: int, betas, rtol=5e-3, max_seconds=None) -> list[Outcome]:
    V = corpus.hard_sphere(1.0)
    out = []
    for beta in betas:
        t0 = time.perf_counter()
        num = solve_ebeta(V, d, beta).e_beta
        dt = time.perf_counter() - t0
        exact = ebeta_hardcore(HardCoreParams(1.0, beta, d))
        err = _rel(num, exact)
        ok = err <= rtol and (max_seconds is None or dt < max_seconds)
        out.append(
            Outcome(
                f"hard core d={d} e(beta={beta:g}) vs closed form",
                ok,
                f"numeric={num:.10g} exact={exact:.10g} rel.err={err:.2e} time={dt:.3f}s",
            )
        )
    return out


def check_dominance(names=None, betas=DOMINANCE_BETAS) -> list[Outcome]:
    out = []
    for name, (V, d) in corpus.corpus().items():
        if names is not None and name not in names:
            continue
        a_hi = scattering_length(V, d).bracket[1]
        bad = []
        for beta in betas:
            sol = solve_ebeta(V, d, beta)
            bound = theorem1_bound(a_hi, beta, d)
            if not sol.e_beta <= bound:
                bad.append(f"beta={beta:g}: e={sol.e_beta:.8g} > bound={bound:.8g}")
        out.append(
            Outcome(
                f"upper bound dominance, {name}",
                not bad,
                "; ".join(bad) or f"bound >= e(beta) for beta in {list(betas)} (a<={a_hi:.10g})",
            )
        )
    return out


def check_tightness() -> list[Outcome]:
    beta = 1e4
    ratio = theorem1_bound(1.0, beta, 3) / ebeta_hardcore(HardCoreParams(1.0, beta, 3))
    return [Outcome("upper bound tightness d=3, beta=1e4 a^2", 1.0 <= ratio <= 1.002, f"bound/exact={ratio:.8f}")]


def check_bessel(rtol=1e-10) -> list[Outcome]:
    xs = np.geomspace(0.01, 30.0, 61)
    worst = 0.0
    for order in (0, 1):
        for x in xs:
            worst = max(worst, _rel(bessel_k(order, x), bessel_oracle(order, x)))
    anchor = abs(bessel_k(0, 1e-3) - (math.log(2e3) - hardcore.EULER_GAMMA))
    return [
        Outcome("K0, K1 vs quadrature oracle on [0.01, 30]", worst <= rtol, f"max rel.err={worst:.2e}"),
        Outcome("K0 small-argument anchor at 1e-3", anchor <= 1e-5, f"|K0 - (ln 2000 - gamma)|={anchor:.2e}"),
    ]


def check_scattering_oracles() -> list[Outcome]:
    shell = scattering_length(corpus.delta_shell(1.0, 2.0), 3, tol=1e-12)
    out = [Outcome("delta shell (s=1, gamma=2) d=3: a = 0.5", abs(shell.a - 0.5) <= 1e-8, f"a={float(shell.a)!r}")]
    V = corpus.hard_sphere(1.0)
    for R in (2.0, 5.0, 50.0):
        a_R = scattering_length_at(V, 3, R).a_R
        out.append(Outcome(f"hard sphere a_R at R={R:g}", abs(a_R - 1.0) <= 1e-10, f"a_R={float(a_R)!r}"))
    return out


def check_tail_audits() -> list[Outcome]:
    out = []
    cases = [
        ("shell s=3 gamma=1 d=3 R=2", corpus.delta_shell(3.0, 1.0), 3, 2.0),
        ("power tail d=3 R=10", corpus.power_tail(), 3, 10.0),
        ("power tail d=2 R=10", corpus.power_tail(), 2, 10.0),
    ]
    for name, V, d, R in cases:
        a = scattering_length(V, d).bracket[1]
        a_R = scattering_length_at(V, d, R).a_R
        out.append(Outcome(f"tail inequality audit, {name}", check_tail_bound(V, d, R, a, a_R), f"a={a:.10g} a_R={a_R:.10g}"))
    return out


def check_finiteness() -> list[Outcome]:
    p3 = finiteness_check(corpus.power_tail(p=3.0), 3)
    p4V = corpus.power_tail(p=4.0)
    p4 = finiteness_check(p4V, 3)
    a4 = scattering_length(p4V, 3).bracket[1]
    hs = finiteness_check(corpus.hard_sphere(1.0), 3)
    return [
        Outcome("p=3 tail (d=3) has infinite scattering length", p3.verdict == "infinite", str(p3.diverging_moment)),
        Outcome(
            "p=4 tail (d=3) finite with a_upper >= a",
            p4.verdict == "finite" and p4.a_upper_3d >= a4,
            f"a_upper={p4.a_upper_3d} a={a4:.10g}",
        ),
        Outcome(
            "hard sphere a_upper = core radius at b = core",
            hs.verdict == "finite" and hs.a_upper_3d == 1.0 and hs.b_opt == 1.0,
            f"a_upper={hs.a_upper_3d} b={hs.b_opt}",
        ),
    ]


def check_sandwich(n_paths=100_000, n_steps=2000, max_seconds=60.0) -> list[Outcome]:
    cfg = McConfig(n_paths=n_paths, n_steps=n_steps, seed=SANDWICH_SEED)
    t0 = time.perf_counter()
    rep = sandwich_check(corpus.hard_sphere(1.0), 3, 1.0, cfg)
    dt = time.perf_counter() - t0
    return [
        Outcome(
            "sandwich e(2 beta) <= g(beta) <= e(beta), hard sphere beta=1",
            rep.passed and dt < max_seconds,
            f"e(2b)={rep.e_lo:.6g} g={rep.g.mean:.6g}+-{rep.g.stderr:.3g} e(b)={rep.e_hi:.6g} time={dt:.1f}s",
        )
    ]


def check_small_beta(n_paths=100_000) -> list[Outcome]:
    cfg = McConfig(n_paths=n_paths, n_steps=100, seed=SANDWICH_SEED)
    g = estimate_g(corpus.square_well(1.0, 1.0), 3, 0.01, cfg)
    target = 4.0 * math.pi / 3.0
    ok = abs(g.mean - target) <= 3.0 * g.stderr + 0.02 * target
    return [Outcome("small-beta MC, square well d=3 beta=0.01", ok, f"g={g.mean:.6g}+-{g.stderr:.3g} target={target:.6g}")]


SUITES = {
    "hardcore3d": lambda: check_hardcore_ebeta(3, (0.25, 1.0, 4.0, 100.0), max_seconds=1.0)
    + check_tightness()
    + check_dominance({"hard_sphere"}),
    "hardcore2d": lambda: check_hardcore_ebeta(2, (1.0, 100.0, 1e4)) + check_bessel() + check_dominance({"hard_disc"}),
    "shells": lambda: check_scattering_oracles()
    + check_dominance({"delta_shell_3d", "delta_shell_2d"})
    + check_tail_audits()[:1],
    "tails": lambda: check_finiteness()
    + check_dominance({"power_tail_3d", "power_tail_2d", "square_well_3d", "square_well_2d"})
    + check_tail_audits()[1:],
    "sandwich": lambda: check_sandwich() + check_small_beta(),
}


def run_suite(name: str) -> list[Outcome]:
    if name == "all":
        return [o for key in SUITES for o in SUITES[key]()]
    return SUITES[name]()
