"""Check-suite orchestration: per-fixture verification and the global
cross-validation (oracle-equivalence) suites.

Fixture suites combine the pointwise soliton laws (Ricci law, infinity-Ricci,
flag curvature, sigma/kappa fits) with whichever characterization bundles the
fixture declares.  Crosscheck suites pit independent code paths against each
other on random seeded data: closed-form vs spray Ricci, jet vs finite
difference, Christoffel vs spray, both sides of the Lie-derivative and
curvature-transfer identities, and the navigation algebra.

Heavy per-flag rows can fan out over processes; the worker count comes from
the FINSLER_SOLITONS_WORKERS environment variable unless a caller overrides
it.  Results are order-preserving, so reports stay byte-identical for a
given seed regardless of the worker count.
"""

from __future__ import annotations

import math
import os

import numpy as np

from . import finsler, generators, randers, riemann, solitons
from .finsler import FinslerMetric
from .jets import FlagPoint, fd_derivative, lift
from .reports import ResidualReport, report_from_values
from .sampling import sample_flags, unit_direction

WORKERS_ENV = "FINSLER_SOLITONS_WORKERS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


# -- per-flag heavy rows (parallelizable) ------------------------------------------


def _flag_rows(fixture, flags, mode):
    """Pointwise law residuals at each flag: returns a list of row dicts."""
    out = []
    for p in flags:
        row = {}
        F2 = fixture.metric.value(p.x, p.y) ** 2
        ric_inf = finsler.weighted_ricci(fixture.metric, fixture.measure, p, mode=mode)
        kap = float(riemann.scalar_value(fixture.kappa(list(p.x))))
        row["infinity-ricci"] = (ric_inf - kap * F2) / F2
        if fixture.ricci_law is not None:
            ric = finsler.ricci(fixture.metric, p, mode=mode)
            row["ricci-law"] = ric / F2 - float(fixture.ricci_law(p.x))
        if fixture.flag_curvature_law is not None:
            fit = finsler.flag_curvature_fit(fixture.metric, p, mode=mode)
            row["flag-curvature-law"] = fit.value - float(fixture.flag_curvature_law(p.x))
            row["flag-curvature-misfit"] = fit.residual
        out.append(row)
    return out


def _flag_worker(args):
    factory, kwargs, perturb, mode, xs, ys = args
    fixture = factory(**kwargs, perturb=perturb)
    flags = [FlagPoint(x, y) for x, y in zip(xs, ys)]
    return _flag_rows(fixture, flags, mode)


def _flag_rows_parallel(fixture, flags, mode, workers):
    if workers <= 1 or fixture.factory is None or len(flags) < 2 * workers:
        return _flag_rows(fixture, flags, mode)
    import multiprocessing as mp

    chunks = np.array_split(np.arange(len(flags)), workers)
    tasks = []
    for idx in chunks:
        if idx.size == 0:
            continue
        tasks.append((fixture.factory, fixture.factory_kwargs, fixture.perturb, mode,
                      [flags[i].x for i in idx], [flags[i].y for i in idx]))
    with mp.Pool(processes=len(tasks)) as pool:
        parts = pool.map(_flag_worker, tasks)
    return [row for part in parts for row in part]


# -- fixture suite ------------------------------------------------------------------


def run_fixture_suite(fixture, samples=64, seed=0, tol=1e-6, mode="jet",
                      workers=None) -> list[ResidualReport]:
    """Every applicable check of one fixture at the given sample count."""
    rng = np.random.default_rng(seed)
    workers = default_workers() if workers is None else max(1, int(workers))
    flags = sample_flags(fixture, samples, rng)
    fit_points = [f.x for f in flags[:max(2, min(8, samples))]]
    reports: list[ResidualReport] = []

    for cname, value in sorted(fixture.constraints.items()):
        reports.append(report_from_values(f"constraint/{cname}", [value], tol=0.0,
                                          detail="structural identity, exact"))

    rows = _flag_rows_parallel(fixture, flags, mode, workers)
    names = sorted({k for row in rows for k in row})
    for name in names:
        vals = [row[name] for row in rows if name in row]
        reports.append(report_from_values(name, vals, tol))

    sigmas, fitres = solitons.fit_sigma(fixture.rd, fit_points)
    sig_expected = [float(riemann.scalar_value(fixture.sigma(list(x)))) for x in fit_points]
    reports.append(report_from_values(
        "sigma-fit", np.abs(sigmas - np.array(sig_expected)), tol,
        rel_values=[fitres], detail=f"isotropy fit residual {fitres:.2e}"))

    kap_points = fit_points[:4]
    kappas, anis = solitons.fit_kappa(fixture.metric, fixture.measure, kap_points)
    kap_expected = [float(riemann.scalar_value(fixture.kappa(list(x)))) for x in kap_points]
    reports.append(report_from_values("kappa-fit", np.abs(kappas - np.array(kap_expected)), tol))
    reports.append(report_from_values("kappa-anisotropy", [anis], tol))

    bundle_flags = flags[:max(2, min(len(flags), 32))]
    for bundle in fixture.bundles:
        if bundle == "gradient-ab":
            rows_b = solitons.gradient_soliton_checks_ab(
                fixture.rd, fixture.f, fixture.kappa, bundle_flags, tol,
                sigma=fixture.sigma)
        elif bundle == "gradient-nav":
            rows_b = solitons.gradient_soliton_checks_nav(
                fixture.nav, fixture.f, fixture.kappa, bundle_flags, tol,
                mu=fixture.mu_soliton, sigma=fixture.sigma)
        elif bundle == "vector-ab":
            rows_b = solitons.vector_soliton_checks_ab(
                fixture.rd, fixture.zero_field, fixture.einstein_kappa, bundle_flags,
                tol, c=0.0, sigma=fixture.sigma)
        elif bundle == "vector-nav":
            rows_b = solitons.vector_soliton_checks_nav(
                fixture.nav, fixture.zero_field, fixture.einstein_kappa, bundle_flags,
                tol, mu=fixture.mu_einstein_h, sigma=fixture.sigma)
        else:
            raise ValueError(f"unknown bundle {bundle!r} on fixture {fixture.name!r}")
        for r in rows_b:
            r.name = f"{bundle}/{r.name}"
            reports.append(r)
    return reports


# -- crosscheck suites ----------------------------------------------------------------


def crosscheck_randers_ricci(count=100, seed=7, tol=1e-8, flags_per=16, dim=3):
    """Closed-form Randers Ricci against the generic spray-trace Ricci."""
    rng = np.random.default_rng(seed)
    rel = []
    for _ in range(count):
        rd = generators.random_randers(rng, dim)
        metric = randers.finsler_from_randers(rd)
        for _ in range(flags_per):
            p = FlagPoint(generators.sample_box_point(rng, dim), unit_direction(rng, dim))
            closed = randers.randers_ricci_closed_form(rd, p)
            spray_val = finsler.ricci(metric, p)
            F2 = metric.value(p.x, p.y) ** 2
            rel.append((closed - spray_val) / max(abs(spray_val), F2))
    return [report_from_values("closed-form-vs-spray-ricci", rel, tol,
                               detail=f"{count} random metrics x {flags_per} flags, dim {dim}")]


def crosscheck_lie_identities(count=200, seed=7, tol=1e-9):
    """Both Lie-derivative identities on random data:

    split form   L_V(F^2) = (F/alpha) L_V(alpha^2) + 2 F L_V(beta)
    lifted form  L_V(htilde^2) via the navigation tensors (both sides).
    """
    rng = np.random.default_rng(seed)
    split, lifted = [], []
    for i in range(count):
        dim = 2 + (i % 2)
        rd = generators.random_randers(rng, dim)
        metric = randers.finsler_from_randers(rd)
        v = generators.random_vector_field(rng, dim)
        p = FlagPoint(generators.sample_box_point(rng, dim), unit_direction(rng, dim))
        lhs = finsler.lie_F2(metric, v, p)
        F = metric.value(p.x, p.y)
        T = randers.beta_tables(rd, p.x)
        alpha = math.sqrt(float(p.y @ T.a @ p.y))
        la2 = riemann.lie_h2(rd.alpha, v, p.x, p.y)
        lb = riemann.lie_1form(rd.alpha, rd.beta, v, p.x, p.y)
        rhs = F / alpha * la2 + 2.0 * F * lb
        split.append((lhs - rhs) / (F * F))

        nav = generators.random_navigation(rng, dim)
        pn = FlagPoint(generators.sample_box_point(rng, dim), unit_direction(rng, dim))
        l2, r2 = randers.lie_nav_h2_sides(nav, v, pn)
        Fn = randers.eval_F_nav(nav, pn)
        lifted.append((l2 - r2) / (Fn * Fn))
    return [report_from_values("randers-f2-split", split, tol),
            report_from_values("navigation-h2-lift", lifted, tol)]


def crosscheck_navigation(count=1000, seed=7, tol=1e-10, points_per_metric=20):
    """Navigation algebra at `count` random sample flags: round trips and

        h^2 - 2 F W_0 = lam F^2      and      h(x, y - F W) = F(x, y),

    with a fresh random metric every `points_per_metric` samples, alternating
    between Randers-first and navigation-first round trips.
    """
    rng = np.random.default_rng(seed)
    roundtrip, norm_identity, transfer = [], [], []
    taken = 0
    block = 0
    while taken < count:
        dim = 2 + (block % 2)
        randers_first = block % 2 == 0
        if randers_first:
            rd = generators.random_randers(rng, dim)
            nav = randers.to_navigation(rd)
            rd2 = randers.from_navigation(nav)
        else:
            nav = generators.random_navigation(rng, dim)
            rd2 = randers.from_navigation(nav)
            nav2 = randers.to_navigation(rd2)
        block += 1
        for _ in range(min(points_per_metric, count - taken)):
            taken += 1
            x = generators.sample_box_point(rng, dim)
            y = unit_direction(rng, dim)
            p = FlagPoint(x, y)
            if randers_first:
                a1 = rd.alpha.matrix_at(x)
                a2 = rd2.alpha.matrix_at(x)
                b1 = np.array([riemann.scalar_value(c) for c in rd.beta.components(list(x))])
                b2 = np.array([riemann.scalar_value(c) for c in rd2.beta.components(list(x))])
                roundtrip.append(max(float(np.max(np.abs(a1 - a2))),
                                     float(np.max(np.abs(b1 - b2)))))
            else:
                h1 = nav.h.matrix_at(x)
                w1 = np.array([riemann.scalar_value(c) for c in nav.W.components(list(x))])
                h2m = nav2.h.matrix_at(x)
                w2 = np.array([riemann.scalar_value(c) for c in nav2.W.components(list(x))])
                roundtrip.append(max(float(np.max(np.abs(h1 - h2m))),
                                     float(np.max(np.abs(w1 - w2)))))
            T = randers.nav_tensors(nav, x)
            F = randers.eval_F_nav(nav, p)
            h2 = float(y @ T.h @ y)
            w0 = float(T.w_low @ y)
            norm_identity.append((h2 - 2.0 * F * w0 - T.lam * F * F) / (F * F))
            xi = randers.navigation_xi(nav, p)
            transfer.append((math.sqrt(float(xi @ T.h @ xi)) - F) / F)
    return [report_from_values("roundtrip", roundtrip, 1e-12),
            report_from_values("norm-identity", norm_identity, tol),
            report_from_values("unit-speed-transfer", transfer, tol)]


def crosscheck_riemann_reduction(count=60, seed=7, tol=1e-9):
    """Spray-trace Ricci against Christoffel-path Ricci on Riemannian inputs."""
    rng = np.random.default_rng(seed)
    rel = []
    for i in range(count):
        dim = 2 + (i % 2)
        h = generators.random_riemann_metric(rng, dim)
        metric = FinslerMetric.from_riemannian(h)
        p = FlagPoint(generators.sample_box_point(rng, dim), unit_direction(rng, dim))
        spray_ric = finsler.ricci(metric, p)
        chris_ric = riemann.riemann_ricci(h, p.x, p.y)
        h2 = float(p.y @ h.matrix_at(p.x) @ p.y)
        rel.append((spray_ric - chris_ric) / max(abs(chris_ric), h2))
    return [report_from_values("spray-vs-christoffel-ricci", rel, tol)]


def crosscheck_jets_vs_fd(count=50, seed=7, tol=1e-4):
    """Jet-mode curvature pipeline against the finite-difference mode, plus
    plain jet partials against fd_derivative on transcendental compositions."""
    rng = np.random.default_rng(seed)
    plain = []
    from . import jets as J

    compositions = [
        lambda a, b: J.exp(0.3 * a) * J.sin(b) + J.tanh(a * b),
        lambda a, b: J.sqrt(1.2 + a * a + b * b) + J.cos(a - 2.0 * b),
        lambda a, b: J.log(2.0 + J.sinh(a) * 0.4 + b * b) - J.arcsinh(a + 0.2 * b),
        lambda a, b: J.power(1.5 + a * a, 1.7) + J.tan(0.3 * b),
    ]
    steps = {1: 1e-5, 2: 1e-4, 3: 5e-3}
    multis = [(1, 0), (0, 1), (1, 1), (2, 0), (2, 1), (0, 3)]
    for i in range(count):
        f = compositions[i % len(compositions)]
        pt = rng.uniform(-0.8, 0.8, size=2)
        jet = lift(f, pt, order=3)
        for m in multis:
            exact = jet.partial(m)
            est = fd_derivative(f, pt, m, step=steps[sum(m)])
            plain.append((est - exact) / max(1.0, abs(exact)))

    pipe_ric, pipe_sdot, pipe_winf = [], [], []
    for i in range(count):
        dim = 2
        if i % 2 == 0:
            rd = generators.random_randers(rng, dim)
            metric = randers.finsler_from_randers(rd)
            measure = randers.bh_measure(rd).weighted(generators.random_scalar_field(rng, dim))
        else:
            h = generators.random_riemann_metric(rng, dim)
            metric = FinslerMetric.from_riemannian(h)
            measure = finsler.Measure.riemannian(h).weighted(
                generators.random_scalar_field(rng, dim))
        p = FlagPoint(generators.sample_box_point(rng, dim), unit_direction(rng, dim))
        F2 = metric.value(p.x, p.y) ** 2
        r_j = finsler.ricci(metric, p, mode="jet")
        r_f = finsler.ricci(metric, p, mode="fd")
        pipe_ric.append((r_j - r_f) / max(abs(r_j), F2))
        s_j = finsler.s_dot(metric, measure, p, mode="jet")
        s_f = finsler.s_dot(metric, measure, p, mode="fd")
        pipe_sdot.append((s_j - s_f) / max(abs(s_j), F2))
        w_j = finsler.weighted_ricci(metric, measure, p, mode="jet")
        w_f = finsler.weighted_ricci(metric, measure, p, mode="fd")
        pipe_winf.append((w_j - w_f) / max(abs(w_j), F2))
    return [report_from_values("plain-derivatives", plain, tol),
            report_from_values("pipeline-ricci", pipe_ric, tol),
            report_from_values("pipeline-s-dot", pipe_sdot, tol),
            report_from_values("pipeline-infinity-ricci", pipe_winf, tol)]


def crosscheck_isotropic_s(count=40, seed=7, tol=1e-8):
    """Exact-conformal Euclidean navigation data with nonconstant sigma:

    fitted sigma against the conformal factor, the curvature-transfer
    identity, the beta/navigation s-tensor transfers s_0 = S_0/lam and
    s^i_j = -S^i_j + S^i W_j / lam, and the closed form for S-dot.
    """
    rng = np.random.default_rng(seed)
    sig_fit, transfer, s0_row, smix_row, sdot_row = [], [], [], [], []
    for i in range(count):
        dim = 2 + (i % 2)
        nav, sigma, _c = generators.conformal_euclidean_navigation(rng, dim)
        rd = randers.from_navigation(nav)
        metric = randers.finsler_from_navigation(nav)
        f = generators.random_scalar_field(rng, dim)
        measure = randers.bh_measure(rd).weighted(f)
        x = generators.sample_box_point(rng, dim)
        y = unit_direction(rng, dim)
        p = FlagPoint(x, y)

        fitted, _res = randers.fit_sigma_isotropic_S(rd, x, solitons._directions(dim))
        sig_fit.append(fitted - float(riemann.scalar_value(sigma(list(x)))))

        mu_t = float(rng.uniform(-1.0, 1.0))
        lhs, rhs = randers.ricci_transfer_sides(nav, sigma, mu_t, p)
        F2 = metric.value(x, y) ** 2
        transfer.append((lhs - rhs) / F2)

        T = randers.beta_tables(rd, x)
        N = randers.nav_tensors(nav, x)
        s0_row.append(float(T.s_low @ y) - float(N.s_low @ y) / N.lam)
        smix = -N.s_mixed + np.outer(N.s_up, N.w_low) / N.lam
        smix_row.append(float(np.max(np.abs(T.s_mixed - smix))))

        sd_engine = finsler.s_dot(metric, measure, p)
        sd_closed = solitons.s_dot_closed_form_nav(nav, f, sigma, p)
        sdot_row.append((sd_engine - sd_closed) / max(1.0, abs(sd_engine)))
    return [report_from_values("sigma-vs-conformal-factor", sig_fit, tol),
            report_from_values("curvature-transfer", transfer, tol),
            report_from_values("s-covector-transfer", s0_row, tol),
            report_from_values("s-mixed-transfer", smix_row, tol),
            report_from_values("s-dot-closed-form", sdot_row, tol)]


CROSSCHECK_SUITES = {
    "randers-ricci": (crosscheck_randers_ricci, {"count": 100, "tol": 1e-8}),
    "lie-identity": (crosscheck_lie_identities, {"count": 200, "tol": 1e-9}),
    "navigation": (crosscheck_navigation, {"count": 1000, "tol": 1e-10}),
    "riemann-reduction": (crosscheck_riemann_reduction, {"count": 60, "tol": 1e-9}),
    "jets-vs-fd": (crosscheck_jets_vs_fd, {"count": 50, "tol": 1e-4}),
    "isotropic-s": (crosscheck_isotropic_s, {"count": 40, "tol": 1e-8}),
}


def run_crosscheck_suite(name, count=None, seed=7, tol=None) -> list[ResidualReport]:
    if name not in CROSSCHECK_SUITES:
        raise KeyError(f"unknown crosscheck suite {name!r}; "
                       f"available: {', '.join(sorted(CROSSCHECK_SUITES))}")
    fn, defaults = CROSSCHECK_SUITES[name]
    kwargs = {"seed": seed, "count": defaults["count"] if count is None else count,
              "tol": defaults["tol"] if tol is None else tol}
    return fn(**kwargs)
