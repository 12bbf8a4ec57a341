"""End-to-end acceptance gate.

One test per shipped guarantee.  Each prints a single PASS/FAIL line
with the measured value at the stated tolerance, then asserts.  Seeds
are frozen so the whole gate is deterministic.
"""

import itertools
import math
import time

import numpy as np
from scipy import integrate

from bell_lab import bellgame, estimators, pairing, randi, sources, stats
from bell_lab.core import RngStream, StationEvent

SEED = 108


def stream(c: int) -> RngStream:
    return RngStream(SEED, (c,))


def report(capsys, num: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {num:>2} {'PASS' if ok else 'FAIL'} {detail}"
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def test_criterion_1_singlet_law(capsys):
    n = 100_000
    tol = 4.0 / math.sqrt(n)
    rng = stream(1).generator()
    worst = 0.0
    for k in range(1, 9):
        delta = k * math.pi / 8
        a, b = sources.singlet_pairs(0.0, delta, n, rng)
        worst = max(worst, abs(float(np.mean(a * b)) + math.cos(delta)))
    report(capsys, 1, worst <= tol,
           f"singlet law: worst |E+cos(d)| {worst:.5f} <= {tol:.5f} "
           f"over 8 angle differences at N={n}")


def test_criterion_2_smeared_law(capsys):
    n = 100_000
    tol = 4.0 / math.sqrt(n)
    w = math.pi / 8
    # independent oracle: average the singlet correlation over both
    # uniform jitter draws by double quadrature
    quad, _ = integrate.dblquad(lambda jb, ja: -math.cos(ja - jb),
                                -w, w, -w, w)
    oracle = quad / (2 * w) ** 2
    closed = -(math.sin(w) / w) ** 2
    a, b = sources.smeared_pairs(sources.AngleJitter(0.3, w),
                                 sources.AngleJitter(0.3, w),
                                 n, stream(2).generator())
    e = float(np.mean(a * b))
    ok = (abs(oracle - closed) < 1e-12) and (abs(e - oracle) <= tol)
    report(capsys, 2, ok,
           f"smeared law: E {e:.5f} vs quadrature oracle {oracle:.5f} "
           f"(|diff| {abs(e - oracle):.5f} <= {tol:.5f}) at N={n}")


def test_criterion_3_pairing_triple(capsys):
    ea = [StationEvent(i, 0, -1 if i % 2 == 0 else 1) for i in range(1000)]
    eb = [StationEvent(i, 0, 1 if i % 2 == 0 else -1) for i in range(1003)]
    got = [pairing.covariance(pairing.pair_systematic(ea, eb, k))
           for k in (1, 2, 3, 4)]
    exact = got == [-1.0, 1.0, -1.0, 1.0]
    m = 100_000
    cov = pairing.covariance(pairing.pair_random(ea, eb, m,
                                                 stream(3).generator()))
    tol = 4.0 / math.sqrt(m)
    ok = exact and abs(cov) <= tol
    report(capsys, 3, ok,
           f"pairing: systematic offsets {got} exact; "
           f"random |Cov| {abs(cov):.5f} <= {tol:.5f} at m={m}")


def test_criterion_4_deterministic_bounds(capsys):
    n = 10_000
    rng = stream(4).generator()

    # every spreadsheet row combination is +-2
    sheet = sources.generate_cfd_spreadsheet(
        n, sources.InstructionDist.uniform(), rng)
    combos = sheet.row_combinations()
    bad_rows = int(np.sum(~np.isin(combos, (2, -2))))

    # full-table CHSH of any instruction mix stays within the bound
    bad_tables = 0
    for _ in range(n):
        p = rng.dirichlet(np.ones(16))
        small = sources.generate_cfd_spreadsheet(
            16, sources.InstructionDist(tuple(p)), rng)
        if abs(float(small.row_combinations().mean())) > 2.0:
            bad_tables += 1

    # counter inequality, counterfactually: with perfect d=0
    # anti-correlation, a3 disagreeing with b2 forces agreement at d=2
    # or disagreement at d=3, pair by pair
    table = sources.generate_tennis_balls(n, sources.strict(), rng)
    u1 = (table.a3 != table.b2).astype(int)
    e2 = (table.a0 == table.b2).astype(int)
    u3 = (table.a3 != table.b0).astype(int)
    bad_pairs = int(np.sum(u1 > e2 + u3))
    for a0 in (0, 1):  # exhaustive over the strict bit patterns too
        for a3 in (0, 1):
            for b2 in (0, 1):
                b0 = 1 - a0
                if (a3 != b2) > (a0 == b2) + (a3 != b0):
                    bad_pairs += 1
    agg_ok = u1.sum() <= e2.sum() + u3.sum()

    # counterfactual J is non-negative row by row and in total
    cols = [rng.choice(np.array([1, -1, 0]), size=n) for _ in range(4)]
    a1, a2, b1, b2 = cols
    j_rows = (((a1 == 1) & (b2 == -1)).astype(int)
              + ((a1 == 1) & (b2 == 0)) + ((a2 == -1) & (b1 == 1))
              + ((a2 == 0) & (b1 == 1)) + ((a2 == 1) & (b2 == 1))
              - ((a1 == 1) & (b1 == 1)))
    bad_j = int(np.sum(j_rows < 0))
    total = estimators.eberhard_j(estimators.eberhard_counterfactual(*cols))
    j_consistent = total == int(j_rows.sum()) and total >= 0

    ok = (bad_rows == 0 and bad_tables == 0 and bad_pairs == 0 and agg_ok
          and bad_j == 0 and j_consistent)
    report(capsys, 4, ok,
           f"deterministic bounds over {n} instances each: "
           f"rows off +-2: {bad_rows}, full-table |S|>2: {bad_tables}, "
           f"counter-inequality violations: {bad_pairs}, J<0 rows: {bad_j}")


def test_criterion_5_gill_qrc_bound(capsys):
    t0 = time.time()
    rep = randi.gill_campaign(sources.InstructionDist.uniform(),
                              n_rows=3200, runs=1000, stream=stream(5))
    elapsed = time.time() - t0
    ok = (rep.chsh_violation_rate <= rep.qrc_bound and rep.qrc_won is False
          and elapsed < 60.0)
    report(capsys, 5, ok,
           f"gill challenge: violation rate {rep.chsh_violation_rate:.4f} "
           f"<= {rep.qrc_bound:.4f} over 1000 runs of 3200 rows "
           f"({elapsed:.1f}s)")


def test_criterion_6_ball_protocol_rates(capsys):
    t0 = time.time()
    st = randi.vongher_campaign(sources.strict(), 1000, 800,
                                stream(6).child(0))
    qu = randi.vongher_campaign(randi.QUANTUM_SOURCE, 1000, 800,
                                stream(6).child(1))
    pa = randi.vongher_campaign(sources.partial_anticorr(0.87), 1000, 800,
                                stream(6).child(2))
    elapsed = time.time() - t0
    ok = (st.bell_violations == 0 and st.chsh_violations == 0
          and abs(qu.bell_violation_rate - 0.91) <= 0.05
          and abs(qu.chsh_violation_rate - 0.99) <= 0.03
          and abs(pa.bell_violation_rate - 0.87) <= 0.05
          and elapsed < 120.0)
    report(capsys, 6, ok,
           f"ball protocol at 1000x800: strict {st.bell_violations} "
           f"violations; quantum bell {qu.bell_violation_rate:.3f} "
           f"(0.91+-0.05) chsh {qu.chsh_violation_rate:.3f} (0.99+-0.03); "
           f"partial(0.87) bell {pa.bell_violation_rate:.3f} (0.87+-0.05) "
           f"({elapsed:.1f}s)")


def test_criterion_7_game_scores(capsys):
    table = bellgame.counterfactual_table()
    scores = {r.score for r in table}
    table_ok = max(r.score for r in table) == 3 and scores == {1, 3}
    script = bellgame.play_game(
        bellgame.ScriptedStrategy(bellgame.PERFECT_SCRIPT), 4,
        stream(7).child(2).generator())
    rnd = bellgame.play_game(bellgame.RandomProgramStrategy(), 100_000,
                             stream(7).child(0).generator())
    qs = bellgame.play_game(bellgame.QuantumStrategy(), 100_000,
                            stream(7).child(1).generator())
    target = 2.0 + math.sqrt(2.0)
    ok = (table_ok and script.points == 4
          and abs(rnd.avg_score - 2.0) <= 0.02
          and abs(qs.avg_score - target) <= 0.02)
    report(capsys, 7, ok,
           f"game: table scores {sorted(scores)} max 3; script 4/4; "
           f"random {rnd.avg_score:.4f} (2+-0.02); "
           f"quantum {qs.avg_score:.4f} ({target:.4f}+-0.02) at 1e5 rounds")


def _marginal_gap(v0: np.ndarray, v1: np.ndarray):
    gap = abs(float(v0.mean()) - float(v1.mean()))
    sd = math.sqrt(v0.var() / v0.size + v1.var() / v1.size)
    return gap / sd if sd > 0 else 0.0


def test_criterion_8_no_signaling(capsys):
    n = 100_000
    zs = {}

    k = iter(range(100))

    def batch_singlet(ta, tb):
        return sources.singlet_pairs(ta, tb, n, stream(8).child(next(k)).generator())

    a0, _ = batch_singlet(0.0, math.pi / 4)
    a1, _ = batch_singlet(0.0, 3 * math.pi / 4)
    zs["singlet a|B"] = _marginal_gap(a0, a1)
    _, b0 = batch_singlet(0.0, math.pi / 4)
    _, b1 = batch_singlet(math.pi / 2, math.pi / 4)
    zs["singlet b|A"] = _marginal_gap(b0, b1)

    w = math.pi / 8

    def batch_smeared(ta, tb):
        return sources.smeared_pairs(sources.AngleJitter(ta, w),
                                     sources.AngleJitter(tb, w), n,
                                     stream(8).child(next(k)).generator())

    a0, _ = batch_smeared(0.0, math.pi / 4)
    a1, _ = batch_smeared(0.0, 3 * math.pi / 4)
    zs["smeared a|B"] = _marginal_gap(a0, a1)
    _, b0 = batch_smeared(0.0, math.pi / 4)
    _, b1 = batch_smeared(math.pi / 2, math.pi / 4)
    zs["smeared b|A"] = _marginal_gap(b0, b1)

    params = sources.ContextualParams()

    def batch_ctx(x, y):
        return sources.contextual_batch(x, y, n, params,
                                        stream(8).child(next(k)).generator())

    a0, _ = batch_ctx(0, 0)
    a1, _ = batch_ctx(0, 1)
    zs["contextual a|B"] = _marginal_gap(a0, a1)
    zs["contextual fire a|B"] = _marginal_gap((a0 != 0).astype(float),
                                              (a1 != 0).astype(float))
    _, b0 = batch_ctx(0, 1)
    _, b1 = batch_ctx(1, 1)
    zs["contextual b|A"] = _marginal_gap(b0, b1)

    for name, variant in (("strict", sources.strict()),
                          ("missing", sources.missing_pairs()),
                          ("partial", sources.partial_anticorr(0.87))):
        rng = stream(8).child(next(k)).generator()
        sa, sb = randi.draw_vongher_settings(n, rng)
        table = sources.generate_tennis_balls(n, variant, rng)
        a, b = randi.measure_balls(table, sa, sb)
        zs[f"balls-{name} a|B"] = _marginal_gap(a[sb == 0], a[sb == 2])
        zs[f"balls-{name} b|A"] = _marginal_gap(b[sa == 0], b[sa == 3])

    rng = stream(8).child(next(k)).generator()
    sa, sb = randi.draw_vongher_settings(n, rng)
    a, b = randi.quantum_ball_outcomes(sa, sb, rng)
    zs["quantum-balls a|B"] = _marginal_gap(a[sb == 0], a[sb == 2])
    zs["quantum-balls b|A"] = _marginal_gap(b[sa == 0], b[sa == 3])

    res = bellgame.play_game(bellgame.QuantumStrategy(), n,
                             stream(8).child(next(k)).generator(),
                             keep_log=True)
    xs = np.array([r.x for r in res.log])
    ys = np.array([r.y for r in res.log])
    av = np.array([r.a for r in res.log], dtype=float)
    bv = np.array([r.b for r in res.log], dtype=float)
    zs["game a|y"] = _marginal_gap(av[ys == 0], av[ys == 1])
    zs["game b|x"] = _marginal_gap(bv[xs == 0], bv[xs == 1])

    worst_name = max(zs, key=zs.get)
    worst = zs[worst_name]
    report(capsys, 8, worst <= 4.0,
           f"no-signaling: worst marginal gap {worst:.2f} sigma "
           f"({worst_name}) across {len(zs)} checks at N={n}, limit 4")


def test_criterion_9_contextual_model(capsys):
    t0 = time.time()
    params = sources.ContextualParams()

    # flipping the far setting on a fixed stream never changes the near record
    a0, _ = sources.contextual_batch(0, 0, 200_000, params,
                                     stream(90).generator())
    a1, _ = sources.contextual_batch(0, 1, 200_000, params,
                                     stream(90).generator())
    _, b0 = sources.contextual_batch(0, 1, 200_000, params,
                                     stream(91).generator())
    _, b1 = sources.contextual_batch(1, 1, 200_000, params,
                                     stream(91).generator())
    replay = np.array_equal(a0, a1) and np.array_equal(b0, b1)

    # post-selected CHSH against the quadrature oracle of the model law
    def e_ps(theta_x, theta_y):
        def weight(phi):
            cx = math.cos(2 * (phi - theta_x))
            cy = math.cos(2 * (phi - theta_y))
            return (abs(cx) * abs(cy)) ** (1.0 / params.gamma)

        def signed(phi):
            cx = math.cos(2 * (phi - theta_x))
            cy = math.cos(2 * (phi - theta_y))
            return math.copysign(1, cx) * -math.copysign(1, cy) * \
                (abs(cx) * abs(cy)) ** (1.0 / params.gamma)

        num, _ = integrate.quad(signed, 0, 2 * math.pi, limit=200)
        den, _ = integrate.quad(weight, 0, 2 * math.pi, limit=200)
        return num / den

    oracle = sum(sign * e_ps(params.angles_a[x], params.angles_b[y])
                 for (x, y), sign in (((0, 0), 1), ((0, 1), 1),
                                      ((1, 0), 1), ((1, 1), -1)))
    frozen = 3.9098593171027436

    n = 250_000  # per setting pair; one million trials total
    terms = {}
    for idx, (x, y) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
        a, b = sources.contextual_batch(x, y, n, params,
                                        stream(9).child(idx).generator())
        e, _ = estimators.correlation_from_arrays(a, b)
        terms[(x, y)] = e
    s = terms[(0, 0)] + terms[(0, 1)] + terms[(1, 0)] - terms[(1, 1)]
    elapsed = time.time() - t0
    ok = (replay and abs(oracle - frozen) < 1e-9 and abs(s - oracle) <= 0.02
          and s >= 2.2 and elapsed < 120.0)
    report(capsys, 9, ok,
           f"contextual: replay exact {replay}; post-selected S {s:.4f} "
           f">= 2.2 (oracle {oracle:.4f}) at 4x{n} trials ({elapsed:.1f}s)")


def test_criterion_10_stats_machinery(capsys):
    two = stats.chebyshev_confidence(2.0, 1.0)
    far = stats.chebyshev_confidence(1.0, 1.0 / math.sqrt(2000.0))
    cheb_ok = two.confidence == 0.75 and far.confidence >= 0.9995

    # p-value calibration under an i.i.d. null: empirical CDF at every
    # decile within 10 points of the decile itself
    reps = 1000
    worst_dev = 0.0
    for method, maker in (("ks", lambda r: r.normal(size=400)),
                          ("runs", lambda r: r.normal(size=400)),
                          ("chi_square", lambda r: r.integers(0, 6, size=600))):
        ps = np.array([stats.homogeneity_test(
            maker(RngStream(1234, (i,)).generator()), method).p_value
            for i in range(reps)])
        for d in np.arange(0.1, 1.0, 0.1):
            worst_dev = max(worst_dev, abs(float(np.mean(ps <= d)) - d))
    calib_ok = worst_dev <= 0.10

    demo = stats.breakdown_demo(stream=stream(10))
    n_reject = demo.n_rejecting(100.0)
    chi_p = demo.homogeneity["chi_square"].p_value
    demo_ok = (n_reject >= 3 and abs(demo.pooled.z) < 2.0 and chi_p < 1e-6)

    ok = cheb_ok and calib_ok and demo_ok
    report(capsys, 10, ok,
           f"stats: chebyshev(2 sem)={two.confidence} exact, "
           f"far confidence {far.confidence:.5f} >= 0.9995; calibration "
           f"worst decile dev {worst_dev:.3f} <= 0.10 ({reps} reps); "
           f"breakdown {n_reject}/100 runs reject >100 sem, pooled "
           f"|z|={abs(demo.pooled.z):.2f} < 2, homogeneity p={chi_p:.1e}")
