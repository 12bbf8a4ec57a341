"""Command line front end.

Subcommands cover the full pipeline: simulate raw event streams, pair
them into trials, estimate statistics, run both computer-challenge
campaigns, play the guessing game, test homogeneity, run the drifting
device demo, and reproduce the headline numbers in one go.

Every JSON summary embeds the command, package version, seed, stream,
the resolved configuration, and the sample sizes, so a summary is a
complete recipe for regenerating its own data.  Exit codes: 0 success,
1 failed reproduction, 2 bad configuration or input, 3 a requested
statistic was undefined under --strict.
"""

from __future__ import annotations

import argparse
import ast
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, bellgame, estimators, pairing, randi, sources, stats
from .core import (PairedTrial, RngStream, StationEvent, read_events,
                   read_trials, write_events, write_trials)

CONFIG_ERROR = 2
UNDEFINED_STAT = 3


# ---------------------------------------------------------------------------
# plumbing

def _load_config(path: str) -> dict:
    """Flat key = value file; values are python literals when they parse."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _config_error(f"config: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise _config_error(f"config line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        try:
            out[key] = ast.literal_eval(value)
        except (ValueError, SyntaxError):
            low = value.lower()
            out[key] = {"true": True, "false": False}.get(low, value)
    return out


class _ConfigError(SystemExit):
    pass


def _config_error(msg: str) -> _ConfigError:
    print(f"error: {msg}", file=sys.stderr)
    return _ConfigError(CONFIG_ERROR)


def _atomic_write(path: Path, writer) -> None:
    # whole file appears at once or not at all
    tmp = path.with_name(path.name + ".part")
    writer(tmp)
    os.replace(tmp, path)


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _summary(args, sizes: dict, results: dict) -> dict:
    config = {k: v for k, v in vars(args).items()
              if k not in ("func", "out") and not k.startswith("_")}
    return {
        "command": args.command,
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "stream": getattr(args, "stream", None),
        "config": config,
        "sizes": sizes,
        "results": results,
    }


def _emit(args, sizes: dict, results: dict, extra_files=()) -> None:
    payload = _summary(args, sizes, results)
    text = json.dumps(payload, indent=2, default=_json_default)
    print(text)
    out = getattr(args, "out", None)
    if out is not None:
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        _atomic_write(out_dir / "summary.json",
                      lambda p: p.write_text(text + "\n"))
        for name, writer in extra_files:
            _atomic_write(out_dir / name, writer)


def _stream_of(args) -> RngStream:
    return RngStream(args.seed, (args.stream,))


def _csv_writer(header, rows):
    def write(path: Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
    return write


def _parse_labels(value, name: str) -> tuple:
    if isinstance(value, (tuple, list)):
        parts = value
    else:
        parts = str(value).split(",")
    try:
        labels = tuple(int(v) for v in parts)
    except ValueError:
        raise _config_error(f"{name}: expected comma-separated integers")
    if len(labels) != 2:
        raise _config_error(f"{name}: expected exactly 2 labels")
    return labels


# ---------------------------------------------------------------------------
# simulate

def _parse_angles(value) -> tuple:
    if isinstance(value, (tuple, list)):
        parts = value
    else:
        parts = str(value).split(",")
    try:
        angles = tuple(float(v) for v in parts)
    except ValueError:
        raise _config_error("--angles: expected two comma-separated floats")
    if len(angles) != 2:
        raise _config_error("--angles: expected exactly two angles")
    return angles


def cmd_simulate(args) -> int:
    n = args.n
    if n < 1:
        raise _config_error("--n must be >= 1")
    rng = _stream_of(args).generator()
    theta_a, theta_b = _parse_angles(args.angles)
    if args.model == "singlet":
        a, b = sources.singlet_pairs(theta_a, theta_b, n, rng)
        label_a, label_b = args.label_a, args.label_b
    elif args.model == "smeared":
        ja = sources.AngleJitter(theta_a, args.half_width_a,
                                 args.jitter_weight)
        jb = sources.AngleJitter(theta_b, args.half_width_b,
                                 args.jitter_weight)
        a, b = sources.smeared_pairs(ja, jb, n, rng)
        label_a, label_b = args.label_a, args.label_b
    else:
        params = sources.ContextualParams(gamma=args.gamma, tau0=args.tau0)
        try:
            a, b = sources.contextual_batch(args.x, args.y, n, params, rng)
        except IndexError:
            raise _config_error("contextual setting labels are 0 or 1")
        label_a, label_b = args.x, args.y

    events_a = [StationEvent(i, label_a, int(v)) for i, v in enumerate(a)]
    events_b = [StationEvent(i, label_b, int(v)) for i, v in enumerate(b)]
    corr, n_used = estimators.correlation_from_arrays(a, b)
    results = {"correlation": corr, "n_coincident": n_used,
               "mean_a": float(np.mean(a)), "mean_b": float(np.mean(b))}
    trials = [PairedTrial(label_a, label_b, int(u), int(v))
              for u, v in zip(a, b)]
    _emit(args, {"n": n}, results, extra_files=(
        ("events_a.csv", lambda p: write_events(p, events_a)),
        ("events_b.csv", lambda p: write_events(p, events_b)),
        ("trials.csv", lambda p: write_trials(p, trials)),
    ))
    return 0


# ---------------------------------------------------------------------------
# pair

def _parse_pairing(spec: str):
    kind, _, param = str(spec).partition(":")
    kinds = {"systematic": int, "random": int, "window": float}
    if kind not in kinds:
        raise _config_error("--pairing must be systematic:k, random:m or window:w")
    if not param:
        raise _config_error(f"--pairing {kind} needs a parameter, e.g. {kind}:1")
    try:
        return kind, kinds[kind](param)
    except ValueError:
        raise _config_error(f"--pairing {kind}: bad parameter {param!r}")


def cmd_pair(args) -> int:
    try:
        events_a = read_events(args.events_a)
        events_b = read_events(args.events_b)
    except (OSError, KeyError, ValueError) as exc:
        raise _config_error(f"reading events: {exc}")
    kind, param = _parse_pairing(args.pairing)
    try:
        if kind == "systematic":
            trials = pairing.pair_systematic(events_a, events_b, param)
        elif kind == "random":
            rng = _stream_of(args).generator()
            trials = pairing.pair_random(events_a, events_b, param, rng)
        else:
            trials = pairing.pair_time_window(events_a, events_b, param)
    except ValueError as exc:
        raise _config_error(str(exc))
    n_coinc = sum(1 for t in trials if t.coincident)
    _emit(args,
          {"n_events_a": len(events_a), "n_events_b": len(events_b),
           "n_trials": len(trials)},
          {"n_trials": len(trials), "n_coincident": n_coinc},
          extra_files=(("trials.csv", lambda p: write_trials(p, trials)),))
    return 0


# ---------------------------------------------------------------------------
# estimate

def cmd_estimate(args) -> int:
    try:
        trials = read_trials(args.input)
    except (OSError, KeyError, ValueError) as exc:
        raise _config_error(f"reading trials: {exc}")
    coincident_only = not args.include_no_counts
    a_labels = _parse_labels(args.a_labels, "--a-labels")
    b_labels = _parse_labels(args.b_labels, "--b-labels")
    undefined = False

    if args.stat == "correlation":
        value = estimators.correlation(trials, coincident_only)
        undefined = value is None
        results = {"correlation": value}
    elif args.stat == "covariance":
        try:
            results = {"covariance": pairing.covariance(trials, coincident_only)}
        except ValueError:
            undefined = True
            results = {"covariance": None}
    elif args.stat == "chsh":
        est = estimators.chsh(trials, a_labels, b_labels, coincident_only)
        undefined = est.s_value is None
        results = {"s_value": est.s_value, "terms": est.terms(),
                   "sizes": list(est.sizes)}
    elif args.stat == "counter-chsh":
        counters = estimators.vongher_counters(trials)
        cc = estimators.chsh_from_counters(counters)
        undefined = cc.s_value is None
        results = {"s_value": cc.s_value, "e_tilde": list(cc.e_tilde),
                   "n_e": list(counters.n_e), "n_u": list(counters.n_u)}
    elif args.stat == "bell-counter":
        counters = estimators.vongher_counters(trials)
        res = estimators.bell_counter_test(counters)
        results = {"lhs": res.lhs, "rhs": res.rhs, "violated": res.violated,
                   "n_e": list(counters.n_e), "n_u": list(counters.n_u)}
    else:  # eberhard
        counts = estimators.eberhard_counts(trials, a_labels, b_labels)
        results = {"j_value": estimators.eberhard_j(counts),
                   "counts": vars(counts)}

    _emit(args, {"n_trials": len(trials)}, results)
    if undefined and args.strict:
        return UNDEFINED_STAT
    return 0


# ---------------------------------------------------------------------------
# campaigns

def _gill_dist(args) -> sources.InstructionDist:
    kind, _, param = str(args.generator).partition(":")
    if kind == "uniform":
        return sources.InstructionDist.uniform()
    if kind == "positive-boundary":
        return sources.InstructionDist.positive_boundary()
    if kind != "point-mass":
        raise _config_error("--generator must be uniform, positive-boundary "
                            "or point-mass:A,A',B,B'")
    try:
        atom = tuple(int(v) for v in (param or "1,1,1,1").split(","))
        return sources.InstructionDist.point_mass(atom)
    except ValueError as exc:
        raise _config_error(str(exc))


def cmd_qrc_gill(args) -> int:
    dist = _gill_dist(args)
    report = randi.gill_campaign(dist, args.rows, args.runs,
                                 _stream_of(args), args.threads)
    results = report.to_dict()
    per_run = results.pop("per_run")
    rows = [(r["run"], r["s_value"], int(r["violated"]), *r["sizes"])
            for r in per_run]
    _emit(args, {"runs": args.runs, "rows": args.rows}, results,
          extra_files=(("per_run.csv", _csv_writer(
              ("run", "s_value", "violated",
               "n_ab", "n_abp", "n_apb", "n_apbp"), rows)),))
    return 0


def _vongher_source(args):
    if args.variant == "quantum":
        return randi.QUANTUM_SOURCE
    if args.variant == "strict":
        return sources.strict()
    if args.variant == "missing-pairs":
        return sources.missing_pairs(args.p_drop)
    return sources.partial_anticorr(args.q, args.p_a3_flip, args.p_b2_flip)


def cmd_qrc_vongher(args) -> int:
    report = randi.vongher_campaign(_vongher_source(args), args.runs,
                                    args.pairs, _stream_of(args), args.threads)
    results = report.to_dict()
    per_run = results.pop("per_run")
    rows = [(r["run"], r["bell_lhs"], r["bell_rhs"], int(r["bell_violated"]),
             r["s_value"], int(r["chsh_violated"]), *r["n_e"], *r["n_u"])
            for r in per_run]
    header = ("run", "bell_lhs", "bell_rhs", "bell_violated", "s_value",
              "chsh_violated", "n_e0", "n_e1", "n_e2", "n_e3",
              "n_u0", "n_u1", "n_u2", "n_u3")
    _emit(args, {"runs": args.runs, "pairs": args.pairs}, results,
          extra_files=(("per_run.csv", _csv_writer(header, rows)),))
    return 0


# ---------------------------------------------------------------------------
# bell game

def _read_script(path) -> tuple:
    with open(path, newline="") as fh:
        rows = [tuple(int(v) for v in (r["i"], r["j"], r["x"], r["y"]))
                for r in csv.DictReader(fh)]
    return tuple(rows)


def _game_strategy(args):
    if args.strategy == "fixed":
        return bellgame.FixedProgramStrategy(args.i, args.j)
    if args.strategy == "random":
        return bellgame.RandomProgramStrategy()
    if args.strategy == "contextual":
        return bellgame.ContextualProgramStrategy(args.wobble)
    if args.strategy == "quantum":
        return bellgame.QuantumStrategy()
    script = bellgame.PERFECT_SCRIPT
    if args.script is not None:
        try:
            script = _read_script(args.script)
        except (OSError, KeyError, ValueError) as exc:
            raise _config_error(f"reading script: {exc}")
    return bellgame.ScriptedStrategy(script)


def cmd_bellgame(args) -> int:
    if args.rounds < 1:
        raise _config_error("--rounds must be >= 1")
    try:
        strategy = _game_strategy(args)
    except ValueError as exc:
        raise _config_error(str(exc))
    rng = _stream_of(args).generator()
    result = bellgame.play_game(strategy, args.rounds, rng,
                                keep_log=args.out is not None)
    results = {"rounds": result.rounds_played, "points": result.points,
               "avg_score": result.avg_score}
    rows = [(k + 1, r.i, r.j, r.x, r.y, r.a, r.b, int(r.point))
            for k, r in enumerate(result.log)]
    _emit(args, {"rounds": args.rounds}, results,
          extra_files=(("rounds.csv", _csv_writer(
              ("minute", "i", "j", "x", "y", "a", "b", "point"), rows)),))
    return 0


# ---------------------------------------------------------------------------
# homogeneity / breakdown

def _homogeneity_for(values: np.ndarray, args) -> dict:
    """chi_square reads the raw stream; ks/runs read bin means when binned."""
    binned = values
    if args.bins:
        if len(values) < args.bins:
            raise _config_error(f"only {len(values)} values for --bins {args.bins}")
        binned = stats.bin_statistic(values, args.bins,
                                     lambda c: float(np.mean(c))).defined()
    out = {}
    methods = stats.HOMOGENEITY_METHODS if args.method == "all" else (args.method,)
    for m in methods:
        data = values if m == "chi_square" else binned
        parts = args.parts if m == "chi_square" else 2
        try:
            res = stats.homogeneity_test(data, m, parts)
        except ValueError as exc:
            raise _config_error(str(exc))
        out[m] = {"statistic": res.statistic, "p_value": res.p_value,
                  "details": res.details}
    return out


def cmd_homogeneity(args) -> int:
    try:
        events = read_events(args.input)
    except (OSError, KeyError, ValueError) as exc:
        raise _config_error(f"reading events: {exc}")
    if not events:
        raise _config_error("no events in input")
    values = np.array([getattr(e, args.column) for e in events], dtype=float)
    if args.per_setting:
        labels = sorted({e.setting_label for e in events})
        results = {}
        for lab in labels:
            sub = np.array([e.outcome for e in events
                            if e.setting_label == lab], dtype=float)
            results[str(lab)] = _homogeneity_for(sub, args)
    else:
        results = _homogeneity_for(values, args)
    _emit(args, {"n_values": int(values.size)}, results)
    return 0


def _parse_breakdown_spec(d: dict) -> stats.DriftingDeviceSpec:
    try:
        raw = d["values"]  # the config loader may have eval'd "0,2" already
        parts = raw if isinstance(raw, (tuple, list)) else str(raw).split(",")
        values = tuple(float(v) for v in parts)
        regimes = []
        for chunk in str(d["regimes"]).split(";"):
            start, stop, probs = chunk.strip().split(":")
            regimes.append((int(start), int(stop),
                            tuple(float(p) for p in probs.split(","))))
        return stats.DriftingDeviceSpec(values, tuple(regimes))
    except (KeyError, ValueError) as exc:
        raise _config_error(f"breakdown spec: {exc}")


def cmd_breakdown(args) -> int:
    spec = None
    if args.spec is not None:
        spec = _parse_breakdown_spec(_load_config(args.spec))
    try:
        report = stats.breakdown_demo(spec, args.runs, args.run_len,
                                      _stream_of(args), args.threads)
    except ValueError as exc:
        raise _config_error(str(exc))
    results = report.to_dict()
    _emit(args, {"runs": args.runs, "run_len": args.run_len}, results)
    return 0


# ---------------------------------------------------------------------------
# reproduce

def _check(name: str, measured, target, tol, passed: bool) -> dict:
    flag = "ok" if passed else "FAIL"
    print(f"[{flag}] {name}: measured={measured} target={target} tol={tol}")
    return {"name": name, "measured": measured, "target": target,
            "tol": tol, "passed": passed}


def _rt_singlet(stream, threads):
    rng = stream.generator()
    n = 100_000
    a, b = sources.singlet_pairs(0.0, math.pi / 4, n, rng)
    e, _ = estimators.correlation_from_arrays(a, b)
    target = -math.sqrt(2) / 2
    yield _check("singlet-law", round(e, 5), round(target, 5), 0.01,
                 abs(e - target) <= 0.01)
    yield _check("singlet-marginal", round(float(np.mean(a)), 5), 0.0, 0.02,
                 abs(float(np.mean(a))) <= 0.02)


def _rt_smeared(stream, threads):
    rng = stream.generator()
    n = 200_000
    w = math.pi / 8
    a, b = sources.smeared_pairs(sources.AngleJitter(0.0, w),
                                 sources.AngleJitter(0.0, w), n, rng)
    e, _ = estimators.correlation_from_arrays(a, b)
    target = -(math.sin(w) / w) ** 2
    yield _check("smeared-law", round(e, 5), round(target, 5), 0.01,
                 abs(e - target) <= 0.01)


def _rt_pairing(stream, threads):
    ea = [StationEvent(i, 0, -1 if i % 2 == 0 else 1) for i in range(1000)]
    eb = [StationEvent(i, 0, 1 if i % 2 == 0 else -1) for i in range(1003)]
    got = []
    for k in (1, 2, 3, 4):
        trials = pairing.pair_systematic(ea, eb, k)
        got.append(pairing.covariance(trials))
    target = [-1.0, 1.0, -1.0, 1.0]
    yield _check("pairing-offsets", got, target, 0.0, got == target)
    rng = stream.generator()
    trials = pairing.pair_random(ea, eb, 100_000, rng)
    cov = pairing.covariance(trials)
    tol = 4.0 / math.sqrt(100_000)
    yield _check("pairing-random", round(cov, 5), 0.0, round(tol, 5),
                 abs(cov) <= tol)


def _rt_spreadsheet(stream, threads):
    rng = stream.generator()
    worst = 0.0
    for _ in range(200):
        sheet = sources.generate_cfd_spreadsheet(10_000,
                                                 sources.InstructionDist.uniform(),
                                                 rng)
        s = abs(int(sheet.row_combinations().sum())) / len(sheet)
        worst = max(worst, s)
    yield _check("spreadsheet-bound", round(worst, 5), "<= 2", 0.0, worst <= 2.0)


def _rt_gill_uniform(stream, threads):
    rep = randi.gill_campaign(sources.InstructionDist.uniform(), 3200, 1000,
                              stream, threads)
    bound = round(rep.qrc_bound, 4)
    ok = rep.chsh_violation_rate <= rep.qrc_bound and rep.qrc_won is False
    yield _check("gill-uniform", rep.chsh_violation_rate, f"<={bound}", 0.0, ok)


def _rt_gill_boundary(stream, threads):
    rep = randi.gill_campaign(sources.InstructionDist.positive_boundary(),
                              3200, 1000, stream, threads)
    ok = 0.40 <= rep.chsh_violation_rate <= 0.60 and rep.qrc_won is False
    yield _check("gill-boundary", rep.chsh_violation_rate, 0.5, 0.1, ok)


def _rt_vongher_strict(stream, threads):
    rep = randi.vongher_campaign(sources.strict(), 1000, 800, stream, threads)
    ok = rep.bell_violation_rate == 0.0 and rep.chsh_violation_rate == 0.0
    yield _check("vongher-strict", (rep.bell_violation_rate,
                 rep.chsh_violation_rate), (0.0, 0.0), 0.0, ok)


def _rt_vongher_boundary(stream, threads):
    rep = randi.vongher_campaign(sources.missing_pairs(), 1000, 800,
                                 stream, threads)
    yield _check("vongher-boundary", round(rep.bell_violation_rate, 3), 0.5,
                 0.1, 0.40 <= rep.bell_violation_rate <= 0.60)


def _rt_vongher_partial(stream, threads):
    rep = randi.vongher_campaign(sources.partial_anticorr(0.87), 1000, 800,
                                 stream, threads)
    yield _check("vongher-partial", round(rep.bell_violation_rate, 3), 0.87,
                 0.05, abs(rep.bell_violation_rate - 0.87) <= 0.05)


def _rt_vongher_quantum(stream, threads):
    rep = randi.vongher_campaign(randi.QUANTUM_SOURCE, 1000, 800,
                                 stream, threads)
    yield _check("vongher-quantum-bell", round(rep.bell_violation_rate, 3),
                 0.91, 0.05, abs(rep.bell_violation_rate - 0.91) <= 0.05)
    yield _check("vongher-quantum-chsh", round(rep.chsh_violation_rate, 3),
                 0.99, 0.03, abs(rep.chsh_violation_rate - 0.99) <= 0.03)


def _rt_bellgame(stream, threads):
    table = bellgame.counterfactual_table()
    best = max(r.score for r in table)
    yield _check("bellgame-table-max", best, 3, 0, best == 3)
    rng = stream.child(0).generator()
    res = bellgame.play_game(bellgame.ScriptedStrategy(bellgame.PERFECT_SCRIPT),
                             4, rng)
    yield _check("bellgame-script", res.points, 4, 0, res.points == 4)
    rng = stream.child(1).generator()
    res = bellgame.play_game(bellgame.RandomProgramStrategy(), 100_000, rng)
    yield _check("bellgame-random", round(res.avg_score, 4), 2.0, 0.05,
                 abs(res.avg_score - 2.0) <= 0.05)
    rng = stream.child(2).generator()
    res = bellgame.play_game(bellgame.QuantumStrategy(), 100_000, rng)
    target = 2.0 + math.sqrt(2)
    yield _check("bellgame-quantum", round(res.avg_score, 4), round(target, 4),
                 0.05, abs(res.avg_score - target) <= 0.05)


def _rt_contextual(stream, threads):
    rng = stream.generator()
    params = sources.ContextualParams()
    n = 200_000
    terms = {}
    coinc = []
    for x in (0, 1):
        for y in (0, 1):
            a, b = sources.contextual_batch(x, y, n, params, rng)
            e, used = estimators.correlation_from_arrays(a, b)
            terms[(x, y)] = e
            coinc.append(used / n)
    s = terms[(0, 0)] + terms[(0, 1)] + terms[(1, 0)] - terms[(1, 1)]
    yield _check("contextual-chsh", round(s, 4), 3.9099, 0.05,
                 abs(s - 3.9099) <= 0.05)
    rate = sum(coinc) / 4
    yield _check("contextual-coincidence", round(rate, 4), 0.25, 0.02,
                 abs(rate - 0.25) <= 0.02)


def _rt_chebyshev(stream, threads):
    r = stats.chebyshev_confidence(2.0, 1.0, 0.0)
    yield _check("chebyshev-2sem", r.confidence, 0.75, 0.0,
                 r.confidence == 0.75)
    r = stats.chebyshev_confidence(2.0, 2.0 / 44.72135955, 0.0)
    yield _check("chebyshev-45sem", round(r.confidence, 5), ">=0.9995", 0.0,
                 r.confidence >= 0.9995)


def _rt_breakdown(stream, threads):
    report = stats.breakdown_demo(stream=stream, threads=threads)
    n100 = report.n_rejecting(100.0)
    yield _check("breakdown-per-run", n100, ">=3", 0, n100 >= 3)
    yield _check("breakdown-pooled", round(abs(report.pooled.z), 3), "<2", 0,
                 abs(report.pooled.z) < 2.0)
    p = report.homogeneity["chi_square"].p_value
    yield _check("breakdown-homogeneity", p, "<1e-6", 0, p < 1e-6)


REPRODUCE_TARGETS = {
    "singlet": _rt_singlet,
    "smeared": _rt_smeared,
    "pairing": _rt_pairing,
    "spreadsheet": _rt_spreadsheet,
    "gill-uniform": _rt_gill_uniform,
    "gill-boundary": _rt_gill_boundary,
    "vongher-strict": _rt_vongher_strict,
    "vongher-boundary": _rt_vongher_boundary,
    "vongher-partial": _rt_vongher_partial,
    "vongher-quantum": _rt_vongher_quantum,
    "bellgame": _rt_bellgame,
    "contextual": _rt_contextual,
    "chebyshev": _rt_chebyshev,
    "breakdown": _rt_breakdown,
}


def cmd_reproduce(args) -> int:
    names = list(REPRODUCE_TARGETS) if args.target == "all" else [args.target]
    checks = []
    for k, name in enumerate(names):
        stream = RngStream(args.seed, (args.stream, k))
        checks.extend(REPRODUCE_TARGETS[name](stream, args.threads))
    n_pass = sum(1 for c in checks if c["passed"])
    results = {"checks": checks, "passed": n_pass, "total": len(checks)}
    _emit(args, {"n_targets": len(names)}, results)
    return 0 if n_pass == len(checks) else 1


# ---------------------------------------------------------------------------
# parser

def _add_common(sp, threads: bool = False) -> None:
    sp.add_argument("--seed", type=int, default=0,
                    help="base seed (default 0)")
    sp.add_argument("--stream", type=int, default=0,
                    help="stream key under the seed (default 0)")
    sp.add_argument("--config", help="key = value file of defaults")
    sp.add_argument("--out", help="directory for CSV and summary.json")
    if threads:
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads (BELL_LAB_THREADS caps this)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bell-lab",
        description="Monte Carlo lab for finite-sample Bell statistics")
    parser.add_argument("--version", action="version",
                        version=f"bell-lab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="generate raw event streams")
    sp.add_argument("--model", choices=("singlet", "smeared", "contextual"),
                    required=True)
    sp.add_argument("--n", type=int, default=10_000)
    sp.add_argument("--angles", default="0,0",
                    help="analyzer centers in radians, e.g. 0,0.7854")
    sp.add_argument("--half-width-a", type=float, default=0.0)
    sp.add_argument("--half-width-b", type=float, default=0.0)
    sp.add_argument("--jitter-weight", choices=sources.JITTER_WEIGHTS,
                    default="uniform")
    sp.add_argument("--x", type=int, default=0, help="contextual setting, side A")
    sp.add_argument("--y", type=int, default=0, help="contextual setting, side B")
    sp.add_argument("--gamma", type=float, default=0.5)
    sp.add_argument("--tau0", type=float, default=1.0)
    sp.add_argument("--label-a", type=int, default=0)
    sp.add_argument("--label-b", type=int, default=0)
    _add_common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("pair", help="pair two event streams into trials")
    sp.add_argument("--events-a", required=True)
    sp.add_argument("--events-b", required=True)
    sp.add_argument("--pairing", required=True,
                    help="systematic:k, random:m or window:w")
    _add_common(sp)
    sp.set_defaults(func=cmd_pair)

    sp = sub.add_parser("estimate", help="statistics from a trials file")
    sp.add_argument("--input", required=True, help="trials CSV")
    sp.add_argument("--stat", required=True,
                    choices=("correlation", "covariance", "chsh",
                             "counter-chsh", "bell-counter", "eberhard"))
    sp.add_argument("--a-labels", default="0,1")
    sp.add_argument("--b-labels", default="0,1")
    sp.add_argument("--include-no-counts", action="store_true",
                    help="keep trials where a side shows 0")
    sp.add_argument("--strict", action="store_true",
                    help="exit 3 when the statistic is undefined")
    _add_common(sp)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("qrc-gill", help="coin-subsample challenge campaign")
    sp.add_argument("--generator", default="uniform",
                    help="uniform, positive-boundary or point-mass:A,A',B,B'")
    sp.add_argument("--rows", type=int, default=3200)
    sp.add_argument("--runs", type=int, default=1000)
    _add_common(sp, threads=True)
    sp.set_defaults(func=cmd_qrc_gill)

    sp = sub.add_parser("qrc-vongher", help="ball-protocol challenge campaign")
    sp.add_argument("--variant", choices=("strict", "missing-pairs",
                                          "partial-anticorr", "quantum"),
                    default="strict")
    sp.add_argument("--q", type=float, default=0.87,
                    help="d=0 disagreement probability for partial-anticorr")
    sp.add_argument("--p-a3-flip", type=float, default=0.0075)
    sp.add_argument("--p-b2-flip", type=float, default=1.0)
    sp.add_argument("--p-drop", type=float, default=0.1,
                    help="pair loss probability for missing-pairs")
    sp.add_argument("--pairs", type=int, default=800)
    sp.add_argument("--runs", type=int, default=1000)
    _add_common(sp, threads=True)
    sp.set_defaults(func=cmd_qrc_vongher)

    sp = sub.add_parser("bellgame", help="play the guessing game")
    sp.add_argument("--strategy", choices=("fixed", "random", "scripted",
                                           "contextual", "quantum"),
                    required=True)
    sp.add_argument("--i", type=int, default=1, help="fixed program, side A")
    sp.add_argument("--j", type=int, default=1, help="fixed program, side B")
    sp.add_argument("--wobble", type=float, default=0.25)
    sp.add_argument("--script", default=None,
                    help="CSV of i,j,x,y rounds for the scripted strategy")
    sp.add_argument("--rounds", type=int, default=1000)
    _add_common(sp)
    sp.set_defaults(func=cmd_bellgame)

    sp = sub.add_parser("homogeneity", help="is one stream one experiment?")
    sp.add_argument("--input", required=True, help="events CSV")
    sp.add_argument("--column", choices=("outcome", "setting_label"),
                    default="outcome")
    sp.add_argument("--method", choices=("chi_square", "ks", "runs", "all"),
                    default="all")
    sp.add_argument("--parts", type=int, default=2)
    sp.add_argument("--bins", type=int, default=30,
                    help="bin-mean count for ks/runs (0 = raw values)")
    sp.add_argument("--per-setting", action="store_true")
    _add_common(sp)
    sp.set_defaults(func=cmd_homogeneity)

    sp = sub.add_parser("breakdown", help="drifting-device significance demo")
    sp.add_argument("--runs", type=int, default=100)
    sp.add_argument("--run-len", type=int, default=100_000)
    sp.add_argument("--spec", default=None,
                    help="device spec file (values = ..., regimes = ...)")
    _add_common(sp, threads=True)
    sp.set_defaults(func=cmd_breakdown)

    sp = sub.add_parser("reproduce", help="re-derive the headline numbers")
    sp.add_argument("--target", default="all",
                    choices=("all",) + tuple(REPRODUCE_TARGETS))
    _add_common(sp, threads=True)
    sp.set_defaults(func=cmd_reproduce)

    return parser, sub


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, sub = build_parser()
    cmd = next((tok for tok in argv if not tok.startswith("-")), None)
    if cmd in sub.choices:
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config")
        known, _ = pre.parse_known_args(argv)
        if known.config:
            try:
                config = _load_config(known.config)
            except _ConfigError as exc:
                return exc.code
            chosen = sub.choices[cmd]
            valid = {a.dest for a in chosen._actions}
            bad = sorted(set(config) - valid)
            if bad:
                print(f"error: config keys not understood by {cmd}: "
                      f"{', '.join(bad)}", file=sys.stderr)
                return CONFIG_ERROR
            chosen.set_defaults(**config)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else CONFIG_ERROR
    try:
        return args.func(args)
    except _ConfigError as exc:
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
