"""The two computer-challenge protocols.

Both ask the same question: can a program that commits its outputs
before learning the settings produce violation statistics run after run?

* Coin-subsample protocol: a submitted spreadsheet of predetermined
  (A, A', B, B') rows is split into four disjoint subsamples by two fair
  coins per row, and the CHSH combination of the subsample correlations
  is scored against 2.
* Ball protocol: prepared answer-bit pairs are measured at randomly
  chosen settings, and the equal/unequal counters are scored against the
  d-based inequality and its CHSH form.

Campaigns run many independent rounds on child random streams, so a
report is reproducible from (seed, stream) alone regardless of the
thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import MINUS, NO_COUNT, PLUS, PairedTrial, RngStream, run_indexed
from .estimators import (BellCounterResult, ChshEstimate, CounterChsh,
                         CounterSet, bell_counter_test, chsh_from_arrays,
                         chsh_from_counters, vongher_counters_from_arrays)
from .sources import (SETTINGS_A, SETTINGS_B, BallTable, BallVariant,
                      InstructionDist, Spreadsheet4, generate_cfd_spreadsheet,
                      generate_tennis_balls)

CHSH_BOUND = 2.0

# analyzer angle per setting label, in units of pi/8, for the quantum ball run
VONGHER_ANGLE_UNIT = math.pi / 8


def gill_subsample(sheet: Spreadsheet4, rng: np.random.Generator) -> ChshEstimate:
    """Score a spreadsheet by random disjoint subsamples.

    Per row, two fair coins choose which A column and which B column get
    read, so each row lands in exactly one of the four groups.  Draw
    order: all side-A coins, then all side-B coins.
    """
    n = len(sheet)
    pick_a = rng.integers(0, 2, size=n)  # 0 reads A, 1 reads A'
    pick_b = rng.integers(0, 2, size=n)
    rows = sheet.rows.astype(np.int64)
    a_val = np.where(pick_a == 0, rows[:, 0], rows[:, 1])
    b_val = np.where(pick_b == 0, rows[:, 2], rows[:, 3])
    return chsh_from_arrays(pick_a, pick_b, a_val, b_val,
                            a_labels=(0, 1), b_labels=(0, 1))


@dataclass(frozen=True)
class CampaignReport:
    """Aggregate of many independent runs.

    Violation rates are exact counts over runs.  qrc_bound is set by the
    coin-subsample campaign: the challenge is won when the violation
    rate clears 0.5 by three binomial standard errors.
    """

    runs: int
    chsh_violations: int
    per_run: tuple
    bell_violations: int | None = None
    qrc_bound: float | None = None

    @property
    def chsh_violation_rate(self) -> float:
        return self.chsh_violations / self.runs

    @property
    def bell_violation_rate(self) -> float | None:
        if self.bell_violations is None:
            return None
        return self.bell_violations / self.runs

    @property
    def qrc_won(self) -> bool | None:
        if self.qrc_bound is None:
            return None
        return self.chsh_violation_rate > self.qrc_bound

    def to_dict(self) -> dict:
        return {
            "runs": self.runs,
            "chsh_violations": self.chsh_violations,
            "chsh_violation_rate": self.chsh_violation_rate,
            "bell_violations": self.bell_violations,
            "bell_violation_rate": self.bell_violation_rate,
            "qrc_bound": self.qrc_bound,
            "qrc_won": self.qrc_won,
            "per_run": list(self.per_run),
        }


def qrc_win_bound(runs: int) -> float:
    """Half plus three binomial standard errors at p = 1/2."""
    return 0.5 + 3.0 * math.sqrt(0.25 / runs)


def gill_campaign(dist: InstructionDist, n_rows: int, runs: int,
                  stream: RngStream, threads: int | None = None) -> CampaignReport:
    """Fresh spreadsheet from dist each run, scored by gill_subsample.

    Run i draws everything from stream.child(i), so reports do not
    depend on scheduling.
    """

    def one(i: int) -> dict:
        rng = stream.child(i).generator()
        sheet = generate_cfd_spreadsheet(n_rows, dist, rng)
        est = gill_subsample(sheet, rng)
        s = est.s_value
        return {"run": i, "s_value": s, "sizes": list(est.sizes),
                "violated": s is not None and s > CHSH_BOUND}

    per_run = run_indexed(one, runs, threads)
    viol = sum(1 for r in per_run if r["violated"])
    return CampaignReport(runs=runs, chsh_violations=viol,
                          per_run=tuple(per_run), qrc_bound=qrc_win_bound(runs))


# ---------------------------------------------------------------------------
# ball protocol

QUANTUM_SOURCE = "quantum"


def draw_vongher_settings(n: int, rng: np.random.Generator):
    """Fair independent setting choices: side A then side B."""
    sa = np.asarray(SETTINGS_A, dtype=np.int64)[rng.integers(0, 2, size=n)]
    sb = np.asarray(SETTINGS_B, dtype=np.int64)[rng.integers(0, 2, size=n)]
    return sa, sb


def measure_balls(table: BallTable, setting_a, setting_b):
    """Read each ball pair at the chosen settings; returns (a, b) int8 arrays.

    Answer bit 1 maps to +1 and bit 0 to -1; unprepared pairs register
    no count on either side.
    """
    setting_a = np.asarray(setting_a)
    setting_b = np.asarray(setting_b)
    bit_a = np.where(setting_a == SETTINGS_A[0], table.a0, table.a3)
    bit_b = np.where(setting_b == SETTINGS_B[0], table.b0, table.b2)
    a = np.where(table.prepared, 2 * bit_a - 1, NO_COUNT).astype(np.int8)
    b = np.where(table.prepared, 2 * bit_b - 1, NO_COUNT).astype(np.int8)
    return a, b


def quantum_ball_outcomes(setting_a, setting_b, rng: np.random.Generator):
    """Singlet statistics at the protocol angles (label times pi/8).

    Draw order: side-A signs, then the per-pair agreement draws.
    """
    setting_a = np.asarray(setting_a)
    setting_b = np.asarray(setting_b)
    delta = (setting_a - setting_b) * VONGHER_ANGLE_UNIT
    p_anti = (1.0 + np.cos(delta)) / 2.0
    n = setting_a.size
    a = rng.choice(np.array([PLUS, MINUS], dtype=np.int8), size=n)
    flip = rng.random(n) < p_anti
    b = np.where(flip, -a, a).astype(np.int8)
    return a, b


@dataclass(frozen=True)
class VongherRun:
    """One run's counters plus both verdicts."""

    counters: CounterSet
    bell: BellCounterResult
    chsh: CounterChsh

    @property
    def bell_violated(self) -> bool:
        return self.bell.violated

    @property
    def chsh_violated(self) -> bool:
        return self.chsh.s_value is not None and self.chsh.s_value > CHSH_BOUND


def vongher_run(source, n_pairs: int, rng: np.random.Generator) -> VongherRun:
    """Play one run of the ball protocol.

    source is a BallVariant, or the string "quantum" for a singlet
    source measured at the protocol angles.  Draw order: settings for
    both sides, then the source's own draws.
    """
    sa, sb = draw_vongher_settings(n_pairs, rng)
    if source == QUANTUM_SOURCE:
        a, b = quantum_ball_outcomes(sa, sb, rng)
    elif isinstance(source, BallVariant):
        table = generate_tennis_balls(n_pairs, source, rng)
        a, b = measure_balls(table, sa, sb)
    else:
        raise ValueError(f"source must be a BallVariant or {QUANTUM_SOURCE!r}")
    counters = vongher_counters_from_arrays(sa, sb, a, b)
    return VongherRun(counters, bell_counter_test(counters),
                      chsh_from_counters(counters))


def vongher_trials(source, n_pairs: int,
                   rng: np.random.Generator) -> list[PairedTrial]:
    """Same record a vongher_run scores, materialized as trials."""
    sa, sb = draw_vongher_settings(n_pairs, rng)
    if source == QUANTUM_SOURCE:
        a, b = quantum_ball_outcomes(sa, sb, rng)
    else:
        table = generate_tennis_balls(n_pairs, source, rng)
        a, b = measure_balls(table, sa, sb)
    return [PairedTrial(int(x), int(y), int(u), int(v))
            for x, y, u, v in zip(sa, sb, a, b)]


def vongher_campaign(source, runs: int, n_pairs: int, stream: RngStream,
                     threads: int | None = None) -> CampaignReport:
    """Many independent ball-protocol runs; rates for both verdicts."""

    def one(i: int) -> dict:
        rng = stream.child(i).generator()
        run = vongher_run(source, n_pairs, rng)
        return {"run": i,
                "n_e": list(run.counters.n_e),
                "n_u": list(run.counters.n_u),
                "bell_lhs": run.bell.lhs,
                "bell_rhs": run.bell.rhs,
                "bell_violated": run.bell_violated,
                "s_value": run.chsh.s_value,
                "chsh_violated": run.chsh_violated}

    per_run = run_indexed(one, runs, threads)
    bell = sum(1 for r in per_run if r["bell_violated"])
    chsh_v = sum(1 for r in per_run if r["chsh_violated"])
    return CampaignReport(runs=runs, chsh_violations=chsh_v,
                          per_run=tuple(per_run), bell_violations=bell)
