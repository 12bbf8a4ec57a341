"""Turning two local event streams into paired trials.

The same raw streams support many different pairings, and the resulting
statistics depend on the choice.  Three schemes are provided: systematic
offset pairing, random index pairing, and greedy time-window matching of
the kind coincidence circuits implement.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import NO_COUNT, PairedTrial, StationEvent

UNPAIRED_SETTING = -1  # setting label recorded for an absent partner


def pair_systematic(events_a: Sequence[StationEvent],
                    events_b: Sequence[StationEvent], k: int) -> list[PairedTrial]:
    """Pair stream slot i on side A with slot i + k - 1 on side B.

    k = 1 is the in-step pairing; larger k slides side B back by k - 1
    slots.  The output length is min(len(a), len(b) - k + 1), floored at
    zero.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = min(len(events_a), len(events_b) - (k - 1))
    out = []
    for i in range(max(n, 0)):
        ea = events_a[i]
        eb = events_b[i + k - 1]
        out.append(PairedTrial(ea.setting_label, eb.setting_label,
                               ea.outcome, eb.outcome))
    return out


def pair_random(events_a: Sequence[StationEvent],
                events_b: Sequence[StationEvent], m: int,
                rng: np.random.Generator) -> list[PairedTrial]:
    """Draw m index pairs (s, t) with replacement, uniform over s <= t.

    Both indices run over their own stream; the s <= t constraint keeps
    side B from being paired backwards in slot order.
    """
    na, nb = len(events_a), len(events_b)
    if na == 0 or nb == 0:
        raise ValueError("both streams must be non-empty")
    if m < 0:
        raise ValueError("m must be >= 0")
    ss = np.empty(m, dtype=np.int64)
    ts = np.empty(m, dtype=np.int64)
    have = 0
    while have < m:  # rejection keeps the law uniform on the constrained set
        draw = max(m - have, 16)
        s = rng.integers(0, na, size=draw)
        t = rng.integers(0, nb, size=draw)
        ok = s <= t
        take = min(int(ok.sum()), m - have)
        ss[have:have + take] = s[ok][:take]
        ts[have:have + take] = t[ok][:take]
        have += take
    out = []
    for s, t in zip(ss, ts):
        ea = events_a[int(s)]
        eb = events_b[int(t)]
        out.append(PairedTrial(ea.setting_label, eb.setting_label,
                               ea.outcome, eb.outcome))
    return out


def pair_time_window(events_a: Sequence[StationEvent],
                     events_b: Sequence[StationEvent],
                     width: float) -> list[PairedTrial]:
    """Greedy coincidence matching on window indices.

    Events are taken in time order; each side-A event grabs the earliest
    unmatched side-B event with |w_a - w_b| < width.  Events left over
    on either side still produce a trial, with the absent partner
    recorded as outcome 0 under setting label -1.  Trials come out
    ordered by the window index of their earliest member, side A first
    on ties.
    """
    if width <= 0:
        raise ValueError("width must be > 0")
    ea = sorted(events_a, key=lambda e: e.window_index)
    eb = sorted(events_b, key=lambda e: e.window_index)
    keyed = []  # (time, tiebreak, trial)
    j = 0
    nb = len(eb)
    matched_b = [False] * nb
    for a_ev in ea:
        while j < nb and eb[j].window_index <= a_ev.window_index - width:
            j += 1
        if j < nb and abs(eb[j].window_index - a_ev.window_index) < width:
            b_ev = eb[j]
            matched_b[j] = True
            j += 1
            t = PairedTrial(a_ev.setting_label, b_ev.setting_label,
                            a_ev.outcome, b_ev.outcome)
            keyed.append((min(a_ev.window_index, b_ev.window_index), 0, t))
        else:
            t = PairedTrial(a_ev.setting_label, UNPAIRED_SETTING,
                            a_ev.outcome, NO_COUNT)
            keyed.append((a_ev.window_index, 0, t))
    for j, b_ev in enumerate(eb):
        if not matched_b[j]:
            t = PairedTrial(UNPAIRED_SETTING, b_ev.setting_label,
                            NO_COUNT, b_ev.outcome)
            keyed.append((b_ev.window_index, 1, t))
    keyed.sort(key=lambda kt: (kt[0], kt[1]))
    return [t for _, _, t in keyed]


def covariance(trials: Sequence[PairedTrial], coincident_only: bool = True) -> float:
    """Population covariance of the two outcome columns.

    coincident_only drops trials where either side shows 0.  Needs at
    least two usable trials.
    """
    pool = [t for t in trials if t.coincident] if coincident_only else list(trials)
    if len(pool) < 2:
        raise ValueError("need at least 2 usable trials for a covariance")
    a = np.array([t.a for t in pool], dtype=float)
    b = np.array([t.b for t in pool], dtype=float)
    return float(np.mean(a * b) - a.mean() * b.mean())
