"""Shared vocabulary for the lab: ternary outcomes, station events, paired
trials, reproducible random streams, and count tables.

Outcomes are +1 and -1 for the two analyzer exits and 0 for "no count"
(undetected, or an unpaired partner slot).  Everything downstream speaks
this encoding.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

PLUS = 1
MINUS = -1
NO_COUNT = 0
OUTCOMES = (PLUS, MINUS, NO_COUNT)

TWO_PI = 2.0 * np.pi

THREADS_ENV = "BELL_LAB_THREADS"


def check_outcome(value) -> int:
    """Validate a single ternary outcome, returning it as a plain int."""
    v = int(value)
    if v not in OUTCOMES or v != value:
        raise ValueError(f"outcome must be one of {OUTCOMES}, got {value!r}")
    return v


def check_outcomes(values) -> np.ndarray:
    """Validate an array of outcomes in one pass."""
    arr = np.asarray(values)
    if arr.size and not np.isin(arr, OUTCOMES).all():
        bad = arr[~np.isin(arr, OUTCOMES)][0]
        raise ValueError(f"outcome must be one of {OUTCOMES}, got {bad!r}")
    return arr.astype(np.int8)


def wrap_angle(theta: float) -> float:
    """Reduce an angle to the canonical interval [0, 2*pi)."""
    w = float(np.mod(theta, TWO_PI))
    # tiny negative inputs round up to the modulus itself
    return 0.0 if w >= TWO_PI else w


@dataclass(frozen=True)
class StationEvent:
    """One local detection slot: time-window index, setting label, outcome."""

    window_index: int
    setting_label: int
    outcome: int

    def __post_init__(self):
        check_outcome(self.outcome)


@dataclass(frozen=True)
class PairedTrial:
    """A matched pair of station events, one from each side."""

    setting_a: int
    setting_b: int
    a: int
    b: int

    def __post_init__(self):
        check_outcome(self.a)
        check_outcome(self.b)

    @property
    def coincident(self) -> bool:
        """True when both sides actually fired."""
        return self.a != NO_COUNT and self.b != NO_COUNT


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible random stream.

    (seed, stream) fully determines the sequence.  Distinct stream keys on
    the same seed give statistically independent generators, and child
    streams extend the key, so a campaign can hand every run its own
    stream without any shared mutable state.
    """

    seed: int
    stream: tuple = ()

    def __post_init__(self):
        key = (self.stream,) if isinstance(self.stream, int) else tuple(self.stream)
        object.__setattr__(self, "stream", tuple(int(k) for k in key))

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.stream)
        return np.random.default_rng(seq)

    def child(self, index: int) -> "RngStream":
        return RngStream(self.seed, self.stream + (int(index),))


def thread_count(requested: int | None = None) -> int:
    """Worker count for campaigns; the BELL_LAB_THREADS env var caps it."""
    n = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get(THREADS_ENV)
    if cap is not None:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def run_indexed(fn: Callable[[int], object], count: int, threads: int | None = None) -> list:
    """Evaluate fn(0..count-1), possibly on a thread pool, results in index order."""
    workers = thread_count(threads)
    if workers == 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


def tabulate(trials: Iterable[PairedTrial],
             settings_a: Sequence[int] | None = None,
             settings_b: Sequence[int] | None = None) -> dict:
    """Count table over (setting_a, setting_b, a, b).

    The key grid is the cross product of observed (or supplied) setting
    labels with the nine outcome pairs; cells never seen count as zero,
    so every admissible key is present and the values sum to the number
    of trials.
    """
    trials = list(trials)
    sa = set(settings_a) if settings_a is not None else {t.setting_a for t in trials}
    sb = set(settings_b) if settings_b is not None else {t.setting_b for t in trials}
    table = {(x, y, a, b): 0
             for x in sorted(sa) for y in sorted(sb)
             for a in OUTCOMES for b in OUTCOMES}
    for t in trials:
        key = (t.setting_a, t.setting_b, t.a, t.b)
        if key not in table:
            raise ValueError(f"trial setting pair {key[:2]} outside the declared grid")
        table[key] += 1
    return table


EVENT_FIELDS = ("window_index", "setting_label", "outcome")
TRIAL_FIELDS = ("setting_a", "setting_b", "a", "b")


def write_events(path, events: Iterable[StationEvent]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(EVENT_FIELDS)
        for e in events:
            w.writerow((e.window_index, e.setting_label, e.outcome))


def read_events(path) -> list[StationEvent]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(StationEvent(int(row["window_index"]),
                                    int(row["setting_label"]),
                                    int(row["outcome"])))
    return out


def write_trials(path, trials: Iterable[PairedTrial]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRIAL_FIELDS)
        for t in trials:
            w.writerow((t.setting_a, t.setting_b, t.a, t.b))


def read_trials(path) -> list[PairedTrial]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(PairedTrial(int(row["setting_a"]), int(row["setting_b"]),
                                   int(row["a"]), int(row["b"])))
    return out


def trials_to_arrays(trials: Sequence[PairedTrial]):
    """Columns (setting_a, setting_b, a, b) as numpy arrays."""
    n = len(trials)
    sa = np.empty(n, dtype=np.int64)
    sb = np.empty(n, dtype=np.int64)
    a = np.empty(n, dtype=np.int8)
    b = np.empty(n, dtype=np.int8)
    for i, t in enumerate(trials):
        sa[i] = t.setting_a
        sb[i] = t.setting_b
        a[i] = t.a
        b[i] = t.b
    return sa, sb, a, b


def arrays_to_trials(setting_a, setting_b, a, b) -> list[PairedTrial]:
    return [PairedTrial(int(x), int(y), int(u), int(v))
            for x, y, u, v in zip(setting_a, setting_b, a, b)]
