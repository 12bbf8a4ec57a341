"""Outcome generators.

Five families live here:

* ideal two-channel singlet sampling at fixed analyzer angles,
* the same source seen through analyzers whose orientations jitter
  around their nominal settings,
* counterfactual spreadsheets: n rows of four predetermined +-1 values
  (A, A', B, B'), one column per possible setting,
* "tennis ball" instruction sets carrying predetermined answer bits for
  each setting a station might choose,
* a contextual model with hidden variables in source and instruments and
  a detection threshold, which post-selection pushes past every
  spreadsheet bound.

All samplers draw from a caller-supplied numpy Generator and document
their draw order, so identical streams replay identical records.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import MINUS, NO_COUNT, PLUS, PairedTrial


# ---------------------------------------------------------------------------
# ideal singlet source

def singlet_prob(a: int, b: int, delta: float) -> float:
    """Joint probability of outcomes (a, b) at analyzer difference delta.

    This is the unique two-outcome law with uniform single-side marginals
    and correlation -cos(delta).
    """
    if a not in (PLUS, MINUS) or b not in (PLUS, MINUS):
        raise ValueError("singlet outcomes are +-1 only")
    return (1.0 - a * b * math.cos(delta)) / 4.0


def singlet_pairs(theta_a: float, theta_b: float, n: int,
                  rng: np.random.Generator):
    """Sample n outcome pairs at fixed angles; returns (a, b) int8 arrays.

    Draw order per batch: side-A signs first, then the agreement draws
    for side B.  P(b = -a) = (1 + cos(theta_a - theta_b)) / 2.
    """
    p_anti = (1.0 + math.cos(theta_a - theta_b)) / 2.0
    a = rng.choice(np.array([PLUS, MINUS], dtype=np.int8), size=n)
    flip = rng.random(n) < p_anti
    b = np.where(flip, -a, a).astype(np.int8)
    return a, b


def sample_singlet_pair(theta_a: float, theta_b: float,
                        rng: np.random.Generator) -> tuple[int, int]:
    a, b = singlet_pairs(theta_a, theta_b, 1, rng)
    return int(a[0]), int(b[0])


# ---------------------------------------------------------------------------
# smeared analyzers

JITTER_WEIGHTS = ("uniform", "truncated_gaussian")


@dataclass(frozen=True)
class AngleJitter:
    """Random analyzer orientation: nominal center, half-width, weight shape.

    half_width = 0 degenerates to a fixed analyzer.  For the truncated
    gaussian shape, sigma defaults to half the half-width.
    """

    center: float
    half_width: float = 0.0
    weight: str = "uniform"
    sigma: float | None = None

    def __post_init__(self):
        if self.half_width < 0:
            raise ValueError("half_width must be >= 0")
        if self.weight not in JITTER_WEIGHTS:
            raise ValueError(f"weight must be one of {JITTER_WEIGHTS}")

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.half_width == 0.0:
            return np.full(n, self.center)
        if self.weight == "uniform":
            return self.center + self.half_width * (2.0 * rng.random(n) - 1.0)
        sigma = self.sigma if self.sigma is not None else self.half_width / 2.0
        out = np.empty(n)
        todo = np.arange(n)
        while todo.size:  # rejection sample the truncation
            cand = rng.normal(0.0, sigma, todo.size)
            ok = np.abs(cand) <= self.half_width
            out[todo[ok]] = self.center + cand[ok]
            todo = todo[~ok]
        return out


def smeared_pairs(jitter_a: AngleJitter, jitter_b: AngleJitter, n: int,
                  rng: np.random.Generator):
    """Singlet pairs through jittered analyzers; returns (a, b) int8 arrays.

    Draw order: side-A orientations, side-B orientations, then the
    singlet draws at the realized per-pair differences.  With both
    half-widths zero this consumes the stream exactly like
    singlet_pairs, so the records coincide draw for draw.
    """
    if jitter_a.half_width == 0.0 and jitter_b.half_width == 0.0:
        return singlet_pairs(jitter_a.center, jitter_b.center, n, rng)
    ta = jitter_a.draw(n, rng)
    tb = jitter_b.draw(n, rng)
    p_anti = (1.0 + np.cos(ta - tb)) / 2.0
    a = rng.choice(np.array([PLUS, MINUS], dtype=np.int8), size=n)
    flip = rng.random(n) < p_anti
    b = np.where(flip, -a, a).astype(np.int8)
    return a, b


def sample_smeared_pair(jitter_a: AngleJitter, jitter_b: AngleJitter,
                        rng: np.random.Generator) -> tuple[int, int]:
    a, b = smeared_pairs(jitter_a, jitter_b, 1, rng)
    return int(a[0]), int(b[0])


# ---------------------------------------------------------------------------
# counterfactual spreadsheets

# all 16 joint instructions (A, A', B, B'), each entry +-1
ATOMS: tuple = tuple(itertools.product((PLUS, MINUS), repeat=4))


def row_combination(a, ap, b, bp):
    """A*B + A*B' + A'*B - A'*B', the quantity bounded by +-2 per row."""
    return a * b + a * bp + ap * b - ap * bp


@dataclass(frozen=True)
class InstructionDist:
    """Probability law over the 16 joint instructions."""

    probs: tuple

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (16,):
            raise ValueError("need exactly 16 probabilities, one per instruction")
        if (p < 0).any() or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("probabilities must be >= 0 and sum to 1")
        object.__setattr__(self, "probs", tuple(p / p.sum()))

    @classmethod
    def uniform(cls) -> "InstructionDist":
        return cls((1.0 / 16,) * 16)

    @classmethod
    def point_mass(cls, atom) -> "InstructionDist":
        atom = tuple(int(v) for v in atom)
        if atom not in ATOMS:
            raise ValueError(f"unknown instruction {atom!r}")
        return cls(tuple(1.0 if a == atom else 0.0 for a in ATOMS))

    @classmethod
    def from_mapping(cls, weights: dict) -> "InstructionDist":
        probs = [0.0] * 16
        for atom, w in weights.items():
            atom = tuple(int(v) for v in atom)
            if atom not in ATOMS:
                raise ValueError(f"unknown instruction {atom!r}")
            probs[ATOMS.index(atom)] += float(w)
        return cls(tuple(probs))

    @classmethod
    def positive_boundary(cls) -> "InstructionDist":
        """Uniform over the eight instructions whose row combination is +2."""
        plus2 = [a for a in ATOMS if row_combination(*a) == 2]
        return cls.from_mapping({a: 1.0 / len(plus2) for a in plus2})


@dataclass(frozen=True)
class Spreadsheet4:
    """n rows of predetermined outcomes, columns (A, A', B, B')."""

    rows: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.rows, dtype=np.int8)
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise ValueError("spreadsheet needs shape (n, 4)")
        if arr.size and not np.isin(arr, (PLUS, MINUS)).all():
            raise ValueError("spreadsheet entries must be +-1")
        object.__setattr__(self, "rows", arr)

    def __len__(self) -> int:
        return self.rows.shape[0]

    def row_combinations(self) -> np.ndarray:
        a, ap, b, bp = (self.rows[:, k].astype(np.int64) for k in range(4))
        return row_combination(a, ap, b, bp)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("a", "a_prime", "b", "b_prime"))
            w.writerows(self.rows.tolist())

    @classmethod
    def read_csv(cls, path) -> "Spreadsheet4":
        with open(path, newline="") as fh:
            rdr = csv.reader(fh)
            next(rdr)
            rows = [[int(v) for v in line] for line in rdr]
        return cls(np.array(rows, dtype=np.int8).reshape(-1, 4))


def generate_cfd_spreadsheet(n_rows: int, dist: InstructionDist,
                             rng: np.random.Generator) -> Spreadsheet4:
    """Draw n_rows independent instructions from dist."""
    if n_rows < 0:
        raise ValueError("n_rows must be >= 0")
    atoms = np.array(ATOMS, dtype=np.int8)
    idx = rng.choice(16, size=n_rows, p=np.asarray(dist.probs))
    return Spreadsheet4(atoms[idx])


# ---------------------------------------------------------------------------
# tennis-ball instruction sets

BALL_KINDS = ("strict", "missing_pairs", "partial_anticorr")

# station settings used with these balls: side A chooses 0 or 3,
# side B chooses 0 or 2, and the pair is summarized by d = |b - a|
SETTINGS_A = (0, 3)
SETTINGS_B = (0, 2)


@dataclass(frozen=True)
class BallVariant:
    """Preparation law for ball pairs.

    q is the probability that the d = 0 answers disagree (perfect
    anti-correlation at q = 1).  p_a3_flip and p_b2_flip set how often
    the auxiliary answers A3 and B2 disagree with B0, which fixes the
    d = 1, 2, 3 statistics.  p_drop removes a pair entirely: neither
    station registers a count.
    """

    kind: str
    q: float = 1.0
    p_a3_flip: float = 0.5
    p_b2_flip: float = 0.5
    p_drop: float = 0.0

    def __post_init__(self):
        if self.kind not in BALL_KINDS:
            raise ValueError(f"kind must be one of {BALL_KINDS}")
        for name in ("q", "p_a3_flip", "p_b2_flip", "p_drop"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


def strict() -> BallVariant:
    """Perfect anti-correlation at d = 0, fair independent answers elsewhere."""
    return BallVariant("strict", q=1.0, p_a3_flip=0.5, p_b2_flip=0.5, p_drop=0.0)


def missing_pairs(p_drop: float = 0.1) -> BallVariant:
    """Strict anti-correlation plus random whole-pair losses.

    A3 copies B0 here, which is what parks the run statistics right on
    the spreadsheet boundary once dropped pairs are excluded.
    """
    return BallVariant("missing_pairs", q=1.0, p_a3_flip=0.0, p_b2_flip=0.5,
                       p_drop=p_drop)


def partial_anticorr(q: float, p_a3_flip: float = 0.0075,
                     p_b2_flip: float = 1.0) -> BallVariant:
    """Imperfect d = 0 anti-correlation with strongly aligned side answers."""
    return BallVariant("partial_anticorr", q=q, p_a3_flip=p_a3_flip,
                       p_b2_flip=p_b2_flip, p_drop=0.0)


@dataclass(frozen=True)
class BallPair:
    """Answer bits for one prepared pair; bits are 0/1 as printed on the ball."""

    a0: int
    a3: int
    b0: int
    b2: int
    prepared: bool = True

    def __post_init__(self):
        for v in (self.a0, self.a3, self.b0, self.b2):
            if v not in (0, 1):
                raise ValueError("ball answers are bits")


@dataclass(frozen=True)
class BallTable:
    """Column store of generated ball pairs."""

    a0: np.ndarray
    a3: np.ndarray
    b0: np.ndarray
    b2: np.ndarray
    prepared: np.ndarray

    def __len__(self) -> int:
        return self.a0.shape[0]

    def __getitem__(self, i: int) -> BallPair:
        return BallPair(int(self.a0[i]), int(self.a3[i]), int(self.b0[i]),
                        int(self.b2[i]), bool(self.prepared[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("a0", "a3", "b0", "b2", "prepared"))
            for i in range(len(self)):
                w.writerow((int(self.a0[i]), int(self.a3[i]), int(self.b0[i]),
                            int(self.b2[i]), int(self.prepared[i])))


def generate_tennis_balls(n_pairs: int, variant: BallVariant,
                          rng: np.random.Generator) -> BallTable:
    """Draw n_pairs ball pairs under the variant's preparation law.

    Draw order: B0 bits, the d = 0 disagreement draws, the A3 draws, the
    B2 draws, then the drop draws.  Identical (q, flip) parameters give
    bit-identical tables on the same stream regardless of variant name.
    """
    if n_pairs < 0:
        raise ValueError("n_pairs must be >= 0")
    b0 = rng.integers(0, 2, size=n_pairs, dtype=np.int8)
    a0 = b0 ^ (rng.random(n_pairs) < variant.q)
    a3 = b0 ^ (rng.random(n_pairs) < variant.p_a3_flip)
    b2 = b0 ^ (rng.random(n_pairs) < variant.p_b2_flip)
    prepared = rng.random(n_pairs) >= variant.p_drop
    return BallTable(a0.astype(np.int8), a3.astype(np.int8), b0,
                     b2.astype(np.int8), prepared)


# ---------------------------------------------------------------------------
# contextual detection-threshold model

RESPONSES = ("threshold_detection", "constant_plus")


@dataclass(frozen=True)
class ContextualParams:
    """Hidden-variable model with instrument noise and a detection threshold.

    A shared source phase phi is read through each analyzer as
    cos 2(phi - theta); the reading's sign is the outcome, but it only
    registers when its magnitude clears tau0 * lambda**gamma, where
    lambda is that instrument's private uniform noise for the trial.
    Side B reports the flipped sign, so aligned analyzers that both fire
    are perfectly anti-correlated.

    angles_a / angles_b map integer setting labels to analyzer angles.
    """

    gamma: float = 0.5
    tau0: float = 1.0
    angles_a: tuple = (0.0, math.pi / 4)
    angles_b: tuple = (-3 * math.pi / 8, 3 * math.pi / 8)
    response: str = "threshold_detection"

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")
        if self.tau0 < 0:
            raise ValueError("tau0 must be >= 0")
        if self.response not in RESPONSES:
            raise ValueError(f"response must be one of {RESPONSES}")
        object.__setattr__(self, "angles_a", tuple(float(t) for t in self.angles_a))
        object.__setattr__(self, "angles_b", tuple(float(t) for t in self.angles_b))


def contextual_batch(x: int, y: int, n: int, params: ContextualParams,
                     rng: np.random.Generator):
    """n trials at setting labels (x, y); returns (a, b) int8 arrays.

    Draw order per batch: source phases phi, side-A instrument noise,
    side-B instrument noise.  The side-A record is a function of
    (phi, lambda_a, x) alone, so replaying the stream with a different y
    reproduces it bit for bit.
    """
    theta_x = params.angles_a[x]
    theta_y = params.angles_b[y]
    if params.response == "constant_plus":
        one = np.ones(n, dtype=np.int8)
        return one, one.copy()
    phi = rng.random(n) * 2.0 * np.pi
    lam_a = rng.random(n)
    lam_b = rng.random(n)
    ca = np.cos(2.0 * (phi - theta_x))
    cb = np.cos(2.0 * (phi - theta_y))
    a = np.where(np.abs(ca) >= params.tau0 * lam_a ** params.gamma,
                 np.sign(ca), 0.0).astype(np.int8)
    b = np.where(np.abs(cb) >= params.tau0 * lam_b ** params.gamma,
                 -np.sign(cb), 0.0).astype(np.int8)
    return a, b


def contextual_trial(x: int, y: int, params: ContextualParams,
                     rng: np.random.Generator) -> PairedTrial:
    a, b = contextual_batch(x, y, 1, params, rng)
    return PairedTrial(x, y, int(a[0]), int(b[0]))
