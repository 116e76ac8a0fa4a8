"""Accuracy and discrimination measures normalized by the acceptance rate.

All measures are computed from a :class:`GroupedTally`, the sufficient
statistic of a decision vector: group sizes, acceptances per group, correct
decisions, and true positives.  Rates are formed in exact rational
arithmetic (``fractions.Fraction``) from the integer counts and converted
to float only at the end, so tie and bound checks are deterministic.

Conventions:
  * group 1 is the favored group (w), group 0 the protected group (b)
  * label / decision 1 is the positive (accept) outcome
  * raw discrimination  d  = p(+|w) - p(+|b)
  * maximum discrimination at acceptance rate pi and favored share alpha:
        d_max = min(pi / alpha, (1 - pi) / (1 - alpha))
    reached when the favored group has complete priority in the queue
  * normalized discrimination  delta = d / d_max  (0 when d_max = 0)
  * normalized accuracy is Cohen's kappa against the rate-matched random
    classifier:  kappa = (A - R) / (1 - R)  with  R = pi0*pi + (1-pi0)*(1-pi)
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegenerateGroupError, DegenerateLabelsError

__all__ = [
    "GroupedTally",
    "MetricBundle",
    "tally",
    "accuracy",
    "discrimination",
    "max_discrimination",
    "normalized_discrimination",
    "random_accuracy",
    "cohens_kappa",
    "evaluate",
]


@dataclass(frozen=True)
class GroupedTally:
    """Counts of individuals, acceptances and correct decisions by group."""

    n_favored: int
    n_protected: int
    accepted_favored: int
    accepted_protected: int
    correct: int
    positives_true: int

    def __post_init__(self):
        if self.n_favored < 0 or self.n_protected < 0:
            raise ValueError("negative group size")
        if self.n_favored + self.n_protected < 1:
            raise ValueError("empty tally")
        if not 0 <= self.accepted_favored <= self.n_favored:
            raise ValueError("accepted_favored out of range")
        if not 0 <= self.accepted_protected <= self.n_protected:
            raise ValueError("accepted_protected out of range")
        if not 0 <= self.correct <= self.n:
            raise ValueError("correct count out of range")
        if not 0 <= self.positives_true <= self.n:
            raise ValueError("positives_true out of range")

    @property
    def n(self) -> int:
        return self.n_favored + self.n_protected

    @property
    def accepted(self) -> int:
        return self.accepted_favored + self.accepted_protected

    @property
    def alpha(self) -> Fraction:
        """Share of favored individuals, p(w)."""
        return Fraction(self.n_favored, self.n)

    @property
    def pi(self) -> Fraction:
        """Acceptance rate of the decisions, p_f(+)."""
        return Fraction(self.accepted, self.n)

    @property
    def pi0(self) -> Fraction:
        """Positive rate of the true labels, p(+)."""
        return Fraction(self.positives_true, self.n)


@dataclass(frozen=True)
class MetricBundle:
    """All measures of one decision vector against one dataset."""

    pi: float
    accuracy: float
    random_accuracy: float
    kappa: float
    d: float
    d_max: float
    delta: float


def _as_binary(vec, name: str) -> np.ndarray:
    arr = np.asarray(vec)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size < 1:
        raise ValueError(f"{name} is empty")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0 and 1")
    return arr.astype(np.int64)


def tally(labels, decisions, groups) -> GroupedTally:
    """Count a decision vector against labels, split by group membership."""
    y = _as_binary(labels, "labels")
    yhat = _as_binary(decisions, "decisions")
    g = _as_binary(groups, "groups")
    if not (y.size == yhat.size == g.size):
        raise ValueError(
            f"length mismatch: labels={y.size}, decisions={yhat.size}, groups={g.size}"
        )
    favored = g == 1
    return GroupedTally(
        n_favored=int(favored.sum()),
        n_protected=int((~favored).sum()),
        accepted_favored=int(yhat[favored].sum()),
        accepted_protected=int(yhat[~favored].sum()),
        correct=int((y == yhat).sum()),
        positives_true=int(y.sum()),
    )


def accuracy(t: GroupedTally):
    """Fraction of decisions equal to the true label."""
    return Fraction(t.correct, t.n)


def discrimination(t: GroupedTally):
    """Raw discrimination d = p(+|w) - p(+|b)."""
    if t.n_favored < 1 or t.n_protected < 1:
        raise DegenerateGroupError("both groups must be non-empty to measure discrimination")
    return Fraction(t.accepted_favored, t.n_favored) - Fraction(
        t.accepted_protected, t.n_protected
    )


def max_discrimination(pi, alpha):
    """Largest achievable d at acceptance rate pi and favored share alpha.

    Equals min(pi/alpha, (1-pi)/(1-alpha)): complete priority for the
    favored group either exhausts the acceptances (first ratio) or the
    rejections (second ratio).  Zero exactly when pi is 0 or 1.
    """
    if not 0 < alpha < 1:
        raise DegenerateGroupError(f"alpha must be in (0, 1), got {alpha}")
    if not 0 <= pi <= 1:
        raise ValueError(f"pi must be in [0, 1], got {pi}")
    return min(pi / alpha, (1 - pi) / (1 - alpha))


def normalized_discrimination(d, d_max):
    """d divided by the maximum possible discrimination; 0 when d_max is 0.

    1 means complete priority for the favored group, 0 a fully mixed
    queue, negative values reverse discrimination.  At d_max = 0 (nobody
    or everybody accepted) d is necessarily 0 and the measure is defined
    as 0.
    """
    if d_max < 0:
        raise ValueError(f"d_max must be non-negative, got {d_max}")
    if d_max == 0:
        return 0 * d  # preserves Fraction/float type
    return d / d_max


def random_accuracy(pi0, pi):
    """Accuracy R = pi0*pi + (1-pi0)*(1-pi) of rate-pi random decisions."""
    if not 0 <= pi0 <= 1:
        raise ValueError(f"pi0 must be in [0, 1], got {pi0}")
    if not 0 <= pi <= 1:
        raise ValueError(f"pi must be in [0, 1], got {pi}")
    return pi0 * pi + (1 - pi0) * (1 - pi)


def cohens_kappa(a, r):
    """Accuracy normalized against the random baseline: (A - R) / (1 - R)."""
    if r == 1:
        raise DegenerateLabelsError("random accuracy is 1; kappa undefined")
    return (a - r) / (1 - r)


def evaluate(labels, decisions, groups) -> MetricBundle:
    """Compute the full metric bundle for one decision vector.

    pi0 and alpha are taken from the same label/group vectors, so a
    perfect prediction reproduces the dataset's own d and delta with
    kappa = 1.
    """
    t = tally(labels, decisions, groups)
    return evaluate_tally(t)


def evaluate_tally(t: GroupedTally) -> MetricBundle:
    """Metric bundle from an existing tally (exact rational arithmetic)."""
    a = accuracy(t)
    d = discrimination(t)
    d_max = max_discrimination(t.pi, t.alpha)
    delta = normalized_discrimination(d, d_max)
    r = random_accuracy(t.pi0, t.pi)
    kappa = cohens_kappa(a, r)
    return MetricBundle(
        pi=float(t.pi),
        accuracy=float(a),
        random_accuracy=float(r),
        kappa=float(kappa),
        d=float(d),
        d_max=float(d_max),
        delta=float(delta),
    )
