"""Loading, encoding, splitting and synthesizing datasets with a protected group.

A dataset is a numeric feature matrix plus two binary vectors: labels
(positive outcome = 1) and groups (favored = 1).  Which raw value maps to
1 is fixed at ingestion by the :class:`Schema`; nothing downstream ever
re-infers which group is favored.
"""

from __future__ import annotations

import csv
import hashlib
import json
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from . import metrics
from .errors import (
    DataFormatError,
    DegenerateGroupError,
    DegenerateLabelsError,
    InfeasibleError,
)

__all__ = [
    "RawTable",
    "Schema",
    "Dataset",
    "DatasetSummary",
    "NumericStats",
    "Manifest",
    "load_csv",
    "encode",
    "standardize",
    "split",
    "summarize",
    "synthesize",
]

MISSING_MARKER = "?"


@dataclass(frozen=True)
class Schema:
    """Column roles and value mappings for ingestion."""

    label_col: str
    positive_value: str
    group_col: str
    favored_value: str
    missing_policy: str = "drop"  # "drop" or "keep"


@dataclass(frozen=True)
class RawTable:
    """Rectangular table of string cells with named columns."""

    columns: tuple
    rows: list

    @property
    def n(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]


@dataclass(frozen=True)
class Dataset:
    """Encoded feature matrix with binary labels and group membership."""

    features: np.ndarray  # (n, m) float64
    labels: np.ndarray  # (n,) int, positive = 1
    groups: np.ndarray  # (n,) int, favored = 1
    feature_names: tuple
    numeric_mask: np.ndarray  # (m,) bool, True for standardizable columns

    def __post_init__(self):
        n = self.labels.shape[0]
        if self.features.shape != (n, len(self.feature_names)):
            raise ValueError("features shape inconsistent with labels/feature_names")
        if self.groups.shape != (n,):
            raise ValueError("groups length inconsistent with labels")
        if self.numeric_mask.shape != (len(self.feature_names),):
            raise ValueError("numeric_mask length inconsistent with feature_names")

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    @property
    def m(self) -> int:
        return self.features.shape[1]

    def take(self, indices) -> "Dataset":
        idx = np.asarray(indices)
        return replace(
            self,
            features=self.features[idx],
            labels=self.labels[idx],
            groups=self.groups[idx],
        )


@dataclass(frozen=True)
class DatasetSummary:
    """Size and base rates of a dataset, including its own discrimination."""

    n: int
    alpha: float
    pi0: float
    d0: float
    delta0: float


@dataclass(frozen=True)
class NumericStats:
    """Per-column mean and scale used to standardize numeric features."""

    mean: np.ndarray
    scale: np.ndarray


def load_csv(path, schema: Schema) -> RawTable:
    """Parse a CSV file with a header row into a RawTable.

    Cells are whitespace-stripped.  Rows containing the missing marker
    ``?`` are dropped when the schema's missing_policy is "drop".
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        columns = tuple(c.strip() for c in header)
        if len(set(columns)) != len(columns):
            raise DataFormatError(f"{path}: duplicate column names")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            cells = [c.strip() for c in row]
            if len(cells) != len(columns):
                raise DataFormatError(
                    f"{path}:{lineno}: expected {len(columns)} cells, got {len(cells)}"
                )
            if schema.missing_policy == "drop" and MISSING_MARKER in cells:
                continue
            rows.append(cells)
    for col in (schema.label_col, schema.group_col):
        if col not in columns:
            raise DataFormatError(f"{path}: column {col!r} not in header")
    return RawTable(columns=columns, rows=rows)


def _is_numeric(values) -> bool:
    try:
        for v in values:
            float(v)
    except ValueError:
        return False
    return True


def _map_binary(values, one_value, colname, kind):
    distinct = sorted(set(values))
    if len(distinct) < 2:
        if kind == "group":
            raise DegenerateGroupError(
                f"column {colname!r} has a single value {distinct[0]!r}"
            )
        raise DegenerateLabelsError(
            f"column {colname!r} has a single value {distinct[0]!r}"
        )
    if len(distinct) > 2:
        raise DataFormatError(
            f"column {colname!r} is not binary: {len(distinct)} distinct values"
        )
    if one_value not in distinct:
        raise DataFormatError(
            f"value {one_value!r} does not occur in column {colname!r} "
            f"(values: {distinct})"
        )
    return np.array([1 if v == one_value else 0 for v in values], dtype=np.int64)


def encode(raw: RawTable, schema: Schema, with_s: bool = False) -> Dataset:
    """Encode a raw table: one-hot categoricals, numerics passed through.

    The protected column is excluded from the features unless ``with_s``
    is set, in which case it contributes exactly one extra binary column.
    Numeric columns are standardized separately via :func:`standardize`
    so that the statistics can come from a training split only.
    """
    if raw.n < 1:
        raise DataFormatError("table has no data rows")
    labels = _map_binary(raw.column(schema.label_col), schema.positive_value,
                         schema.label_col, "label")
    groups = _map_binary(raw.column(schema.group_col), schema.favored_value,
                         schema.group_col, "group")

    names, cols, numeric = [], [], []
    for col in raw.columns:
        if col == schema.label_col:
            continue
        if col == schema.group_col:
            if with_s:
                names.append(f"{col}={schema.favored_value}")
                cols.append(groups.astype(np.float64))
                numeric.append(False)
            continue
        values = raw.column(col)
        if _is_numeric(values):
            names.append(col)
            cols.append(np.array([float(v) for v in values]))
            numeric.append(True)
        else:
            for level in sorted(set(values)):
                names.append(f"{col}={level}")
                cols.append(np.array([1.0 if v == level else 0.0 for v in values]))
                numeric.append(False)

    features = np.column_stack(cols) if cols else np.zeros((raw.n, 0))
    return Dataset(
        features=features,
        labels=labels,
        groups=groups,
        feature_names=tuple(names),
        numeric_mask=np.array(numeric, dtype=bool),
    )


def standardize(ds: Dataset, stats: NumericStats | None = None):
    """Standardize numeric feature columns to zero mean, unit variance.

    When ``stats`` is None the statistics are computed from ``ds`` itself;
    pass the stats returned for a training split to transform a test split
    with the same parameters.  Zero-variance columns are kept, standardized
    to all zeros, with a warning.

    Returns ``(dataset, stats)``.
    """
    cols = np.flatnonzero(ds.numeric_mask)
    if stats is None:
        sub = ds.features[:, cols]
        mean = sub.mean(axis=0) if cols.size else np.zeros(0)
        scale = sub.std(axis=0) if cols.size else np.zeros(0)
        flat = scale == 0
        if flat.any():
            flat_names = [ds.feature_names[cols[i]] for i in np.flatnonzero(flat)]
            warnings.warn(f"zero-variance numeric columns standardized to 0: {flat_names}")
            scale = np.where(flat, 1.0, scale)
        stats = NumericStats(mean=mean, scale=scale)
    if stats.mean.shape[0] != cols.size:
        raise ValueError("stats do not match the dataset's numeric columns")
    features = ds.features.copy()
    features[:, cols] = (features[:, cols] - stats.mean) / stats.scale
    return replace(ds, features=features), stats


def split(ds: Dataset, fraction: float, seed: int):
    """Random row split into (first, second) parts, reproducible per seed."""
    if not 0 < fraction < 1:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    n_first = int(np.floor(fraction * ds.n + 0.5))
    if n_first == 0 or n_first == ds.n:
        raise ValueError(f"split fraction {fraction} leaves an empty side for n={ds.n}")
    perm = np.random.default_rng(seed).permutation(ds.n)
    return ds.take(np.sort(perm[:n_first])), ds.take(np.sort(perm[n_first:]))


def summarize(ds: Dataset) -> DatasetSummary:
    """Base rates of a dataset; d0/delta0 via the oracle identity.

    Evaluating the labels against themselves gives kappa = 1 and the
    dataset's own discrimination, so the summary is consistent with the
    metrics module by construction.
    """
    bundle = metrics.evaluate(ds.labels, ds.labels, ds.groups)
    t = metrics.tally(ds.labels, ds.labels, ds.groups)
    return DatasetSummary(
        n=ds.n,
        alpha=float(t.alpha),
        pi0=bundle.pi,
        d0=bundle.d,
        delta0=bundle.delta,
    )


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def synthesize(n: int, alpha: float, pi0: float, d0: float, seed: int) -> Dataset:
    """Generate a dataset hitting the requested (alpha, pi0, d0) as closely
    as integer counts allow.

    Group-conditional positive rates follow from the targets:
        p(+|w) = pi0 + (1 - alpha) * d0,   p(+|b) = pi0 - alpha * d0,
    both of which must lie in [0, 1].  Counts are rounded half-up, with a
    small local search over the favored-group size and its positive count
    so that alpha, pi0 and d0 are each reproduced within about 1/n.

    Features (4 columns, all numeric):
        signal_a ~ Normal(1.2*label + 0.8*group, 1)
        signal_b ~ Normal(0.9*label - 0.5*group, 1)
        noise_a, noise_b ~ Normal(0, 1)
    The signal columns depend on the group, so classifiers trained without
    the group column can still pick it up indirectly.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0 < alpha < 1:
        raise DegenerateGroupError(f"alpha must be in (0, 1), got {alpha}")
    p_w = pi0 + (1 - alpha) * d0
    p_b = pi0 - alpha * d0
    if not (0 <= p_w <= 1 and 0 <= p_b <= 1):
        raise InfeasibleError(
            f"targets require p(+|w)={p_w:.4f}, p(+|b)={p_b:.4f}; both must be in [0, 1]"
        )

    pos_total = min(max(_round_half_up(pi0 * n), 0), n)
    best = None
    for k_f in (0, -1, 1):
        n_f = _round_half_up(alpha * n) + k_f
        if not 1 <= n_f <= n - 1:
            continue
        n_p = n - n_f
        for k_pos in (0, -1, 1):
            pos_f = _round_half_up(p_w * n_f) + k_pos
            pos_p = pos_total - pos_f
            if not (0 <= pos_f <= n_f and 0 <= pos_p <= n_p):
                continue
            d_hat = Fraction(pos_f, n_f) - Fraction(pos_p, n_p)
            err = max(
                abs(Fraction(n_f, n) - Fraction(alpha)),
                abs(Fraction(pos_total, n) - Fraction(pi0)),
                abs(d_hat - Fraction(d0)),
            )
            if best is None or err < best[0]:
                best = (err, n_f, pos_f)
    if best is None:
        raise InfeasibleError(
            f"no integer counts realize alpha={alpha}, pi0={pi0}, d0={d0} at n={n}"
        )
    _, n_f, pos_f = best
    n_p, pos_p = n - n_f, pos_total - pos_f

    groups = np.concatenate([np.ones(n_f, dtype=np.int64), np.zeros(n_p, dtype=np.int64)])
    labels = np.zeros(n, dtype=np.int64)
    labels[:pos_f] = 1
    labels[n_f : n_f + pos_p] = 1

    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    groups, labels = groups[order], labels[order]
    y, g = labels.astype(np.float64), groups.astype(np.float64)
    features = np.column_stack(
        [
            rng.normal(1.2 * y + 0.8 * g, 1.0),
            rng.normal(0.9 * y - 0.5 * g, 1.0),
            rng.normal(0.0, 1.0, size=n),
            rng.normal(0.0, 1.0, size=n),
        ]
    )
    return Dataset(
        features=features,
        labels=labels,
        groups=groups,
        feature_names=("signal_a", "signal_b", "noise_a", "noise_b"),
        numeric_mask=np.ones(4, dtype=bool),
    )


@dataclass(frozen=True)
class Manifest:
    """Record of every ingestion choice, emitted next to all outputs.

    Two runs are comparable only if their manifests hash identically.
    """

    source: str = ""
    source_sha256: str = ""
    label_col: str = ""
    positive_value: str = ""
    group_col: str = ""
    favored_value: str = ""
    missing_policy: str = "drop"
    with_s: bool = False
    standardization: str = "train-stats"
    seed: int = 42
    split_fraction: float = 0.5
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = dict(self.__dict__)
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def hash(self) -> str:
        payload = dict(self.__dict__)
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @staticmethod
    def read(path) -> "Manifest":
        with open(path) as fh:
            payload = json.load(fh)
        return Manifest(**payload)


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
