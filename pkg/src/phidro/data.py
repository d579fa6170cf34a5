"""Dataset ingestion: delimited tables, octamer sequences, synthetic problems.

Everything funnels into one immutable Dataset shape (dense float matrix,
plus/minus-one labels) so the loss and optimizer layers never care where
the data came from.  Loaders report what they dropped (missing values,
conflicting duplicates) in the dataset's ``meta`` mapping instead of
failing silently.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Dataset",
    "TableSchema",
    "ADULT_SCHEMA",
    "AMINO_ACIDS",
    "load_table",
    "encode_octamer",
    "load_hiv1",
    "train_test_split",
    "make_synthetic",
]

MISSING_MARKER = "?"

# the 20 standard amino acids in single-letter alphabetical order
AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"


@dataclass(frozen=True)
class Dataset:
    """Feature matrix ``x`` (samples by features) with labels ``y`` in {-1,+1}."""

    x: np.ndarray
    y: np.ndarray
    feature_names: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.x.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {self.x.shape}")
        if self.y.shape != (self.x.shape[0],):
            raise ValueError(
                f"label count {self.y.shape} does not match {self.x.shape[0]} rows"
            )
        bad = ~np.isin(self.y, (-1.0, 1.0))
        if np.any(bad):
            raise ValueError(f"labels must be -1 or +1, found {self.y[bad][:5]}")

    @property
    def n(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True)
class TableSchema:
    """Column layout of a headerless delimited text file.

    ``columns`` names every column in file order; ``label`` is the
    column holding the class, mapped to +1 when it equals
    ``positive_label`` and -1 otherwise.  Remaining columns must each be
    listed as categorical (one-hot encoded, categories ordered by first
    appearance) or numeric (parsed as floats); unlisted columns are
    ignored.
    """

    columns: tuple
    label: str
    positive_label: str
    categorical: tuple = ()
    numeric: tuple = ()

    def __post_init__(self) -> None:
        known = set(self.columns)
        for name in (self.label, *self.categorical, *self.numeric):
            if name not in known:
                raise ValueError(f"schema references unknown column {name!r}")
        if set(self.categorical) & set(self.numeric):
            raise ValueError("a column cannot be both categorical and numeric")
        if self.label in self.categorical or self.label in self.numeric:
            raise ValueError("label column cannot also be a feature column")


ADULT_SCHEMA = TableSchema(
    columns=(
        "age",
        "workclass",
        "fnlwgt",
        "education",
        "education_num",
        "marital_status",
        "occupation",
        "relationship",
        "race",
        "sex",
        "capital_gain",
        "capital_loss",
        "hours_per_week",
        "native_country",
        "income",
    ),
    label="income",
    positive_label=">50K",
    categorical=(
        "workclass",
        "education",
        "marital_status",
        "occupation",
        "relationship",
        "race",
        "sex",
        "native_country",
    ),
    numeric=(
        "age",
        "fnlwgt",
        "education_num",
        "capital_gain",
        "capital_loss",
        "hours_per_week",
    ),
)


def _read_rows(path) -> list:
    """Parsed rows as (line_number, fields); comma or whitespace delimited."""
    rows = []
    with open(path, newline="", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            if "," in line:
                fields = next(csv.reader([line], skipinitialspace=True))
                fields = [f.strip() for f in fields]
            else:
                fields = line.split()
            rows.append((lineno, fields))
    return rows


def load_table(path, schema: TableSchema) -> Dataset:
    """Load a delimited file into features and labels per the schema.

    Rows containing the missing marker in a used column are dropped and
    counted in ``meta['dropped_missing']``; rows with the wrong field
    count raise with their line number.  Label values other than the
    schema's positive label map to -1.
    """
    ncols = len(schema.columns)
    pos = {name: i for i, name in enumerate(schema.columns)}
    used = [schema.label, *schema.categorical, *schema.numeric]
    kept, dropped = [], 0

    for lineno, fields in _read_rows(path):
        if len(fields) != ncols:
            raise ValueError(
                f"{path}:{lineno}: expected {ncols} fields, got {len(fields)}"
            )
        if any(fields[pos[name]] == MISSING_MARKER for name in used):
            dropped += 1
            continue
        kept.append((lineno, fields))

    # categories in first-appearance order, one list per categorical column
    categories = {name: [] for name in schema.categorical}
    for _, fields in kept:
        for name in schema.categorical:
            value = fields[pos[name]]
            if value not in categories[name]:
                categories[name].append(value)

    names = []
    for name in schema.columns:
        if name in schema.numeric:
            names.append(name)
        elif name in schema.categorical:
            names.extend(f"{name}={value}" for value in categories[name])
    offsets = {}
    cursor = 0
    for name in schema.columns:
        if name in schema.numeric:
            offsets[name] = cursor
            cursor += 1
        elif name in schema.categorical:
            offsets[name] = cursor
            cursor += len(categories[name])

    x = np.zeros((len(kept), cursor))
    y = np.empty(len(kept))
    for r, (lineno, fields) in enumerate(kept):
        for name in schema.numeric:
            value = fields[pos[name]]
            try:
                x[r, offsets[name]] = float(value)
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: column {name!r} has non-numeric value {value!r}"
                ) from None
        for name in schema.categorical:
            slot = categories[name].index(fields[pos[name]])
            x[r, offsets[name] + slot] = 1.0
        y[r] = 1.0 if fields[pos[schema.label]] == schema.positive_label else -1.0

    return Dataset(
        x=x,
        y=y,
        feature_names=tuple(names),
        meta={"dropped_missing": dropped, "n_raw": len(kept) + dropped},
    )


def encode_octamer(sequence: str, alphabet: str = AMINO_ACIDS) -> np.ndarray:
    """Position-wise one-hot encoding of an 8-character peptide.

    The result has ``8 * len(alphabet)`` entries with exactly one 1 per
    position block, so distinct octamers differ in an even number of
    coordinates.
    """
    if len(sequence) != 8:
        raise ValueError(f"octamer must have 8 characters, got {len(sequence)}")
    width = len(alphabet)
    out = np.zeros(8 * width)
    for i, ch in enumerate(sequence):
        slot = alphabet.find(ch)
        if slot < 0:
            raise ValueError(f"position {i}: {ch!r} is not a valid amino acid code")
        out[width * i + slot] = 1.0
    return out


def load_hiv1(path, alphabet: str = AMINO_ACIDS) -> Dataset:
    """Load octamer cleavage data: lines of ``SEQUENCE,label`` with label ±1.

    Exact duplicate (sequence, label) pairs are merged into one sample;
    sequences appearing with both labels are dropped entirely.  The
    counts land in ``meta`` so they can be compared against published
    preprocessing.
    """
    seen: dict = {}
    order: list = []
    n_raw = 0
    for lineno, fields in _read_rows(path):
        if len(fields) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'octamer,label'")
        seq, token = fields
        if token in ("1", "+1"):
            label = 1.0
        elif token == "-1":
            label = -1.0
        else:
            raise ValueError(f"{path}:{lineno}: label must be 1 or -1, got {token!r}")
        n_raw += 1
        if seq not in seen:
            seen[seq] = {label}
            order.append(seq)
        else:
            seen[seq].add(label)

    kept = [seq for seq in order if len(seen[seq]) == 1]
    conflicts = len(order) - len(kept)
    x = np.stack([encode_octamer(seq, alphabet) for seq in kept]) if kept else np.zeros(
        (0, 8 * len(alphabet))
    )
    y = np.array([next(iter(seen[seq])) for seq in kept])
    return Dataset(
        x=x,
        y=y,
        feature_names=tuple(
            f"pos{i}={ch}" for i in range(8) for ch in alphabet
        ),
        meta={
            "n_raw": n_raw,
            "n_unique": len(order),
            "n_conflict_dropped": conflicts,
            "n_duplicate_merged": n_raw - len(order),
        },
    )


def train_test_split(data: Dataset, test_fraction: float, rng):
    """Uniform without-replacement split into (train, test) datasets."""
    if not (0.0 < test_fraction < 1.0):
        raise ValueError(f"test fraction must lie in (0, 1), got {test_fraction}")
    n = data.n
    n_test = int(round(test_fraction * n))
    if n_test == 0 or n_test == n:
        raise ValueError(
            f"fraction {test_fraction} leaves an empty split for {n} rows"
        )
    perm = rng.permutation(n)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    make = lambda idx: Dataset(
        x=data.x[idx], y=data.y[idx], feature_names=data.feature_names, meta=dict(data.meta)
    )
    return make(train_idx), make(test_idx)


def make_synthetic(
    n: int,
    d: int,
    separation: float,
    seed,
    label_noise: float = 0.0,
    scale: float = 1.0,
) -> Dataset:
    """Two Gaussian clouds with means at ``±separation`` along a random axis.

    Labels are exactly balanced (the extra sample goes to +1 when ``n``
    is odd) and rows are shuffled.  ``label_noise`` flips each label
    independently after the features are drawn, seeding the heavy-tailed
    loss values that make robust and average objectives diverge.
    ``scale`` multiplies the finished feature matrix; shrinking it
    lowers the gradient smoothness constant and with it the safe step
    size.
    """
    if n < 1 or d < 1:
        raise ValueError(f"need n, d >= 1, got n={n}, d={d}")
    if not (0.0 <= label_noise < 1.0):
        raise ValueError(f"label_noise must lie in [0, 1), got {label_noise}")
    if not (scale > 0.0):
        raise ValueError(f"scale must be positive, got {scale}")
    rng = np.random.default_rng(seed)
    u = rng.normal(size=d)
    u /= np.linalg.norm(u)
    y = np.concatenate([np.ones(n - n // 2), -np.ones(n // 2)])
    y = y[rng.permutation(n)]
    x = scale * (rng.normal(size=(n, d)) + separation * y[:, None] * u[None, :])
    if label_noise > 0.0:
        flips = rng.random(n) < label_noise
        y = np.where(flips, -y, y)
    return Dataset(x=x, y=y, meta={"separation": separation, "label_noise": label_noise})
