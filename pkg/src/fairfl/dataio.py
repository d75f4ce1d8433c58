"""Tabular data loading, preprocessing, splitting, and silo partitioning.

CSV files need a header row (UTF-8, comma separated). A schema file assigns
every column a role::

    age = partition_attribute
    workclass = feature_categorical
    hours_per_week = feature_numeric
    sex = sensitive
    income = label
    row_id = drop

Roles: ``feature_numeric``, ``feature_categorical``, ``label``, ``sensitive``,
``partition_attribute`` (a numeric feature whose raw values additionally drive
silo stratification), ``drop``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

VALID_ROLES = {
    "feature_numeric",
    "feature_categorical",
    "label",
    "sensitive",
    "partition_attribute",
    "drop",
}


@dataclass
class TabularDataset:
    """Rows of (features, label, sensitive attribute) with encoding metadata.

    ``features`` is (n, d) float; ``labels`` in [0, l); ``sensitive`` in [0, k).
    ``partition_values`` keeps the raw stratification attribute per row and
    ``numeric_cols`` the feature columns eligible for standardization.
    """

    features: np.ndarray
    labels: np.ndarray
    sensitive: np.ndarray
    k: int
    l: int
    partition_values: np.ndarray | None = None
    numeric_cols: np.ndarray | None = None
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        self.sensitive = np.asarray(self.sensitive, dtype=int)
        if self.features.ndim != 2 or self.features.shape[0] == 0:
            raise ValueError("feature matrix must be (n, d) with n >= 1")
        n = self.features.shape[0]
        if self.labels.shape != (n,) or self.sensitive.shape != (n,):
            raise ValueError("labels/sensitive must align with the feature rows")
        if not np.isfinite(self.features).all():
            raise ValueError("non-finite feature entries")
        if self.labels.min() < 0 or self.labels.max() >= self.l:
            raise ValueError(f"label index outside [0, {self.l})")
        if self.sensitive.min() < 0 or self.sensitive.max() >= self.k:
            raise ValueError(f"sensitive index outside [0, {self.k})")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, idx: np.ndarray) -> "TabularDataset":
        idx = np.asarray(idx)
        return replace(
            self,
            features=self.features[idx],
            labels=self.labels[idx],
            sensitive=self.sensitive[idx],
            partition_values=None if self.partition_values is None else self.partition_values[idx],
        )


@dataclass
class SiloPartition:
    """Disjoint row-index sets, one per silo, covering the whole dataset."""

    assignments: list[np.ndarray]
    silo_size: int

    def __post_init__(self):
        self.assignments = [np.asarray(a, dtype=int) for a in self.assignments]
        merged = np.concatenate(self.assignments) if self.assignments else np.array([], dtype=int)
        if len(np.unique(merged)) != merged.size:
            raise ValueError("silo assignments overlap")

    @property
    def n_silos(self) -> int:
        return len(self.assignments)


@dataclass
class SensitiveDistribution:
    """Empirical sensitive-attribute distribution and its inverse-sqrt diagonal."""

    probs: np.ndarray
    inv_sqrt: np.ndarray
    rho: float

    @property
    def inv_sqrt_diag(self) -> np.ndarray:
        """The diagonal of inv_sqrt as a vector."""
        return np.diagonal(self.inv_sqrt)


def read_schema(path) -> dict[str, str]:
    """Parse a ``column = role`` schema file."""
    schema: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'column = role'")
            col, role = (part.strip() for part in line.split("=", 1))
            schema[col] = role
    return schema


def _validate_schema(schema: dict[str, str]) -> None:
    for col, role in schema.items():
        if role not in VALID_ROLES:
            raise ValueError(f"column {col!r} has unknown role {role!r}")
    for unique_role in ("label", "sensitive"):
        count = sum(1 for r in schema.values() if r == unique_role)
        if count != 1:
            raise ValueError(f"schema must name exactly one {unique_role} column, found {count}")
    if sum(1 for r in schema.values() if r == "partition_attribute") > 1:
        raise ValueError("schema may name at most one partition_attribute column")


def _encode_categorical(series: pd.Series) -> np.ndarray:
    """Codes 0..m-1 in sorted value order (deterministic across runs)."""
    values = np.sort(series.unique())
    lookup = {v: i for i, v in enumerate(values)}
    return series.map(lookup).to_numpy(dtype=int), len(values)


def load_csv(path, schema) -> TabularDataset:
    """Load a CSV per its schema (a role dict or the path of a schema file).

    Categoricals become full one-hot blocks; rows with missing values are
    dropped. Numeric features are left on their original scale here;
    ``train_test_split`` standardizes them using training-row statistics only.
    """
    if not isinstance(schema, dict):
        schema = read_schema(schema)
    _validate_schema(schema)

    df = pd.read_csv(path)
    missing = [c for c in schema if c not in df.columns]
    if missing:
        raise ValueError(f"schema names columns absent from {path}: {missing}")
    unmapped = [c for c in df.columns if c not in schema]
    if unmapped:
        raise ValueError(f"CSV columns without a schema role: {unmapped}")

    df = df.dropna(axis=0)
    if df.empty:
        raise ValueError(f"{path} has no complete rows")

    label_col = next(c for c, r in schema.items() if r == "label")
    sens_col = next(c for c, r in schema.items() if r == "sensitive")
    part_col = next((c for c, r in schema.items() if r == "partition_attribute"), None)

    labels, l = _encode_categorical(df[label_col])
    if l < 2:
        raise ValueError(f"label column {label_col!r} has a single distinct value")
    sensitive, k = _encode_categorical(df[sens_col])
    if k < 2:
        raise ValueError(f"sensitive column {sens_col!r} has a single distinct value")

    blocks: list[np.ndarray] = []
    names: list[str] = []
    numeric_cols: list[int] = []
    for col in df.columns:
        role = schema[col]
        if role in ("feature_numeric", "partition_attribute"):
            values = pd.to_numeric(df[col], errors="raise").to_numpy(dtype=float)
            numeric_cols.append(len(names))
            blocks.append(values[:, None])
            names.append(col)
        elif role == "feature_categorical":
            levels = np.sort(df[col].unique())
            onehot = (df[col].to_numpy()[:, None] == levels[None, :]).astype(float)
            blocks.append(onehot)
            names.extend(f"{col}={lv}" for lv in levels)
        # label/sensitive/drop columns contribute no feature block

    if not blocks:
        raise ValueError("schema defines no feature columns")
    features = np.hstack(blocks)

    return TabularDataset(
        features=features,
        labels=labels,
        sensitive=sensitive,
        k=k,
        l=l,
        partition_values=None
        if part_col is None
        else pd.to_numeric(df[part_col], errors="raise").to_numpy(dtype=float),
        numeric_cols=np.array(numeric_cols, dtype=int),
        feature_names=names,
    )


def train_test_split(
    dataset: TabularDataset, ratio: float, seed: int, standardize: bool = True
) -> tuple[TabularDataset, TabularDataset]:
    """Deterministic shuffle-split into ceil(ratio*n) train rows and the rest.

    With ``standardize`` on, numeric feature columns are shifted/scaled by the
    training rows' mean and standard deviation; test rows reuse the same
    statistics so nothing leaks from them.
    """
    if not 0 < ratio < 1:
        raise ValueError(f"split ratio must lie in (0, 1), got {ratio}")
    perm = np.random.default_rng(seed).permutation(dataset.n)
    n_train = int(np.ceil(ratio * dataset.n))
    train = dataset.subset(perm[:n_train])
    test = dataset.subset(perm[n_train:])
    if standardize and dataset.numeric_cols is not None and dataset.numeric_cols.size:
        cols = dataset.numeric_cols
        mean = train.features[:, cols].mean(axis=0)
        std = train.features[:, cols].std(axis=0)
        std[std == 0.0] = 1.0
        train.features[:, cols] = (train.features[:, cols] - mean) / std
        if test.n:
            test.features[:, cols] = (test.features[:, cols] - mean) / std
    return train, test


def sensitive_distribution(dataset: TabularDataset) -> SensitiveDistribution:
    """Empirical attribute frequencies, their inverse-sqrt diagonal, and rho."""
    counts = np.bincount(dataset.sensitive, minlength=dataset.k)
    if (counts == 0).any():
        absent = np.flatnonzero(counts == 0).tolist()
        raise ValueError(f"sensitive classes {absent} have no samples; minimum-frequency assumption violated")
    probs = counts / dataset.n
    return SensitiveDistribution(
        probs=probs, inv_sqrt=np.diag(probs**-0.5), rho=float(probs.min())
    )


def sensitive_distribution_by_label(
    dataset: TabularDataset,
) -> tuple[list[SensitiveDistribution], np.ndarray]:
    """Per-label-slice sensitive distributions plus the label marginal.

    Used by the equalized-odds objective, which conditions every quantity on
    the true label. Each slice must contain every sensitive class.
    """
    label_counts = np.bincount(dataset.labels, minlength=dataset.l)
    if (label_counts == 0).any():
        absent = np.flatnonzero(label_counts == 0).tolist()
        raise ValueError(f"label classes {absent} have no samples")
    dists = []
    for y in range(dataset.l):
        dists.append(sensitive_distribution(dataset.subset(dataset.labels == y)))
    return dists, label_counts / dataset.n


def partition_heterogeneous(
    dataset: TabularDataset,
    K: int,
    h: float,
    attribute: np.ndarray | str | None = None,
    seed: int = 0,
) -> SiloPartition:
    """Split rows across K silos at heterogeneity level h in [0, 1].

    Rows are sorted by the partitioning attribute and cut into K contiguous
    strata. Each silo first draws floor(size_k * h) rows from its own stratum,
    then every silo tops up to its target size from the single shared pool of
    still-unassigned rows (no replacement anywhere). h=0 is plain random
    assignment in expectation; h=1 hands each silo exactly its stratum. When
    K does not divide n, the final silo absorbs the remainder.
    """
    n = dataset.n
    if K < 1 or K > n:
        raise ValueError(f"need 1 <= K <= {n}, got {K}")
    if not 0.0 <= h <= 1.0:
        raise ValueError(f"heterogeneity level must lie in [0, 1], got {h}")

    if attribute is None:
        values = dataset.partition_values
        if values is None:
            raise ValueError("dataset records no partition attribute; pass one explicitly")
    elif isinstance(attribute, str):
        if attribute not in dataset.feature_names:
            raise ValueError(f"unknown attribute column {attribute!r}")
        values = dataset.features[:, dataset.feature_names.index(attribute)]
    else:
        values = np.asarray(attribute, dtype=float)
        if values.shape != (n,):
            raise ValueError("attribute vector must have one value per row")

    base = n // K
    sizes = [base] * K
    sizes[-1] += n % K

    order = np.argsort(values, kind="stable")
    strata = []
    start = 0
    for size in sizes:
        strata.append(order[start : start + size])
        start += size

    rng = np.random.default_rng(seed)
    assigned = np.zeros(n, dtype=bool)
    silos: list[np.ndarray] = []
    for kk in range(K):
        m_k = int(np.floor(sizes[kk] * h))
        own = rng.choice(strata[kk], size=m_k, replace=False) if m_k else np.array([], dtype=int)
        assigned[own] = True
        silos.append(own)
    for kk in range(K):
        need = sizes[kk] - silos[kk].size
        if need:
            pool = np.flatnonzero(~assigned)
            fill = rng.choice(pool, size=need, replace=False)
            assigned[fill] = True
            silos[kk] = np.concatenate([silos[kk], fill])

    return SiloPartition(assignments=[np.sort(s) for s in silos], silo_size=base)
