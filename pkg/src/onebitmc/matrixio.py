"""Plain-text file formats for matrices and sample sets.

Matrix files are diffable and language-neutral: optional '#'-prefixed
metadata lines, a 'm1 m2' dimension line, then m1 rows of m2 decimal values.
Sample-set files use the same header style followed by one 'row col label'
line per observation.
"""

import numpy as np

from .model import SampleSet, Shape, TruthMatrix


def _write_header(handle, metadata: dict):
    for key, value in metadata.items():
        handle.write(f"# {key} {value}\n")


def write_matrix(path, X: np.ndarray, metadata: dict | None = None):
    X = np.asarray(X, dtype=float)
    with open(path, "w") as handle:
        _write_header(handle, metadata or {})
        handle.write(f"{X.shape[0]} {X.shape[1]}\n")
        for row in X:
            handle.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def write_truth(path, truth: TruthMatrix, seed: int | None = None):
    metadata = {"r": truth.rank_budget, "gamma": f"{truth.gamma:.17g}",
                "margin_tau": f"{truth.margin_tau:.17g}",
                "generator": truth.generator_tag}
    if seed is not None:
        metadata["seed"] = seed
    write_matrix(path, truth.entries, metadata)


def read_matrix(path) -> tuple[np.ndarray, dict]:
    """Read a matrix file; returns (entries, metadata dict of strings)."""
    metadata = {}
    with open(path) as handle:
        lines = [line.rstrip("\n") for line in handle]
    body = []
    for line in lines:
        if line.startswith("#"):
            parts = line[1:].strip().split(None, 1)
            if len(parts) == 2:
                metadata[parts[0]] = parts[1]
        elif line.strip():
            body.append(line)
    if not body:
        raise ValueError(f"{path}: no dimension line found")
    try:
        m1, m2 = (int(v) for v in body[0].split())
    except ValueError:
        raise ValueError(f"{path}: malformed dimension line {body[0]!r}")
    if len(body) != 1 + m1:
        raise ValueError(f"{path}: expected {m1} rows, found {len(body) - 1}")
    entries = np.array([[float(v) for v in line.split()] for line in body[1:]])
    if entries.shape != (m1, m2):
        raise ValueError(f"{path}: row width does not match {m2} columns")
    return entries, metadata


def read_truth(path) -> TruthMatrix:
    entries, metadata = read_matrix(path)
    required = {"r", "gamma", "margin_tau", "generator"}
    missing = required - set(metadata)
    if missing:
        raise ValueError(f"{path}: missing truth metadata {sorted(missing)}")
    return TruthMatrix(entries=entries, rank_budget=int(metadata["r"]),
                       gamma=float(metadata["gamma"]),
                       margin_tau=float(metadata["margin_tau"]),
                       generator_tag=metadata["generator"])


def write_samples(path, samples: SampleSet):
    metadata = {"m1": samples.shape.m1, "m2": samples.shape.m2,
                "scheme": samples.scheme, "seed": samples.seed,
                "n": samples.n}
    with open(path, "w") as handle:
        _write_header(handle, metadata)
        for (row, col), label in zip(samples.indices, samples.labels):
            handle.write(f"{row} {col} {int(label)}\n")


def read_samples(path) -> SampleSet:
    metadata = {}
    triples = []
    with open(path) as handle:
        for line in handle:
            line = line.rstrip("\n")
            if line.startswith("#"):
                parts = line[1:].strip().split(None, 1)
                if len(parts) == 2:
                    metadata[parts[0]] = parts[1]
            elif line.strip():
                triples.append([int(v) for v in line.split()])
    required = {"m1", "m2", "scheme", "seed"}
    missing = required - set(metadata)
    if missing:
        raise ValueError(f"{path}: missing sample metadata {sorted(missing)}")
    arr = np.array(triples, dtype=np.int64).reshape(-1, 3)
    return SampleSet(indices=arr[:, :2],
                     labels=arr[:, 2].astype(np.int8),
                     scheme=metadata["scheme"], seed=int(metadata["seed"]),
                     shape=Shape(int(metadata["m1"]), int(metadata["m2"])))
