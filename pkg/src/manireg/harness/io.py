"""CSV datasets, JSON models and JSON reports.

Dataset CSV::

    x1,x2,label
    0.5,1.25,1
    -0.75,0.5,-1
    1.5,0.25,

Labeled rows come first; unlabeled rows leave ``label`` empty. Floats are
written with 17 significant digits, which round-trips IEEE doubles.
"""
from __future__ import annotations

import csv
import io
import json

import numpy as np

from manireg.kernels import KernelError, kernel_from_spec
from manireg.learn import KernelModel, SemiSupervisedDataset

MODEL_FORMAT = "manireg-model"
MODEL_VERSION = 1


class FormatError(ValueError):
    pass


def fmt(x) -> str:
    return "%.17g" % x


def _write_text(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def dataset_to_csv(dataset: SemiSupervisedDataset) -> str:
    X = dataset.points
    d = X.shape[1]
    buf = io.StringIO()
    buf.write(",".join([f"x{i + 1}" for i in range(d)] + ["label"]) + "\n")
    for i, row in enumerate(X):
        lab = fmt(dataset.labels[i]) if i < dataset.n_labeled else ""
        buf.write(",".join([fmt(v) for v in row] + [lab]) + "\n")
    return buf.getvalue()


def save_dataset(dataset: SemiSupervisedDataset, path) -> None:
    _write_text(path, dataset_to_csv(dataset))


def _parse_float(s, lineno, what):
    try:
        return float(s)
    except ValueError:
        raise FormatError(f"line {lineno}: {what} {s!r} is not a number") from None


def parse_dataset_csv(text: str, n_labeled: int | None = None) -> SemiSupervisedDataset:
    """Parse dataset CSV.

    With ``n_labeled`` given, exactly the first ``n_labeled`` rows must carry
    labels and later labels are ignored; otherwise the labeled rows are
    those with a nonempty label, and they must form a leading block.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty dataset file") from None
    if not header or header[-1].strip() != "label":
        raise FormatError("line 1: header must be x1,...,xd,label")
    d = len(header) - 1
    if d < 1:
        raise FormatError("line 1: no coordinate columns")
    points, labels = [], []
    seen_unlabeled = False
    for lineno, row in enumerate(reader, 2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != d + 1:
            raise FormatError(f"line {lineno}: expected {d + 1} columns, got {len(row)}")
        points.append([_parse_float(c, lineno, "coordinate") for c in row[:d]])
        lab = row[d].strip()
        idx = len(points) - 1
        if n_labeled is not None:
            if idx < n_labeled:
                if not lab:
                    raise FormatError(f"line {lineno}: row {idx} must be labeled")
                labels.append(_parse_float(lab, lineno, "label"))
        elif lab:
            if seen_unlabeled:
                raise FormatError(f"line {lineno}: labeled row after an unlabeled one")
            labels.append(_parse_float(lab, lineno, "label"))
        else:
            seen_unlabeled = True
    if not points:
        raise FormatError("dataset has no rows")
    if n_labeled is not None and n_labeled > len(points):
        raise FormatError(f"--labels {n_labeled} exceeds the {len(points)} rows present")
    if not labels:
        raise FormatError("dataset has no labeled rows")
    return SemiSupervisedDataset(np.array(points), np.array(labels))


def load_dataset(path, n_labeled: int | None = None) -> SemiSupervisedDataset:
    with open(path, newline="") as fh:
        return parse_dataset_csv(fh.read(), n_labeled)


def load_points(path) -> np.ndarray:
    """Point cloud CSV, one point per row; a header row and a trailing ``label`` column are dropped."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise FormatError(f"{path}: no points")
    start = 0
    drop_last = False
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        start = 1
        drop_last = rows[0][-1].strip() == "label"
    width = len(rows[start]) if start < len(rows) else 0
    out = []
    for lineno, row in enumerate(rows[start:], start + 1):
        if len(row) != width:
            raise FormatError(f"line {lineno}: expected {width} columns, got {len(row)}")
        cells = row[:-1] if drop_last else row
        out.append([_parse_float(c, lineno, "coordinate") for c in cells])
    if not out:
        raise FormatError(f"{path}: no points")
    return np.array(out)


def save_points(points, path) -> None:
    X = np.atleast_2d(np.asarray(points, dtype=float))
    _write_text(path, "".join(",".join(fmt(v) for v in row) + "\n" for row in X))


def model_to_dict(model: KernelModel) -> dict:
    info = {k: v for k, v in model.info.items()
            if k != "history" and isinstance(v, (int, float, str, bool, type(None)))}
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kernel": model.kernel.spec(),
        "support_points": model.support_points.tolist(),
        "coefficients": model.coefficients.tolist(),
        "info": info,
    }


def dumps(obj) -> str:
    # json writes floats with repr(), the shortest string that round-trips
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def save_model(model: KernelModel, path) -> None:
    _write_text(path, dumps(model_to_dict(model)))


def model_from_dict(doc: dict) -> KernelModel:
    if not isinstance(doc, dict):
        raise FormatError("model file must hold a JSON object")
    if doc.get("format") != MODEL_FORMAT:
        raise FormatError(f"not a {MODEL_FORMAT} file")
    for key in ("kernel", "support_points", "coefficients"):
        if key not in doc:
            raise FormatError(f"model file is missing the {key!r} field")
    try:
        kernel = kernel_from_spec(doc["kernel"])
    except KernelError as exc:
        raise FormatError(f"bad kernel in model file: {exc}") from None
    X = np.array(doc["support_points"], dtype=float)
    a = np.array(doc["coefficients"], dtype=float)
    if X.ndim != 2 or a.ndim != 1 or len(X) != len(a):
        raise FormatError("support_points must be N x d and coefficients length N")
    return KernelModel(kernel, X, a, dict(doc.get("info", {})))


def load_model(path) -> KernelModel:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON ({exc})") from None
    return model_from_dict(doc)


def save_report(report: dict, path) -> None:
    _write_text(path, dumps(report))
