"""UCR text files, per-series z-normalization and model checkpoints."""

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    CorruptCheckpointError,
    DataError,
    FormatError,
    IncompatibleCheckpointError,
    ParseError,
)
from .layers import BatchNormParams, ConvParams, DenseParams
from .model import Hyperparameters, SrdcnnModel

FORMAT_VERSION = 1

_SPLIT = re.compile(r"[,\s]+")


@dataclass
class LabeledDataset:
    series: np.ndarray  # [N, T]
    labels: np.ndarray  # [N] original integer labels
    label_map: np.ndarray = None  # sorted distinct labels; index = class id

    def __post_init__(self):
        self.series = np.ascontiguousarray(self.series, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.series.ndim != 2:
            raise FormatError(f"series must be an [N, T] matrix, got {self.series.shape}")
        if self.labels.shape != (self.series.shape[0],):
            raise FormatError(f"{len(self.labels)} labels for {self.series.shape[0]} series")
        if self.label_map is None:
            self.label_map = np.unique(self.labels)
        self.label_map = np.asarray(self.label_map, dtype=np.int64)
        if not np.isin(self.labels, self.label_map).all():
            raise DataError("labels outside label_map")

    def __len__(self):
        return self.series.shape[0]

    @property
    def length(self):
        return self.series.shape[1]

    @property
    def n_classes(self):
        return len(self.label_map)

    @property
    def y(self):
        """Class indices in ``[0, n_classes)``."""
        return np.searchsorted(self.label_map, self.labels)


def _parse_label(tok, lineno):
    try:
        value = float(tok)
    except ValueError:
        raise ParseError(f"label {tok!r} is not a number", lineno) from None
    if not math.isfinite(value) or value != int(value):
        raise ParseError(f"label {tok!r} is not an integer", lineno)
    return int(value)


def load_ucr(path):
    """Read a UCR-format file: one series per line, label first.

    Fields may be separated by commas or any run of whitespace.
    """
    labels, rows = [], []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = [f for f in _SPLIT.split(line) if f]
            label = _parse_label(fields[0], lineno)
            try:
                values = [float(f) for f in fields[1:]]
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            if not values:
                raise FormatError(f"line {lineno}: no samples after the label")
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise FormatError(f"line {lineno}: {len(values)} samples, expected {width}")
            labels.append(label)
            rows.append(values)
    if not rows:
        raise DataError(f"{path}: no series found")
    return LabeledDataset(np.array(rows), np.array(labels))


def znormalize(series):
    """Per-series ``(x - mean) / std`` (population std); constant series map to zeros."""
    x = np.asarray(series, dtype=np.float64)
    mean = x.mean(axis=-1, keepdims=True)
    std = x.std(axis=-1, keepdims=True)
    flat = std < 1e-12
    return np.where(flat, 0.0, (x - mean) / np.where(flat, 1.0, std))


def znormalize_dataset(ds):
    return LabeledDataset(znormalize(ds.series), ds.labels, ds.label_map)


def model_to_dict(model):
    return {
        "format_version": FORMAT_VERSION,
        "hyperparameters": model.hp.to_dict(),
        "series_length": model.series_length,
        "label_map": [int(v) for v in model.label_map],
        "blocks": [
            {"name": name, "shape": list(arr.shape), "data": arr.ravel().tolist()}
            for name, arr in model.blocks().items()
        ],
    }


def dumps_model(model):
    # repr-based float output is the shortest string that round-trips exactly
    return json.dumps(model_to_dict(model), separators=(",", ":")) + "\n"


def save_model(model, path):
    Path(path).write_text(dumps_model(model))


def model_from_dict(doc):
    try:
        version = doc["format_version"]
    except (KeyError, TypeError):
        raise CorruptCheckpointError("checkpoint has no format_version") from None
    if version != FORMAT_VERSION:
        raise IncompatibleCheckpointError(
            f"checkpoint format {version!r} is not supported (expected {FORMAT_VERSION})")
    try:
        hp = Hyperparameters.from_dict(doc["hyperparameters"])
        label_map = np.array(doc["label_map"], dtype=np.int64)
        blocks = {}
        for b in doc["blocks"]:
            arr = np.array(b["data"], dtype=np.float64)
            shape = tuple(b["shape"])
            if arr.size != math.prod(shape):
                raise CorruptCheckpointError(f"block {b['name']}: {arr.size} values for shape {shape}")
            blocks[b["name"]] = arr.reshape(shape)
        convs, bns = [], []
        for i in range(hp.num_layers):
            convs.append(ConvParams(blocks[f"conv{i}.weight"], blocks[f"conv{i}.bias"]))
            bns.append(BatchNormParams(
                blocks[f"bn{i}.gamma"], blocks[f"bn{i}.beta"],
                blocks[f"bn{i}.running_mean"], blocks[f"bn{i}.running_var"],
                hp.bn_eps, hp.bn_momentum))
        dense = DenseParams(blocks["dense.weight"], blocks["dense.bias"])
        model = SrdcnnModel(convs, bns, dense, label_map, hp, int(doc["series_length"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptCheckpointError(f"malformed checkpoint: {exc}") from None
    if set(blocks) != set(model.blocks()):
        raise CorruptCheckpointError("checkpoint blocks do not match the configured architecture")
    if model.dense.weight.shape[1] != len(label_map):
        raise CorruptCheckpointError("label_map does not match the dense layer width")
    for i, conv in enumerate(convs):
        expected_cin = 1 if i == 0 else hp.filters[i - 1]
        if conv.weight.shape != (hp.filters[i], expected_cin, hp.kernel_sizes[i]):
            raise CorruptCheckpointError(f"conv{i}.weight has shape {conv.weight.shape}")
    return model


def load_model(path):
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptCheckpointError(f"{path}: not valid JSON ({exc})") from None
    return model_from_dict(doc)
