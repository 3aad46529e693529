"""File formats shared across the pipeline: SPNN checkpoints, mask text
files, PGM images, history/report CSVs, and run manifests.

SPNN container (all integers little-endian, all floats little-endian f64):

    b'SPNN' | version u32 | kind length u32 | kind utf-8
    kind 'dense':
        n_layers u32; per layer: n_in u32, n_out u32, activation u8;
        per layer: weights f64[out*in] row-major, biases f64[out];
        adam flag u8; if set: step u64, then first/second moments in
        parameter order.
    kind 'quantum-classifier':
        n_classes u32, n_qubits u32, n_layers u32, delta f64;
        per class: thetas f64[(n_layers+1)*n_qubits]; biases f64[n_classes].
    kind 'quantum-reconstructor':
        n_qubits u32, n_layers u32; thetas f64[(n_layers+1)*n_qubits].

Round trips are bit-exact.
"""

from __future__ import annotations

import csv
import json
import struct

import numpy as np

from .errors import DataFormatError
from .nn import RELU, IDENTITY, SOFTMAX, AdamState, DenseLayer, DenseNetwork
from .qmodels import QuantumClassifier, QuantumReconstructor
from .qsim import AnsatzSpec
from .sensing import HadamardOrder, SelectionMask

SPNN_MAGIC = b"SPNN"
SPNN_VERSION = 1

_ACT_CODES = {RELU: 0, IDENTITY: 1, SOFTMAX: 2}
_ACT_NAMES = {v: k for k, v in _ACT_CODES.items()}

KIND_DENSE = "dense"
KIND_QUANTUM_CLASSIFIER = "quantum-classifier"
KIND_QUANTUM_RECONSTRUCTOR = "quantum-reconstructor"


def _f64(a: np.ndarray) -> bytes:
    return np.ascontiguousarray(a, dtype="<f8").tobytes()


def _read_exact(f, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise DataFormatError(f"truncated checkpoint: wanted {n} bytes for {what}")
    return data


def _read_f64(f, count: int, what: str) -> np.ndarray:
    return np.frombuffer(_read_exact(f, 8 * count, what), dtype="<f8").copy()


def save_checkpoint(path: str, model) -> None:
    """Write a DenseNetwork, QuantumClassifier, or QuantumReconstructor."""
    with open(path, "wb") as f:
        f.write(SPNN_MAGIC)
        if isinstance(model, DenseNetwork):
            kind = KIND_DENSE
        elif isinstance(model, QuantumClassifier):
            kind = KIND_QUANTUM_CLASSIFIER
        elif isinstance(model, QuantumReconstructor):
            kind = KIND_QUANTUM_RECONSTRUCTOR
        else:
            raise TypeError(f"cannot checkpoint {type(model).__name__}")
        f.write(struct.pack("<II", SPNN_VERSION, len(kind)))
        f.write(kind.encode())
        if kind == KIND_DENSE:
            f.write(struct.pack("<I", len(model.layers)))
            for layer in model.layers:
                f.write(struct.pack("<IIB", layer.n_in, layer.n_out,
                                    _ACT_CODES[layer.activation]))
            for layer in model.layers:
                f.write(_f64(layer.weights))
                f.write(_f64(layer.biases))
            if model.adam is None:
                f.write(struct.pack("<B", 0))
            else:
                f.write(struct.pack("<BQ", 1, model.adam.step))
                for block in model.adam.m + model.adam.v:
                    f.write(_f64(block))
        elif kind == KIND_QUANTUM_CLASSIFIER:
            spec = model.circuits[0]
            f.write(struct.pack("<IIId", model.n_classes, spec.n_qubits,
                                spec.n_layers, model.delta))
            for circuit in model.circuits:
                f.write(_f64(circuit.thetas))
            f.write(_f64(model.biases))
        else:
            f.write(struct.pack("<II", model.spec.n_qubits, model.spec.n_layers))
            f.write(_f64(model.spec.thetas))


def load_checkpoint(path: str):
    with open(path, "rb") as f:
        if _read_exact(f, 4, "magic") != SPNN_MAGIC:
            raise DataFormatError(f"not an SPNN checkpoint: {path}")
        version, kind_len = struct.unpack("<II", _read_exact(f, 8, "header"))
        if version != SPNN_VERSION:
            raise DataFormatError(f"unsupported checkpoint version {version}")
        kind = _read_exact(f, kind_len, "kind").decode()
        if kind == KIND_DENSE:
            return _load_dense(f)
        if kind == KIND_QUANTUM_CLASSIFIER:
            n_classes, n_qubits, n_layers = struct.unpack("<III", _read_exact(f, 12, "dims"))
            (delta,) = struct.unpack("<d", _read_exact(f, 8, "delta"))
            size = (n_layers + 1) * n_qubits
            circuits = [
                AnsatzSpec(n_qubits, n_layers,
                           _read_f64(f, size, "thetas").reshape(n_layers + 1, n_qubits))
                for _ in range(n_classes)
            ]
            biases = _read_f64(f, n_classes, "biases")
            return QuantumClassifier(circuits, biases, delta)
        if kind == KIND_QUANTUM_RECONSTRUCTOR:
            n_qubits, n_layers = struct.unpack("<II", _read_exact(f, 8, "dims"))
            thetas = _read_f64(f, (n_layers + 1) * n_qubits, "thetas")
            return QuantumReconstructor(
                AnsatzSpec(n_qubits, n_layers, thetas.reshape(n_layers + 1, n_qubits))
            )
        raise DataFormatError(f"unknown checkpoint kind {kind!r}")


def _load_dense(f) -> DenseNetwork:
    (n_layers,) = struct.unpack("<I", _read_exact(f, 4, "layer count"))
    dims = []
    for _ in range(n_layers):
        n_in, n_out, act = struct.unpack("<IIB", _read_exact(f, 9, "layer dims"))
        if act not in _ACT_NAMES:
            raise DataFormatError(f"unknown activation code {act}")
        dims.append((n_in, n_out, _ACT_NAMES[act]))
    net = DenseNetwork.__new__(DenseNetwork)
    net.layers = []
    for n_in, n_out, act in dims:
        w = _read_f64(f, n_out * n_in, "weights").reshape(n_out, n_in)
        b = _read_f64(f, n_out, "biases")
        net.layers.append(DenseLayer(w, b, act))
    (has_adam,) = struct.unpack("<B", _read_exact(f, 1, "adam flag"))
    net.adam = None
    if has_adam:
        (step,) = struct.unpack("<Q", _read_exact(f, 8, "adam step"))
        shapes = [a.shape for layer in net.layers for a in (layer.weights, layer.biases)]
        m = [_read_f64(f, int(np.prod(s)), "adam m").reshape(s) for s in shapes]
        v = [_read_f64(f, int(np.prod(s)), "adam v").reshape(s) for s in shapes]
        net.adam = AdamState(step, m, v)
    return net


# ---------------------------------------------------------------------------
# Selection mask text files.
# ---------------------------------------------------------------------------


def save_mask(path: str, mask: SelectionMask) -> None:
    with open(path, "w") as f:
        f.write(f"# spixel-mask v1 n_total={mask.order.n_total} m={mask.m}\n")
        for idx, var in zip(mask.indices, mask.variances):
            f.write(f"{idx},{var!r}\n")


def load_mask(path: str) -> SelectionMask:
    with open(path) as f:
        header = f.readline().strip()
        parts = header.split()
        if len(parts) != 4 or parts[0] != "#" or parts[1] != "spixel-mask" or parts[2] != "v1":
            raise DataFormatError(f"bad mask header: {header!r}")
        try:
            n_total = int(parts[3].removeprefix("n_total="))
        except ValueError:
            raise DataFormatError(f"bad mask header: {header!r}") from None
        indices, variances = [], []
        for line in f:
            idx, var = line.strip().split(",")
            indices.append(int(idx))
            variances.append(float(var))
    side = int(round(n_total ** 0.5))
    return SelectionMask(HadamardOrder(side), np.array(indices), np.array(variances))


# ---------------------------------------------------------------------------
# PGM (P5) images.
# ---------------------------------------------------------------------------


def write_pgm(path: str, image_u8: np.ndarray) -> None:
    image_u8 = np.asarray(image_u8, dtype=np.uint8)
    if image_u8.ndim != 2:
        raise ValueError("PGM export needs a 2-D image")
    h, w = image_u8.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode())
        f.write(image_u8.tobytes())


def read_pgm(path: str) -> np.ndarray:
    with open(path, "rb") as f:
        if f.readline().strip() != b"P5":
            raise DataFormatError("not a binary PGM file")
        w, h = map(int, f.readline().split())
        maxval = int(f.readline())
        if maxval != 255:
            raise DataFormatError(f"unsupported maxval {maxval}")
        data = _read_exact(f, w * h, "pixels")
    return np.frombuffer(data, dtype=np.uint8).reshape(h, w)


def pattern_to_u8(pattern: np.ndarray) -> np.ndarray:
    """Map a +/-1 pattern to 0/255 for PGM export."""
    return np.where(np.asarray(pattern) > 0, 255, 0).astype(np.uint8)


def gray_to_u8(img: np.ndarray) -> np.ndarray:
    return np.round(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)


# ---------------------------------------------------------------------------
# CSV outputs and the run manifest.
# ---------------------------------------------------------------------------


def write_history_csv(path: str, history: list[dict]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["epoch", "train_loss", "val_metric"])
        for record in history:
            writer.writerow([record["epoch"], repr(record["train_loss"]),
                             repr(record["val_metric"])])


def write_report_csv(path: str, rows: list[dict]) -> None:
    """Evaluation rows: model, split, accuracy, mse, ssim (blank when N/A)."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["model", "split", "accuracy", "mse", "ssim"])
        for r in rows:
            writer.writerow([
                r["model"], r["split"],
                "" if r.get("accuracy") is None else repr(r["accuracy"]),
                "" if r.get("mse") is None else repr(r["mse"]),
                "" if r.get("ssim") is None else repr(r["ssim"]),
            ])


def write_run_manifest(path: str, command: str, params: dict) -> None:
    from . import __version__

    manifest = {"command": command, "params": params, "spixel_version": __version__}
    with open(path, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True, default=str)
        f.write("\n")
