"""JSON descriptions of filter banks and module-sequences.

A module-sequence document looks like::

    {
      "N": 64, "dims": 1,
      "layers": [
        {"bank": {"family": "haar", "J": 3},
         "nonlinearity": "modulus",
         "pooling": {"kind": "subsample", "S": 2},
         "output_atom": "lowpass"},
        ...
      ],
      "pruning": "full",
      "normalize": true,
      "strict_scale_order": false
    }

``layers[i].output_atom`` is the atom that turns layer ``i``'s maps into
features, so it lives on the same length as ``layers[i].bank``.  Lengths
after the first are inferred from the pooling factors; a bank may still
state ``N`` explicitly, in which case it must agree.
"""
from __future__ import annotations

import json
from pathlib import Path as FsPath
from typing import Any

import numpy as np

from .errors import ConfigError, DfexError, PreconditionError, ShapeError
from .filterbank import Atom, FilterBank, WaveletLabel
from .network import Module, ModuleSequence, _check_pruning
from .ops import NonLinearity, PoolingOp
from .signal import delta
from .wavelets import lowpass, wavelet_bank

CONFIG_DIR = FsPath(__file__).with_name("configs")


# ---------------------------------------------------------------------------
# labels and complex arrays


def label_to_json(label) -> Any:
    if isinstance(label, WaveletLabel):
        return [int(label.scale), label.direction]
    if isinstance(label, (str, int)) and not isinstance(label, bool):
        return label
    raise ConfigError(f"label {label!r} cannot be serialized; use a string, an int or a WaveletLabel")


def label_from_json(doc) -> Any:
    if isinstance(doc, list):
        if len(doc) not in (1, 2) or not isinstance(doc[0], int):
            raise ConfigError(f"wavelet label must be [scale] or [scale, direction], got {doc!r}")
        return WaveletLabel(*doc)
    if isinstance(doc, (str, int)) and not isinstance(doc, bool):
        return doc
    raise ConfigError(f"malformed atom label {doc!r}")


def array_to_json(a: np.ndarray) -> dict:
    a = np.asarray(a, dtype=np.complex128)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


def array_from_json(doc) -> np.ndarray:
    """Accept ``{"re": ..., "im": ...}`` or a plain (nested) list of reals."""
    try:
        if isinstance(doc, dict):
            re = np.asarray(doc["re"], dtype=np.float64)
            im = np.asarray(doc.get("im", np.zeros_like(re)), dtype=np.float64)
            if re.shape != im.shape:
                raise ConfigError("real and imaginary parts differ in shape")
            return re + 1j * im
        return np.asarray(doc, dtype=np.float64).astype(np.complex128)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed array: {exc}") from exc


# ---------------------------------------------------------------------------
# banks


def bank_to_dict(bank: FilterBank) -> dict:
    """Explicit-atom description; round-trips through :func:`bank_from_dict`."""
    doc = {
        "dims": bank.dims,
        "atoms": [{"label": label_to_json(a.label), **array_to_json(a.filter)} for a in bank.atoms],
    }
    if bank.output_atom is not None:
        doc["output_atom"] = array_to_json(bank.output_atom)
    if bank.name:
        doc["name"] = bank.name
    return doc


def bank_from_dict(doc: dict, N: int | None = None, dims: int | None = None) -> FilterBank:
    if not isinstance(doc, dict):
        raise ConfigError("bank description must be an object")
    dims = int(doc.get("dims", dims or 1))
    if "family" in doc:
        if "J" not in doc:
            raise ConfigError("wavelet bank needs J")
        n = doc.get("N", N)
        if n is None:
            raise ConfigError("wavelet bank length N is neither given nor inferable")
        if N is not None and int(n) != N:
            raise ShapeError(f"bank states N={n} but the chain gives N={N}")
        return wavelet_bank(doc["family"], int(doc["J"]), int(n), dims, strict=bool(doc.get("strict", True)))
    if "atoms" in doc:
        atoms = []
        for i, a in enumerate(doc["atoms"]):
            values = a if isinstance(a, list) else {k: v for k, v in a.items() if k in ("re", "im")}
            label = label_from_json(a.get("label", f"atom{i}")) if isinstance(a, dict) else f"atom{i}"
            atoms.append(Atom(array_from_json(values), label))
        chi = array_from_json(doc["output_atom"]) if "output_atom" in doc else None
        bank = FilterBank(atoms, chi, doc.get("name"))
        if N is not None and bank.signal_length != N:
            raise ShapeError(f"explicit atoms have length {bank.signal_length}, the chain gives N={N}")
        return bank
    raise ConfigError("bank needs either 'family' or 'atoms'")


def _output_atom(spec, bank_doc: dict, bank: FilterBank):
    if spec is None or spec == "none":
        return None
    if spec == "delta":
        return delta(bank.signal_length, bank.dims)
    if spec == "lowpass":
        if "family" not in bank_doc:
            raise ConfigError("'lowpass' output atom needs a wavelet-family bank")
        return lowpass(bank_doc["family"], int(bank_doc["J"]), bank.signal_length, bank.dims)
    if isinstance(spec, str):
        raise ConfigError(f"unknown output atom {spec!r}; use 'delta', 'lowpass', 'none' or explicit values")
    return array_from_json(spec)


# ---------------------------------------------------------------------------
# module-sequences


def _pooling(doc) -> PoolingOp:
    if isinstance(doc, str):
        doc = {"kind": doc}
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError("pooling must be an object with a 'kind'")
    weights = doc.get("weights")
    return PoolingOp(doc["kind"], int(doc.get("S", 1)), None if weights is None else tuple(weights))


def sequence_from_dict(doc: dict) -> tuple[ModuleSequence, dict]:
    """Build the sequence and return it with the run options (pruning, normalize).

    ``normalize`` is reported, not applied; the caller decides.
    """
    if not isinstance(doc, dict) or not isinstance(doc.get("layers"), list) or not doc["layers"]:
        raise ConfigError("config needs a non-empty 'layers' list")
    dims = int(doc.get("dims", doc["layers"][0].get("bank", {}).get("dims", 1)))
    N = doc.get("N")
    N = None if N is None else int(N)
    modules = []
    try:
        for i, layer in enumerate(doc["layers"]):
            if "bank" not in layer or "nonlinearity" not in layer:
                raise ConfigError(f"layer {i} needs 'bank' and 'nonlinearity'")
            bank_doc = layer["bank"]
            bank = bank_from_dict(bank_doc, N, dims)
            bank = bank.with_output_atom(_output_atom(layer.get("output_atom", "none"), bank_doc, bank))
            module = Module(bank, NonLinearity(layer["nonlinearity"]), _pooling(layer.get("pooling", "identity")))
            modules.append(module)
            N = module.output_length
    except ConfigError:
        raise
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed config: {exc!r}") from exc
    omega = ModuleSequence(modules, strict_scale_order=bool(doc.get("strict_scale_order", False)))
    options = {
        "pruning": _check_pruning(doc.get("pruning", "full")),
        "normalize": bool(doc.get("normalize", False)),
    }
    return omega, options


def load_config(path) -> tuple[ModuleSequence, dict]:
    """Read a module-sequence config from a path, or a shipped name like ``mnist_pooled``."""
    p = FsPath(path)
    if not p.exists() and (CONFIG_DIR / f"{path}.json").exists():
        p = CONFIG_DIR / f"{path}.json"
    try:
        doc = json.loads(p.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file {str(path)!r} not found") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {str(path)!r} is not valid JSON: {exc}") from exc
    return sequence_from_dict(doc)


def shipped_configs() -> list[str]:
    return sorted(p.stem for p in CONFIG_DIR.glob("*.json"))


__all__ = [
    "ConfigError",
    "DfexError",
    "PreconditionError",
    "bank_from_dict",
    "bank_to_dict",
    "label_from_json",
    "label_to_json",
    "load_config",
    "sequence_from_dict",
    "shipped_configs",
]
