"""JSON for distributions, flat binary for sample sets.

Sample files start with the 8-byte magic "LFHTSAMP", a small fixed header,
then little-endian int32 bin indices or float64 coordinates.  The CLI also
accepts bare newline-delimited integers; the magic bytes disambiguate.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .bump import BaseProfile, SmoothBumpDensity
from .dist import ConstructionError, DiscretePmf, SampleKind, SampleSet, Source
from .gauss import GaussianSequenceSpec

MAGIC = b"LFHTSAMP"
_HEADER = struct.Struct("<8sHBBIQ")
_KIND_CODE = {SampleKind.DISCRETE: 0, SampleKind.CUBE: 1, SampleKind.SEQUENCE: 2}
_SOURCE_CODE = {Source.X: 0, Source.Y: 1, Source.Z: 2}


def dist_to_json(dist) -> dict:
    if isinstance(dist, DiscretePmf):
        return {"kind": "discrete", "weights": dist.weights.tolist()}
    if isinstance(dist, SmoothBumpDensity):
        return {
            "kind": "bump",
            "d": dist.d,
            "beta": dist.beta,
            "kappa": dist.kappa,
            "rho": dist.rho,
            "eta": dist.eta.tolist(),
            "base": dist.base.value,
            "base_eps": dist.base_eps,
            "profile": dist.profile_name,
        }
    if isinstance(dist, GaussianSequenceSpec):
        return {
            "kind": "gaussian",
            "theta": dist.theta.tolist(),
            "s": dist.s,
            "C": dist.c_sob,
            "gamma": None if dist.gamma is None else dist.gamma.tolist(),
        }
    raise ConstructionError(f"cannot serialize {type(dist).__name__}")


def dist_from_json(doc: dict):
    kind = doc.get("kind")
    if kind == "discrete":
        return DiscretePmf(weights=np.asarray(doc["weights"], dtype=np.float64))
    if kind == "bump":
        return SmoothBumpDensity(
            d=int(doc["d"]),
            beta=float(doc["beta"]),
            kappa=int(doc["kappa"]),
            rho=float(doc["rho"]),
            eta=np.asarray(doc["eta"], dtype=np.int8),
            base=BaseProfile(doc.get("base", "uniform")),
            base_eps=doc.get("base_eps"),
        )
    if kind == "gaussian":
        gamma = doc.get("gamma")
        return GaussianSequenceSpec(
            theta=np.asarray(doc["theta"], dtype=np.float64),
            s=float(doc["s"]),
            c_sob=float(doc["C"]),
            gamma=None if gamma is None else np.asarray(gamma, dtype=np.float64),
        )
    raise ConstructionError(f"unknown distribution kind {kind!r}")


def write_samples(s: SampleSet, path) -> None:
    path = Path(path)
    header = _HEADER.pack(
        MAGIC, 1, _KIND_CODE[s.kind], _SOURCE_CODE[s.source], s.dim, s.count
    )
    if s.kind is SampleKind.DISCRETE:
        payload = s.observations.astype("<i4").tobytes()
    else:
        payload = s.observations.astype("<f8").tobytes()
    path.write_bytes(header + payload)


def read_samples(path) -> SampleSet:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size or raw[:8] != MAGIC:
        return _read_plain_indices(raw, path)
    magic, version, kind_code, source_code, dim, count = _HEADER.unpack_from(raw)
    if version != 1:
        raise ConstructionError(f"unsupported sample file version {version}")
    kind = {v: k for k, v in _KIND_CODE.items()}[kind_code]
    source = {v: k for k, v in _SOURCE_CODE.items()}[source_code]
    body = raw[_HEADER.size :]
    if kind is SampleKind.DISCRETE:
        obs = np.frombuffer(body, dtype="<i4", count=count).astype(np.int64)
    else:
        obs = np.frombuffer(body, dtype="<f8", count=count * dim).reshape(count, dim)
    return SampleSet(source=source, kind=kind, dim=int(dim), observations=obs)


def _read_plain_indices(raw: bytes, path) -> SampleSet:
    try:
        values = [int(line) for line in raw.decode().split()]
    except (UnicodeDecodeError, ValueError) as exc:
        raise ConstructionError(f"{path}: neither LFHTSAMP binary nor integers") from exc
    obs = np.asarray(values, dtype=np.int64)
    dim = int(obs.max()) if obs.size else 1
    return SampleSet(source=Source.Z, kind=SampleKind.DISCRETE, dim=dim, observations=obs)


def save_json(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())
