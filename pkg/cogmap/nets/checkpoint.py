"""
CGMP checkpoint files.

Layout (little-endian): magic ``CGMP``, version u32, then the metadata block
(variant u8, d_z u32, τ u32, α f32, λ f32, seed u64, iteration u64), then
named float32 tensors until end of file, each stored as name length u16,
UTF-8 name, ndim u8, dims u32[ndim] and the payload.

Besides network parameters the file carries batch-norm running statistics,
``meta/architecture`` ([image_size, base_channels]) and the Adam moments and
step counters under ``opt/<network>/``.
"""

import logging
import struct
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

from ..diffengine import OptimState, Tensor
from ..models.config import Variant
from ..models.exceptions import FormatError
from .bundle import NETWORKS, ModelBundle
from .networks import Architecture

logger = logging.getLogger(__name__)

MAGIC = b"CGMP"
VERSION = 1
_PREAMBLE = struct.Struct("<4sI")
_META = struct.Struct("<BIIffQQ")
_NAME_LEN = struct.Struct("<H")
_NDIM = struct.Struct("<B")
ARCH_KEY = "meta/architecture"


def _collect(bundle: ModelBundle) -> Dict[str, np.ndarray]:
    tensors: Dict[str, np.ndarray] = bundle.snapshot()
    tensors[ARCH_KEY] = np.array([bundle.arch.image_size, bundle.arch.base_channels],
                                 dtype=np.float32)
    for network, state in bundle.optim.items():
        tensors[f"opt/{network}/step"] = np.array([state.step], dtype=np.float32)
        for name, moment in state.m.items():
            tensors[f"opt/{network}/m/{name}"] = moment
        for name, moment in state.v.items():
            tensors[f"opt/{network}/v/{name}"] = moment
    return tensors


def checkpoint_bytes(bundle: ModelBundle) -> bytes:
    """Serialize ``bundle``; tensors are written in sorted name order."""
    chunks = [
        _PREAMBLE.pack(MAGIC, VERSION),
        _META.pack(bundle.variant.code, bundle.zdim, bundle.tau, bundle.alpha,
                   bundle.penalty_weight, bundle.seed, bundle.iteration),
    ]
    for name, array in sorted(_collect(bundle).items()):
        encoded = name.encode("utf-8")
        data = np.ascontiguousarray(array, dtype="<f4")
        chunks.append(_NAME_LEN.pack(len(encoded)))
        chunks.append(encoded)
        chunks.append(_NDIM.pack(data.ndim))
        chunks.append(struct.pack(f"<{data.ndim}I", *data.shape))
        chunks.append(data.tobytes())
    return b"".join(chunks)


def save_checkpoint(bundle: ModelBundle, path: Union[str, Path]) -> Path:
    """Write ``bundle`` to ``path`` (parent directories are created)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(checkpoint_bytes(bundle))
    logger.debug("Saved checkpoint", extra={'context': {
        'path': str(path), 'iteration': bundle.iteration}})
    return path


def _read(blob: bytes, offset: int, layout: struct.Struct, what: str) -> Tuple[tuple, int]:
    if offset + layout.size > len(blob):
        raise FormatError(f"Checkpoint truncated while reading {what}", error_code="TRUNCATED",
                          context={"offset": offset, "bytes": len(blob), "field": what})
    return layout.unpack_from(blob, offset), offset + layout.size


def parse_checkpoint(blob: bytes) -> ModelBundle:
    """
    Rebuild a bundle from checkpoint bytes.

    Raises:
        FormatError: On bad magic, unsupported version, truncation or missing tensors
    """
    (magic, version), offset = _read(blob, 0, _PREAMBLE, "header")
    if magic != MAGIC:
        raise FormatError(f"Not a checkpoint file (magic {magic!r})", error_code="BAD_MAGIC",
                          context={"magic": magic.hex()})
    if version != VERSION:
        raise FormatError(f"Unsupported checkpoint version {version}",
                          error_code="VERSION_MISMATCH",
                          context={"version": version, "expected": VERSION})
    (variant_code, zdim, tau, alpha, penalty, seed, iteration), offset = _read(
        blob, offset, _META, "metadata")

    tensors: Dict[str, np.ndarray] = {}
    while offset < len(blob):
        (name_len,), offset = _read(blob, offset, _NAME_LEN, "tensor name length")
        if offset + name_len > len(blob):
            raise FormatError("Checkpoint truncated in tensor name", error_code="TRUNCATED",
                              context={"offset": offset})
        name = blob[offset:offset + name_len].decode("utf-8")
        offset += name_len
        (ndim,), offset = _read(blob, offset, _NDIM, f"rank of '{name}'")
        dims, offset = _read(blob, offset, struct.Struct(f"<{ndim}I"), f"shape of '{name}'")
        count = int(np.prod(dims)) if ndim else 1
        if offset + 4 * count > len(blob):
            raise FormatError(f"Checkpoint truncated in payload of '{name}'",
                              error_code="TRUNCATED",
                              context={"tensor": name, "offset": offset})
        tensors[name] = np.frombuffer(blob, dtype="<f4", count=count,
                                      offset=offset).reshape(dims).astype(np.float32)
        offset += 4 * count

    if ARCH_KEY not in tensors:
        raise FormatError("Checkpoint has no architecture record", error_code="MISSING_TENSOR",
                          context={"tensor": ARCH_KEY})
    image_size, base_channels = (int(v) for v in tensors.pop(ARCH_KEY))
    arch = Architecture(image_size=image_size, base_channels=base_channels, zdim=int(zdim))

    params: Dict[str, Dict[str, Tensor]] = {network: {} for network in NETWORKS}
    stats: Dict[str, np.ndarray] = {}
    optim: Dict[str, OptimState] = {}
    for name, array in tensors.items():
        parts = name.split("/")
        if parts[0] == "opt":
            state = optim.setdefault(parts[1], OptimState())
            if parts[2] == "step":
                state.step = int(array[0])
            else:
                moments = state.m if parts[2] == "m" else state.v
                moments["/".join(parts[3:])] = array.copy()
        elif name.endswith("running_mean") or name.endswith("running_var"):
            stats[name] = array.copy()
        elif parts[0] in params:
            params[parts[0]][name] = Tensor(array, requires_grad=True, dtype=np.float32, name=name)
        else:
            raise FormatError(f"Unexpected tensor '{name}' in checkpoint",
                              error_code="UNKNOWN_TENSOR", context={"tensor": name})

    return ModelBundle(arch=arch, variant=Variant.from_code(variant_code), tau=int(tau),
                       alpha=float(alpha), penalty_weight=float(penalty), seed=int(seed),
                       enc=params["enc"], gen=params["gen"], dis=params["dis"], stats=stats,
                       iteration=int(iteration), optim=optim)


def load_checkpoint(path: Union[str, Path]) -> ModelBundle:
    """
    Read a checkpoint file.

    Raises:
        FormatError: If the file is missing or malformed
    """
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"Checkpoint not found: {path}", error_code="NOT_FOUND",
                          context={"path": str(path)})
    try:
        return parse_checkpoint(path.read_bytes())
    except FormatError as e:
        e.context.setdefault("path", str(path))
        raise
