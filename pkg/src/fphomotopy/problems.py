"""Instance generators and file formats.

Instance files are JSON::

    {"k": 2, "dims": [n1, n2], "A": [[A_10, A_11, A_12], [A_20, A_21, A_22]]}

where every matrix is a list of rows and every entry a ``[re, im]`` pair.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import MepInstance
from .startsys import complex_gaussian

QMEP_KEYS = ("00", "10", "01", "20", "11", "02")


class InstanceFormatError(ValueError):
    """Malformed instance file; the message names the offending field."""


def _dims(k: int, dims) -> tuple[int, ...]:
    if isinstance(dims, (int, np.integer)):
        return (int(dims),) * k
    dims = tuple(int(n) for n in dims)
    if len(dims) != k:
        raise ValueError(f"expected {k} dimensions, got {len(dims)}")
    return dims


def random_mep(k: int, dims, seed=None) -> MepInstance:
    """Entries iid standard complex Gaussian; ``dims`` is an int or a k-sequence."""
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    dims = _dims(k, dims)
    rng = np.random.default_rng(seed)
    return MepInstance([[complex_gaussian(rng, n, n) for _ in range(k + 1)] for n in dims])


def decoupled_mep(gep_pairs: Sequence[tuple[np.ndarray, np.ndarray]]) -> MepInstance:
    """``H_i(lam) = C_i - lam_i E_i``: k independent pencils ``(C_i, E_i)``."""
    k = len(gep_pairs)
    coeffs = []
    for i, (c, e) in enumerate(gep_pairs):
        c = np.asarray(c, dtype=complex)
        row = [c] + [np.zeros_like(c) for _ in range(k)]
        row[i + 1] = np.asarray(e, dtype=complex)
        coeffs.append(row)
    return MepInstance(coeffs)


def rank_one_example() -> MepInstance:
    """The 2x2 two-parameter example with a rank-one second equation."""
    return MepInstance(
        [
            [[[2, 3], [5, 7]], [[11, 13], [17, 19]], [[23, 29], [31, 37]]],
            [[[12, 31], [15, 71]], [[1, 1], [1, 1]], [[2, 2], [2, 2]]],
        ]
    )


RANK_ONE_EXAMPLE_SLICES = (
    np.array([[0.6909 + 0.2745j, 0.4277 - 0.1333j]]),
    np.array([[-0.1443 + 0.5711j, -0.0735 + 1.8085j]]),
)
RANK_ONE_EXAMPLE_BETAS = (
    (-0.9978 + 1.1933j, -0.5637 + 0.3035j),
    (-3.6333 - 28.4804j,),
)


# ---------------------------------------------------------------- quadratic


@dataclass(frozen=True)
class QmepInstance:
    """Two quadratic two-parameter equations.

    ``Q_1(lam, mu) = B00 + lam B10 + mu B01 + lam^2 B20 + lam mu B11 + mu^2 B02``
    and ``Q_2`` likewise with ``C``.
    """

    B: dict
    C: dict

    def __post_init__(self):
        for name, blocks in (("B", self.B), ("C", self.C)):
            missing = [key for key in QMEP_KEYS if key not in blocks]
            if missing:
                raise ValueError(f"{name} is missing blocks {missing}")
            shapes = {np.shape(blocks[key]) for key in QMEP_KEYS}
            if len(shapes) != 1 or len(next(iter(shapes))) != 2:
                raise ValueError(f"{name} blocks have inconsistent shapes {sorted(shapes)}")

    @property
    def dims(self) -> tuple[int, int]:
        return np.shape(self.B["00"])[0], np.shape(self.C["00"])[0]

    def evaluate(self, which: int, lam: complex, mu: complex) -> np.ndarray:
        m = self.B if which == 0 else self.C
        return (
            m["00"] + lam * m["10"] + mu * m["01"]
            + lam**2 * m["20"] + lam * mu * m["11"] + mu**2 * m["02"]
        )

    def relative_residual(self, which: int, lam: complex, mu: complex, x: np.ndarray) -> float:
        """``||Q(lam, mu) x|| / (sum ||block|| max(1, |lam|, |mu|)^2 ||x||)``."""
        m = self.B if which == 0 else self.C
        scale = sum(np.linalg.norm(m[key], 2) for key in QMEP_KEYS)
        scale *= max(1.0, abs(lam), abs(mu)) ** 2 * np.linalg.norm(x)
        return float(np.linalg.norm(self.evaluate(which, lam, mu) @ x) / scale)


def random_qmep(n: int, seed=None, n2: int | None = None) -> QmepInstance:
    rng = np.random.default_rng(seed)
    n2 = n if n2 is None else n2
    b = {key: complex_gaussian(rng, n, n) for key in QMEP_KEYS}
    c = {key: complex_gaussian(rng, n2, n2) for key in QMEP_KEYS}
    return QmepInstance(b, c)


def _linearize_one(m: dict) -> list[np.ndarray]:
    n = np.shape(m["00"])[0]
    z = np.zeros((n, n), dtype=complex)
    eye = np.eye(n, dtype=complex)
    a0 = np.block([[m["00"], m["10"], m["01"]], [z, -eye, z], [z, z, -eye]])
    a1 = np.block([[z, m["20"], m["11"]], [eye, z, z], [z, z, z]])
    a2 = np.block([[z, z, m["02"]], [z, z, z], [eye, z, z]])
    # blocks are written for A0 + lam A1 + mu A2; flip to A0 - lam A1 - mu A2
    return [a0, -a1, -a2]


def qmep_linearize(q: QmepInstance) -> MepInstance:
    """Singular linear two-parameter problem of size ``(3 n1, 3 n2)``.

    Applied to ``(x, lam x, mu x)`` the first block row reproduces ``Q_i x`` and
    the other two rows vanish identically.
    """
    return MepInstance([_linearize_one(q.B), _linearize_one(q.C)])


@dataclass(frozen=True)
class QmepPair:
    lam: complex
    mu: complex
    xs: tuple[np.ndarray, np.ndarray]
    structure_residual: float
    residuals: tuple[float, float]


def recover_qmep_pair(q: QmepInstance, lam, xs) -> QmepPair:
    """Read ``(lam, mu, x_1, x_2)`` off a solution of the linearization."""
    lam1, mu = complex(lam[0]), complex(lam[1])
    out_x, structure = [], 0.0
    for x_big, n in zip(xs, q.dims):
        x_big = np.asarray(x_big, dtype=complex)
        x = x_big[:n]
        expected = np.concatenate([x, lam1 * x, mu * x])
        structure = max(structure, np.linalg.norm(x_big - expected) / np.linalg.norm(x_big))
        out_x.append(x / np.linalg.norm(x))
    res = (
        q.relative_residual(0, lam1, mu, out_x[0]),
        q.relative_residual(1, lam1, mu, out_x[1]),
    )
    return QmepPair(lam1, mu, tuple(out_x), float(structure), res)


# ---------------------------------------------------------------- file I/O


def _cx_matrix(a: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(a, dtype=complex)]


def instance_to_dict(inst: MepInstance) -> dict:
    return {
        "k": inst.k,
        "dims": list(inst.dims),
        "A": [[_cx_matrix(a) for a in inst.stack(i)] for i in range(inst.k)],
    }


def _parse_matrix(obj, n: int, where: str) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != n:
        raise InstanceFormatError(f"{where}: expected {n} rows")
    out = np.empty((n, n), dtype=complex)
    for r, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != n:
            raise InstanceFormatError(f"{where} row {r}: expected {n} entries")
        for c, entry in enumerate(row):
            if (
                not isinstance(entry, list)
                or len(entry) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in entry)
            ):
                raise InstanceFormatError(f"{where}[{r}][{c}]: expected [re, im] numbers")
            out[r, c] = complex(entry[0], entry[1])
    return out


def instance_from_dict(data) -> MepInstance:
    if not isinstance(data, dict):
        raise InstanceFormatError("top level: expected an object")
    for key in ("k", "dims", "A"):
        if key not in data:
            raise InstanceFormatError(f"missing field {key!r}")
    k = data["k"]
    if not isinstance(k, int) or isinstance(k, bool) or k < 2:
        raise InstanceFormatError(f"field 'k': expected an integer >= 2, got {k!r}")
    dims = data["dims"]
    if (
        not isinstance(dims, list)
        or len(dims) != k
        or not all(isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in dims)
    ):
        raise InstanceFormatError(f"field 'dims': expected {k} positive integers")
    a = data["A"]
    if not isinstance(a, list) or len(a) != k:
        raise InstanceFormatError(f"field 'A': expected {k} equations")
    coeffs = []
    for i, row in enumerate(a):
        if not isinstance(row, list) or len(row) != k + 1:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise InstanceFormatError(
                f"field 'A[{i}]': expected {k + 1} matrices, got {got} "
                f"(missing A_{i + 1}{k} block?)"
            )
        coeffs.append(
            [_parse_matrix(m, dims[i], f"A[{i}][{j}]") for j, m in enumerate(row)]
        )
    return MepInstance(coeffs)


def save_instance(inst: MepInstance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst)))


def load_instance(path) -> MepInstance:
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    try:
        return instance_from_dict(data)
    except InstanceFormatError as exc:
        raise InstanceFormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------- results


def fmt(v) -> str:
    """Round-trip float formatting; booleans and None spelled out."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")
