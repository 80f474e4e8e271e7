"""Network description, nodal admittance matrix and load-bus impedance matrix.

Internally every complex power and current is an *injection* (a load draws
negative power). User-facing files use consumption-positive P and Q; the
conversion happens here, once, via :func:`consumption_to_injection`.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

#: Condition number above which ``Y_LL`` is treated as singular.
COND_LIMIT = 1e12


class NetworkError(ValueError):
    """Malformed or physically invalid network description."""


class SingularNetworkError(NetworkError):
    """The load-bus admittance block cannot be inverted reliably."""


@dataclass(frozen=True)
class Bus:
    id: int
    shunt_admittance: complex = 0j


@dataclass(frozen=True)
class Line:
    from_bus: int
    to_bus: int
    r: float
    x: float

    @property
    def impedance(self) -> complex:
        return complex(self.r, self.x)


@dataclass(frozen=True)
class Network:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    v0: float = 1.0
    z_override: np.ndarray | None = field(default=None, compare=False)
    z_convention: str = "consumption"

    @property
    def n_loads(self) -> int:
        return len(self.buses) - 1

    @property
    def load_buses(self) -> list[int]:
        return [b.id for b in self.buses if b.id != 0]

    def impedance(self) -> "ImpedanceMatrix":
        """Load-bus impedance matrix in the injection convention.

        A ``z_override`` given in the consumption convention is negated: with
        consumed currents ``i' = -i`` and powers ``s' = -s`` the relation
        ``v = v0 + Z' i'`` holds for ``Z' = -Z``.
        """
        order = tuple(self.load_buses)
        if self.z_override is not None:
            Z = np.array(self.z_override, dtype=complex)
            if self.z_convention == "consumption":
                Z = -Z
            return ImpedanceMatrix(Z, order)
        return impedance_submatrix(build_admittance(self))


@dataclass(frozen=True, eq=False)
class ImpedanceMatrix:
    """Dense ``Z = Y_LL^-1`` with the load-bus ids labelling its rows."""

    entries: np.ndarray
    bus_order: tuple[int, ...] = ()

    def __post_init__(self):
        Z = np.array(self.entries, dtype=complex)
        if Z.ndim != 2 or Z.shape[0] != Z.shape[1] or Z.shape[0] == 0:
            raise NetworkError(f"impedance matrix must be square and non-empty, got {Z.shape}")
        if not np.all(np.isfinite(Z)):
            raise NetworkError("impedance matrix has non-finite entries")
        Z.setflags(write=False)
        object.__setattr__(self, "entries", Z)
        order = tuple(self.bus_order) or tuple(range(1, Z.shape[0] + 1))
        if len(order) != Z.shape[0]:
            raise NetworkError("bus_order length does not match matrix size")
        object.__setattr__(self, "bus_order", order)

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def norm_2(self) -> float:
        from .certificates import nuclear_norm_2

        return nuclear_norm_2(self.entries)

    @property
    def norm_inf(self) -> float:
        from .certificates import nuclear_norm_inf

        return nuclear_norm_inf(self.entries)


def consumption_to_injection(P, Q=None):
    """Map consumption-positive ``P + jQ`` to injected complex power."""
    P = np.asarray(P)
    if Q is None:
        return -np.asarray(P, dtype=complex)
    return -(np.asarray(P, dtype=float) + 1j * np.asarray(Q, dtype=float))


def _validate(buses, lines, v0):
    ids = [b.id for b in buses]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise NetworkError(f"duplicate bus ids: {dupes}")
    if 0 not in ids:
        raise NetworkError("no slack bus (id 0)")
    if sorted(ids) != list(range(len(ids))):
        raise NetworkError(f"bus ids must be contiguous 0..{len(ids) - 1}")
    if len(ids) < 2:
        raise NetworkError("network needs at least one load bus")
    if not (np.isfinite(v0) and v0 > 0):
        raise NetworkError(f"v0 must be positive, got {v0}")
    known = set(ids)
    adjacency = {i: [] for i in ids}
    for ln in lines:
        if ln.from_bus not in known or ln.to_bus not in known:
            raise NetworkError(f"line {ln.from_bus}-{ln.to_bus} references an unknown bus")
        if ln.from_bus == ln.to_bus:
            raise NetworkError(f"line {ln.from_bus}-{ln.to_bus} is a self loop")
        if ln.r == 0 and ln.x == 0:
            raise NetworkError(f"line {ln.from_bus}-{ln.to_bus} has zero impedance")
        adjacency[ln.from_bus].append(ln.to_bus)
        adjacency[ln.to_bus].append(ln.from_bus)
    seen = {0}
    queue = deque([0])
    while queue:
        for nb in adjacency[queue.popleft()]:
            if nb not in seen:
                seen.add(nb)
                queue.append(nb)
    if len(seen) != len(ids):
        raise NetworkError(f"network is disconnected; unreachable buses {sorted(known - seen)}")


def _parse_z_override(raw, n):
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise NetworkError(f"z_override is not numeric: {exc}") from None
    if arr.shape != (n, n, 2):
        raise NetworkError(f"z_override must be {n}x{n} [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def parse_network(text: str) -> Network:
    """Parse a JSON network document into a validated :class:`Network`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"malformed network document: {exc}") from None
    if not isinstance(doc, dict):
        raise NetworkError("network document must be a JSON object")
    try:
        v0 = float(doc.get("v0", 1.0))
        buses = [
            Bus(int(b["id"]), complex(float(b.get("shunt_g", 0.0)), float(b.get("shunt_b", 0.0))))
            for b in doc["buses"]
        ]
        lines = [
            Line(int(ln["from"]), int(ln["to"]), float(ln["r"]), float(ln["x"]))
            for ln in doc.get("lines", [])
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise NetworkError(f"malformed network document: {exc!r}") from None

    buses.sort(key=lambda b: b.id)
    _validate(buses, lines, v0)

    z_override = None
    convention = doc.get("z_convention", "consumption")
    if convention not in ("consumption", "injection"):
        raise NetworkError(f"z_convention must be 'consumption' or 'injection', got {convention!r}")
    if doc.get("z_override") is not None:
        z_override = _parse_z_override(doc["z_override"], len(buses) - 1)
        if not np.all(np.isfinite(z_override)):
            raise NetworkError("z_override has non-finite entries")
    return Network(tuple(buses), tuple(lines), v0, z_override, convention)


def load_network(path) -> Network:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


def build_admittance(net: Network) -> np.ndarray:
    """Nodal admittance matrix, slack bus first, shape ``(n + 1, n + 1)``."""
    size = len(net.buses)
    Y = np.zeros((size, size), dtype=complex)
    for ln in net.lines:
        if ln.r == 0 and ln.x == 0:
            raise NetworkError(f"line {ln.from_bus}-{ln.to_bus} has zero impedance")
        y = 1.0 / ln.impedance
        h, k = ln.from_bus, ln.to_bus
        Y[h, h] += y
        Y[k, k] += y
        Y[h, k] -= y
        Y[k, h] -= y
    for bus in net.buses:
        Y[bus.id, bus.id] += bus.shunt_admittance
    return Y


def impedance_submatrix(Y) -> ImpedanceMatrix:
    """Invert the load-bus block of ``Y`` (slack row and column dropped)."""
    Y = np.asarray(Y, dtype=complex)
    if Y.ndim != 2 or Y.shape[0] != Y.shape[1] or Y.shape[0] < 2:
        raise NetworkError(f"admittance matrix must be square with a load bus, got {Y.shape}")
    Yll = Y[1:, 1:]
    cond = np.linalg.cond(Yll, 1)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularNetworkError(f"load-bus admittance block is singular (cond ~ {cond:.3g})")
    lu, piv = scipy.linalg.lu_factor(Yll)
    Z = scipy.linalg.lu_solve((lu, piv), np.eye(Yll.shape[0], dtype=complex))
    return ImpedanceMatrix(Z, tuple(range(1, Y.shape[0])))
