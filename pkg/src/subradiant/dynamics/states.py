"""State helpers: named kets, basis changes, populations, validation and JSON dumps."""

from __future__ import annotations

import json
import math
from functools import lru_cache

import numpy as np

from ..exceptions import InvalidStateError

__all__ = [
    "bare_labels",
    "dimer_ket",
    "two_dimer_ket",
    "basis_matrix",
    "populations",
    "as_density",
    "check_state",
    "qubit_embedding",
    "state_to_json",
    "state_from_json",
]

_S = 1.0 / math.sqrt(2.0)
DIMER_LABELS = ("G", "-", "+", "E")
QUBIT_LABELS = ("G", "-")
HERMITIAN_TOL = 1e-12
POSITIVITY_TOL = -1e-10
TRACE_TOL = 1e-9


def bare_labels(n_atoms: int) -> list[str]:
    """Labels like ``"eg"``: character ``j`` is the state of atom ``j``."""
    return ["".join("e" if (i >> j) & 1 else "g" for j in range(n_atoms)) for i in range(2**n_atoms)]


@lru_cache(maxsize=None)
def _dimer_vectors() -> dict[str, np.ndarray]:
    # index 1 = atom 0 excited = |e1 g2>, index 2 = |g1 e2>
    return {
        "G": np.array([1, 0, 0, 0], dtype=complex),
        "-": np.array([0, _S, -_S, 0], dtype=complex),
        "+": np.array([0, _S, _S, 0], dtype=complex),
        "E": np.array([0, 0, 0, 1], dtype=complex),
    }


def dimer_ket(label: str) -> np.ndarray:
    """One of ``G``, ``-``, ``+``, ``E`` for a dimer made of atoms 0 and 1."""
    return _dimer_vectors()[label].copy()


def two_dimer_ket(label_a: str, label_b: str) -> np.ndarray:
    """Product state with dimer A on atoms 0, 1 and dimer B on atoms 2, 3.

    ``label_a`` may also be ``M`` or ``P`` (with ``label_b`` empty), the
    antisymmetric and symmetric combinations of ``+G`` and ``G+``.
    """
    if label_a in ("M", "P") and not label_b:
        sign = -1.0 if label_a == "M" else 1.0
        return _S * (two_dimer_ket("+", "G") + sign * two_dimer_ket("G", "+"))
    v = _dimer_vectors()
    # atoms 2, 3 are the high bits, so B is the left kron factor
    return np.kron(v[label_b], v[label_a])


@lru_cache(maxsize=None)
def _basis(name: str) -> tuple[tuple[str, ...], np.ndarray]:
    if name == "dimer":
        labels = DIMER_LABELS
        cols = [dimer_ket(lbl) for lbl in labels]
    elif name in ("two_dimer", "dimer_product"):
        labels, cols = [], []
        for b in DIMER_LABELS:
            for a in DIMER_LABELS:
                if name == "two_dimer" and (a + b) in ("+G", "G+"):
                    continue
                labels.append(a + b)
                cols.append(two_dimer_ket(a, b))
        if name == "two_dimer":
            labels += ["M", "P"]
            cols += [two_dimer_ket("M", ""), two_dimer_ket("P", "")]
        labels = tuple(labels)
    else:
        raise ValueError(f"unknown basis {name!r}")
    mat = np.column_stack(cols)
    mat.setflags(write=False)
    return labels, mat


def basis_matrix(name: str, n_atoms: int | None = None) -> tuple[tuple[str, ...], np.ndarray]:
    """Labels and unitary whose columns are the named basis in the bare basis."""
    if name == "bare":
        if n_atoms is None:
            raise ValueError("bare basis needs n_atoms")
        labels = tuple(bare_labels(n_atoms))
        return labels, np.eye(2**n_atoms, dtype=complex)
    return _basis(name)


def _is_density(state: np.ndarray) -> bool:
    return state.ndim == 2


def check_state(state) -> np.ndarray:
    """Validate a pure vector or density matrix and return it as an array."""
    s = np.asarray(state, dtype=complex)
    if s.ndim == 1:
        dim = s.shape[0]
        if dim & (dim - 1) or dim < 2:
            raise InvalidStateError(f"state dimension {dim} is not 2**N")
        if np.vdot(s, s).real > 1.0 + TRACE_TOL:
            raise InvalidStateError("pure state norm exceeds 1")
        return s
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got shape {s.shape}")
    dim = s.shape[0]
    if dim & (dim - 1) or dim < 2:
        raise InvalidStateError(f"state dimension {dim} is not 2**N")
    if np.max(np.abs(s - s.conj().T)) > HERMITIAN_TOL * max(1.0, np.max(np.abs(s))):
        raise InvalidStateError("density matrix is not Hermitian")
    tr = np.trace(s).real
    if not 0.0 < tr <= 1.0 + TRACE_TOL:
        raise InvalidStateError(f"density matrix trace {tr} outside (0, 1]")
    if np.linalg.eigvalsh(0.5 * (s + s.conj().T))[0] < POSITIVITY_TOL:
        raise InvalidStateError("density matrix is not positive semidefinite")
    return s


def as_density(state) -> np.ndarray:
    s = np.asarray(state, dtype=complex)
    return np.outer(s, s.conj()) if s.ndim == 1 else s


def populations(state, basis: str = "bare") -> dict[str, float]:
    """Populations of ``state`` in the bare, dimer or two-dimer basis.

    The populations sum to the trace (or squared norm) of the state, so
    unnormalized conditional states are handled as-is.
    """
    s = np.asarray(state, dtype=complex)
    dim = s.shape[0]
    n_atoms = int(round(math.log2(dim)))
    if 2**n_atoms != dim:
        raise InvalidStateError(f"state dimension {dim} is not 2**N")
    labels, u = basis_matrix(basis, n_atoms)
    if u.shape[0] != dim:
        raise ValueError(f"basis {basis!r} has dimension {u.shape[0]}, state has {dim}")
    if _is_density(s):
        pops = np.real(np.einsum("ik,ij,jk->k", u.conj(), s, u))
    else:
        pops = np.abs(u.conj().T @ s) ** 2
    return {lbl: float(p) for lbl, p in zip(labels, pops)}


def qubit_embedding(n_dimers: int) -> tuple[tuple[str, ...], np.ndarray]:
    """Isometry from the qubit space {G, -}^n into the bare atom space.

    Qubit index bit ``d`` is dimer ``d`` (0 = ``G``, 1 = ``-``), matching the
    atom ordering, so the two-dimer order is ``GG, -G, G-, --``.
    """
    if n_dimers == 1:
        labels = QUBIT_LABELS
        cols = [dimer_ket(lbl) for lbl in labels]
    elif n_dimers == 2:
        labels = tuple(a + b for b in QUBIT_LABELS for a in QUBIT_LABELS)
        cols = [two_dimer_ket(lbl[0], lbl[1]) for lbl in labels]
    else:
        raise ValueError("only one or two dimers are supported")
    return labels, np.column_stack(cols)


def _encode(arr: np.ndarray):
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def state_to_json(state, basis: str = "bare") -> str:
    """Serialize a state; complex entries become ``[re, im]`` pairs."""
    s = np.asarray(state, dtype=complex)
    n_atoms = int(round(math.log2(s.shape[0])))
    labels, u = basis_matrix(basis, n_atoms)
    coords = u.conj().T @ s if s.ndim == 1 else u.conj().T @ s @ u
    doc = {
        "kind": "pure" if s.ndim == 1 else "density",
        "basis": basis,
        "n_atoms": n_atoms,
        "ordering": "atom 0 is the lowest bit of the bare index",
        "labels": list(labels),
        "data": _encode(coords),
    }
    return json.dumps(doc)


def state_from_json(text: str) -> np.ndarray:
    """Inverse of :func:`state_to_json`; returns the state in the bare basis."""
    doc = json.loads(text)
    arr = np.asarray(doc["data"], dtype=float)
    coords = arr[..., 0] + 1j * arr[..., 1]
    _, u = basis_matrix(doc["basis"], doc["n_atoms"])
    if doc["kind"] == "pure":
        return u @ coords
    return u @ coords @ u.conj().T
