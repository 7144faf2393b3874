"""Recursive quasi-orthogonal space-time block encoder.

Spreads Ns source symbols over Ns time slots and Ns transmit antennas.
The base case is the 2x2 Alamouti matrix; larger codes double through

    S_2(q1, q2) = [[ q1,   q2 ],
                   [-q2*,  q1*]]

    S_2m(q) = [[ A,   B ],      A = S_m(first half of q)
               [-B*,  A*]]      B = S_m(second half of q)

which keeps the code rate at one symbol per time slot.  For N >= 4 the
Gram matrix S^H S is a*I plus an anti-diagonal interference pattern, the
quasi-orthogonal residue that the receive-side network has to resolve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["QostbcBlock", "qostbc_encode", "quasi_orthogonality_defect"]


@dataclass(frozen=True)
class QostbcBlock:
    """One codeword: source symbols q and the code matrix S (rows = time slots)."""

    q: np.ndarray  # (Ns,) complex
    S: np.ndarray  # (Ns, Ns) complex; column = antenna


def _build(q: np.ndarray) -> np.ndarray:
    n = q.shape[0]
    if n == 2:
        return np.array([[q[0], q[1]], [-np.conj(q[1]), np.conj(q[0])]])
    a = _build(q[: n // 2])
    b = _build(q[n // 2:])
    return np.block([[a, b], [-b.conj(), a.conj()]])


def qostbc_encode(q: np.ndarray) -> QostbcBlock:
    """Encode Ns symbols into the Ns x Ns recursive quasi-orthogonal matrix.

    Ns must be a power of two, at least 2.  Every entry of S is one of
    +-q_i or +-q_i*, so the total energy is ||S||_F^2 = Ns * ||q||^2.
    """
    q = np.asarray(q, dtype=np.complex128).reshape(-1)
    n = q.shape[0]
    if n < 2 or (n & (n - 1)) != 0:
        raise ValueError(f"symbol count must be a power of two >= 2, got {n}")
    return QostbcBlock(q=q, S=_build(q))


def quasi_orthogonality_defect(S: np.ndarray) -> float:
    """Off-diagonal-to-diagonal Frobenius ratio of the Gram matrix S^H S.

    Zero for the Alamouti base case; for N >= 4 the recursion leaves a
    bounded anti-diagonal interference block.  A zero matrix returns 0
    by convention.
    """
    S = np.asarray(S)
    gram = S.conj().T @ S
    diag = np.diag(np.diag(gram))
    off = gram - diag
    denom = np.linalg.norm(diag)
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(off) / denom)
