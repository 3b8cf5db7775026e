"""Single-shot discretization via block matrix exponentials.

Each target integral is the off-diagonal block of one matrix exponential:

    Phi_1 = exp(t [[-H_cq', S ], [0, H_cq ]]),  S = E_1' Qbar_c E_1
        =>  Q = E_2' Phi_1_22' Phi_1_12 E_2
    Phi_2 = exp(t [[0, I], [0, H_cm']])
        =>  M = E_2' Phi_2_12 E_1' Mbar_c
    Phi_3 = exp(t H_c)
        =>  [[A, B_o], [0, I]] = E_1 Phi_3 E_2
    C_3   = exp(t [[-A_c, G_c G_c'], [0, A_c']])
        =>  R_ww = C_3_22' C_3_12

The R_ww combination uses Phi_22' on the left (equivalently A(t) C_3_12,
with no transpose on A); the other placement is not symmetric and fails
the quadrature cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matcore import Mat, asmat, block, expm, symmetrize
from .exactdefs import CoreResult, DeqSystem


@dataclass(frozen=True, eq=False)
class VanLoanBlocks:
    """The exponential blocks used for extraction at one time point."""

    phi1_11: Mat
    phi1_12: Mat
    phi1_22: Mat
    phi2_12: Mat
    phi2_22: Mat
    phi3: Mat
    c3_12: Mat | None = None
    c3_22: Mat | None = None


def build_blocks(sys: DeqSystem, t: float, G_c: Mat | None = None) -> VanLoanBlocks:
    n_h = sys.n_h
    S = sys.E1.T @ sys.Qbar_c @ sys.E1
    zero = np.zeros((n_h, n_h))
    eye = np.eye(n_h)
    phi1 = expm(t * block([[-sys.H_cq.T, S], [zero, sys.H_cq]]))
    phi2 = expm(t * block([[zero, eye], [zero, sys.H_cm.T]]))
    phi3 = expm(t * sys.H_c)
    c3_12 = c3_22 = None
    if G_c is None:
        G_c = sys.G_c
    if G_c is not None:
        n_x = sys.n_x
        zx = np.zeros((n_x, n_x))
        c3 = expm(t * block([[-sys.A_c, G_c @ G_c.T], [zx, sys.A_c.T]]))
        c3_12 = c3[:n_x, n_x:]
        c3_22 = c3[n_x:, n_x:]
    return VanLoanBlocks(
        phi1_11=phi1[:n_h, :n_h], phi1_12=phi1[:n_h, n_h:],
        phi1_22=phi1[n_h:, n_h:],
        phi2_12=phi2[:n_h, n_h:], phi2_22=phi2[n_h:, n_h:],
        phi3=phi3, c3_12=c3_12, c3_22=c3_22)


def discretize_expm(sys: DeqSystem, t: float | None = None,
                    G_c: Mat | None = None) -> CoreResult:
    """Exact (to expm accuracy) discretization at t (default one interval)."""
    if t is None:
        t = sys.Ts
    blocks = build_blocks(sys, t, G_c=G_c)
    n_x = sys.n_x
    gam = sys.E1 @ blocks.phi3 @ sys.E2
    A = gam[:n_x, :n_x]
    B_o = gam[:n_x, n_x:]
    Q = symmetrize(sys.E2.T @ blocks.phi1_22.T @ blocks.phi1_12 @ sys.E2)
    M = sys.E2.T @ blocks.phi2_12 @ sys.E1.T @ sys.Mbar_c
    R = None
    if blocks.c3_12 is not None:
        R = symmetrize(blocks.c3_22.T @ blocks.c3_12)
    return CoreResult(A=A, B_o=B_o, Q=Q, M=M, R_ww=R, method="expm")


def rww_expm(A_c: Mat, G_c: Mat, t: float) -> Mat:
    """R_ww(t) = int_0^t e^{A_c s} G_c G_c' e^{A_c' s} ds via one exponential."""
    A_c = asmat(A_c)
    G_c = asmat(G_c)
    n = A_c.shape[0]
    z = np.zeros((n, n))
    c3 = expm(t * block([[-A_c, G_c @ G_c.T], [z, A_c.T]]))
    return symmetrize(c3[n:, n:].T @ c3[:n, n:])
