"""Exact definitions of the discretization targets and a quadrature oracle.

The targets over one sampling interval are

    A(t)    = e^{A_c t}
    A_v(t)  = e^{V A_c t}
    B_1(t)  = int_0^t e^{A_c s} ds  B_1c
    B_2(t)  = int_0^t e^{V A_c s} ds  B_2c_bar
    Q(t)    = int_0^t e^{-mu s} Gamma(s)' Qbar_c Gamma(s) ds
    M(t)    = int_0^t e^{-mu s} Gamma(s)' Mbar_c ds
    R_ww(t) = int_0^t e^{A_c s} G_c G_c' e^{A_c' s} ds

with Gamma(s) = E_1 e^{H_c s} E_2 = [[A(s), B_o(s)], [0, I]]. The system
matrices come in two shapes: a single block [[A_c, B_c], [0, 0]] for plain
plants, and the three-block form (H_1c, H_2c, H_3c stacked diagonally with
combination selectors E_1 = [I, I, -I], E_2 = [I; I; I]) for delayed plants.

`oracle_quadrature` evaluates every target by matrix exponentials at
composite-Simpson nodes; it is the slow ground truth the fast methods are
tested against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matcore import DimensionError, DomainError, Mat, block, expm, symmetrize
from .model import ContinuousStateSpace, CostSpec, DelayRealization


@dataclass(frozen=True, eq=False)
class DeqSystem:
    """Assembled generators of the discretization ODE system."""

    delay: bool
    A_c: Mat
    B_1c: Mat
    B_2c_bar: Mat
    V: Mat
    C_c: Mat
    D_o: Mat
    mu: float
    Ts: float
    H_c: Mat
    H_cq: Mat
    H_cm: Mat
    E1: Mat
    E2: Mat
    Qbar_c: Mat
    Mbar_c: Mat
    H_1c: Mat | None = None
    H_2c: Mat | None = None
    H_3c: Mat | None = None
    G_c: Mat | None = None
    source: object = None

    @property
    def n_x(self):
        return self.A_c.shape[0]

    @property
    def n_in(self):
        """Input columns of B_1c: n_u for plain plants, (m_bar+1) n_u delayed."""
        return self.B_1c.shape[1]

    @property
    def n_xu(self):
        return self.n_x + self.n_in

    @property
    def n_h(self):
        """Size of the stacked generator H_c (3 n_xu delayed, n_xu plain)."""
        return self.H_c.shape[0]

    @property
    def n_z(self):
        return self.C_c.shape[0]

    def gamma(self, t: float) -> Mat:
        """Gamma(t) = E_1 e^{H_c t} E_2, the [[A, B_o], [0, I]] transition."""
        if self.delay:
            return expm(self.H_1c * t) + expm(self.H_2c * t) - expm(self.H_3c * t)
        return expm(self.H_c * t)

    def h_q(self, t: float) -> Mat:
        return expm(self.H_cq * t)

    def h_m(self, t: float) -> Mat:
        return expm(self.H_cm * t)

    def gamma_q(self, t: float) -> Mat:
        return self.E1 @ self.h_q(t) @ self.E2

    def gamma_m(self, t: float) -> Mat:
        return self.E1 @ self.h_m(t) @ self.E2


@dataclass(frozen=True, eq=False)
class TargetSet:
    """All discretization targets evaluated at one time point."""

    A: Mat
    A_v: Mat
    B_1: Mat
    B_2: Mat
    B_o: Mat
    Q: Mat
    M: Mat
    R_ww: Mat | None = None


@dataclass(frozen=True, eq=False)
class CoreResult:
    """Discretization output (A, B_o, Q, M, optional R_ww) with provenance."""

    A: Mat
    B_o: Mat
    Q: Mat
    M: Mat
    R_ww: Mat | None
    method: str
    scheme: str | None = None
    steps: int | None = None
    doublings: int | None = None
    iterations: int | None = None


def build_deq(plant, cost: CostSpec) -> DeqSystem:
    """Assemble the ODE-system generators for a plant and cost.

    A plain ContinuousStateSpace yields the single-block structure; a
    DelayRealization yields the three-block delayed structure. Zero delays
    through the delayed structure collapse to the plain one (V = 0,
    B_2c_bar = 0), which is checked by tests rather than special-cased here.
    """
    if cost.mu < 0:
        raise DomainError(f"discount must be >= 0, got {cost.mu}")
    if isinstance(plant, ContinuousStateSpace):
        if plant.delays is not None and any(t > 0 for t in plant.delays):
            raise DimensionError(
                "state space has nonzero delays; realize_delays(...) first")
        delay = False
        A_c, B_1c, C_c, D_o = plant.A_c, plant.B_c, plant.C_c, plant.D_c
        V = np.zeros_like(A_c)
        B_2c_bar = np.zeros_like(B_1c)
        G_c = plant.G_c
    elif isinstance(plant, DelayRealization):
        delay = True
        A_c, B_1c, C_c, D_o = plant.A_c, plant.B_1c, plant.C_c, plant.D_o
        V = plant.V
        B_2c_bar = plant.B_2c_bar
        G_c = plant.G_c
    else:
        raise DimensionError(f"cannot build system from {type(plant).__name__}")

    n_x, n_in = B_1c.shape
    n_xu = n_x + n_in
    if C_c.shape[0] != cost.n_z:
        raise DimensionError(
            f"plant has {C_c.shape[0]} outputs but Q_c is {cost.n_z}x{cost.n_z}")

    zx = np.zeros((n_in, n_x))
    zu = np.zeros((n_in, n_in))
    H_1c = block([[A_c, B_1c], [zx, zu]])
    H_2c = block([[V @ A_c, B_2c_bar], [zx, zu]])
    H_3c = block([[V @ A_c, np.zeros_like(B_1c)], [zx, zu]])
    if delay:
        zh = np.zeros((n_xu, n_xu))
        H_c = block([[H_1c, zh, zh], [zh, H_2c, zh], [zh, zh, H_3c]])
        eye = np.eye(n_xu)
        E1 = np.hstack([eye, eye, -eye])
        E2 = np.vstack([eye, eye, eye])
    else:
        H_c = H_1c
        E1 = np.eye(n_xu)
        E2 = np.eye(n_xu)
    n_h = H_c.shape[0]
    H_cq = H_c - (cost.mu / 2.0) * np.eye(n_h)
    H_cm = H_c - cost.mu * np.eye(n_h)

    CD = np.hstack([C_c, D_o])
    Mbar_c = -CD.T @ cost.Q_c
    Qbar_c = symmetrize(-Mbar_c @ CD)  # = CD' Q_c CD

    return DeqSystem(delay=delay, A_c=A_c, B_1c=B_1c, B_2c_bar=B_2c_bar, V=V,
                     C_c=C_c, D_o=D_o, mu=cost.mu, Ts=cost.Ts, H_c=H_c,
                     H_cq=H_cq, H_cm=H_cm, E1=E1, E2=E2, Qbar_c=Qbar_c,
                     Mbar_c=Mbar_c,
                     H_1c=H_1c if delay else None,
                     H_2c=H_2c if delay else None,
                     H_3c=H_3c if delay else None,
                     G_c=G_c, source=plant)


def _simpson_weights(panels: int, h: float) -> np.ndarray:
    w = np.full(panels + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (h / 3.0)


def oracle_quadrature(sys: DeqSystem, t: float | None = None,
                      panels: int = 4096, G_c: Mat | None = None) -> TargetSet:
    """Evaluate every target at t by composite Simpson over expm nodes.

    Error decays as O(panels^-4). `G_c` overrides the system's diffusion
    matrix; R_ww is None when neither is given.
    """
    if panels < 2 or panels % 2:
        raise DomainError(f"panels must be even and >= 2, got {panels}")
    if t is None:
        t = sys.Ts
    if G_c is None:
        G_c = sys.G_c
    h = t / panels
    w = _simpson_weights(panels, h)
    disc = np.exp(-sys.mu * h * np.arange(panels + 1))

    n_x = sys.n_x
    PA = expm(sys.A_c * h)
    PV = expm(sys.V @ sys.A_c * h)
    PH = expm(sys.H_c * h)
    GG = G_c @ G_c.T if G_c is not None else None

    XA = np.eye(n_x)                     # e^{A_c s_k}
    XV = np.eye(n_x)                     # e^{V A_c s_k}
    XH = np.eye(sys.n_h)                 # e^{H_c s_k}
    SA = np.zeros((n_x, n_x))            # int e^{A_c s} ds
    SV = np.zeros((n_x, n_x))
    SQ = np.zeros((sys.n_xu, sys.n_xu))
    SM = np.zeros((sys.n_xu, sys.n_z))
    SR = np.zeros((n_x, n_x)) if GG is not None else None

    for k in range(panels + 1):
        SA += w[k] * XA
        SV += w[k] * XV
        G = sys.E1 @ XH @ sys.E2
        SQ += (w[k] * disc[k]) * (G.T @ (sys.Qbar_c @ G))
        SM += (w[k] * disc[k]) * (G.T @ sys.Mbar_c)
        if GG is not None:
            SR += w[k] * (XA @ GG @ XA.T)
        if k < panels:
            XA = XA @ PA
            XV = XV @ PV
            XH = XH @ PH

    B_1 = SA @ sys.B_1c
    B_2 = SV @ sys.B_2c_bar
    return TargetSet(A=XA, A_v=XV, B_1=B_1, B_2=B_2, B_o=B_1 + B_2,
                     Q=symmetrize(SQ), M=SM,
                     R_ww=symmetrize(SR) if SR is not None else None)


def b_alternative(A_c: Mat, B_c: Mat, Ts: float, N: int) -> Mat:
    """Integrate dB/dt = A_c B + B_c, B(0) = 0, with N classic-RK4 steps.

    The other form of the same integral (dB/dt = e^{A_c t} B_c) is what the
    fixed-step method uses; keeping both routes lets tests cross-check them.
    """
    A_c = np.asarray(A_c, dtype=float)
    B_c = np.asarray(B_c, dtype=float)
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    h = Ts / N
    B = np.zeros_like(B_c)
    for _ in range(N):
        k1 = A_c @ B + B_c
        k2 = A_c @ (B + 0.5 * h * k1) + B_c
        k3 = A_c @ (B + 0.5 * h * k2) + B_c
        k4 = A_c @ (B + h * k3) + B_c
        B = B + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return B
