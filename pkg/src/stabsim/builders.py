"""Rotating-frame Hamiltonians and Lindblad problems for all drive combinations.

Sideband colors follow the usual convention: a "red" qubit-resonator (or
qubit-qubit) sideband exchanges excitations (a^dag b + h.c.), a "blue"
one pumps pairs (a b + h.c.).  All rates and detunings are angular
frequencies in rad/us.

The named builders reproduce fixed drive recipes with their printed
detuning placement; :func:`plan_stabilization` derives resonator
detunings for an arbitrary two-qubit block from its eigenstructure and
assigns them to the resonator that actually mediates each refilling
transition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .hilbert import (
    ComplexOperator,
    EigenSystem,
    SpaceLayout,
    annihilation,
    eigendecompose,
    number_op,
)
from .targets import TWO_QUBIT_LAYOUT, StabilizationTarget, _normalized

COLORS = ("red", "blue")

# local 2x2 qubit ladder operators, basis (g, e)
_SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
_SIGMA_PLUS = _SIGMA_MINUS.conj().T


class EnergyMatchingError(ValueError):
    """The two-qubit block violates E_A + E_D = E_B + E_C."""


def _check_color(color: str):
    if color not in COLORS:
        raise ValueError(f"unknown sideband color {color!r}; expected one of {COLORS}")


@dataclass(frozen=True)
class SidebandDrive:
    """A two-body parametric drive: color, rate and frequency detuning."""

    color: str
    rate: float
    detuning: float = 0.0

    def __post_init__(self):
        _check_color(self.color)
        if self.rate < 0:
            raise ValueError("sideband rate must be non-negative")


@dataclass(frozen=True)
class RabiDrive:
    """A single-qubit drive: rate and frequency detuning."""

    rate: float
    detuning: float = 0.0

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("Rabi rate must be non-negative")


@dataclass(frozen=True)
class DriveSet:
    """All drives applied simultaneously: at most one qubit-qubit sideband,
    one sideband per qubit-resonator pair, and one Rabi drive per qubit."""

    qq: Optional[SidebandDrive] = None
    qr1: Optional[SidebandDrive] = None
    qr2: Optional[SidebandDrive] = None
    rabi_q1: Optional[RabiDrive] = None
    rabi_q2: Optional[RabiDrive] = None


@dataclass(frozen=True)
class NoiseSpec:
    """Dissipation rates: resonator decay (1/us), qubit T1 and pure-dephasing
    times (us).  Infinite times switch the corresponding channel off."""

    kappa1: float
    kappa2: float
    t1_q1: float
    t1_q2: float
    tphi_q1: float = math.inf
    tphi_q2: float = math.inf

    def __post_init__(self):
        for name in ("kappa1", "kappa2", "t1_q1", "t1_q2", "tphi_q1", "tphi_q2"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class LindbladProblem:
    """A Hermitian Hamiltonian plus collapse operators on one layout."""

    hamiltonian: ComplexOperator
    collapse_ops: tuple

    def __post_init__(self):
        if not self.hamiltonian.hermitian:
            raise ValueError("Lindblad Hamiltonian must be Hermitian")
        ops = tuple(self.collapse_ops)
        for op in ops:
            if op.layout != self.hamiltonian.layout:
                raise ValueError("all collapse operators must share the Hamiltonian layout")
        object.__setattr__(self, "collapse_ops", ops)

    @property
    def layout(self) -> SpaceLayout:
        return self.hamiltonian.layout


def qr_coupling(layout: SpaceLayout, pair: int, color: str, rate: float) -> np.ndarray:
    """(rate/2)(a_q a_r + h.c.) for blue, (rate/2)(a_q^dag a_r + h.c.) for red."""
    _check_color(color)
    aq = annihilation(layout, f"q{pair}").entries
    ar = annihilation(layout, f"r{pair}").entries
    term = (aq if color == "blue" else aq.conj().T) @ ar
    return (rate / 2.0) * (term + term.conj().T)


def _resonator_diagonal(layout: SpaceLayout, omega_r1: float, omega_r2: float) -> np.ndarray:
    return omega_r1 * number_op(layout, "r1").entries + omega_r2 * number_op(layout, "r2").entries


def build_even_parity_system(
    omega: float, delta: float, w1: float, w2: float, layout: Optional[SpaceLayout] = None
) -> ComplexOperator:
    """Pair-pumping stabilization Hamiltonian for the (gg, ee) blending family.

    H = (Omega/2)(a_q1 a_q2 + h.c.) + delta n_q1
        + (W1/2)(a_q1 a_r1 + h.c.) + (W2/2)(a_q2 a_r2 + h.c.)
        + ((Delta+delta)/2) n_r1 + ((Delta-delta)/2) n_r2
    """
    layout = layout or SpaceLayout()
    big_delta = math.hypot(omega, delta)
    aq1 = annihilation(layout, "q1").entries
    aq2 = annihilation(layout, "q2").entries
    qq = aq1 @ aq2
    h = (omega / 2.0) * (qq + qq.conj().T)
    h += delta * number_op(layout, "q1").entries
    h += qr_coupling(layout, 1, "blue", w1)
    h += qr_coupling(layout, 2, "blue", w2)
    h += _resonator_diagonal(layout, (big_delta + delta) / 2.0, (big_delta - delta) / 2.0)
    return ComplexOperator(layout, h)


def build_odd_parity_system(
    omega: float, delta: float, w3: float, w4: float, layout: Optional[SpaceLayout] = None
) -> ComplexOperator:
    """Exchange-pumping Hamiltonian for the (ge, eg) blending family.

    Qubit-qubit red sideband at Omega with detuning delta on q1, a red
    sideband on the first qubit-resonator pair (rate W3) and a blue one
    on the second (rate W4); resonator detunings (Delta+delta)/2 and
    (Delta-delta)/2.
    """
    layout = layout or SpaceLayout()
    big_delta = math.hypot(omega, delta)
    aq1 = annihilation(layout, "q1").entries
    aq2 = annihilation(layout, "q2").entries
    qq = aq1.conj().T @ aq2
    h = (omega / 2.0) * (qq + qq.conj().T)
    h += delta * number_op(layout, "q1").entries
    h += qr_coupling(layout, 1, "red", w3)
    h += qr_coupling(layout, 2, "blue", w4)
    h += _resonator_diagonal(layout, (big_delta + delta) / 2.0, (big_delta - delta) / 2.0)
    return ComplexOperator(layout, h)


VARIANTS = ("blue_blue", "red_red", "opposite_detuning")


def build_color_variant(
    omega: float,
    delta: float,
    w1: float,
    w2: float,
    variant: str,
    layout: Optional[SpaceLayout] = None,
) -> ComplexOperator:
    """Even-parity builder with alternate qubit-resonator colors or detunings.

    "blue_blue" is :func:`build_even_parity_system`; "red_red" swaps both
    qubit-resonator sidebands to exchange form with the same resonator
    detunings; "opposite_detuning" keeps the blue sidebands and flips the
    sign of both resonator diagonal terms, which moves the stabilized
    point to the orthogonal member of the family.
    """
    layout = layout or SpaceLayout()
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if variant == "blue_blue":
        return build_even_parity_system(omega, delta, w1, w2, layout)
    big_delta = math.hypot(omega, delta)
    aq1 = annihilation(layout, "q1").entries
    aq2 = annihilation(layout, "q2").entries
    qq = aq1 @ aq2
    h = (omega / 2.0) * (qq + qq.conj().T)
    h += delta * number_op(layout, "q1").entries
    if variant == "red_red":
        h += qr_coupling(layout, 1, "red", w1)
        h += qr_coupling(layout, 2, "red", w2)
        sign = 1.0
    else:
        h += qr_coupling(layout, 1, "blue", w1)
        h += qr_coupling(layout, 2, "blue", w2)
        sign = -1.0
    h += _resonator_diagonal(
        layout, sign * (big_delta + delta) / 2.0, sign * (big_delta - delta) / 2.0
    )
    return ComplexOperator(layout, h)


def build_qubit_block(drives: DriveSet, detuning_convention: str = "q1") -> ComplexOperator:
    """4x4 rotating-frame two-qubit Hamiltonian in the basis (gg, ge, eg, ee).

    `detuning_convention` controls where the qubit-qubit sideband
    detuning sits: "q1" puts it on the q1-excited states, "split"
    distributes it as +-delta/2 across the diagonal (only defined for
    the blue sideband, matching the Rabi-dressed family block).
    """
    if detuning_convention not in ("q1", "split"):
        raise ValueError(f"unknown detuning convention {detuning_convention!r}")
    h = np.zeros((4, 4), dtype=complex)
    if drives.rabi_q1 is not None:
        a1 = drives.rabi_q1.rate / 2.0
        h[0, 2] = h[2, 0] = h[0, 2] + a1
        h[1, 3] = h[3, 1] = h[1, 3] + a1
        h += np.diag([0.0, 0.0, drives.rabi_q1.detuning, drives.rabi_q1.detuning])
    if drives.rabi_q2 is not None:
        a2 = drives.rabi_q2.rate / 2.0
        h[0, 1] = h[1, 0] = h[0, 1] + a2
        h[2, 3] = h[3, 2] = h[2, 3] + a2
        h += np.diag([0.0, drives.rabi_q2.detuning, 0.0, drives.rabi_q2.detuning])
    if drives.qq is not None:
        qq = drives.qq
        coupling = qq.rate / 2.0
        if qq.color == "blue":
            h[0, 3] = h[3, 0] = h[0, 3] + coupling
        else:
            h[1, 2] = h[2, 1] = h[1, 2] + coupling
        if detuning_convention == "q1":
            h += np.diag([0.0, 0.0, qq.detuning, qq.detuning])
        else:
            if qq.color != "blue":
                raise ValueError("split detuning is only defined for the blue qubit-qubit sideband")
            d = qq.detuning / 2.0
            h += np.diag([-d, d, -d, d])
    return ComplexOperator(TWO_QUBIT_LAYOUT, h)


@dataclass(frozen=True)
class StabilizationPlan:
    """Resonator detunings derived from a two-qubit block's eigenstructure."""

    hqq: ComplexOperator
    eigen: EigenSystem
    delta_big: float
    qr1: SidebandDrive
    qr2: SidebandDrive
    target: StabilizationTarget

    @property
    def qr1_detuning(self) -> float:
        return self.qr1.detuning

    @property
    def qr2_detuning(self) -> float:
        return self.qr2.detuning


def _refill_coupling(eigen: EigenSystem, qubit: int, color: str) -> np.ndarray:
    """|<A| o_q |X>| for X = each eigenstate, with o_q the refilling operator.

    A blue sideband refills the target through o_q = a_q^dag (the photon
    is created together with a qubit excitation), a red one through
    o_q = a_q."""
    local = _SIGMA_PLUS if color == "blue" else _SIGMA_MINUS
    op = np.kron(local, np.eye(2)) if qubit == 1 else np.kron(np.eye(2), local)
    a = eigen.vector(0)
    return np.abs(a.conj() @ op @ eigen.vectors)


def plan_stabilization(
    hqq: ComplexOperator,
    w1: float,
    w2: float,
    colors: tuple = ("blue", "blue"),
    rel_tol: float = 1e-6,
) -> StabilizationPlan:
    """Derive resonator photon energies that put all refilling paths on resonance.

    The two detunings are the eigen-gaps E_B - E_A and E_C - E_A of the
    two-qubit block; each gap goes to the resonator whose qubit actually
    couples the target to that eigenstate (ties fall back to ascending
    order).  Raises :class:`EnergyMatchingError` when
    E_A + E_D != E_B + E_C beyond `rel_tol` relative to max|E|.
    """
    if hqq.dim != 4:
        raise ValueError("plan_stabilization expects a 4x4 two-qubit block")
    for color in colors:
        _check_color(color)
    eigen = eigendecompose(hqq)
    e = eigen.values
    scale = max(np.max(np.abs(e)), 1e-30)
    mismatch = abs(e[0] + e[3] - e[1] - e[2])
    if mismatch > rel_tol * scale:
        raise EnergyMatchingError(
            f"E_A+E_D-E_B-E_C = {mismatch:.3e} exceeds {rel_tol:.1e} x max|E| = "
            f"{rel_tol * scale:.3e}; this block cannot be stabilized"
        )
    gap_b = e[1] - e[0]
    gap_c = e[2] - e[0]
    m1 = _refill_coupling(eigen, 1, colors[0])
    m2 = _refill_coupling(eigen, 2, colors[1])
    # r1 takes the gap of whichever middle state q1 connects to the target
    if m1[1] * m2[2] >= m1[2] * m2[1]:
        det1, det2 = gap_b, gap_c
    else:
        det1, det2 = gap_c, gap_b
    target = _normalized("eigenstate", tuple(np.round(e, 12)), eigen.vector(0))
    return StabilizationPlan(
        hqq=hqq,
        eigen=eigen,
        delta_big=float(e[3] - e[0]),
        qr1=SidebandDrive(colors[0], w1, float(det1)),
        qr2=SidebandDrive(colors[1], w2, float(det2)),
        target=target,
    )


def build_from_plan(plan: StabilizationPlan, layout: Optional[SpaceLayout] = None) -> ComplexOperator:
    """Assemble the full-system Hamiltonian described by a stabilization plan."""
    layout = layout or SpaceLayout()
    res_dim = layout.total_dim // 4
    h = np.kron(plan.hqq.entries, np.eye(res_dim, dtype=complex))
    h += qr_coupling(layout, 1, plan.qr1.color, plan.qr1.rate)
    h += qr_coupling(layout, 2, plan.qr2.color, plan.qr2.rate)
    h += _resonator_diagonal(layout, plan.qr1.detuning, plan.qr2.detuning)
    return ComplexOperator(layout, h)


def build_lindblad(h: ComplexOperator, noise: NoiseSpec) -> LindbladProblem:
    """Attach decay and dephasing collapse operators to a Hamiltonian.

    Collapse operators: sqrt(kappa_j) a_rj for each resonator present,
    sqrt(1/T1_qj) a_qj and sqrt(2/Tphi_qj) n_qj for each qubit present.
    A pure-dephasing operator normalized this way makes a lone qubit's
    coherence decay at exactly 1/Tphi.
    """
    layout = h.layout
    ops = []
    for label, rate in (("r1", noise.kappa1), ("r2", noise.kappa2)):
        if label in layout.labels and math.isfinite(rate):
            ops.append(math.sqrt(rate) * annihilation(layout, label))
    for label, t1, tphi in (
        ("q1", noise.t1_q1, noise.tphi_q1),
        ("q2", noise.t1_q2, noise.tphi_q2),
    ):
        if label not in layout.labels:
            continue
        if math.isfinite(t1):
            ops.append(math.sqrt(1.0 / t1) * annihilation(layout, label))
        if math.isfinite(tphi):
            ops.append(math.sqrt(2.0 / tphi) * number_op(layout, label))
    return LindbladProblem(h, tuple(ops))
