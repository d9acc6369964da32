"""Closed-form DoF of the min-G, grouping and phantom delivery schemes.

All arithmetic is exact: counts are Python ints, DoF values are
:class:`fractions.Fraction`. Floats only appear in :func:`render_dof`.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Sequence

from .errors import DomainError, FeasibilityError
from .model import SystemConfig, binomial, validate_config
from .optimizer import is_feasible, solve_symmetric


def round_dof(value: Fraction, places: int = 2) -> Decimal:
    """Round half away from zero, exactly."""
    value = Fraction(value)
    scale = 10**places
    scaled = abs(value) * scale
    q = int(scaled + Fraction(1, 2))  # floor(x + 1/2) for x >= 0
    sign = -1 if value < 0 else 1
    return Decimal(sign * q).scaleb(-places)


def render_dof(value: Fraction, places: int = 2) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{round_dof(value, places):.{places}f}"


def weighted_dof(stream_sizes: Sequence, streams_per_tx: Sequence[int]) -> Fraction:
    """Stream-size weighted average of per-transmission stream counts."""
    if len(stream_sizes) != len(streams_per_tx):
        raise DomainError(
            f"length mismatch: {len(stream_sizes)} stream sizes vs {len(streams_per_tx)} counts"
        )
    if not stream_sizes:
        raise DomainError("need at least one transmission")
    num = Fraction(0)
    den = Fraction(0)
    for f, n in zip(stream_sizes, streams_per_tx):
        f = Fraction(f)
        if f <= 0:
            raise DomainError(f"stream sizes must be positive, got {f}")
        if n < 0:
            raise DomainError(f"stream counts must be nonnegative, got {n}")
        num += f * n
        den += f
    return num / den


@dataclass(frozen=True)
class SymmetricPlan:
    """One symmetric sub-design over ``users`` users with CC gain ``t``."""

    users: int
    t: int
    G: int
    omega: int
    beta: int

    @property
    def subfiles(self) -> int:
        return binomial(self.users, self.t)

    @property
    def subpackets_per_subfile(self) -> int:
        return binomial(self.users - self.t - 1, self.omega - self.t - 1) * self.beta

    @property
    def transmissions(self) -> int:
        return binomial(self.users, self.omega) * binomial(self.omega - 1, self.t)

    @property
    def dof(self) -> Fraction:
        return Fraction(self.omega * self.beta)


@dataclass(frozen=True)
class MinGPlan(SymmetricPlan):
    @property
    def check_G(self) -> int:
        return self.G


def dof_min_g(cfg: SystemConfig) -> MinGPlan:
    t = validate_config(cfg)
    K = cfg.num_users
    if t + 1 > K:
        raise DomainError(f"t + 1 = {t + 1} exceeds K = {K}")
    G = cfg.min_rx
    design = solve_symmetric(K, t, cfg.tx_antennas, G)
    return MinGPlan(K, t, G, design.omega, design.beta)


@dataclass(frozen=True)
class GroupingPlan:
    groups: tuple[SymmetricPlan, ...]
    num_users: int

    @property
    def dof(self) -> Fraction:
        total = sum(Fraction(g.users, self.num_users) / (g.omega * g.beta) for g in self.groups)
        return 1 / total

    @property
    def transmissions(self) -> int:
        return sum(g.transmissions for g in self.groups)


def dof_grouping(cfg: SystemConfig) -> GroupingPlan:
    validate_config(cfg, require_group_integrality=True)
    plans = []
    for j, g in enumerate(cfg.groups):
        tj = cfg.group_cc_gain(j)
        if tj + 1 > g.size:
            raise DomainError(f"group {j + 1}: K_(j)*gamma + 1 = {tj + 1} exceeds K_(j) = {g.size}")
        design = solve_symmetric(g.size, tj, cfg.tx_antennas, g.rx_antennas)
        plans.append(SymmetricPlan(g.size, tj, g.rx_antennas, design.omega, design.beta))
    return GroupingPlan(tuple(plans), cfg.num_users)


@dataclass(frozen=True)
class PhantomCounts:
    Z: int
    Z_MC: int
    Z_UC: int
    S_MC: int
    S_UC: int  # ceil(Z_UC / L)

    def __iter__(self):
        return iter((self.Z, self.Z_MC, self.Z_UC, self.S_MC, self.S_UC))


@dataclass(frozen=True)
class PhantomDesign:
    hat_G: int
    omega: int
    beta: int
    t: int
    L: int
    K: int
    group_sizes: tuple[int, ...]
    group_rx: tuple[int, ...]
    counts: PhantomCounts

    @property
    def group_betas(self) -> tuple[int, ...]:
        return tuple(min(g, self.beta) for g in self.group_rx)

    @property
    def hat_J(self) -> tuple[int, ...]:
        """0-based indices of the groups with fewer antennas than ``hat_G``."""
        return tuple(j for j, g in enumerate(self.group_rx) if g < self.hat_G)

    @property
    def s_mc(self) -> int:
        return self.counts.S_MC

    @property
    def s_uc_exact(self) -> Fraction:
        return Fraction(self.counts.Z_UC, self.L)

    @property
    def s_uc_ceil(self) -> int:
        return self.counts.S_UC

    @property
    def divisible(self) -> bool:
        return self.counts.Z_UC % self.L == 0

    @property
    def dof(self) -> Fraction:
        """Closed form assuming every unicast slot carries ``L`` streams."""
        deficit = sum((self.beta - self.group_betas[j]) * self.group_sizes[j] for j in self.hat_J)
        KL = self.K * self.L
        return Fraction(self.omega * self.beta * KL, KL + self.omega * deficit)

    @property
    def dof_ceiling(self) -> Fraction:
        """Delivered subpackets over transmissions with ``ceil(Z_UC / L)`` unicast slots."""
        c = self.counts
        return Fraction(c.Z_MC + c.Z_UC, c.S_MC + c.S_UC)

    @property
    def dof_gap(self) -> Fraction:
        return self.dof - self.dof_ceiling

    def user_beta(self, rx: int) -> int:
        return min(rx, self.beta)


def _check_phantom_args(cfg: SystemConfig, hat_G: int, omega: int, beta: int) -> int:
    t = validate_config(cfg)
    lo, hi = cfg.groups[0].rx_antennas, cfg.groups[-1].rx_antennas
    if not lo <= hat_G <= hi:
        raise DomainError(f"hat_G={hat_G} outside [{lo}, {hi}]")
    if omega > cfg.num_users:
        raise DomainError(f"omega={omega} exceeds K={cfg.num_users}")
    if not is_feasible(omega, beta, t, cfg.tx_antennas, hat_G):
        raise FeasibilityError(
            f"(hat_G={hat_G}, omega={omega}, beta={beta}) violates "
            f"beta <= min(hat_G, (L - (omega - t - 1) beta) C(omega - 1, t)) with t={t}, L={cfg.tx_antennas}"
        )
    return t


def phantom_counts(cfg: SystemConfig, hat_G: int, omega: int, beta: int) -> PhantomCounts:
    t = _check_phantom_args(cfg, hat_G, omega, beta)
    K, L = cfg.num_users, cfg.tx_antennas
    per_user = binomial(K - 1, omega - 1) * binomial(omega - 1, t)  # MC slots each user joins
    Z = K * per_user * beta
    Z_MC = per_user * sum(min(g.rx_antennas, beta) * g.size for g in cfg.groups)
    Z_UC = per_user * sum(
        (beta - min(g.rx_antennas, beta)) * g.size for g in cfg.groups if g.rx_antennas < hat_G
    )
    # groups with G_(j) >= hat_G >= beta lose nothing, so both routes agree
    assert Z - Z_MC == Z_UC, (Z, Z_MC, Z_UC)
    S_MC = binomial(K, omega) * binomial(omega - 1, t)
    S_UC = -(-Z_UC // L)
    return PhantomCounts(Z, Z_MC, Z_UC, S_MC, S_UC)


def phantom_design(cfg: SystemConfig, hat_G: int, omega: int, beta: int) -> PhantomDesign:
    counts = phantom_counts(cfg, hat_G, omega, beta)
    return PhantomDesign(
        hat_G=hat_G,
        omega=omega,
        beta=beta,
        t=cfg.cc_gain,
        L=cfg.tx_antennas,
        K=cfg.num_users,
        group_sizes=tuple(g.size for g in cfg.groups),
        group_rx=tuple(g.rx_antennas for g in cfg.groups),
        counts=counts,
    )


def dof_phantom(cfg: SystemConfig, hat_G: int, omega: int, beta: int) -> Fraction:
    d = phantom_design(cfg, hat_G, omega, beta)
    c = d.counts
    via_counts = Fraction(c.Z_MC + c.Z_UC) / (c.S_MC + Fraction(c.Z_UC, d.L))
    if via_counts != d.dof:
        raise AssertionError(f"closed form {d.dof} != count ratio {via_counts}")
    return d.dof
