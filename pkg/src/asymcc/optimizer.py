"""Integer design search for (users per transmission, streams per user).

The feasibility test is the cross-multiplied form of the linear
decodability bound::

    beta <= G   and   beta <= (L - (omega - t - 1) * beta) * C(omega - 1, t)

which is exact in big integers and never divides binomials.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import AsymCCError, DomainError
from .model import SystemConfig, binomial, validate_config


@dataclass(frozen=True)
class SymmetricDesign:
    omega: int
    beta: int

    @property
    def dof(self) -> int:
        return self.omega * self.beta


def is_feasible(omega: int, beta: int, t: int, L: int, G: int) -> bool:
    if omega <= t:
        raise DomainError(f"omega={omega} must exceed t={t}: no multicast group exists")
    if beta < 1:
        raise DomainError(f"beta must be >= 1, got {beta}")
    if beta > G:
        return False
    slack = L - (omega - t - 1) * beta
    if slack <= 0:
        return False
    return beta <= slack * binomial(omega - 1, t)


def solve_symmetric(k_eff: int, t: int, L: int, G: int) -> SymmetricDesign:
    """Exhaustive argmax of ``omega * beta`` over the feasible region.

    Ties go to the larger ``omega``, then the larger ``beta``.
    """
    if t < 0 or t + 1 > k_eff:
        raise DomainError(f"need 0 <= t and t + 1 <= K (t={t}, K={k_eff})")
    best = None
    for omega in range(t + 1, k_eff + 1):
        if L - (omega - t - 1) <= 0:
            # beta = 1 already infeasible, and the bound only tightens in omega
            break
        for beta in range(1, G + 1):
            if not is_feasible(omega, beta, t, L, G):
                continue
            key = (omega * beta, omega, beta)
            if best is None or key > best:
                best = key
    if best is None:
        raise AsymCCError(f"no feasible design for K={k_eff}, t={t}, L={L}, G={G}")
    return SymmetricDesign(best[1], best[2])


@dataclass(frozen=True)
class GridCell:
    hat_G: int
    omega: int
    beta: int
    feasible: bool
    dof: Fraction | None = None
    transmissions: int | None = None  # S_MC + ceil(Z_UC / L)


@dataclass
class PhantomSearch:
    best: object  # analytics.PhantomDesign
    cells: list[GridCell] = field(default_factory=list)

    def cell(self, hat_G: int, omega: int, beta: int) -> GridCell | None:
        for c in self.cells:
            if (c.hat_G, c.omega, c.beta) == (hat_G, omega, beta):
                return c
        return None


def phantom_grid(cfg: SystemConfig, hat_G: int, omegas, betas) -> list[GridCell]:
    """Evaluate phantom DoF on an explicit grid. Any ``hat_G`` is accepted."""
    from .analytics import phantom_design

    t = validate_config(cfg)
    cells = []
    for beta in betas:
        for omega in omegas:
            if omega <= t or beta < 1 or not is_feasible(omega, beta, t, cfg.tx_antennas, hat_G):
                cells.append(GridCell(hat_G, omega, beta, False))
                continue
            d = phantom_design(cfg, hat_G, omega, beta)
            cells.append(GridCell(hat_G, omega, beta, True, d.dof, d.s_mc + d.s_uc_ceil))
    return cells


def solve_phantom(cfg: SystemConfig) -> PhantomSearch:
    """Search ``hat_G`` over the group antenna counts and every feasible
    ``(omega, beta)`` for the best phantom design.

    Ranking: larger DoF, then fewer total transmissions, then larger
    ``omega``, then smaller ``hat_G``, then larger ``beta``.
    """
    from .analytics import phantom_design

    t = validate_config(cfg)
    L, K = cfg.tx_antennas, cfg.num_users
    cells: list[GridCell] = []
    best_key, best = None, None
    for hat_G in cfg.antenna_values:
        for omega in range(t + 1, K + 1):
            for beta in range(1, hat_G + 1):
                if not is_feasible(omega, beta, t, L, hat_G):
                    cells.append(GridCell(hat_G, omega, beta, False))
                    continue
                d = phantom_design(cfg, hat_G, omega, beta)
                total = d.s_mc + d.s_uc_ceil
                cells.append(GridCell(hat_G, omega, beta, True, d.dof, total))
                key = (d.dof, -total, omega, -hat_G, beta)
                if best_key is None or key > best_key:
                    best_key, best = key, d
            if L - (omega - t - 1) <= 0:
                break
    if best is None:
        raise AsymCCError("no feasible phantom design")
    return PhantomSearch(best, cells)
