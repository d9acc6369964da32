"""Configuration and identity types, exact counting, subset enumeration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

from .errors import ConfigError, DomainError

Subset = tuple[int, ...]


def parse_ratio(value) -> Fraction:
    """Parse a cache ratio without float rounding.

    Strings go straight to :class:`Fraction` (``"0.04"`` -> ``1/25``). Floats
    are routed through their shortest repr so ``0.04`` also maps to ``1/25``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError(f"cache ratio must be numeric, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as exc:
            raise DomainError(f"cannot parse cache ratio {value!r}") from exc
    raise DomainError(f"cache ratio must be a number or string, got {type(value).__name__}")


def format_ratio(value: Fraction) -> str:
    """Render a ratio as a terminating decimal when possible, else ``p/q``."""
    den = value.denominator
    for p in (2, 5):
        while den % p == 0:
            den //= p
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = 0
    while (value * 10**digits).denominator != 1:
        digits += 1
    scaled = value.numerator * 10**digits // value.denominator
    sign = "-" if scaled < 0 else ""
    text = str(abs(scaled)).rjust(digits + 1, "0")
    if digits == 0:
        return sign + text
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


@dataclass(frozen=True)
class GroupProfile:
    size: int
    rx_antennas: int


@dataclass(frozen=True)
class SystemConfig:
    """Global setup: ``L`` transmit antennas, cache ratio, user groups.

    Users are numbered 1..K; group ``j`` owns a contiguous index range in
    declaration order. ``library_size`` and ``file_size`` are labels only,
    every DoF quantity is independent of them.
    """

    tx_antennas: int
    cache_ratio: Fraction
    groups: tuple[GroupProfile, ...]
    library_size: int = 0
    file_size: int = 0

    def __post_init__(self):
        object.__setattr__(self, "cache_ratio", parse_ratio(self.cache_ratio))
        groups = tuple(
            g if isinstance(g, GroupProfile) else GroupProfile(*g) for g in self.groups
        )
        object.__setattr__(self, "groups", groups)

    @classmethod
    def build(cls, L: int, gamma, groups: Iterable, **kw) -> "SystemConfig":
        return cls(L, parse_ratio(gamma), tuple(groups), **kw)

    @property
    def num_users(self) -> int:
        return sum(g.size for g in self.groups)

    @property
    def cc_gain(self) -> int:
        """Global coded-caching gain ``t = K*gamma`` (must be an integer)."""
        t = self.num_users * self.cache_ratio
        if t.denominator != 1:
            raise DomainError(f"K*gamma = {t} is not an integer")
        return int(t)

    def group_cc_gain(self, j: int) -> int:
        t = self.groups[j].size * self.cache_ratio
        if t.denominator != 1:
            raise DomainError(f"K_({j + 1})*gamma = {t} is not an integer")
        return int(t)

    def group_users(self, j: int) -> range:
        start = sum(g.size for g in self.groups[:j]) + 1
        return range(start, start + self.groups[j].size)

    @property
    def users(self) -> range:
        return range(1, self.num_users + 1)

    def group_of(self, k: int) -> int:
        if not 1 <= k <= self.num_users:
            raise DomainError(f"user {k} outside [1, {self.num_users}]")
        upper = 0
        for j, g in enumerate(self.groups):
            upper += g.size
            if k <= upper:
                return j
        raise AssertionError("unreachable")

    def rx_antennas(self, k: int) -> int:
        return self.groups[self.group_of(k)].rx_antennas

    def rx_map(self) -> dict[int, int]:
        return {k: self.rx_antennas(k) for k in self.users}

    @property
    def antenna_values(self) -> list[int]:
        return sorted({g.rx_antennas for g in self.groups})

    @property
    def min_rx(self) -> int:
        return min(g.rx_antennas for g in self.groups)


class SubpacketId(NamedTuple):
    """Payload of one stream: subpacket ``index`` of subfile ``subfile``
    of the file requested by ``user``. Indices are 1-based."""

    user: int
    subfile: Subset
    index: int

    def __str__(self):
        label = "".join(map(str, self.subfile)) if all(u < 10 for u in self.subfile) else ",".join(map(str, self.subfile))
        return f"W{self.user}_{{{label}}}^{self.index}"


def binomial(n: int, k: int) -> int:
    """Exact binomial coefficient; zero when ``k > n``."""
    if n < 0 or k < 0:
        raise DomainError(f"binomial({n}, {k}) needs nonnegative arguments")
    return math.comb(n, k)


def enumerate_subsets(universe: Iterable[int], size: int) -> list[Subset]:
    """All ``size``-subsets of ``universe`` in lexicographic order."""
    items = sorted(set(universe))
    if size < 0 or size > len(items):
        raise DomainError(f"cannot choose {size} elements from {len(items)}")
    return list(combinations(items, size))


def validate_config(cfg: SystemConfig, require_group_integrality: bool = False) -> int:
    """Check every configuration invariant and return ``t = K*gamma``.

    Raises :class:`ConfigError` listing each violated invariant.
    """
    problems: list[tuple[str, str]] = []
    if not isinstance(cfg.tx_antennas, int) or cfg.tx_antennas < 1:
        problems.append(("tx_antennas", f"must be a positive integer, got {cfg.tx_antennas!r}"))
    gamma = cfg.cache_ratio
    if not 0 < gamma < 1:
        problems.append(("cache_ratio", f"must lie in (0, 1), got {gamma}"))
    if not cfg.groups:
        problems.append(("groups", "at least one group is required"))
    for j, g in enumerate(cfg.groups, start=1):
        if not isinstance(g.size, int) or g.size < 1:
            problems.append((f"groups[{j}].size", f"must be >= 1, got {g.size!r}"))
        if not isinstance(g.rx_antennas, int) or g.rx_antennas < 1:
            problems.append((f"groups[{j}].rx_antennas", f"must be >= 1, got {g.rx_antennas!r}"))
    antennas = [g.rx_antennas for g in cfg.groups]
    if any(a >= b for a, b in zip(antennas, antennas[1:])):
        problems.append(("groups", f"rx antenna counts must be strictly increasing, got {antennas}"))
    if cfg.library_size < 0:
        problems.append(("library_size", "must be nonnegative"))
    if cfg.file_size < 0:
        problems.append(("file_size", "must be nonnegative"))
    if problems:
        raise ConfigError(problems)

    t = cfg.num_users * gamma
    if t.denominator != 1:
        problems.append(("cache_ratio", f"K*gamma = {cfg.num_users}*{gamma} = {t} is not an integer"))
    if require_group_integrality:
        for j, g in enumerate(cfg.groups, start=1):
            tj = g.size * gamma
            if tj.denominator != 1:
                problems.append(
                    (f"groups[{j}].size", f"K_({j})*gamma = {g.size}*{gamma} = {float(tj):g} is not an integer")
                )
    if problems:
        raise ConfigError(problems)
    return int(t)


def user_range(k_eff: int | Sequence[int]) -> tuple[int, ...]:
    if isinstance(k_eff, int):
        return tuple(range(1, k_eff + 1))
    return tuple(sorted(k_eff))
