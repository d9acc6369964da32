"""Monte-Carlo check that scheduled transmissions are linearly decodable.

Each stream gets a zero-forcing beamformer in the null space of its
equivalent interference channel: the stacked combined channels
``U_k'^H H_k'`` of every co-scheduled user that neither requests the stream
nor caches its subfile. For unicast slots every other user in the slot is
an interferer. Noise is not simulated; decodability here is a rank
property.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FeasibilityError, SeedError
from .model import SubpacketId, SystemConfig
from .scheduler import MULTICAST, Schedule, Transmission

NULL_TOL = 1e-10  # singular values below this span the null space
NULL_MEMBERSHIP_TOL = 1e-9
RESIDUAL_TOL = 1e-8
SIGMA_MIN_TOL = 1e-6
CHANNEL_SIGMA_TOL = 1e-8
MAX_REDRAWS = 100
COMBINER_POLICIES = ("svd", "random")


@dataclass(frozen=True)
class ChannelRealization:
    """``H[k]`` is the ``G_k x L`` channel from the transmitter to user ``k``."""

    H: dict
    seed: int
    L: int


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def draw_channels(cfg: SystemConfig, seed) -> ChannelRealization:
    """i.i.d. CN(0, 1) channels, redrawn if numerically rank deficient.

    ``seed`` may be an int or a sequence of ints (as for numpy's SeedSequence).
    """
    rng = np.random.default_rng(seed)
    L = cfg.tx_antennas
    H = {}
    for k in cfg.users:
        G = cfg.rx_antennas(k)
        for _ in range(MAX_REDRAWS):
            h = _cn(rng, (G, L))
            s = np.linalg.svd(h / np.linalg.norm(h), compute_uv=False)
            if s[-1] > CHANNEL_SIGMA_TOL:
                H[k] = h
                break
        else:
            raise SeedError(f"seed {seed}: no full-rank channel for user {k} in {MAX_REDRAWS} draws")
    return ChannelRealization(H, seed, L)


def build_combiners(tx: Transmission, channels: ChannelRealization, policy: str = "svd",
                    rng: np.random.Generator | None = None) -> dict:
    """Receive combiners ``U_k`` (``G_k x beta_k``) with orthonormal columns.

    ``svd`` takes the leading left singular vectors of ``H_k``; ``random``
    draws a Haar-like orthonormal basis from ``rng``.
    """
    if policy not in COMBINER_POLICIES:
        raise DomainError(f"combiner policy must be one of {COMBINER_POLICIES}")
    out = {}
    for k in tx.targets:
        b = tx.streams(k)
        H = channels.H[k]
        if b > H.shape[0]:
            raise FeasibilityError(f"user {k} asked to decode {b} streams with {H.shape[0]} antennas")
        if policy == "svd":
            U = np.linalg.svd(H)[0][:, :b]
        else:
            if rng is None:
                rng = np.random.default_rng(channels.seed)
            U = np.linalg.qr(_cn(rng, (H.shape[0], b)))[0]
        out[k] = U
    return out


def interferers(tx: Transmission, k: int, subfile) -> tuple[int, ...]:
    """Users a stream for ``k`` with subfile ``P`` must be nulled toward."""
    if k not in tx.targets:
        raise DomainError(f"user {k} is not a target of transmission {tx.index}")
    P = set(subfile)
    if tx.kind == MULTICAST:
        if k in P or not P <= set(tx.targets) - {k}:
            raise DomainError(f"subfile {tuple(subfile)} is not inside K(s) minus user {k}")
        return tuple(u for u in tx.targets if u != k and u not in P)
    return tuple(u for u in tx.targets if u != k)


def equivalent_interference_channel(tx: Transmission, k: int, subfile, channels: ChannelRealization,
                                    combiners: dict) -> np.ndarray:
    """Rows ``U_k'^H H_k'`` stacked for ascending interferers ``k'``."""
    rows = [combiners[u].conj().T @ channels.H[u] for u in interferers(tx, k, subfile)]
    if not rows:
        return np.zeros((0, channels.L), dtype=complex)
    return np.vstack(rows)


def nullity_exact(tx: Transmission, k: int, subfile, L: int) -> int:
    return L - sum(tx.streams(u) for u in interferers(tx, k, subfile))


def _stream_groups(tx: Transmission) -> dict:
    """Payload entries keyed by (user, interferer set).

    Entries in one group share an equivalent channel and need distinct null
    space directions. In a multicast slot the interferer set determines the
    subfile, so this matches grouping by (user, subfile).
    """
    groups: dict = {}
    for k in tx.targets:
        for e in tx.payload.get(k, ()):
            groups.setdefault((k, interferers(tx, k, e.subfile)), []).append(e)
    return groups


def check_rank_nullity(tx: Transmission, L: int) -> list[str]:
    """Exact-integer precondition: each group fits in its null space."""
    problems = []
    for (k, others), entries in _stream_groups(tx).items():
        nullity = L - sum(tx.streams(u) for u in others)
        if nullity < len(entries):
            P = entries[0].subfile
            problems.append(
                f"tx {tx.index}: user {k}, subfile {P}: {len(entries)} streams share a null space "
                f"of dimension L - sum(beta_k') = {nullity}"
            )
    return problems


@dataclass
class BeamformerSet:
    w: dict  # SubpacketId -> (L,) complex unit vector
    measured_nullity: dict = field(default_factory=dict)


def design_beamformers(tx: Transmission, channels: ChannelRealization, combiners: dict) -> BeamformerSet:
    problems = check_rank_nullity(tx, channels.L)
    if problems:
        raise FeasibilityError("; ".join(problems))
    L = channels.L
    out = BeamformerSet({})
    for (k, _), entries in _stream_groups(tx).items():
        Hbar = equivalent_interference_channel(tx, k, entries[0].subfile, channels, combiners)
        if Hbar.shape[0] == 0:
            basis = np.eye(L, dtype=complex)
        else:
            _, s, vh = np.linalg.svd(Hbar, full_matrices=True)
            rank = int(np.sum(s > NULL_TOL))
            basis = vh[rank:].conj().T
        out.measured_nullity[(k, entries[0].subfile)] = basis.shape[1]
        if basis.shape[1] < len(entries):
            raise FeasibilityError(
                f"tx {tx.index}: numerical nullity {basis.shape[1]} < {len(entries)} for user {k}"
            )
        for i, e in enumerate(entries):
            w = basis[:, i]
            out.w[e] = w / np.linalg.norm(w)
    return out


@dataclass(frozen=True)
class UserCheck:
    user: int
    beta: int
    residual: float
    sigma_min: float
    decodable: bool


@dataclass
class VerificationReport:
    index: int
    kind: str
    users: list
    interval: int = 1
    error: str | None = None

    @property
    def decodable(self) -> bool:
        return self.error is None and all(u.decodable for u in self.users)


def verify_transmission(tx: Transmission, channels: ChannelRealization, policy: str = "svd",
                        rng: np.random.Generator | None = None) -> VerificationReport:
    U = build_combiners(tx, channels, policy, rng)
    bf = design_beamformers(tx, channels, U)
    checks = []
    for k in tx.targets:
        G_eff = U[k].conj().T @ channels.H[k]  # beta_k x L
        residual = 0.0
        for u in tx.targets:
            if u == k:
                continue
            for e in tx.payload.get(u, ()):
                if tx.kind == MULTICAST and k in e.subfile:
                    continue  # removed by user k's cache
                w = bf.w[e]
                residual = max(residual, float(np.linalg.norm(G_eff @ w) / np.linalg.norm(w)))
        own = tx.payload.get(k, ())
        if own:
            E = G_eff @ np.column_stack([bf.w[e] for e in own])
            sigma = float(np.linalg.svd(E, compute_uv=False)[-1])
        else:
            sigma = float("inf")
        ok = residual <= RESIDUAL_TOL and sigma >= SIGMA_MIN_TOL
        checks.append(UserCheck(k, len(own), residual, sigma, ok))
    return VerificationReport(tx.index, tx.kind, checks)


@dataclass
class ScheduleVerification:
    seeds: list
    reports: dict  # seed -> list[VerificationReport]
    redraws: int = 0

    def all_reports(self):
        for seed in self.seeds:
            for r in self.reports[seed]:
                yield seed, r

    @property
    def feasibility_errors(self) -> list[str]:
        return [f"seed {seed}: {r.error}" for seed, r in self.all_reports() if r.error]

    @property
    def evaluated(self) -> int:
        return sum(1 for _, r in self.all_reports() if r.error is None)

    @property
    def pass_rate(self) -> float:
        n = self.evaluated
        if n == 0:
            return 0.0
        return sum(1 for _, r in self.all_reports() if r.error is None and r.decodable) / n

    @property
    def worst_residual(self) -> float:
        return max((u.residual for _, r in self.all_reports() for u in r.users), default=0.0)

    @property
    def worst_sigma_min(self) -> float:
        return min((u.sigma_min for _, r in self.all_reports() for u in r.users), default=float("inf"))

    @property
    def passed(self) -> bool:
        return not self.feasibility_errors and self.evaluated > 0 and self.pass_rate == 1.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["seed", "interval", "s", "kind", "user", "beta_k", "residual", "sigma_min", "decodable"])
        for seed, r in self.all_reports():
            if r.error:
                w.writerow([seed, r.interval, r.index, r.kind, "", "", "", "", f"error: {r.error}"])
            for u in r.users:
                w.writerow([seed, r.interval, r.index, r.kind, u.user, u.beta,
                            f"{u.residual:.3e}", f"{u.sigma_min:.3e}", int(u.decodable)])
        return buf.getvalue()


def verify_schedule(schedules, cfg: SystemConfig, seeds, policy: str = "svd",
                    max_redraws: int = 3) -> ScheduleVerification:
    """Verify every transmission of one or more schedules for each seed.

    A transmission failing only the effective-matrix conditioning test is
    retried on fresh channels (``max_redraws`` times); retries are counted.
    Feasibility failures are recorded and excluded from the pass rate.
    """
    if isinstance(schedules, Schedule):
        schedules = [schedules]
    seeds = list(seeds)
    out = ScheduleVerification(seeds, {})
    for seed in seeds:
        channels = draw_channels(cfg, seed)
        rng = np.random.default_rng([seed, 1])
        reports = []
        for sch in schedules:
            for tx in sch.transmissions:
                try:
                    rep = verify_transmission(tx, channels, policy, rng)
                    attempt = 0
                    while not rep.decodable and attempt < max_redraws and all(
                        u.residual <= RESIDUAL_TOL for u in rep.users
                    ):
                        attempt += 1
                        out.redraws += 1
                        fresh = draw_channels(cfg, [seed, sch.interval, tx.index, attempt])
                        rep = verify_transmission(tx, fresh, policy, rng)
                except FeasibilityError as exc:
                    rep = VerificationReport(tx.index, tx.kind, [], error=str(exc))
                rep.interval = sch.interval
                reports.append(rep)
        out.reports[seed] = reports
    return out
