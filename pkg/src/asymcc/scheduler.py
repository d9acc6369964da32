"""Placement maps and transmission-by-transmission delivery schedules.

Schedules are index-level: every stream is named by a :class:`SubpacketId`
and no file content is materialized. The symmetric construction repeats
each ``omega``-subset of users ``C(omega-1, t)`` times; in copy ``c`` user
``k`` takes subfile indices ``(c*beta + j) mod C(omega-1, t)`` for
``j < beta`` from the lexicographic list of ``t``-subsets of the target set
without ``k``. Across the copies every such subfile then receives exactly
``beta`` subpackets and no subfile repeats more than
``ceil(beta / C(omega-1, t))`` times inside one transmission.
"""

from __future__ import annotations

import json
import random
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .analytics import (
    GroupingPlan,
    MinGPlan,
    PhantomDesign,
    SymmetricPlan,
    dof_grouping,
    dof_min_g,
    phantom_design,
    weighted_dof,
)
from .errors import DomainError, FeasibilityError, ScheduleSizeError, SchedulingError
from .model import SubpacketId, SystemConfig, binomial, user_range
from .optimizer import is_feasible

DEFAULT_MAX_USERS = 14
REMOVAL_POLICIES = ("drop-last", "random")

MULTICAST = "multicast"
UNICAST = "unicast"


@dataclass(frozen=True)
class PlacementMap:
    """User ``k`` caches subfile ``P`` of every file iff ``k in P``."""

    users: tuple[int, ...]
    t: int
    phi: int

    @property
    def theta(self) -> int:
        return binomial(len(self.users), self.t)

    def caches(self, k: int, subfile: Iterable[int]) -> bool:
        return k in subfile

    def cached_count(self, k: int) -> int:
        if k not in self.users:
            return 0
        return binomial(len(self.users) - 1, self.t - 1) if self.t else 0

    def cached_fraction(self, k: int) -> Fraction:
        return Fraction(self.cached_count(k), self.theta)

    def missing(self):
        """Yield every subpacket some user lacks, in canonical order."""
        for k in self.users:
            others = [u for u in self.users if u != k]
            for P in combinations(others, self.t):
                for q in range(1, self.phi + 1):
                    yield SubpacketId(k, P, q)

    @property
    def missing_count(self) -> int:
        K = len(self.users)
        return K * binomial(K - 1, self.t) * self.phi


@dataclass(frozen=True)
class Transmission:
    kind: str
    index: int
    targets: tuple[int, ...]
    payload: dict  # user -> tuple[SubpacketId, ...]

    def streams(self, k: int) -> int:
        return len(self.payload.get(k, ()))

    @property
    def total_streams(self) -> int:
        return sum(len(v) for v in self.payload.values())

    def entries(self):
        for k in self.targets:
            yield from self.payload.get(k, ())

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "kind": self.kind,
            "targets": list(self.targets),
            "payload": [[e.user, list(e.subfile), e.index] for e in self.entries()],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Transmission":
        payload: dict[int, list] = defaultdict(list)
        for user, subfile, q in d["payload"]:
            payload[user].append(SubpacketId(user, tuple(subfile), q))
        return cls(d["kind"], d["index"], tuple(d["targets"]), {k: tuple(v) for k, v in payload.items()})


@dataclass
class Schedule:
    """A materialized delivery schedule for one delivery interval.

    ``beta`` is the per-user stream count of the (reference) symmetric
    design; for phantom schedules it is the virtual count and ``hat_G`` is
    set. ``rx`` maps every user to its real antenna count.
    """

    scheme: str
    placement: PlacementMap
    L: int
    omega: int
    beta: int
    rx: dict
    transmissions: list = field(default_factory=list)
    removal_log: list = field(default_factory=list)
    hat_G: int | None = None
    interval: int = 1
    assignment: str = "round-robin"

    @property
    def users(self) -> tuple[int, ...]:
        return self.placement.users

    @property
    def t(self) -> int:
        return self.placement.t

    @property
    def stream_size(self) -> Fraction:
        """``f(s)`` in units of the file size ``F``; uniform over the schedule."""
        return Fraction(1, self.placement.theta * self.placement.phi)

    def stream_sizes(self) -> list[Fraction]:
        return [self.stream_size] * len(self.transmissions)

    def streams_per_tx(self) -> list[int]:
        return [tx.total_streams for tx in self.transmissions]

    @property
    def multicasts(self) -> list[Transmission]:
        return [tx for tx in self.transmissions if tx.kind == MULTICAST]

    @property
    def unicasts(self) -> list[Transmission]:
        return [tx for tx in self.transmissions if tx.kind == UNICAST]

    def user_beta(self, k: int) -> int:
        """Streams user ``k`` receives in each multicast transmission."""
        if self.hat_G is None:
            return self.beta
        return min(self.rx[k], self.beta)

    @property
    def repetition_bound(self) -> int:
        n = binomial(self.omega - 1, self.t)
        return -(-self.beta // n)

    @property
    def max_repetition(self) -> int:
        worst = 0
        for tx in self.multicasts:
            for k in tx.targets:
                c = Counter(e.subfile for e in tx.payload.get(k, ()))
                if c:
                    worst = max(worst, max(c.values()))
        return worst

    @property
    def perfect_partition(self) -> bool:
        return all(tx.total_streams == self.L for tx in self.unicasts)

    def realized_dof(self) -> Fraction:
        return weighted_dof(self.stream_sizes(), self.streams_per_tx())

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "interval": self.interval,
            "users": list(self.users),
            "rx_antennas": [self.rx[k] for k in self.users],
            "L": self.L,
            "t": self.t,
            "omega": self.omega,
            "beta": self.beta,
            "hat_G": self.hat_G,
            "theta": self.placement.theta,
            "phi": self.placement.phi,
            "stream_size": str(self.stream_size),
            "assignment": self.assignment,
            "transmissions": [tx.to_dict() for tx in self.transmissions],
            "removal_log": [[e.user, list(e.subfile), e.index] for e in self.removal_log],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Schedule":
        users = tuple(d["users"])
        return cls(
            scheme=d["scheme"],
            placement=PlacementMap(users, d["t"], d["phi"]),
            L=d["L"],
            omega=d["omega"],
            beta=d["beta"],
            rx=dict(zip(users, d["rx_antennas"])),
            transmissions=[Transmission.from_dict(x) for x in d["transmissions"]],
            removal_log=[SubpacketId(u, tuple(P), q) for u, P, q in d["removal_log"]],
            hat_G=d.get("hat_G"),
            interval=d.get("interval", 1),
            assignment=d.get("assignment", "round-robin"),
        )


def dumps_schedules(schedules: Sequence[Schedule]) -> str:
    """Serialize one or more schedules with a stable field order."""
    doc = {"intervals": [s.to_dict() for s in schedules]}
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def loads_schedules(text: str) -> list[Schedule]:
    return [Schedule.from_dict(d) for d in json.loads(text)["intervals"]]


def realized_dof(schedules: Sequence[Schedule]) -> Fraction:
    """DoF of consecutive delivery intervals, weighted by stream size."""
    f: list[Fraction] = []
    n: list[int] = []
    for s in schedules:
        f.extend(s.stream_sizes())
        n.extend(s.streams_per_tx())
    return weighted_dof(f, n)


# ---------------------------------------------------------------- builders


def _round_robin(users, t, omega, beta):
    n = binomial(omega - 1, t)
    counters: dict = defaultdict(int)
    out = []
    s = 0
    for T in combinations(users, omega):
        subs = {k: list(combinations([u for u in T if u != k], t)) for k in T}
        for c in range(n):
            payload = {}
            for k in T:
                entries = []
                for j in range(beta):
                    P = subs[k][(c * beta + j) % n]
                    counters[(k, P)] += 1
                    entries.append(SubpacketId(k, P, counters[(k, P)]))
                payload[k] = tuple(entries)
            s += 1
            out.append(Transmission(MULTICAST, s, T, payload))
    return out


def _flow_assignment(users, t, omega, beta, phi):
    """Assign subpackets by max-flow.

    Each (transmission, user) slot needs ``beta`` subpackets, each
    (user, subfile) pool holds ``phi``, and a slot may draw at most
    ``ceil(beta / C(omega-1, t))`` from one pool. A saturating flow is an
    exact cover that meets the repetition bound.
    """
    import networkx as nx

    n = binomial(omega - 1, t)
    cap = -(-beta // n)
    g = nx.DiGraph()
    slots = []
    s = 0
    for T in combinations(users, omega):
        for _ in range(n):
            s += 1
            slots.append((s, T))
            for k in T:
                g.add_edge("src", ("slot", s, k), capacity=beta)
                for P in combinations([u for u in T if u != k], t):
                    g.add_edge(("slot", s, k), ("pool", k, P), capacity=cap)
    for k in users:
        for P in combinations([u for u in users if u != k], t):
            g.add_edge(("pool", k, P), "sink", capacity=phi)
    need = len(slots) * omega * beta
    value, flow = nx.maximum_flow(g, "src", "sink")
    if value != need:
        raise SchedulingError(f"flow assignment delivers {value} of {need} streams")
    counters: dict = defaultdict(int)
    out = []
    for s, T in slots:
        payload = {}
        for k in T:
            entries = []
            for P in combinations([u for u in T if u != k], t):
                for _ in range(flow[("slot", s, k)].get(("pool", k, P), 0)):
                    counters[(k, P)] += 1
                    entries.append(SubpacketId(k, P, counters[(k, P)]))
            payload[k] = tuple(entries)
        out.append(Transmission(MULTICAST, s, T, payload))
    return out


def build_symmetric_schedule(
    k_eff,
    t: int,
    L: int,
    G_eff: int,
    omega: int,
    beta: int,
    *,
    rx: dict | None = None,
    max_users: int = DEFAULT_MAX_USERS,
    assignment: str = "auto",
    scheme: str = "symmetric",
) -> Schedule:
    """Materialize the symmetric delivery over ``k_eff`` users.

    ``k_eff`` is a user count (users 1..K) or an explicit sequence of user
    labels. ``assignment`` is ``"round-robin"``, ``"flow"``, or ``"auto"``
    (round-robin, falling back to flow if validation fails).
    """
    users = user_range(k_eff)
    K = len(users)
    if K > max_users:
        raise ScheduleSizeError(f"K={K} exceeds the schedule cap of {max_users} users")
    if not t + 1 <= omega <= K:
        raise DomainError(f"need t + 1 <= omega <= K (t={t}, omega={omega}, K={K})")
    if not is_feasible(omega, beta, t, L, G_eff):
        raise FeasibilityError(f"(omega={omega}, beta={beta}) infeasible for t={t}, L={L}, G={G_eff}")
    phi = binomial(K - t - 1, omega - t - 1) * beta
    placement = PlacementMap(users, t, phi)
    rx = dict(rx) if rx is not None else {k: G_eff for k in users}

    def make(txs, how):
        return Schedule(scheme, placement, L, omega, beta, rx, txs, assignment=how)

    if assignment not in ("auto", "round-robin", "flow"):
        raise DomainError(f"unknown assignment {assignment!r}")
    if assignment == "flow":
        sch = make(_flow_assignment(users, t, omega, beta, phi), "flow")
    else:
        sch = make(_round_robin(users, t, omega, beta), "round-robin")
        if assignment == "auto" and validate_schedule(sch).violations:
            sch = make(_flow_assignment(users, t, omega, beta, phi), "flow")
    problems = validate_schedule(sch).violations
    if problems:
        raise SchedulingError(f"{len(problems)} violations, first: {problems[0]}")
    return sch


def build_min_g_schedule(cfg: SystemConfig, *, plan: MinGPlan | None = None, **kw) -> Schedule:
    plan = plan or dof_min_g(cfg)
    return build_symmetric_schedule(
        cfg.num_users, plan.t, cfg.tx_antennas, plan.G, plan.omega, plan.beta,
        rx=cfg.rx_map(), scheme="min-g", **kw,
    )


def build_grouping_schedule(cfg: SystemConfig, *, plan: GroupingPlan | None = None, **kw) -> list[Schedule]:
    """One schedule per group, in global user indices, delivered in order."""
    plan = plan or dof_grouping(cfg)
    out = []
    for j, gp in enumerate(plan.groups):
        users = cfg.group_users(j)
        sch = build_symmetric_schedule(
            users, gp.t, cfg.tx_antennas, gp.G, gp.omega, gp.beta,
            rx={k: gp.G for k in users}, scheme="grouping", **kw,
        )
        sch.interval = j + 1
        out.append(sch)
    return out


def _batch_unicasts(removed: list, rx: dict, L: int, start: int) -> list[Transmission]:
    """Pack removed subpackets into unicast slots of at most ``L`` streams,
    at most ``G_k`` per user, serving the largest backlogs first."""
    backlog: dict[int, deque] = defaultdict(deque)
    for e in removed:
        backlog[e.user].append(e)
    out = []
    s = start
    while backlog:
        order = sorted(backlog, key=lambda k: (-len(backlog[k]), k))
        payload = {}
        filled = 0
        for k in order:
            take = min(len(backlog[k]), rx[k], L - filled)
            if take <= 0:
                continue
            payload[k] = tuple(backlog[k].popleft() for _ in range(take))
            filled += take
            if not backlog[k]:
                del backlog[k]
            if filled == L:
                break
        s += 1
        out.append(Transmission(UNICAST, s, tuple(sorted(payload)), payload))
    return out


def build_phantom_schedule(
    cfg: SystemConfig,
    hat_G: int,
    omega: int,
    beta: int,
    removal_policy: str = "drop-last",
    seed: int | None = 0,
    **kw,
) -> Schedule:
    """Reference symmetric schedule at ``hat_G`` antennas, thinned to each
    user's real stream count; the removed streams go out as unicasts."""
    if removal_policy not in REMOVAL_POLICIES:
        raise DomainError(f"removal policy must be one of {REMOVAL_POLICIES}, got {removal_policy!r}")
    design = phantom_design(cfg, hat_G, omega, beta)
    rx = cfg.rx_map()
    ref = build_symmetric_schedule(
        cfg.num_users, design.t, cfg.tx_antennas, hat_G, omega, beta, rx=rx, scheme="phantom", **kw
    )
    rng = random.Random(seed)
    removed: list[SubpacketId] = []
    mcs = []
    for tx in ref.transmissions:
        payload = {}
        for k in tx.targets:
            entries = tx.payload[k]
            drop = beta - min(rx[k], beta)
            if drop == 0:
                payload[k] = entries
                continue
            if removal_policy == "drop-last":
                gone = set(range(beta - drop, beta))
            else:
                gone = set(rng.sample(range(beta), drop))
            payload[k] = tuple(e for i, e in enumerate(entries) if i not in gone)
            removed.extend(e for i, e in enumerate(entries) if i in gone)
        mcs.append(Transmission(MULTICAST, tx.index, tx.targets, payload))
    ucs = _batch_unicasts(removed, rx, cfg.tx_antennas, len(mcs))
    return Schedule(
        "phantom", ref.placement, cfg.tx_antennas, omega, beta, rx,
        mcs + ucs, removed, hat_G=hat_G, assignment=ref.assignment,
    )


# -------------------------------------------------------------- validation


@dataclass
class ScheduleReport:
    violations: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    max_repetition: int = 0
    repetition_bound: int = 0
    perfect_partition: bool = True

    @property
    def ok(self) -> bool:
        return not self.violations


def _expected_counts(plan) -> dict:
    if isinstance(plan, PhantomDesign):
        c = plan.counts
        return {"Z": c.Z, "Z_MC": c.Z_MC, "Z_UC": c.Z_UC, "S_MC": c.S_MC}
    if isinstance(plan, SymmetricPlan):
        return {"S": plan.transmissions, "Z": plan.users * binomial(plan.users - 1, plan.t)
                * plan.subpackets_per_subfile}
    raise DomainError(f"cannot derive expected counts from {type(plan).__name__}")


def validate_schedule(sch: Schedule, cfg: SystemConfig | None = None, plan=None) -> ScheduleReport:
    """Check exact cover, per-transmission structure, the repetition bound
    and count identities. Never raises; returns every violation found."""
    rep = ScheduleReport()
    v = rep.violations
    t, L, omega = sch.t, sch.L, sch.omega
    users = set(sch.users)
    n = binomial(omega - 1, t)

    seen: Counter = Counter()
    for tx in sch.transmissions:
        for k, entries in tx.payload.items():
            for e in entries:
                seen[e] += 1
                if e.user != k:
                    v.append(f"tx {tx.index}: entry {e} listed under user {k}")
        if tx.kind == MULTICAST:
            if len(tx.targets) != omega:
                v.append(f"tx {tx.index}: {len(tx.targets)} targets, expected {omega}")
            T = set(tx.targets)
            for k in tx.targets:
                entries = tx.payload.get(k, ())
                want = sch.user_beta(k)
                if len(entries) != want:
                    v.append(f"tx {tx.index}: user {k} carries {len(entries)} streams, expected {want}")
                for e in entries:
                    if k in e.subfile or not set(e.subfile) <= T - {k}:
                        v.append(f"tx {tx.index}: {e} has subfile outside K(s)\\{{{k}}}")
            extra = set(tx.payload) - T
            if extra:
                v.append(f"tx {tx.index}: payload for non-target users {sorted(extra)}")
        elif tx.kind == UNICAST:
            if tx.total_streams > L:
                v.append(f"tx {tx.index}: unicast carries {tx.total_streams} > L={L} streams")
            for k, entries in tx.payload.items():
                if len(entries) > sch.rx.get(k, 0):
                    v.append(f"tx {tx.index}: user {k} gets {len(entries)} > G_k={sch.rx.get(k)} streams")
        else:
            v.append(f"tx {tx.index}: unknown kind {tx.kind!r}")

    rep.repetition_bound = -(-sch.beta // n)
    rep.max_repetition = sch.max_repetition
    if rep.max_repetition > rep.repetition_bound:
        v.append(f"repetition {rep.max_repetition} exceeds bound {rep.repetition_bound}")

    expected = set(sch.placement.missing())
    for e, c in seen.items():
        if c > 1:
            v.append(f"exact cover: {e} delivered {c} times")
        if e not in expected:
            v.append(f"exact cover: {e} is not a missing subpacket")
    absent = [e for e in expected if e not in seen]
    if absent:
        absent.sort()
        v.append(f"exact cover: {len(absent)} subpackets never delivered, e.g. {absent[0]}")

    mcs, ucs = sch.multicasts, sch.unicasts
    z_mc = sum(tx.total_streams for tx in mcs)
    z_uc = sum(tx.total_streams for tx in ucs)
    counts = {
        "Z": sch.placement.missing_count,
        "Z_MC": z_mc,
        "Z_UC": z_uc,
        "S_MC": len(mcs),
        "S_UC": len(ucs),
        "S": len(sch.transmissions),
    }
    rep.counts = counts
    s_mc = binomial(len(users), omega) * n
    if len(mcs) != s_mc:
        v.append(f"count: {len(mcs)} multicasts, expected C(K, omega) C(omega-1, t) = {s_mc}")
    if sch.hat_G is not None:
        logged = len(sch.removal_log)
        if logged != z_uc:
            v.append(f"removal log holds {logged} entries but unicasts carry {z_uc}")
        in_mc = {e for tx in mcs for e in tx.entries()}
        if any(e in in_mc for e in sch.removal_log):
            v.append("removal log overlaps multicast payloads")
        s_uc_min = -(-z_uc // L)
        rep.perfect_partition = sch.perfect_partition and len(ucs) == s_uc_min
        if len(ucs) < s_uc_min:
            v.append(f"count: {len(ucs)} unicasts cannot carry {z_uc} streams at L={L}")
    elif ucs:
        v.append(f"{len(ucs)} unicast transmissions in a non-phantom schedule")

    if plan is not None:
        for key, want in _expected_counts(plan).items():
            if counts[key] != want:
                v.append(f"count: {key} = {counts[key]}, analytic value {want}")
    if cfg is not None:
        for k in users:
            if sch.rx.get(k) != cfg.rx_antennas(k):
                if sch.scheme in ("phantom", "min-g"):
                    v.append(f"user {k}: rx={sch.rx.get(k)} but config says {cfg.rx_antennas(k)}")
    return rep
