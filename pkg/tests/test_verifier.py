from __future__ import annotations

import numpy as np
import pytest

from asymcc.errors import DomainError, FeasibilityError
from asymcc.model import SubpacketId, SystemConfig
from asymcc.scheduler import (
    MULTICAST,
    UNICAST,
    Transmission,
    build_min_g_schedule,
    build_phantom_schedule,
)
from asymcc.verifier import (
    NULL_MEMBERSHIP_TOL,
    _stream_groups,
    build_combiners,
    check_rank_nullity,
    design_beamformers,
    draw_channels,
    equivalent_interference_channel,
    interferers,
    nullity_exact,
    verify_schedule,
    verify_transmission,
)


@pytest.fixture(scope="module")
def cfg1():
    return SystemConfig.build(4, "0.2", [(5, 2), (5, 4)])


@pytest.fixture(scope="module")
def min_g(cfg1):
    return build_min_g_schedule(cfg1)


@pytest.fixture(scope="module")
def phantom(cfg1):
    return build_phantom_schedule(cfg1, 4, 3, 4)


def first(sch, targets, kind=MULTICAST):
    return next(tx for tx in sch.transmissions if tx.targets == tuple(targets) and tx.kind == kind)


class TestChannels:
    def test_deterministic(self, cfg1):
        a, b = draw_channels(cfg1, 1), draw_channels(cfg1, 1)
        assert all(np.array_equal(a.H[k], b.H[k]) for k in cfg1.users)
        c = draw_channels(cfg1, 2)
        assert not np.array_equal(a.H[1], c.H[1])

    def test_shapes_and_rank(self, cfg1):
        ch = draw_channels(cfg1, 1)
        assert ch.H[1].shape == (2, 4) and ch.H[6].shape == (4, 4)
        for k in cfg1.users:
            h = ch.H[k] / np.linalg.norm(ch.H[k])
            assert np.linalg.svd(h, compute_uv=False)[-1] > 1e-8


class TestEquivalentChannel:
    def test_phantom_full_coverage(self, cfg1, phantom):
        tx = first(phantom, (1, 2, 6))
        ch = draw_channels(cfg1, 1)
        U = build_combiners(tx, ch)
        assert equivalent_interference_channel(tx, 6, (1, 2), ch, U).shape == (0, 4)

    def test_subfile_outside_transmission(self, phantom):
        tx = first(phantom, (1, 2, 6))
        with pytest.raises(DomainError):
            interferers(tx, 6, (2, 3))
        with pytest.raises(DomainError):
            interferers(tx, 3, (1, 2))

    def test_min_g_one_interferer(self, cfg1, min_g):
        tx = first(min_g, (1, 2, 3, 6))
        ch = draw_channels(cfg1, 3)
        U = build_combiners(tx, ch)
        assert interferers(tx, 1, (2, 3)) == (6,)
        Hbar = equivalent_interference_channel(tx, 1, (2, 3), ch, U)
        assert Hbar.shape == (tx.streams(6), 4) == (2, 4)
        assert nullity_exact(tx, 1, (2, 3), 4) == 2

    def test_unicast_interferers(self, phantom):
        tx = phantom.unicasts[0]
        k = tx.targets[0]
        assert interferers(tx, k, ()) == tuple(u for u in tx.targets if u != k)


class TestBeamformers:
    @pytest.mark.parametrize("which", ["min_g", "phantom"])
    def test_null_space_membership(self, cfg1, which, request):
        sch = request.getfixturevalue(which)
        ch = draw_channels(cfg1, 5)
        for tx in sch.transmissions[:60] + sch.unicasts[:10]:
            U = build_combiners(tx, ch)
            for k in tx.targets:
                assert np.allclose(U[k].conj().T @ U[k], np.eye(U[k].shape[1]), atol=1e-10)
            bf = design_beamformers(tx, ch, U)
            for (k, others), entries in _stream_groups(tx).items():
                Hbar = equivalent_interference_channel(tx, k, entries[0].subfile, ch, U)
                W = np.column_stack([bf.w[e] for e in entries])
                assert np.allclose(W.conj().T @ W, np.eye(len(entries)), atol=1e-10)
                if Hbar.shape[0]:
                    assert np.linalg.norm(Hbar @ W, axis=0).max() <= NULL_MEMBERSHIP_TOL
                assert bf.measured_nullity[(k, entries[0].subfile)] == 4 - sum(tx.streams(u) for u in others)

    def test_interferer_slack(self, phantom):
        # streams toward interferers never exceed (omega - t - 1) * beta
        bound = (phantom.omega - phantom.t - 1) * phantom.beta
        for tx in phantom.multicasts:
            for e in tx.entries():
                assert sum(tx.streams(u) for u in interferers(tx, e.user, e.subfile)) <= bound

    def test_rank_nullity_violation(self, cfg1, min_g):
        tx = first(min_g, (1, 2, 3, 6))
        payload = dict(tx.payload)
        payload[6] = tuple(SubpacketId(6, (1, 2), q) for q in (1, 2, 3))
        bad = Transmission(MULTICAST, tx.index, tx.targets, payload)
        assert check_rank_nullity(bad, 4)
        ch = draw_channels(cfg1, 1)
        with pytest.raises(FeasibilityError, match="user 6, subfile \\(1, 2\\)"):
            design_beamformers(bad, ch, build_combiners(bad, ch))


class TestVerifyTransmission:
    def test_min_g_50_seeds(self, cfg1, min_g):
        tx = first(min_g, (1, 2, 3, 6))
        for seed in range(50):
            rep = verify_transmission(tx, draw_channels(cfg1, seed))
            assert rep.decodable
            assert max(u.residual for u in rep.users) < 1e-8

    def test_phantom_50_seeds(self, cfg1, phantom):
        tx = first(phantom, (1, 2, 6))
        for seed in range(50):
            rep = verify_transmission(tx, draw_channels(cfg1, seed))
            assert rep.decodable
            assert [u.beta for u in rep.users] == [2, 2, 4]

    def test_unicast_two_users(self, cfg1):
        tx = Transmission(UNICAST, 1, (1, 2), {
            1: (SubpacketId(1, (3, 6), 1), SubpacketId(1, (2, 3), 2)),
            2: (SubpacketId(2, (3, 6), 1), SubpacketId(2, (1, 3), 2)),
        })
        rep = verify_transmission(tx, draw_channels(cfg1, 4))
        assert rep.decodable and [u.beta for u in rep.users] == [2, 2]

    def test_random_combiner(self, cfg1, phantom):
        tx = first(phantom, (1, 2, 6))
        rng = np.random.default_rng(0)
        assert verify_transmission(tx, draw_channels(cfg1, 1), "random", rng).decodable

    def test_too_many_streams(self, cfg1):
        tx = Transmission(UNICAST, 1, (1,), {1: tuple(SubpacketId(1, (2, 3), q) for q in (1, 2, 3))})
        with pytest.raises(FeasibilityError):
            verify_transmission(tx, draw_channels(cfg1, 1))


class TestVerifySchedule:
    def test_phantom_passes(self, cfg1, phantom):
        res = verify_schedule(phantom, cfg1, [1, 2])
        assert res.passed and res.pass_rate == 1.0 and res.evaluated == 420
        lines = res.to_csv().splitlines()
        assert lines[0] == "seed,interval,s,kind,user,beta_k,residual,sigma_min,decodable"
        assert len(lines) == 1 + 2 * sum(len(tx.targets) for tx in phantom.transmissions)

    def test_injected_fault_reported(self, cfg1, min_g):
        import dataclasses

        tx = min_g.transmissions[0]
        k = tx.targets[0]
        payload = dict(tx.payload)
        P = tx.payload[k][0].subfile
        payload[k] = tuple(SubpacketId(k, P, q) for q in (101, 102, 103))
        bad = Transmission(MULTICAST, tx.index, tx.targets, payload)
        sch = dataclasses.replace(min_g, transmissions=[bad] + min_g.transmissions[1:20])
        res = verify_schedule(sch, cfg1, [1])
        assert len(res.feasibility_errors) == 1 and not res.passed
        assert res.evaluated == 19 and res.pass_rate == 1.0
