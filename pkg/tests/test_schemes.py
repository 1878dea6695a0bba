import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from altcsit.algebra import LinForm, Poly, entry
from altcsit.channel import apply_channel, block_seeds, complex_gaussian, orthogonal_beam, sample_block
from altcsit.errors import CsitViolation, InvalidParameter, LengthMismatch
from altcsit.schemes import (
    SCHEME_NAMES,
    SchemeId,
    SlotRule,
    TransferModel,
    Violation,
    build_plan,
    catalog,
    catalog_entry,
    decodable,
    mirror_plan,
    plan_to_json,
    run_block,
    transfer_model,
    transmit_coefficients,
    validate_csit,
    verification_ids,
)
from altcsit.states import DD, DN, DP, ND, NN, NP, PD, PN, PP

F = Fraction
IDS = verification_ids()
ALL_PLANS = [build_plan(s) for s in IDS] + [mirror_plan(build_plan(s)) for s in IDS]


def _plan_name(plan):
    return ("swap " if plan.mirrored else "") + str(plan.id)


# ---------------------------------------------------------------------------
# identifiers and catalog


@pytest.mark.parametrize("text, expected", [("S3_1(n=2)", SchemeId("S3_1", 2)), ("S3_1:4", SchemeId("S3_1", 4)), ("S1_32", SchemeId("S1_32"))])
def test_scheme_id_parse(text, expected):
    assert SchemeId.parse(text) == expected


@pytest.mark.parametrize("bad", ["S9", "S2(n=3)", "S3_1(n=0)", "???"])
def test_scheme_id_rejects(bad):
    with pytest.raises(InvalidParameter):
        SchemeId.parse(bad)


def test_catalog_lists_every_scheme_once():
    assert [e.id.name for e in catalog()] == list(SCHEME_NAMES)


def test_catalog_examples():
    by = {e.id.name: e for e in catalog()}
    assert dict(by["S1_32"].fractions) == {PD: F(1, 2), DP: F(1, 2)} and by["S1_32"].pair == (F(3, 4), F(3, 4))
    assert dict(by["S2_43"].fractions) == {PN: F(1, 3), NP: F(1, 3), DD: F(1, 3)} and by["S2_43"].pair == (F(2, 3), F(2, 3))
    assert dict(by["DN_half_0"].fractions) == {DN: 1} and by["DN_half_0"].pair == (F(1, 2), 0)


def test_catalog_fractions_sum_to_one():
    for e in catalog():
        assert sum(f for _, f in e.fractions) == 1


def test_catalog_mirror_swaps_states_and_pair():
    e = catalog_entry(SchemeId("S3_23")).mirror()
    assert e.pair == (0, F(2, 3))
    assert dict(e.fractions) == {DN: F(1, 3), ND: F(1, 3), NN: F(1, 3)}
    e = catalog_entry(SchemeId("PD_10")).mirror()
    assert dict(e.fractions) == {DP: 1} and e.pair == (0, 1)


# ---------------------------------------------------------------------------
# plans


def test_build_plan_examples():
    p = build_plan("S1_32")
    assert (p.n_B, p.n1, p.n2, p.states) == (4, 3, 3, (PD, DP, DP, PD))
    p = build_plan(SchemeId("S3_1", 1))
    assert (p.n_B, p.n1, p.n2, p.pair) == (5, 2, 2, (F(2, 5), F(2, 5)))
    p = build_plan("S2")
    assert (p.n_B, p.n1, p.n2, p.states) == (1, 1, 1, (PP,))


def test_build_plan_requires_s3_parameter():
    with pytest.raises(InvalidParameter):
        build_plan(SchemeId("S3_1"))
    with pytest.raises(InvalidParameter):
        SchemeId("S3_1", 0)


@pytest.mark.parametrize("sid", IDS, ids=str)
def test_plan_matches_catalog(sid):
    plan, entry_ = build_plan(sid), catalog_entry(sid)
    assert plan.pair == entry_.pair
    assert plan.state_fractions == entry_.fractions


def test_s3_pairs_increase_to_half():
    pairs = [build_plan(SchemeId("S3_1", n)).pair[0] for n in range(1, 9)]
    assert pairs == [F(2 * n, 4 * n + 1) for n in range(1, 9)]
    assert all(a < b < F(1, 2) for a, b in zip(pairs, pairs[1:]))


def test_plan_json_dump():
    data = json.loads(plan_to_json(build_plan("S1_32")))
    assert data["n_B"] == 4 and data["slots"][0]["state"] == "PD"
    assert data["slots"][1]["antenna1"]["u1"] == "h21(1)"


# ---------------------------------------------------------------------------
# CSIT soundness


@pytest.mark.parametrize("plan", ALL_PLANS, ids=_plan_name)
def test_builtin_plans_respect_csit(plan):
    assert validate_csit(plan) == []


def test_delayed_state_forbids_current_slot_use():
    plan = build_plan("S1_32")
    states = list(plan.states)
    states[1] = DD
    assert validate_csit(plan.with_states(states)) == [Violation(2, 2, 2)]


def test_s3_deferred_feedback_is_needed():
    plan = build_plan(SchemeId("S3_1", 2))
    assert validate_csit(plan) == []
    # block-B slot i reports user 2's block-A slot i
    assert (3, 2, 1) in plan.deferred and (4, 2, 2) in plan.deferred
    stripped = type(plan)(plan.id, plan.states, plan.rules, plan.n1, plan.n2, plan.n_q)
    assert validate_csit(stripped)


@st.composite
def mutations(draw):
    plan = draw(st.sampled_from(ALL_PLANS))
    t = draw(st.integers(1, plan.n_B))
    known = plan.ledger[t - 1]
    missing = [(u, s) for u in (1, 2) for s in range(1, plan.n_B + 1) if (u, s) not in known]
    if not missing:
        missing = [(1, plan.n_B + 1)]
    user, ref = draw(st.sampled_from(missing))
    return plan, t, user, ref


@given(mutations())
def test_single_bad_reference_gives_single_violation(case):
    plan, t, user, ref = case
    rule = plan.rules[t - 1]
    bad = LinForm({("u", 1) if plan.n1 else ("v", 1): entry(user, ref, 1)})
    mutated = plan.with_rule(t, SlotRule((rule.antennas[0] + bad, rule.antennas[1]), rule.beams))
    assert validate_csit(mutated) == [Violation(t, user, ref)]


def test_transfer_model_rejects_bad_plans():
    plan = build_plan("S1_32")
    states = list(plan.states)
    states[1] = DD
    with pytest.raises(CsitViolation):
        transfer_model(plan.with_states(states), sample_block(4, 0))
    with pytest.raises(LengthMismatch):
        transfer_model(plan, sample_block(3, 0))


# ---------------------------------------------------------------------------
# transfer models


def test_s2_transfer_model():
    blk = sample_block(1, 5)
    m = transfer_model(build_plan("S2"), blk)
    h1, h2 = blk.row(1, 1), blk.row(2, 1)
    assert m.m1.shape == (1, 2)
    assert np.allclose(m.m1, [[h1 @ orthogonal_beam(h2), 0]], atol=1e-14)
    assert np.allclose(m.m2, [[0, h2 @ orthogonal_beam(h1)]], atol=1e-14)


def test_s1_32_first_observation_is_the_key():
    blk = sample_block(4, 6)
    plan = build_plan("S1_32")
    m = transfer_model(plan, blk)
    cols = plan.columns
    h2 = blk.row(2, 1)
    assert np.isclose(m.m2[0, cols[("u", 1)]], h2[0])
    assert np.isclose(m.m2[0, cols[("q", 1)]], h2 @ orthogonal_beam(blk.row(1, 1)))


@pytest.mark.parametrize("plan", ALL_PLANS, ids=_plan_name)
def test_transfer_model_matches_slot_simulation(plan):
    for seed in block_seeds(99, 5):
        blk = sample_block(plan.n_B, seed)
        model = transfer_model(plan, blk)
        coeffs = transmit_coefficients(plan, blk)
        for k in range(20):
            sym = complex_gaussian(plan.width, 1.0, seed + k)
            y, z = apply_channel(np.einsum("tkc,c->tk", coeffs, sym), blk)
            assert np.max(np.abs(y - model.m1 @ sym)) <= 1e-10
            assert np.max(np.abs(z - model.m2 @ sym)) <= 1e-10


def _decodable_rate(plan, count, seed=0):
    ok = 0
    for s in block_seeds(seed, count):
        model = transfer_model(plan, sample_block(plan.n_B, s))
        ok += decodable(model, 1) and decodable(model, 2)
    return ok / count


@pytest.mark.parametrize("plan", ALL_PLANS, ids=_plan_name)
def test_decodable_with_probability_one(plan):
    assert _decodable_rate(plan, 1000) == 1.0


def test_forced_rank_deficiency_is_not_decodable():
    m = transfer_model(build_plan("S1_32"), sample_block(4, 1))
    m1 = m.m1.copy()
    m1[:, 0] = m1[:, m.n1]  # u1 column equal to v1 column
    assert not decodable(TransferModel(m1, m.m2, m.n1, m.n2, m.n_q), 1)


def test_mirrored_plan_swaps_pair_and_states():
    plan = build_plan("S3_23")
    mp = mirror_plan(plan)
    assert mp.pair == (plan.pair[1], plan.pair[0])
    assert mp.states == tuple(s.swap() for s in plan.states)
    assert mirror_plan(mp).rules == plan.rules or plan_to_json(mirror_plan(mp)) == plan_to_json(plan)


# ---------------------------------------------------------------------------
# block execution


def _symbols(plan, P, seed):
    u = complex_gaussian(plan.n1, P, seed)
    v = complex_gaussian(plan.n2, P, seed + 1)
    return u, v


def _rel(est, true):
    return np.linalg.norm(est - true) / np.linalg.norm(true)


def _block_errors(plan, P, count):
    errs = []
    for seed in range(count):
        u, v = _symbols(plan, P, 10 * seed)
        res = run_block(plan, sample_block(plan.n_B, seed), (u, v), P, noise_seed=seed)
        errs.append(max(_rel(res.decoded_u, u), _rel(res.decoded_v, v)))
    return np.array(errs)


@pytest.mark.parametrize("name", ["S2", "S3_1(n=2)", "S1_43"])
def test_decoding_at_high_power(name):
    # Rayleigh fades make the per-block error heavy-tailed, so the bound is on the typical block
    plan = build_plan(name)
    errs = _block_errors(plan, 1e6, 100)
    assert np.median(errs) <= 1e-2
    # error falls like P^(-1/2): two decades of power buy one decade of accuracy
    ratio = np.median(_block_errors(plan, 1e4, 100)) / np.median(errs)
    assert 5 < ratio < 20


@pytest.mark.parametrize("plan", ALL_PLANS, ids=_plan_name)
def test_noiseless_decoding_recovers_every_plan(plan):
    blk = sample_block(plan.n_B, 12)
    u, v = _symbols(plan, 1.0, 5)
    res = run_block(plan, blk, (u, v), 1.0)
    assert np.max(np.abs(res.decoded_u - u), initial=0) <= 1e-8
    assert np.max(np.abs(res.decoded_v - v), initial=0) <= 1e-8


def test_noiseless_decoding_is_exact():
    plan = build_plan("S2_1")
    u, v = _symbols(plan, 1.0, 3)
    res = run_block(plan, sample_block(plan.n_B, 4), (u, v), 1.0)
    assert np.max(np.abs(res.decoded_u - u)) <= 1e-10
    assert np.max(np.abs(res.decoded_v - v)) <= 1e-10


def test_run_block_checks_symbol_counts():
    plan = build_plan("S2")
    with pytest.raises(LengthMismatch):
        run_block(plan, sample_block(1, 0), (np.ones(2), np.ones(1)), 1.0)


def test_s2_has_no_cross_coupling():
    model = transfer_model(build_plan("S2"), sample_block(1, 3))
    assert not model.m2[:, model.group("u")].any()
    assert not model.m1[:, model.group("v")].any()


def test_poly_constant_is_not_a_reference():
    assert Poly.const(3).refs() == set()
