import numpy as np
import pytest

from simonforge.attacks import (AD_BIT_CASES, COPA_FAMILY_CASES, AttackCase, CaseId,
                                MalformedCaseError, audit_collisions, birthday_baseline,
                                build_target, check_identity, expected_period, make_case,
                                make_instance, run_attack)
from simonforge.copa import encrypt_and_tag, verify
from simonforge.marble import TauProfile, marble_verify
from simonforge.simon import TargetFunction

from test_gf2poly import schoolbook_mul

ALL_CASES = list(CaseId)


def L_multiple(inst, c):
    return schoolbook_mul(inst.L, c, inst.n, inst.field.reduction)


def test_case_inventory():
    assert len(COPA_FAMILY_CASES) == 10
    assert CaseId.MARBLE_L not in COPA_FAMILY_CASES


@pytest.mark.parametrize("cid", ALL_CASES)
def test_expected_period_formula(cid):
    rng = np.random.default_rng(5)
    inst = make_instance(cid, 16, 0xB00B)
    case = make_case(cid, 16, rng)
    s = expected_period(inst, case)
    sig = case.sigma
    table = {
        CaseId.COPA_NOAD_D1: L_multiple(inst, 6), CaseId.V1_D2: L_multiple(inst, 6),
        CaseId.COPA_NOAD_D2: sig ^ L_multiple(inst, 5), CaseId.V1_DGT2: sig ^ L_multiple(inst, 5),
        CaseId.V2_DGT2_FRAC: sig ^ L_multiple(inst, 5),
        CaseId.COPA_AD_LONG: sig ^ L_multiple(inst, 17), CaseId.V2_D2_FRAC: sig ^ L_multiple(inst, 17),
        CaseId.V2_D1_FRAC: L_multiple(inst, 24), CaseId.MARBLE_L: sig ^ L_multiple(inst, 6),
    }
    if cid in AD_BIT_CASES:
        m15 = L_multiple(inst, 15)
        want = (1 << 16) | inst.E(case.alpha0 ^ m15) ^ inst.E(case.alpha1 ^ m15)
    else:
        want = table[cid]
    assert s == want


@pytest.mark.parametrize("n", [8, 16])
@pytest.mark.parametrize("cid", ALL_CASES)
def test_identity_holds(cid, n):
    rng = np.random.default_rng(n)
    for key in range(5):
        inst = make_instance(cid, n, key * 977 + 3)
        case = make_case(cid, n, rng)
        assert check_identity(inst, case, 2000, rng) == 0


def test_identity_wrong_offset_fails():
    rng = np.random.default_rng(0)
    inst = make_instance(CaseId.COPA_NOAD_D1, 16, 1)
    case = make_case(CaseId.COPA_NOAD_D1, 16, rng)
    fails = check_identity(inst, case, 1000, rng, period=inst.field.mul(inst.L, 7))
    assert fails >= 990


def test_identity_full_width_marble():
    rng = np.random.default_rng(1)
    inst = make_instance(CaseId.MARBLE_L, 128, 0x1234)
    case = make_case(CaseId.MARBLE_L, 128, rng)
    assert check_identity(inst, case, 200, rng) == 0


@pytest.mark.parametrize("cid", ALL_CASES)
def test_run_attack_each_case(cid):
    rng = np.random.default_rng(21)
    inst = make_instance(cid, 16, 0x7777)
    case = make_case(cid, 16, rng)
    rep, forgery = run_attack(inst, case, 4, "collapse", rng)
    m = 17 if cid in AD_BIT_CASES else 16
    assert rep.success and rep.status == "forged"
    assert rep.recovered_period == rep.expected_period
    assert rep.quantum_queries == 4 * m * rep.attempts
    assert rep.verification_queries == 32 * rep.attempts
    assert rep.forgery_queries == 2
    assert forgery.verified
    if cid is CaseId.MARBLE_L:
        assert rep.recovered_L == inst.L
        assert marble_verify(inst, None, forgery.forged_msg, forgery.predicted_tag)
    else:
        assert (forgery.forged_ad, forgery.forged_msg) != (forgery.original_ad, forgery.original_msg)
        assert verify(inst, forgery.forged_ad, forgery.forged_msg, forgery.predicted_tag,
                      forgery.nonce)
        orig = encrypt_and_tag(inst, forgery.original_ad, forgery.original_msg, forgery.nonce)
        assert orig.tag == forgery.original_tag


def test_marble_secret_profile_recovers_L():
    rng = np.random.default_rng(8)
    inst = make_instance(CaseId.MARBLE_L, 16, 0x4242, tau_profile=TauProfile.RANDOM_SECRET)
    case = make_case(CaseId.MARBLE_L, 16, rng)
    rep, forgery = run_attack(inst, case, 4, "statevector", rng)
    assert forgery is None
    assert rep.status == "L-recovered" and rep.recovered_L == inst.L and rep.success


def test_injective_target_fails():
    rng = np.random.default_rng(0)
    inst = make_instance(CaseId.COPA_NOAD_D1, 8, 1)
    case = make_case(CaseId.COPA_NOAD_D1, 8, rng)
    dummy = TargetFunction(8, 8, lambda x: x, name="injective")
    rep, forgery = run_attack(inst, case, 4, "collapse", rng, target=dummy)
    assert not rep.success and forgery is None
    assert rep.status == "no-period" and rep.attempts == 3


def test_malformed_cases():
    with pytest.raises(MalformedCaseError):
        AttackCase(CaseId.COPA_AD_FULL, alpha0=3, alpha1=3).check(16)
    with pytest.raises(MalformedCaseError):
        AttackCase(CaseId.V1_D2, nonce=1).check(16)
    with pytest.raises(MalformedCaseError):
        AttackCase(CaseId.V2_D1_FRAC).check(16)
    inst = make_instance(CaseId.COPA_NOAD_D1, 16, 1)
    with pytest.raises(MalformedCaseError):
        build_target(inst, make_case(CaseId.V2_D1_FRAC, 16, np.random.default_rng(0)))


def test_birthday_small_width_always_finds():
    rng = np.random.default_rng(3)
    for key in range(20):
        inst = make_instance(CaseId.COPA_NOAD_D1, 8, key)
        case = make_case(CaseId.COPA_NOAD_D1, 8, rng)
        rep = birthday_baseline(inst, case, rng)
        assert rep.extra["first_collision_at"] <= 256
        assert rep.success and rep.recovered_period == rep.expected_period


def test_birthday_refuses_large_width():
    inst = make_instance(CaseId.COPA_NOAD_D1, 128, 1)
    case = make_case(CaseId.COPA_NOAD_D1, 128, np.random.default_rng(0))
    with pytest.raises(ValueError):
        birthday_baseline(inst, case, np.random.default_rng(0))


def test_birthday_max_queries():
    rng = np.random.default_rng(3)
    inst = make_instance(CaseId.COPA_NOAD_D1, 16, 5)
    case = make_case(CaseId.COPA_NOAD_D1, 16, rng)
    rep = birthday_baseline(inst, case, rng, max_queries=10)
    assert rep.extra["classical_queries"] <= 10 + 4


def test_audit_planted():
    perm = np.random.default_rng(0).permutation(256).astype(np.uint64)
    f = TargetFunction(8, 8, lambda x: perm[np.minimum(x, x ^ np.uint64(9)).astype(np.int64)])
    audit = audit_collisions(f, 9)
    assert audit == {"period_holds": True, "stray_pairs": 0, "exact_promise": True, "max_group": 2}
    assert not audit_collisions(f, 10)["period_holds"]
