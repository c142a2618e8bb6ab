"""Simulated quantum forgery attacks on COPA, AES-COPA and Marble."""

from .attacks import (AttackCase, AttackReport, CaseId, Forgery, build_target, expected_period,
                      lu_forge, make_case, make_instance, run_attack)
from .blocks import BlockString, floor10, pad10
from .copa import CopaInstance, Variant, decrypt, encrypt_and_tag, verify
from .gf2poly import Field, field_for
from .harness import RunConfig, cmd_attack, cmd_baseline, cmd_verify_period, success_bound
from .marble import MarbleInstance, MarbleVersion, TauProfile
from .simon import TargetFunction, recover_period

__version__ = "0.1.0"
