"""
Recovering Marble's L and forging a tag
========================================

The first chain of the two-block message ``x || x ^ sigma`` is invariant
under ``x -> x ^ sigma ^ 6L``, and the tag follows it.  Simon's subroutine
therefore hands back ``s = sigma ^ 6L``; dividing by 6 in the field gives
``L``.  Knowing ``L`` (and with ``tau = 0``), one extra encryption query yields
a valid tag for any chosen message.
"""

import numpy as np

from simonforge.attacks import CaseId, lu_forge, make_case, make_instance, run_attack
from simonforge.blocks import BlockString
from simonforge.marble import marble_verify

rng = np.random.default_rng(7)
inst = make_instance(CaseId.MARBLE_L, 16, key=0x2B7E)
case = make_case(CaseId.MARBLE_L, 16, rng)

report, _ = run_attack(inst, case, c=4, backend="collapse", rng=rng)
print("status        :", report.status)
print("recovered L   :", hex(report.recovered_L))
print("instance L    :", hex(inst.L))

target = BlockString((0x0BAD, 0xF00D, 0xCAFE))
forgery = lu_forge(inst, target, report.recovered_L)
print("\nforged tag for", [hex(b) for b in target.blocks], "->", hex(forgery.predicted_tag))
print("verifies      :", marble_verify(inst, None, target, forgery.predicted_tag))
