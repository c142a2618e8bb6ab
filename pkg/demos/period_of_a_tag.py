"""
The tag of a one-block message is periodic
===========================================

With no associated data, the tag of a single block ``x`` is

    T(x) = E(E(x ^ 5L) ^ E(x ^ 3L) ^ L) ^ 7L

and shifting ``x`` by ``6L`` swaps the two inner cipher calls, so the tag
doesn't move.  We check that with the real 128-bit cipher, then hand a toy
version to the simulated Simon subroutine and watch it find ``6L``.
"""

import numpy as np

from simonforge.attacks import CaseId, build_target, make_case, make_instance
from simonforge.blocks import BlockString
from simonforge.copa import CopaInstance, tag_of
from simonforge.simon import recover_period

rng = np.random.default_rng(1)

# full width: L comes straight from the key
inst = CopaInstance.from_key(0x000102030405060708090A0B0C0D0E0F, 128)
six_L = inst.field.mul(inst.L, 6)
x = int.from_bytes(rng.bytes(16), "big")
print("T(x)      =", hex(tag_of(inst, None, BlockString((x,)))))
print("T(x ^ 6L) =", hex(tag_of(inst, None, BlockString((x ^ six_L,)))))

# 16-bit toy: the Simon step only ever sees the tag oracle
toy = make_instance(CaseId.COPA_NOAD_D1, 16, key=0xC0DE)
f = build_target(toy, make_case(CaseId.COPA_NOAD_D1, 16, rng))
out = recover_period(f, c=4, backend="collapse", rng=rng)
print(f"\n{out.queries} superposition queries -> status {out.status}")
print("recovered period:", hex(out.recovered))
print("white-box 6L    :", hex(toy.field.mul(toy.L, 6)))
