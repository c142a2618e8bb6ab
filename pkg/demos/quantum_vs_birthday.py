"""
Superposition queries versus the birthday bound
================================================

Classically the same period falls out of a tag collision, which takes about
``2^(n/2)`` queries.  The simulated quantum attack needs ``c * n``.  Below, a
small campaign at a few toy widths.
"""

from simonforge.harness import cmd_baseline, config_for

print(f"{'n':>3} {'quantum':>8} {'birthday':>9} {'2^(n/2)':>8}")
for n in (8, 12, 16, 20):
    rep = cmd_baseline(config_for("copa", "noad-d1", n=n, c=4, trials=20, seed=n))
    q, cl = rep["comparison"]
    print(f"{n:>3} {q['queries']:>8g} {cl['queries']:>9g} {2 ** (n / 2):>8.0f}")
