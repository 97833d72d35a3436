"""Smoke test for the `jck` extension module.

Build and install first, e.g. `pip install --no-build-isolation ./crates/python`,
then run `python crates/python/python/smoke_test.py`.
"""

import jck

ATTACK = """
h: 2
worlds: 0 1 2 3
alias del = P1
alias m1 = c1
alias m2 = c2
rel 1: (1,2)
rel 2: (0,1) (2,3)
val del: 0 1 2
evidence: (0, m1@2, del)
evidence: (0, m2@1, [m1@2]@2 del)
"""


def main():
    t = jck.Term("ind(x1@C, x1@E)")
    assert t.sort == "C", t.sort
    f = jck.Formula("[x1@C]@C (P1 -> P1)")
    assert f.forgetful() == "#C (P1 -> P1)", f.forgetful()
    assert str(jck.Formula("[pi_1(x1@E)]@1 P1").projection()) == "P1"
    assert f.realizes("#C (P1 -> P1)")

    refl = jck.Proof("1. [x1@1]@1 P1 -> P1 ; axiom refl\n")
    assert refl.check().accepted
    bad = jck.Proof("1. [x1@1]@1 P1 -> P2 ; axiom refl\n")
    assert not bad.check()

    synth = jck.Synth(2, total_c=False)
    term, lifted = synth.necessitate(refl, "C")
    assert lifted.check().accepted, lifted.check()
    assert str(lifted.conclusion) == f"[{term}]@C ([x1@1]@1 P1 -> P1)"
    assert lifted.cs_table and ":=" in lifted.cs_table
    assert lifted.translate_x().check().accepted
    assert lifted.probe() is None

    try:
        jck.Formula("[x1@C P1")
    except ValueError:
        pass
    else:
        raise AssertionError("parse error not raised")

    m = jck.Model(ATTACK)
    assert m.validate() == []
    assert m.satisfies("[m1@2]@2 del", 0)
    assert not m.satisfies("del", "3")
    assert not m.kripke("#2 P1 & #1 #2 P1 -> #C P1", 0)

    assert jck.probe("#1 P1 -> #C P1") is not None
    ok, report = jck.demo_attack(3)
    assert ok, report
    print("jck smoke test passed")


if __name__ == "__main__":
    main()
