import math

from ratmat.verify import Collector, TOLERANCES, check_instance, passed, run_random
from ratmat.sampling import rng_for


def test_collector_semantics():
    col = Collector()
    col.add("det_at_zeros", 1e-12)
    col.add("det_at_zeros", 1e-14)
    col.add("inverse_identity", math.nan)
    col.skip("eta_roundtrip", "reason")
    rows = {r["invariant"]: r for r in col.report()}
    assert rows["det_at_zeros"]["max_residual"] == 1e-12 and rows["det_at_zeros"]["pass"]
    assert rows["inverse_identity"]["pass"] is False  # non-finite counts as a failure
    assert rows["eta_roundtrip"]["pass"] is None and rows["eta_roundtrip"]["skipped"] == "reason"
    assert not passed(col.report())


def test_skipped_rows_do_not_fail():
    col = Collector()
    col.skip("eta_roundtrip", "degenerate")
    assert passed(col.report())


def test_fixture_a_skips_are_reported(LA):
    rows = check_instance(LA, rng_for(0)).report()
    skipped = {r["invariant"]: r["skipped"] for r in rows if r["pass"] is None}
    assert "bilinear form in the Lagrangian vanishes" in skipped["gradient_recovery"]
    assert "ShiftCollision" in skipped["dpv_oracle"]
    assert passed(rows)


def test_random_suite_independent_of_workers():
    a = run_random(8, seed=11, workers=1).report()
    b = run_random(8, seed=11, workers=2).report()
    assert a == b
    assert {r["invariant"] for r in a} <= set(TOLERANCES)
