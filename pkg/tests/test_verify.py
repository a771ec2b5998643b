import pytest

from dendrocode.verify import SUITES, run_suite


@pytest.mark.parametrize("suite", sorted(SUITES))
def test_every_suite_passes(suite):
    report = run_suite(suite, seed=3, cases=12)
    failed = [c for c in report["checks"] if not c["passed"]]
    assert report["passed"], failed


def test_suite_per_module():
    assert {"height_fn", "tree_core", "order_measure", "codec", "random_gen", "cli", "roundtrip"} <= set(SUITES)


def test_report_is_independent_of_sharding():
    serial = run_suite("codec", seed=11, cases=6, workers=1)
    sharded = run_suite("codec", seed=11, cases=6, workers=4)
    assert serial == sharded


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nope")
