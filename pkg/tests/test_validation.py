import pytest

from subgeo.errors import InputError
from subgeo.validation import format_table, planted_setting, run_suite


@pytest.mark.parametrize("kind", ["ball", "kball", "slab"])
@pytest.mark.parametrize("lemma", [1, 2])
def test_small_suite_passes(kind, lemma):
    res = run_suite(lemma, [(0.1, 0.5, 0.1)], trials=400, n=20_000, kind=kind, d=3, margin=0.06)
    assert len(res) == 1
    r = res[0]
    assert r.trials == 400 and 0.0 <= r.rate <= 1.0
    assert r.passed, (r.rate, r.bound)


def test_table_format():
    res = run_suite(2, [(0.1, 0.5, 0.1), (0.2, 0.3, 0.2)], trials=100, n=20_000, d=3)
    lines = format_table(res).splitlines()
    assert len(lines) == 3 and lines[0].split()[0] == "lemma"


def test_bad_inputs():
    with pytest.raises(InputError):
        run_suite(3, trials=10)
    with pytest.raises(InputError):
        planted_setting("cube", 100, 0.1)
