import logging
from collections import defaultdict

import pytest
import sympy
from pydantic import ValidationError

from app.errors import ContractViolation, UnsupportedCurveError
from app.models.strata import StratumStats, VerticalStratum, WeakDiagonalPartition
from app.services.partitions import (
    bounded_partitions_series,
    render_vertical,
    render_wdp,
    vertical_aggregate,
    vertical_dimension,
    vertical_enumerate,
    vertical_records,
    wdp_aggregate,
    wdp_box_count,
    wdp_contribution,
    wdp_enumerate,
    wdp_minimal_core,
    wdp_minimal_cores,
    wdp_records,
    wdp_stats,
    wdp_validate,
)
from app.services.series_core import ONE, FactoredRational, LaurentPoly, mono, rf_to_series, specialize

# Configure logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def wdp(*rows) -> WeakDiagonalPartition:
    return WeakDiagonalPartition.from_rows(rows)


def naive_fits(outer, inner) -> bool:
    (ok, oi, oj), (ik, ii, ij) = outer, inner
    strict = oi >= ii + 1 and oj >= ij + 1
    if (ok, ik) == ("ONE", "ONE"):
        return (oi, oj) == (ii, ij) or strict
    if (ok, ik) == ("ONE", "TWO"):
        return oi >= ii and oj >= ij
    return strict


def naive_partitions(n: int, max_rows: int):
    """Generate-and-filter over every layer with arms up to n + 1."""
    layers = [
        (kind, i, j)
        for kind in ("ONE", "TWO")
        for i in range(1, n + 2)
        for j in range(1, n + 2)
    ]

    def boxes(row):
        return row[1] + row[2] - (0 if row[0] == "ONE" else 1)

    found = set()

    def extend(prefix, used):
        if used == n:
            if all(naive_fits(a, b) for a, b in zip(prefix, prefix[1:])):
                found.add(tuple(prefix))
            return
        if len(prefix) == max_rows:
            return
        for row in layers:
            if used + boxes(row) <= n:
                extend(prefix + [row], used + boxes(row))

    extend([], 0)
    return found


def test_validate_examples():
    assert wdp_validate(wdp(("ONE", 1, 1), ("ONE", 1, 1)))
    assert not wdp_validate(wdp(("TWO", 1, 1), ("TWO", 1, 1)))
    assert wdp_validate(wdp(("ONE", 2, 1), ("TWO", 1, 1)))
    assert wdp_validate(wdp(("ONE", 2, 2), ("ONE", 1, 1)))
    assert not wdp_validate(wdp(("ONE", 2, 1), ("ONE", 1, 1)))
    assert not wdp_validate(wdp(("TWO", 2, 1), ("ONE", 1, 1)))
    assert wdp_validate(wdp())


def test_layer_arms_must_be_positive():
    with pytest.raises(ValidationError):
        wdp(("ONE", 0, 1))


def test_box_count_examples():
    assert wdp_box_count(wdp(("ONE", 2, 2), ("ONE", 1, 1))) == 6
    assert wdp_box_count(wdp(("TWO", 2, 2), ("TWO", 1, 1))) == 4
    assert wdp_box_count(wdp(("TWO", 1, 1))) == 1
    with pytest.raises(ContractViolation):
        wdp_box_count(wdp(("TWO", 1, 1), ("TWO", 1, 1)))


def test_stats_examples():
    assert wdp_stats(wdp(("ONE", 1, 1))) == StratumStats(n=2, m1=1, m2=0)
    assert wdp_stats(wdp(("TWO", 2, 2), ("TWO", 1, 1))) == StratumStats(n=4, m1=0, m2=2)
    assert wdp_stats(wdp(("ONE", 1, 1), ("ONE", 1, 1))) == StratumStats(n=4, m1=1, m2=2)
    assert wdp_stats(wdp()) == StratumStats(n=0, m1=0, m2=0)
    with pytest.raises(ContractViolation):
        wdp_stats(wdp(("ONE", 2, 1), ("ONE", 1, 1)))


def test_contribution():
    assert wdp_contribution(StratumStats(n=0, m1=0, m2=0)) == ONE
    assert wdp_contribution(StratumStats(n=2, m1=1, m2=0)) == mono(q=2, t=2) - mono(q=2)
    assert wdp_contribution(StratumStats(n=4, m1=0, m2=2)) == mono(q=4, t=4)


def test_enumerate_small_n():
    assert wdp_enumerate(0, 0) == [wdp()]
    assert wdp_enumerate(1, 3) == [wdp(("TWO", 1, 1))]
    assert wdp_enumerate(2, 3) == [wdp(("ONE", 1, 1)), wdp(("TWO", 1, 2)), wdp(("TWO", 2, 1))]


def test_enumerate_four_boxes():
    found = wdp_enumerate(4, 2)
    assert len(found) == 11
    assert wdp(("ONE", 1, 1), ("ONE", 1, 1)) in found
    assert wdp(("TWO", 2, 2), ("TWO", 1, 1)) in found
    assert wdp(("ONE", 1, 2), ("TWO", 1, 1)) in found
    assert wdp_aggregate(4, 2) == LaurentPoly.from_expr("Q^4*(1 + T^2 + 2*T^4 + T^6)")


def test_max_rows_limits_layers():
    assert all(len(p) == 1 for p in wdp_enumerate(4, 1))
    assert len(wdp_enumerate(4, 1)) == 7


@pytest.mark.parametrize("n", range(0, 7))
def test_enumerate_matches_naive_search(n):
    found = wdp_enumerate(n, 3)
    rows = [tuple(p.rows()) for p in found]
    assert len(rows) == len(set(rows))
    assert all(wdp_validate(p) and wdp_box_count(p) == n for p in found)
    assert set(rows) == naive_partitions(n, 3)


def test_aggregate_matches_plane_product():
    nmax = 10
    plane = rf_to_series(FactoredRational(ONE, [(i, 2 * (i - 1)) for i in range(1, nmax + 1)]), nmax)
    for n in range(nmax + 1):
        aggregate = wdp_aggregate(n, max(1, (n + 1) // 2))
        assert aggregate.coefficient_of_q(n) == plane.coefficient(n), n


def test_aggregate_at_t_one_counts_partitions():
    for n in range(9):
        counted = specialize(wdp_aggregate(n, n), "T", 1)
        assert counted == mono(q=n, coeff=int(sympy.partition(n)))


def test_minimal_core_examples():
    assert wdp_minimal_core(wdp(("ONE", 3, 2), ("TWO", 1, 1))) == wdp(("ONE", 1, 1), ("TWO", 1, 1))
    unequal = wdp(("ONE", 2, 2), ("ONE", 1, 1))
    assert wdp_minimal_core(unequal) == unequal
    assert wdp_minimal_core(wdp(("ONE", 3, 3), ("ONE", 3, 3))) == wdp(("ONE", 1, 1), ("ONE", 1, 1))
    with pytest.raises(ContractViolation):
        wdp_minimal_core(wdp(("TWO", 1, 1), ("TWO", 1, 1)))


def test_minimal_core_is_idempotent_and_minimal():
    smallest = defaultdict(lambda: None)
    cores = {}
    for n in range(1, 10):
        for p in wdp_enumerate(n, 3):
            rows = p.rows()
            word = (p.kinds(), tuple(a == b and a[0] == "ONE" for a, b in zip(rows, rows[1:])))
            core = wdp_minimal_core(p)
            assert wdp_validate(core)
            assert core.kinds() == p.kinds()
            assert wdp_minimal_core(core) == core
            assert wdp_box_count(core) <= n
            cores[word] = core
            if smallest[word] is None or n < smallest[word]:
                smallest[word] = n
    for word, core in cores.items():
        assert wdp_box_count(core) == smallest[word]


def test_minimal_cores_per_row_count():
    assert wdp_minimal_cores(0) == [wdp()]
    assert wdp_minimal_cores(1) == [wdp(("ONE", 1, 1)), wdp(("TWO", 1, 1))]
    two_rows = wdp_minimal_cores(2)
    assert len(two_rows) == 5
    assert wdp(("ONE", 1, 1), ("ONE", 1, 1)) in two_rows
    assert wdp(("ONE", 2, 2), ("ONE", 1, 1)) in two_rows
    assert wdp(("TWO", 2, 2), ("TWO", 1, 1)) in two_rows
    assert all(wdp_validate(core) for core in wdp_minimal_cores(3))


def test_records_json_line():
    assert [record.model_dump_json() for record in wdp_records(1, 1)] == [
        '{"layers":[["TWO",1,1]],"n":1,"m1":0,"m2":0,"contribution":"Q"}'
    ]


def test_vertical_two_points_on_node():
    strata = vertical_enumerate(2, 1, 1)
    assert [(s.parts, dim) for s, dim in strata] == [((2,), 0), ((1, 1), 1)]
    assert vertical_aggregate(2, 1, 1) == LaurentPoly.from_expr("Q^2 + Q^2*T^2")


def test_vertical_empty_stratum():
    assert [(s.parts, dim) for s, dim in vertical_enumerate(0, 2, 3)] == [((), 0)]


def test_vertical_rejects_wide_curves():
    with pytest.raises(UnsupportedCurveError):
        vertical_enumerate(3, 3, 4)


def test_vertical_node_matches_hooks():
    for n in range(2, 9):
        assert vertical_aggregate(n, 1, 1) == mono(q=n) + mono(q=n, t=2, coeff=n - 1)


def test_vertical_dimension_rules():
    assert vertical_dimension((3, 2, 2), 1, 1) == 2
    assert vertical_dimension((3, 2, 2), 2, 1) == 2
    assert vertical_dimension((1, 1), 2, 1) == 1
    assert vertical_dimension((2, 2, 1, 1, 1, 1), 2, 2) == 5
    assert vertical_dimension((2, 2, 2), 2, 1) == 2


def test_vertical_stratum_validation():
    with pytest.raises(ValidationError):
        VerticalStratum(parts=(1, 2), u=1, v=2)
    with pytest.raises(ValidationError):
        VerticalStratum(parts=(2, 2), u=1, v=1)
    assert VerticalStratum(parts=(2, 2), u=2, v=1).n == 4


def test_vertical_records():
    records = vertical_records(2, 1, 1)
    assert [(r.parts, r.dim, r.contribution) for r in records] == [
        ([2], 0, "Q^2"),
        ([1, 1], 1, "Q^2*T^2"),
    ]


def test_bounded_partitions():
    assert all(c == ONE for c in bounded_partitions_series(1, 6).coeffs)
    two = bounded_partitions_series(2, 4)
    assert two.coefficient(3) == LaurentPoly.from_expr("1 + T")
    assert two == rf_to_series(FactoredRational(ONE, [(1, 0), (2, 1)]), 4)
    three = FactoredRational(ONE, [(1, 0), (2, 1), (3, 2)])
    assert bounded_partitions_series(3, 12) == rf_to_series(three, 12)


def test_render_wdp():
    assert render_wdp(wdp(("ONE", 2, 1), ("TWO", 1, 1))) == " 0 (1) (2,1)  #o|o\n 1 (2) (1,1)  #|"
    assert render_wdp(wdp()) == "(empty)"


def test_render_vertical():
    stratum = VerticalStratum(parts=(2, 1), u=1, v=1)
    assert render_vertical(stratum, 1) == " 0 ##\n   --\n 1 #\ndim=1"


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
