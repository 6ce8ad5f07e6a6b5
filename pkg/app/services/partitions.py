"""
Strata of punctual Hilbert schemes on x^u y^v, as combinatorial data.

Three indexings are enumerated here, each with the statistic that gives
the virtual Poincare polynomial of its stratum:

- weak diagonal partitions (u = v, and the plane), a stratum contributing
  Q^n (T^2 - 1)^m1 T^(2 m2);
- vertical strata for u in {1, 2}, contributing Q^n T^(2 dim);
- partitions with at most k parts for the fat line y^k, contributing
  Q^n T^(n - largest part).

Layer index 0 is the outermost layer; every rule compares an outer layer
with the one directly inside it.
"""
import itertools
import logging
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from sympy.utilities.iterables import partitions as integer_partitions

from app.errors import ContractViolation, UnsupportedCurveError
from app.models.strata import (
    Layer,
    LayerKind,
    StratumRecord,
    StratumStats,
    VerticalRecord,
    VerticalStratum,
    WeakDiagonalPartition,
)
from app.services.profiling import phase
from app.services.series_core import LaurentPoly, QSeries, mono

# Configure logging
logger = logging.getLogger(__name__)

ONE, TWO = LayerKind.ONE, LayerKind.TWO

Row = Tuple[LayerKind, int, int]


def _delta(kind: LayerKind, i: int, j: int) -> int:
    return i + j if kind == ONE else i + j - 1


def _fits(outer: Row, inner: Row) -> bool:
    """
    Adjacency rule between an outer layer and the layer directly inside it.
    """
    ok, oi, oj = outer
    ik, ii, ij = inner
    if ok == ONE and ik == ONE:
        return (oi, oj) == (ii, ij) or (oi > ii and oj > ij)
    if ok == ONE and ik == TWO:
        return oi >= ii and oj >= ij
    return oi > ii and oj > ij


def _rows(p: WeakDiagonalPartition) -> List[Row]:
    return [(layer.kind, layer.i, layer.j) for layer in p.layers]


def _from_rows(rows: Sequence[Row]) -> WeakDiagonalPartition:
    return WeakDiagonalPartition(layers=tuple(Layer(kind=k, i=i, j=j) for k, i, j in rows))


def wdp_validate(p: WeakDiagonalPartition) -> bool:
    rows = _rows(p)
    if any(i < 1 or j < 1 for _, i, j in rows):
        return False
    return all(_fits(outer, inner) for outer, inner in zip(rows, rows[1:]))


def _require_valid(p: WeakDiagonalPartition):
    if not wdp_validate(p):
        raise ContractViolation(f"Not a weak diagonal partition: {p.rows()}")


def wdp_box_count(p: WeakDiagonalPartition) -> int:
    _require_valid(p)
    return sum(layer.boxes for layer in p.layers)


def _stats(rows: Sequence[Row]) -> Tuple[int, int, int]:
    if not rows:
        return 0, 0, 0
    n = sum(_delta(*row) for row in rows)
    equal_ones = sum(
        1 for outer, inner in zip(rows, rows[1:]) if outer[0] == inner[0] == ONE and outer == inner
    )
    two_two = sum(1 for outer, inner in zip(rows, rows[1:]) if outer[0] == inner[0] == TWO)
    m1 = sum(1 for row in rows if row[0] == ONE) - equal_ones
    m2 = n - _delta(*rows[0]) + two_two
    return n, m1, m2


def wdp_stats(p: WeakDiagonalPartition) -> StratumStats:
    """
    Box count and the exponents of the stratum (A - pt)^m1 x A^m2.

    m1 counts the ONE layers, less one for every pair of equal adjacent ONE
    layers. m2 counts the boxes outside the outermost layer plus the
    adjacent TWO/TWO pairs.
    """
    _require_valid(p)
    n, m1, m2 = _stats(_rows(p))
    return StratumStats(n=n, m1=m1, m2=m2)


def _contribution(n: int, m1: int, m2: int) -> LaurentPoly:
    return mono(q=n, t=2 * m2) * (mono(t=2) - 1) ** m1


def wdp_contribution(s: StratumStats) -> LaurentPoly:
    return _contribution(s.n, s.m1, s.m2)


def _outer_layers(inner: Row, remaining: int, rows_left: int) -> Iterator[List[Row]]:
    """
    All ways to wrap ``inner`` in further layers using exactly ``remaining`` boxes.
    Yielded lists run from the new outermost layer inwards, excluding ``inner``.
    """
    if remaining == 0:
        yield []
        return
    if rows_left == 0:
        return
    for kind in (ONE, TWO):
        # i + j is at most remaining for ONE, remaining + 1 for TWO
        span = remaining if kind == ONE else remaining + 1
        for i in range(inner[1], span):
            for j in range(inner[2], span - i + 1):
                outer = (kind, i, j)
                if not _fits(outer, inner):
                    continue
                for rest in _outer_layers(outer, remaining - _delta(*outer), rows_left - 1):
                    yield rest + [outer]


def _enumerate_rows(n: int, max_rows: int) -> List[Tuple[Row, ...]]:
    if n == 0:
        return [()]
    found = []
    if max_rows < 1:
        return found
    for kind in (ONE, TWO):
        span = n if kind == ONE else n + 1
        for i in range(1, span):
            for j in range(1, span - i + 1):
                inner = (kind, i, j)
                for outer in _outer_layers(inner, n - _delta(*inner), max_rows - 1):
                    found.append(tuple(outer + [inner]))
    found.sort(key=lambda rows: (len(rows), [(k.value, i, j) for k, i, j in rows]))
    return found


def wdp_enumerate(n: int, max_rows: int) -> List[WeakDiagonalPartition]:
    """
    Every weak diagonal partition with ``n`` boxes and at most ``max_rows``
    layers, built from the innermost layer outwards.
    """
    with phase("enumeration"):
        found = _enumerate_rows(n, max_rows)
    logger.debug(f"Enumerated {len(found)} weak diagonal partitions of {n} boxes, rows <= {max_rows}")
    return [_from_rows(rows) for rows in found]


def wdp_aggregate(n: int, max_rows: int) -> LaurentPoly:
    """
    Sum of the stratum contributions over all partitions of ``n`` boxes
    with at most ``max_rows`` layers (the Q^n coefficient, Q included).
    """
    with phase("enumeration"):
        total = LaurentPoly.zero()
        for rows in _enumerate_rows(n, max_rows):
            total = total + _contribution(*_stats(rows))
    return total


def wdp_records(n: int, max_rows: int) -> List[StratumRecord]:
    records = []
    for p in wdp_enumerate(n, max_rows):
        stats = wdp_stats(p)
        records.append(
            StratumRecord(
                layers=p.rows(),
                n=stats.n,
                m1=stats.m1,
                m2=stats.m2,
                contribution=str(wdp_contribution(stats)),
            )
        )
    return records


def _minimal_rows(kinds: Sequence[LayerKind], equal_ones: Sequence[bool]) -> List[Row]:
    """
    Smallest arms for a type word (outer to inner) and, for each adjacent
    pair, whether it is an equal ONE/ONE pair.
    """
    if not kinds:
        return []
    rows = [(kinds[-1], 1, 1)]
    for idx in range(len(kinds) - 2, -1, -1):
        _, ii, ij = rows[0]
        outer_kind, inner_kind = kinds[idx], kinds[idx + 1]
        if outer_kind == ONE and inner_kind == ONE and equal_ones[idx]:
            step = 0
        elif outer_kind == ONE and inner_kind == TWO:
            step = 0
        else:
            step = 1
        rows.insert(0, (outer_kind, ii + step, ij + step))
    return rows


def _labels(rows: Sequence[Row]) -> List[bool]:
    return [outer[0] == inner[0] == ONE and outer == inner for outer, inner in zip(rows, rows[1:])]


def wdp_minimal_core(p: WeakDiagonalPartition) -> WeakDiagonalPartition:
    """
    The minimal partition with the same type word and the same equal/unequal
    labels on adjacent ONE layers.
    """
    _require_valid(p)
    rows = _rows(p)
    return _from_rows(_minimal_rows([row[0] for row in rows], _labels(rows)))


def wdp_minimal_cores(rows: int) -> List[WeakDiagonalPartition]:
    """
    One minimal partition per labelled type word with ``rows`` layers.
    """
    cores = []
    for kinds in itertools.product((ONE, TWO), repeat=rows):
        one_pairs = [idx for idx in range(rows - 1) if kinds[idx] == kinds[idx + 1] == ONE]
        for choice in itertools.product((False, True), repeat=len(one_pairs)):
            equal = [False] * max(rows - 1, 0)
            for idx, flag in zip(one_pairs, choice):
                equal[idx] = flag
            cores.append(_from_rows(_minimal_rows(kinds, equal)))
    return cores


def _ordinary_partitions(n: int, max_parts: Optional[int] = None) -> Iterator[Tuple[int, ...]]:
    if n == 0:
        yield ()
        return
    for counts in integer_partitions(n, m=max_parts):
        # sympy reuses the dict between iterations
        counts = dict(counts)
        yield tuple(part for part in sorted(counts, reverse=True) for _ in range(counts[part]))


def vertical_dimension(parts: Sequence[int], u: int, v: int) -> int:
    """
    Dimension of the vertical stratum of ``parts``.

    The boxes in rows 1..v, and for u = 2 also the rows after
    floor((M' + N) / 2) where M' = max(M, v) and rows M..N are the trailing
    run of 1s.
    """
    dim = sum(parts[1 : v + 1])
    if u == 2 and parts:
        last = len(parts) - 1
        if parts[last] == 1:
            start = last
            while start > 0 and parts[start - 1] == 1:
                start -= 1
            start = max(start, v)
            if start <= last:
                dim += last - (start + last) // 2
    return dim


def vertical_enumerate(n: int, u: int, v: int) -> List[Tuple[VerticalStratum, int]]:
    if u not in (1, 2):
        raise UnsupportedCurveError(f"Vertical strata exist for u in {{1, 2}}, got u={u}")
    if n < 0:
        raise UnsupportedCurveError(f"Number of points must be >= 0, got {n}")
    found = []
    with phase("enumeration"):
        for parts in _ordinary_partitions(n):
            if any(p > u for p in parts[v:]):
                continue
            found.append((parts, vertical_dimension(parts, u, v)))
    found.sort(key=lambda item: item[0], reverse=True)
    logger.debug(f"Enumerated {len(found)} vertical strata of {n} points for x^{u} y^{v}")
    return [(VerticalStratum(parts=parts, u=u, v=v), dim) for parts, dim in found]


def vertical_aggregate(n: int, u: int, v: int) -> LaurentPoly:
    total = LaurentPoly.zero()
    for stratum, dim in vertical_enumerate(n, u, v):
        total = total + mono(q=n, t=2 * dim)
    return total


def vertical_records(n: int, u: int, v: int) -> List[VerticalRecord]:
    return [
        VerticalRecord(
            parts=list(stratum.parts), u=u, v=v, n=n, dim=dim, contribution=str(mono(q=n, t=2 * dim))
        )
        for stratum, dim in vertical_enumerate(n, u, v)
    ]


def bounded_partitions_series(k: int, nmax: int) -> QSeries:
    """
    Cells of the fat line y^k: partitions with at most k parts, each giving
    Q^n T^(n - largest part).
    """
    coeffs: List[Dict] = []
    with phase("enumeration"):
        for n in range(nmax + 1):
            counts: Dict[Tuple[int, int, int], int] = {}
            for parts in _ordinary_partitions(n, max_parts=k):
                key = (0, n - (parts[0] if parts else 0), 0)
                counts[key] = counts.get(key, 0) + 1
            coeffs.append(LaurentPoly(counts))
    return QSeries(nmax, coeffs)


def render_wdp(p: WeakDiagonalPartition) -> str:
    """
    One line per layer, outermost first. Solid boxes are '#', the shaded
    end boxes of a ONE layer are 'o'.
    """
    if not p.layers:
        return "(empty)"
    lines = []
    for idx, layer in enumerate(p.layers):
        if layer.kind == ONE:
            horizontal = "#" * (layer.i - 1) + "o"
            vertical = "#" * (layer.j - 1) + "o"
        else:
            horizontal = "#" * layer.i
            vertical = "#" * (layer.j - 1)
        tag = "(1)" if layer.kind == ONE else "(2)"
        lines.append(f"{idx:>2} {tag} ({layer.i},{layer.j})  {horizontal}|{vertical}")
    return "\n".join(lines)


def render_vertical(stratum: VerticalStratum, dim: int) -> str:
    """
    Rows of the stratum top to bottom with a rule under row v - 1.
    """
    if not stratum.parts:
        return f"(empty) dim={dim}"
    lines = []
    for idx, part in enumerate(stratum.parts):
        lines.append(f"{idx:>2} {'#' * part}")
        if idx == stratum.v - 1 and idx < len(stratum.parts) - 1:
            lines.append("   " + "-" * max(stratum.parts[0], 1))
    lines.append(f"dim={dim}")
    return "\n".join(lines)
