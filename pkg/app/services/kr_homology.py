"""
Row-coloured Khovanov-Rozansky Poincare series of torus links through the
binary-string recursion p(t, w).

For strings t, w with the same number l of 1s:

    p(.,.) = 1,  p(., 0^n) = ((1 + a) / (1 - Q))^n,  p(0^m, .) = ((1 + a) / (1 - Q))^m
    p(t1, w1) = (T^l + a) p(t, w)
    p(t0, w0) = T^-l p(1t, 1w) + Q T^-l p(0t, 0w)
    p(t0, w1) = p(t, 1w)
    p(t1, w0) = p(1t, w)

Only the second branch of the t0/w0 rule returns to a state of the same
size, and it carries a factor Q. Every other rewrite strictly decreases
(length, -number of 1s), so the states form a DAG once Q edges are
removed and a Q-truncated solution is reached by fixed-point rounds.
"""
import logging
import threading
from typing import Dict, List, Tuple

import networkx
from pydantic import ValidationError

from app.errors import DomainError, KRConsistencyError, NormalizationError
from app.models.specs import BinaryPair, TorusLinkSpec
from app.services.profiling import phase
from app.services.series_core import ONE, A, FactoredRational, LaurentPoly, QSeries, mono, rf_to_series

# Configure logging
logger = logging.getLogger(__name__)

State = Tuple[str, str]

# Solved states per (nmax, set_a_zero); filled under the lock, read-only afterwards
_cache: Dict[Tuple[int, bool], Dict[State, QSeries]] = {}
_cache_lock = threading.Lock()


def clear_cache():
    with _cache_lock:
        _cache.clear()


def binary_pair(t: str, w: str) -> BinaryPair:
    try:
        return BinaryPair(t=t, w=w)
    except ValidationError as e:
        raise DomainError(f"Invalid binary pair ({t!r}, {w!r}): {e.errors()[0]['msg']}")


class _Equation:
    """
    value = constant + sum(coeff * Q^shift * value(target)).
    """

    __slots__ = ("constant", "terms")

    def __init__(self, constant=None, terms=()):
        self.constant = constant
        self.terms: List[Tuple[LaurentPoly, int, State]] = list(terms)


def _equation(state: State, nmax: int, a: LaurentPoly) -> _Equation:
    t, w = state
    if not t or not w:
        zeros = len(t) + len(w)
        numerator = (ONE + a) ** zeros
        return _Equation(constant=rf_to_series(FactoredRational(numerator, [(1, 0)] * zeros), nmax))
    l = t[:-1].count("1")
    head_t, head_w = t[:-1], w[:-1]
    last = (t[-1], w[-1])
    if last == ("1", "1"):
        return _Equation(terms=[(mono(t=l) + a, 0, (head_t, head_w))])
    if last == ("0", "0"):
        return _Equation(
            terms=[
                (mono(t=-l), 0, ("1" + head_t, "1" + head_w)),
                (mono(t=-l), 1, ("0" + head_t, "0" + head_w)),
            ]
        )
    if last == ("0", "1"):
        return _Equation(terms=[(ONE, 0, (head_t, "1" + head_w))])
    return _Equation(terms=[(ONE, 0, ("1" + head_t, head_w))])


def _shift_q(series: QSeries, shift: int) -> QSeries:
    if shift == 0:
        return series
    return QSeries(series.nmax, [LaurentPoly.zero()] * shift + list(series.coeffs[: series.nmax + 1 - shift]))


def _solve(root: State, nmax: int, set_a_zero: bool, known: Dict[State, QSeries]) -> Dict[State, QSeries]:
    a = LaurentPoly.zero() if set_a_zero else A
    equations: Dict[State, _Equation] = {}
    frontier = [root]
    while frontier:
        state = frontier.pop()
        if state in equations or state in known:
            continue
        equation = _equation(state, nmax, a)
        equations[state] = equation
        frontier.extend(target for _, _, target in equation.terms)

    graph = networkx.DiGraph()
    graph.add_nodes_from(equations)
    graph.add_edges_from(
        (target, state)
        for state, eq in equations.items()
        for _, shift, target in eq.terms
        if shift == 0 and target in equations
    )
    try:
        order = list(networkx.topological_sort(graph))
    except networkx.NetworkXUnfeasible:
        cycle = [edge[0] for edge in networkx.find_cycle(graph)]
        raise KRConsistencyError(f"Rewrite cycle without a factor Q: {cycle}")

    values: Dict[State, QSeries] = {state: QSeries(nmax) for state in equations}

    def lookup(target: State) -> QSeries:
        return known[target] if target in known else values[target]

    rounds = 0
    for rounds in range(1, nmax + 3):
        changed = False
        for state in order:
            eq = equations[state]
            if eq.constant is not None:
                new = eq.constant
            else:
                new = QSeries(nmax)
                for coeff, shift, target in eq.terms:
                    new = new + _shift_q(lookup(target), shift) * coeff
            if new != values[state]:
                values[state] = new
                changed = True
        if not changed:
            break
    else:
        raise KRConsistencyError(f"Fixed point for {root} not reached in {nmax + 2} rounds")
    logger.debug(f"Solved {len(equations)} states from {root} to Q^{nmax} in {rounds} rounds")
    return values


def kr_solve(pair: BinaryPair, nmax: int, set_a_zero: bool = True, use_cache: bool = True) -> Dict[State, QSeries]:
    """
    Values of p on every state reachable from ``pair``, to Q^nmax.
    """
    if nmax < 0:
        raise DomainError(f"Truncation degree must be >= 0, got {nmax}")
    key = (nmax, set_a_zero)
    with phase("kr_recursion"):
        if not use_cache:
            return _solve(pair.key(), nmax, set_a_zero, {})
        with _cache_lock:
            known = _cache.setdefault(key, {})
            if pair.key() not in known:
                known.update(_solve(pair.key(), nmax, set_a_zero, known))
            return dict(known)


def kr_p(pair: BinaryPair, nmax: int, set_a_zero: bool = True, use_cache: bool = True) -> QSeries:
    if not use_cache:
        return kr_solve(pair, nmax, set_a_zero, use_cache=False)[pair.key()]
    key = (nmax, set_a_zero)
    with _cache_lock:
        hit = _cache.get(key, {}).get(pair.key())
    if hit is not None:
        return hit
    return kr_solve(pair, nmax, set_a_zero)[pair.key()]


def torus_link_strings(spec: TorusLinkSpec) -> BinaryPair:
    """
    1^v 0^(m/d (d-1) + v (m/d - 1)) for each of the two link parameters.
    """
    v, d = spec.color_v, spec.d

    def zeros(m: int) -> int:
        return (m // d) * (d - 1) + v * (m // d - 1)

    return BinaryPair(t="1" * v + "0" * zeros(spec.mA), w="1" * v + "0" * zeros(spec.mB))


def color_prefactor(v: int) -> FactoredRational:
    """prod_{i=1}^{v} 1 / (1 - Q T^(1-i))"""
    return FactoredRational(ONE, [(1, 1 - i) for i in range(1, v + 1)])


def kr_torus_link(spec: TorusLinkSpec, nmax: int, set_a_zero: bool = True) -> QSeries:
    pair = torus_link_strings(spec)
    logger.info(
        f"T({spec.mA},{spec.mB}) coloured by Sym^{spec.color_v}: p({pair.t or '.'}, {pair.w or '.'})"
    )
    return rf_to_series(color_prefactor(spec.color_v), nmax) * kr_p(pair, nmax, set_a_zero)


def cf_hopf_closed(v: int) -> FactoredRational:
    """
    (1 + Q T^-v / (1 - Q)) prod_{i=1}^{v} 1 / (1 - Q T^(1-i)), with the
    overall factor prod_{i=1}^{v-1} T^i removed.
    """
    if v < 1:
        raise DomainError(f"Hopf link colour needs v >= 1, got {v}")
    numerator = ONE - mono(q=1) + mono(q=1, t=-v)
    return FactoredRational(numerator, [(1, 0)] + [(1, 1 - i) for i in range(1, v + 1)])


def strip_monomial(x: QSeries, v: int) -> QSeries:
    """
    Divide by prod_{i=1}^{v-1} T^i = T^(v(v-1)/2).
    """
    shift = v * (v - 1) // 2
    leading = x.coefficient(0)
    if not leading.is_zero() and leading.min_t < shift:
        raise NormalizationError(
            f"Constant coefficient {leading} is not divisible by T^{shift}"
        )
    return x.times_t(-shift)
