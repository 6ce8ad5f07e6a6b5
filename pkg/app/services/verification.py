"""
Identity and oracle checks across the series, partition, closed-form and
KR modules. Every check returns a CheckReport and never raises for a
mathematical mismatch; the report names the first Q-degree where the two
sides part ways.
"""
import logging
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from pydantic import BaseModel, Field
from sympy import partition

from app import config
from app.errors import EngineError
from app.models.report import CheckReport, CheckStatus, Divergence
from app.models.specs import TorusLinkSpec
from app.services.closed_forms import (
    cf_nodal_reduced,
    cf_plane,
    cf_x2yv,
    cf_xvm1yv,
    cf_xvm2yv,
    cf_xvyv,
    cf_xyv,
    durfee_classical_terms,
    durfee_terms,
)
from app.services.kr_homology import cf_hopf_closed, clear_cache, kr_torus_link, strip_monomial
from app.services.partitions import vertical_aggregate, wdp_aggregate
from app.services.series_core import (
    FactoredRational,
    LaurentPoly,
    QSeries,
    lp_to_payload,
    qs_substitute_T,
    rf_substitute_T,
    rf_to_series,
    series_first_divergence,
    specialize,
    total_degree_truncation,
)

# Configure logging
logger = logging.getLogger(__name__)

CHECK_NAMES = (
    "ors_xyv",
    "durfee",
    "plane_agreement",
    "appendix_golden",
    "printed_fractions",
    "wdp_oracle",
    "vertical_oracle",
    "curve_overlaps",
)

# Golden values as a computer-algebra session prints them
APPENDIX_SERIES_X3Y3 = (
    "Q^10+Q^8*T^2+2*Q^6*T^4+Q^4*T^6+Q^9+Q^7*T^2+2*Q^5*T^4+Q^8+Q^6*T^2+2*Q^4*T^4"
    "+Q^7+Q^5*T^2+Q^3*T^4+Q^6+Q^4*T^2+Q^5+Q^3*T^2+Q^4+Q^2*T^2+Q^3+Q^2+Q+1"
)

PRINTED_FRACTIONS: Dict[int, Tuple[str, str]] = {
    2: (
        "Q^6*T^8-Q^5*T^6+Q^4*T^6-Q^4*T^4+Q^3*T^4+Q^3*T^2-Q^2*T^2-Q+1",
        "Q^6*T^4-2*Q^5*T^4+Q^4*T^4-2*Q^4*T^2+4*Q^3*T^2-2*Q^2*T^2+Q^2-2*Q+1",
    ),
    3: (
        "Q^12*T^18-Q^11*T^16+Q^10*T^16-Q^10*T^14+Q^9*T^14+Q^8*T^10-2*Q^7*T^10+Q^6*T^10"
        "+Q^7*T^8-2*Q^6*T^8+Q^5*T^8-Q^6*T^6+Q^4*T^6+Q^4*T^4-Q^3*T^4+Q^3*T^2-Q^2*T^2-Q+1",
        "Q^12*T^12-2*Q^11*T^12+Q^10*T^12-2*Q^10*T^10+4*Q^9*T^10-2*Q^8*T^10-2*Q^9*T^8"
        "+5*Q^8*T^8-4*Q^7*T^8+Q^6*T^8+4*Q^7*T^6-8*Q^6*T^6+4*Q^5*T^6+Q^6*T^4-4*Q^5*T^4"
        "+5*Q^4*T^4-2*Q^3*T^4-2*Q^4*T^2+4*Q^3*T^2-2*Q^2*T^2+Q^2-2*Q+1",
    ),
    4: (
        "Q^20*T^32-Q^19*T^30+Q^18*T^30-Q^18*T^28+Q^17*T^28-Q^15*T^24+Q^14*T^24+2*Q^15*T^22"
        "-3*Q^14*T^22+Q^13*T^22-2*Q^13*T^20+2*Q^12*T^20-Q^12*T^16+2*Q^11*T^16-Q^10*T^16"
        "-Q^11*T^14+3*Q^10*T^14-3*Q^9*T^14+Q^10*T^12+Q^8*T^14+Q^9*T^12-3*Q^8*T^12+Q^7*T^12"
        "-Q^7*T^10+Q^6*T^10-Q^7*T^8+Q^5*T^8-Q^6*T^6+2*Q^5*T^6-Q^4*T^6+Q^4*T^4-Q^3*T^4"
        "+Q^3*T^2-Q^2*T^2-Q+1",
        "Q^20*T^24-2*Q^19*T^24+Q^18*T^24-2*Q^18*T^22+4*Q^17*T^22-2*Q^16*T^22-2*Q^17*T^20"
        "+5*Q^16*T^20-4*Q^15*T^20-2*Q^16*T^18+Q^14*T^20+8*Q^15*T^18-10*Q^14*T^18"
        "+4*Q^13*T^18+5*Q^14*T^16-12*Q^13*T^16+9*Q^12*T^16+4*Q^13*T^14-2*Q^11*T^16"
        "-12*Q^12*T^14+12*Q^11*T^14+Q^12*T^12-4*Q^10*T^14-10*Q^11*T^12+18*Q^10*T^12"
        "-10*Q^9*T^12-4*Q^10*T^10+Q^8*T^12+12*Q^9*T^10-12*Q^8*T^10-2*Q^9*T^8+4*Q^7*T^10"
        "+9*Q^8*T^8-12*Q^7*T^8+5*Q^6*T^8+4*Q^7*T^6-10*Q^6*T^6+8*Q^5*T^6+Q^6*T^4"
        "-2*Q^4*T^6-4*Q^5*T^4+5*Q^4*T^4-2*Q^3*T^4-2*Q^4*T^2+4*Q^3*T^2-2*Q^2*T^2+Q^2-2*Q+1",
    ),
}


class Budget:
    """
    Wall-clock allowance for one check; ``None`` never runs out.
    """

    def __init__(self, budget_ms: Optional[int] = None):
        self.deadline = None if budget_ms is None else time.monotonic() + budget_ms / 1000.0

    def exhausted(self) -> bool:
        return self.deadline is not None and time.monotonic() >= self.deadline


class SuiteParams(BaseModel):
    """
    Overrides for the desk-scale grid. Unset fields fall back to app.config.
    """

    u: Optional[int] = Field(None, ge=1)
    v: Optional[int] = Field(None, ge=1)
    nmax: Optional[int] = Field(None, ge=0)
    kmax: Optional[int] = Field(None, ge=1)


Mismatch = Tuple[int, LaurentPoly, LaurentPoly]


def _earliest(mismatches: Iterable[Optional[Mismatch]]) -> Optional[Mismatch]:
    found = [m for m in mismatches if m is not None]
    return min(found, key=lambda m: m[0]) if found else None


def _poly_mismatch(expected: LaurentPoly, actual: LaurentPoly) -> Optional[Mismatch]:
    """
    Lowest Q-degree at which two polynomials differ, with the Q-free parts there.
    """
    degrees = {m.q for m, _ in expected.sorted_terms()} | {m.q for m, _ in actual.sorted_terms()}
    for q in sorted(degrees):
        left, right = expected.coefficient_of_q(q), actual.coefficient_of_q(q)
        if left != right:
            return q, left, right
    return None


def _report(
    name: str,
    started: float,
    mismatch: Optional[Mismatch],
    agreed_through: Optional[int],
    budget_exhausted: bool = False,
    detail: Optional[str] = None,
) -> CheckReport:
    runtime_ms = int(round((time.perf_counter() - started) * 1000))
    if mismatch is None:
        report = CheckReport(
            name=name,
            status=CheckStatus.PASS,
            runtime_ms=runtime_ms,
            agreed_through=agreed_through,
            budget_exhausted=budget_exhausted,
            detail=detail,
        )
    else:
        degree, expected, actual = mismatch
        report = CheckReport(
            name=name,
            status=CheckStatus.FAIL,
            runtime_ms=runtime_ms,
            first_divergence=Divergence(
                degree=degree, expected=lp_to_payload(expected), actual=lp_to_payload(actual)
            ),
            agreed_through=degree - 1 if agreed_through is None else agreed_through,
            budget_exhausted=budget_exhausted,
            detail=detail,
        )
        logger.warning(f"{name}: FAIL at Q^{degree}: expected {expected}, got {actual}")
    logger.info(f"{name}: {report.status.value} in {runtime_ms} ms")
    return report


def _series_report(name: str, started: float, expected: QSeries, *others: QSeries, **extra) -> CheckReport:
    mismatch = _earliest(series_first_divergence(expected, other) for other in others)
    nmax = min([expected.nmax] + [other.nmax for other in others])
    return _report(name, started, mismatch, nmax if mismatch is None else mismatch[0] - 1, **extra)


def sum_series(terms: Sequence[FactoredRational], nmax: int) -> QSeries:
    """
    Series of a sum of rational functions, expanded term by term.
    """
    total = QSeries(nmax)
    for term in terms:
        total = total + rf_to_series(term, nmax)
    return total


def check_ors_xyv(
    v: int, nmax: int, formula: Callable[[int], FactoredRational] = cf_xyv
) -> CheckReport:
    """
    Hilbert series of x y^v against the Hopf link coloured by Sym^v, both
    in closed form and through the binary-string recursion.
    """
    started = time.perf_counter()
    expected = rf_to_series(formula(v), nmax)
    closed = rf_to_series(rf_substitute_T(cf_hopf_closed(v)), nmax)
    recursion = kr_torus_link(TorusLinkSpec(mA=2, mB=2, color_v=v), nmax)
    recursion = qs_substitute_T(strip_monomial(recursion, v))
    return _series_report(f"ors_xyv_v{v}", started, expected, closed, recursion)


def check_durfee(kmax: int, nmax: int, at_t_one: bool = False) -> CheckReport:
    """
    Deformed Durfee sum truncated at kmax rows against the plane product.
    With ``at_t_one`` both sides are specialised to T = 1 and also compared
    with the classical Durfee sum and the partition numbers.
    """
    started = time.perf_counter()
    lhs = sum_series(durfee_terms(kmax), nmax)
    rhs = rf_to_series(cf_plane(max(nmax, 1)), nmax)
    name = f"durfee_k{kmax}_n{nmax}"
    if not at_t_one:
        return _series_report(name, started, rhs, lhs)
    counts = QSeries(nmax, [int(partition(n)) for n in range(nmax + 1)])
    classical = rf_to_series(durfee_classical_terms(kmax), nmax)
    return _series_report(
        f"{name}_t1", started, counts, specialize(rhs, "T", 1), specialize(lhs, "T", 1), classical
    )


def check_plane_agreement(v: int, nmax: int) -> CheckReport:
    """
    x^v y^v and the plane agree on Hilb^n whenever n <= 2v.
    """
    started = time.perf_counter()
    bound = min(nmax, 2 * v)
    curve = rf_to_series(cf_xvyv(v), nmax)
    plane = rf_to_series(cf_plane(max(nmax, 1)), nmax)
    full = series_first_divergence(plane, curve)
    agreed = nmax if full is None else full[0] - 1
    mismatch = full if full is not None and full[0] <= bound else None
    return _report(
        f"plane_agreement_v{v}_n{nmax}",
        started,
        mismatch,
        agreed,
        detail=f"compared through Q^{bound}; series agree through Q^{agreed}",
    )


def check_appendix_golden() -> CheckReport:
    """
    x^3 y^3 expanded to total degree 10, and the x^2 y^2 rational function,
    against their printed values.
    """
    started = time.perf_counter()
    golden = LaurentPoly.from_expr(APPENDIX_SERIES_X3Y3)
    truncated = total_degree_truncation(rf_to_series(cf_xvyv(3), 10), 10)
    numerator, denominator = (LaurentPoly.from_expr(text) for text in PRINTED_FRACTIONS[2])
    x2y2 = cf_xvyv(2)
    return _report(
        "appendix_golden",
        started,
        _earliest(
            [
                _poly_mismatch(golden, truncated),
                _poly_mismatch(numerator, x2y2.numerator),
                _poly_mismatch(denominator, x2y2.expanded_denominator()),
            ]
        ),
        None,
    )


def check_printed_fractions(v: int) -> CheckReport:
    """
    cf_xvyv(v) against the printed rational function, by cross-multiplication.
    """
    started = time.perf_counter()
    numerator, denominator = (LaurentPoly.from_expr(text) for text in PRINTED_FRACTIONS[v])
    ours = cf_xvyv(v)
    mismatch = _poly_mismatch(
        numerator * ours.expanded_denominator(), ours.numerator * denominator
    )
    return _report(f"printed_fractions_v{v}", started, mismatch, None)


def _oracle_series(
    coefficient: Callable[[int], LaurentPoly], nmax: int, budget: Budget
) -> Tuple[QSeries, bool]:
    """
    Enumerated coefficients for n = 0, 1, ... until nmax or the budget runs out.
    """
    coeffs = []
    for n in range(nmax + 1):
        if n > 0 and budget.exhausted():
            logger.warning(f"Enumeration budget exhausted after Q^{n - 1}")
            return QSeries(n - 1, coeffs), True
        coeffs.append(coefficient(n).coefficient_of_q(n))
    return QSeries(nmax, coeffs), False


def check_wdp_oracle(v: Optional[int], nmax: int, budget: Optional[Budget] = None) -> CheckReport:
    """
    Weak diagonal partitions with at most v layers against x^v y^v; with
    ``v=None`` the layer count is unrestricted and the target is the plane.
    """
    started = time.perf_counter()
    budget = budget or Budget()
    if v is None:
        oracle, capped = _oracle_series(lambda n: wdp_aggregate(n, max(n, 1)), nmax, budget)
        target = rf_to_series(cf_plane(max(nmax, 1)), oracle.nmax)
        name = f"wdp_oracle_plane_n{nmax}"
    else:
        oracle, capped = _oracle_series(lambda n: wdp_aggregate(n, v), nmax, budget)
        target = rf_to_series(cf_xvyv(v), oracle.nmax)
        name = f"wdp_oracle_v{v}_n{nmax}"
    return _series_report(name, started, target, oracle, budget_exhausted=capped)


def check_vertical_oracle(u: int, v: int, nmax: int, budget: Optional[Budget] = None) -> CheckReport:
    started = time.perf_counter()
    budget = budget or Budget()
    formula = {1: cf_xyv, 2: cf_x2yv}.get(u)
    if formula is None:
        raise EngineError(f"Vertical oracle exists for u in {{1, 2}}, got u={u}")
    oracle, capped = _oracle_series(lambda n: vertical_aggregate(n, u, v), nmax, budget)
    target = rf_to_series(formula(v), oracle.nmax)
    return _series_report(
        f"vertical_oracle_u{u}_v{v}_n{nmax}", started, target, oracle, budget_exhausted=capped
    )


def overlap_pairs() -> List[Tuple[str, Callable[[], FactoredRational], Callable[[], FactoredRational]]]:
    return [
        ("xvyv(1)=xyv(1)", lambda: cf_xvyv(1), lambda: cf_xyv(1)),
        ("xyv(1)=nodal", lambda: cf_xyv(1), cf_nodal_reduced),
        ("x2yv(2)=xvyv(2)", lambda: cf_x2yv(2), lambda: cf_xvyv(2)),
        ("xvm1yv(2)=xyv(2)", lambda: cf_xvm1yv(2), lambda: cf_xyv(2)),
        ("xvm2yv(3)=xyv(3)", lambda: cf_xvm2yv(3), lambda: cf_xyv(3)),
        ("xvm2yv(4)=x2yv(4)", lambda: cf_xvm2yv(4), lambda: cf_x2yv(4)),
    ]


def check_curve_overlaps(nmax: int, pairs=None) -> CheckReport:
    """
    Curves covered by two different formulas must get the same series.
    """
    started = time.perf_counter()
    worst: Optional[Mismatch] = None
    failing = None
    for label, left, right in pairs or overlap_pairs():
        mismatch = series_first_divergence(rf_to_series(left(), nmax), rf_to_series(right(), nmax))
        if mismatch is not None and (worst is None or mismatch[0] < worst[0]):
            worst, failing = mismatch, label
    detail = None if failing is None else f"first failing overlap: {failing}"
    return _report(
        f"curve_overlaps_n{nmax}", started, worst, nmax if worst is None else None, detail=detail
    )


def planned_checks(suite: Sequence[str], params: SuiteParams, budget_ms: Optional[int]) -> List[Callable[[], CheckReport]]:
    """
    The zero-argument check calls a suite expands to.
    """
    names = CHECK_NAMES if "all" in suite else tuple(dict.fromkeys(suite))
    unknown = [name for name in names if name not in CHECK_NAMES]
    if unknown:
        raise EngineError(f"Unknown checks {unknown}; expected any of {list(CHECK_NAMES) + ['all']}")

    def budget() -> Budget:
        return Budget(budget_ms)

    plan: List[Callable[[], CheckReport]] = []
    for name in names:
        if name == "ors_xyv":
            nmax = params.nmax if params.nmax is not None else config.ORS_NMAX
            vs = [params.v] if params.v else range(1, config.ORS_MAX_V + 1)
            plan.extend(lambda v=v, nmax=nmax: check_ors_xyv(v, nmax) for v in vs)
        elif name == "durfee":
            kmax = params.kmax or config.DURFEE_KMAX
            nmax = params.nmax if params.nmax is not None else config.DURFEE_NMAX
            plan.append(lambda kmax=kmax, nmax=nmax: check_durfee(kmax, nmax))
            plan.append(lambda kmax=kmax, nmax=nmax: check_durfee(kmax, nmax, at_t_one=True))
        elif name == "plane_agreement":
            v = params.v or config.PLANE_V
            nmax = params.nmax if params.nmax is not None else config.PLANE_NMAX
            plan.append(lambda v=v, nmax=nmax: check_plane_agreement(v, nmax))
        elif name == "appendix_golden":
            plan.append(check_appendix_golden)
        elif name == "printed_fractions":
            if params.v and params.v not in PRINTED_FRACTIONS:
                raise EngineError(
                    f"printed_fractions covers v in {sorted(PRINTED_FRACTIONS)}, got v={params.v}"
                )
            vs = [params.v] if params.v else sorted(PRINTED_FRACTIONS)
            plan.extend(lambda v=v: check_printed_fractions(v) for v in vs)
        elif name == "wdp_oracle":
            nmax = params.nmax if params.nmax is not None else config.WDP_NMAX
            vs = [params.v] if params.v else list(range(1, config.WDP_MAX_V + 1)) + [None]
            plan.extend(lambda v=v, nmax=nmax: check_wdp_oracle(v, nmax, budget()) for v in vs)
        elif name == "vertical_oracle":
            nmax = params.nmax if params.nmax is not None else config.VERTICAL_NMAX
            grid = [(1, v) for v in range(1, config.VERTICAL_XYV_MAX_V + 1)]
            grid += [(2, v) for v in range(1, config.VERTICAL_X2YV_MAX_V + 1)]
            if params.u:
                if params.u not in (1, 2):
                    raise EngineError(f"vertical_oracle covers u in [1, 2], got u={params.u}")
                grid = [(u, v) for u, v in grid if u == params.u]
            if params.v:
                grid = [(u, params.v) for u in sorted({u for u, _ in grid} or {1, 2})]
            plan.extend(lambda u=u, v=v, nmax=nmax: check_vertical_oracle(u, v, nmax, budget()) for u, v in grid)
        elif name == "curve_overlaps":
            nmax = params.nmax if params.nmax is not None else config.OVERLAP_NMAX
            plan.append(lambda nmax=nmax: check_curve_overlaps(nmax))
    return plan


def _guarded(check: Callable[[], CheckReport]) -> CheckReport:
    try:
        return check()
    except EngineError:
        raise
    except Exception as e:
        logger.error(f"Check crashed: {str(e)}")
        logger.error(traceback.format_exc())
        raise


def run_suite(
    suite: Sequence[str],
    params: Optional[SuiteParams] = None,
    budget_ms: Optional[int] = None,
    max_workers: int = config.MAX_WORKERS,
) -> List[CheckReport]:
    """
    Run the named checks concurrently; reports come back ordered by name.
    The KR memo lives for one suite run.
    """
    plan = planned_checks(suite, params or SuiteParams(), budget_ms)
    logger.info(f"Running {len(plan)} checks on {max_workers} workers")
    try:
        with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
            reports = list(pool.map(_guarded, plan))
    finally:
        clear_cache()
    return sorted(reports, key=lambda report: report.name)
