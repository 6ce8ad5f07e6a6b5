"""
Closed-form generating functions of punctual Hilbert schemes, built as
FactoredRational values.

The x^u y^v families with u in {v, v-1, v-2} are sums over k of
F(k) / prod_{i<=k} (1 - Q^i T^(2(i-1)))^2, where F(k) is the sum of the
entries of a 2x2 transfer-matrix product applied to an initial vector.
"""
import logging
from typing import List, Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field

from app.errors import DomainError
from app.models.specs import CurveSpec
from app.services.profiling import phase
from app.services.series_core import ONE, FactoredRational, LaurentPoly, mono

# Configure logging
logger = logging.getLogger(__name__)

Factor = Tuple[int, int]

T2_MINUS_1 = mono(t=2) - 1
F_ONE = mono(q=2, t=2) - mono(q=1) + 1


class TransferMatrix(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    entries: Tuple[Tuple[LaurentPoly, LaurentPoly], Tuple[LaurentPoly, LaurentPoly]]
    k: int = Field(..., ge=2, description="Total number of rows")
    s: int = Field(..., ge=2, description="Step index, 2 <= s <= k")

    def apply(self, vector: "InitialVector") -> "InitialVector":
        (a, b), (c, d) = self.entries
        top, bottom = vector.entries
        return InitialVector(
            entries=(a * top + b * bottom, c * top + d * bottom), variant=vector.variant
        )


class InitialVector(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    entries: Tuple[LaurentPoly, LaurentPoly]
    variant: Literal["V1", "W1", "D1", "D2"]

    def total(self) -> LaurentPoly:
        return self.entries[0] + self.entries[1]


def _require(condition: bool, detail: str):
    if not condition:
        raise DomainError(detail)


def plane_factors(k: int) -> List[Factor]:
    return [(i, 2 * (i - 1)) for i in range(1, k + 1)]


def transfer_matrix(k: int, s: int) -> TransferMatrix:
    """
    M_s for a stack of k rows, with x = Q^(k-s+1) T^(2(k-s)):

        [ x^2 (T^2 - 1) + (1 - x)^2    x (T^2 - 1) ]
        [ x                            x^2 T^2     ]
    """
    _require(2 <= s <= k, f"Transfer matrix needs 2 <= s <= k, got k={k}, s={s}")
    x = mono(q=k - s + 1, t=2 * (k - s))
    x2 = x * x
    entries = (
        (x2 * T2_MINUS_1 + (ONE - x) * (ONE - x), x * T2_MINUS_1),
        (x, x2 * mono(t=2)),
    )
    return TransferMatrix(entries=entries, k=k, s=s)


def initial_vector(variant: str, k: int) -> InitialVector:
    """
    Starting vector of the transfer-matrix product for a stack of k rows.

    With y = Q^k T^(2(k-1)) and z = Q^(k-1) T^(2(k-2)):
    V1 = (y^2 (T^2-1), y), W1 = (0, y (1-y)),
    D1 = (z^2 (T^2-1)(1-z), (z + z^2)(1-z)),
    D2 = (y z^2 (T^2-1)(1-y)(1-z), y z^2 (1-y)(1-z)).
    """
    y = mono(q=k, t=2 * (k - 1))
    if variant == "V1":
        _require(k >= 1, f"V1 needs k >= 1, got {k}")
        entries = (y * y * T2_MINUS_1, y)
    elif variant == "W1":
        _require(k >= 1, f"W1 needs k >= 1, got {k}")
        entries = (LaurentPoly.zero(), y * (ONE - y))
    elif variant in ("D1", "D2"):
        _require(k >= 2, f"{variant} needs k >= 2, got {k}")
        z = mono(q=k - 1, t=2 * (k - 2))
        if variant == "D1":
            entries = (z * z * T2_MINUS_1 * (ONE - z), (z + z * z) * (ONE - z))
        else:
            common = y * z * z * (ONE - y) * (ONE - z)
            entries = (common * T2_MINUS_1, common)
    else:
        raise DomainError(f"Unknown initial vector {variant!r}")
    return InitialVector(entries=entries, variant=variant)


def propagate(vector: InitialVector, k: int, start: int) -> InitialVector:
    """
    Apply M_start, M_(start+1), ..., M_k in that order, each on the left.
    """
    for s in range(start, k + 1):
        vector = transfer_matrix(k, s).apply(vector)
    return vector


def cf_F(k: int) -> LaurentPoly:
    _require(k >= 1, f"F(k) needs k >= 1, got {k}")
    if k == 1:
        return F_ONE
    return propagate(initial_vector("V1", k), k, 2).total()


def _row_term(numerator: LaurentPoly, rows: int) -> FactoredRational:
    return FactoredRational(numerator, plane_factors(rows) * 2)


def durfee_terms(kmax: int) -> List[FactoredRational]:
    """
    The summands F(k) / prod_{i=1}^{k} (1 - Q^i T^(2(i-1)))^2 for k = 1..kmax, unsummed.
    """
    _require(kmax >= 1, f"Durfee sum needs kmax >= 1, got {kmax}")
    return [_row_term(cf_F(k), k) for k in range(1, kmax + 1)]


def _f_sum(last: int) -> FactoredRational:
    terms = durfee_terms(last)
    total = terms[0]
    for term in terms[1:]:
        total = total + term
    return total


def cf_nodal_reduced() -> FactoredRational:
    """(1 - Q + Q^2 T^2) / (1 - Q)^2"""
    return FactoredRational(F_ONE, [(1, 0), (1, 0)])


def cf_fat_line(k: int, doubled_t: bool = False) -> FactoredRational:
    """
    prod_{i=1}^{k} 1 / (1 - Q^i T^(i-1)), or with T^(2(i-1)) when ``doubled_t``.
    """
    _require(k >= 1, f"Fat line needs k >= 1, got {k}")
    scale = 2 if doubled_t else 1
    return FactoredRational(ONE, [(i, scale * (i - 1)) for i in range(1, k + 1)])


def cf_xyv(v: int) -> FactoredRational:
    """
    Curve x y^v:
    prod_{i=1}^{v} 1/(1 - Q^i T^(2(i-1))) * (1 + Q^(v+1) T^(2v) / (1 - Q))
    """
    _require(v >= 1, f"x y^v needs v >= 1, got {v}")
    numerator = ONE - mono(q=1) + mono(q=v + 1, t=2 * v)
    return FactoredRational(numerator, [(1, 0)] + plane_factors(v))


def cf_x2yv(v: int) -> FactoredRational:
    """Curve x^2 y^v."""
    _require(v >= 1, f"x^2 y^v needs v >= 1, got {v}")
    one_minus_q = ONE - mono(q=1)
    numerator = (
        one_minus_q * (ONE - mono(q=2, t=2))
        + one_minus_q * (ONE + mono(q=1, t=2)) * mono(q=v + 1, t=2 * v)
        + mono(q=2 * (v + 1), t=4 * v)
    )
    return FactoredRational(numerator, [(1, 0), (2, 2)] + plane_factors(v))


def cf_x2yv_predicted_homology(v: int) -> FactoredRational:
    """
    Predicted (Sym^2, Sym^v)-coloured homology of the Hopf link. No
    independent computation exists to check it against.
    """
    return cf_x2yv(v)


def cf_xvyv(v: int) -> FactoredRational:
    _require(v >= 1, f"x^v y^v needs v >= 1, got {v}")
    with phase("closed_forms"):
        total = _f_sum(v)
    logger.debug(f"Assembled x^{v} y^{v} over {len(total.denominator)} denominator factors")
    return total


def cf_F_vm1(k: int, v: int) -> LaurentPoly:
    """
    F_(v-1)(k): F(k) below the last row, the W1 product on row v.
    """
    _require(1 <= k <= v, f"F_(v-1)(k) needs 1 <= k <= v, got k={k}, v={v}")
    if k < v:
        return cf_F(k)
    return propagate(initial_vector("W1", v), v, 2).total()


def cf_F_vm2(k: int, v: int) -> LaurentPoly:
    """
    F_(v-2)(k): F(k) for k <= v-2, the D1 product for k = v-1 and the D2
    product for k = v. Both products use the transfer matrices of a
    v-row stack.
    """
    _require(1 <= k <= v, f"F_(v-2)(k) needs 1 <= k <= v, got k={k}, v={v}")
    if k <= v - 2:
        return cf_F(k)
    variant = "D1" if k == v - 1 else "D2"
    return propagate(initial_vector(variant, v), v, 3).total()


def cf_xvm1yv(v: int) -> FactoredRational:
    """Curve x^(v-1) y^v."""
    _require(v >= 2, f"x^(v-1) y^v needs v >= 2, got {v}")
    with phase("closed_forms"):
        total = _f_sum(v - 1) + _row_term(cf_F_vm1(v, v), v)
    return total


def cf_xvm2yv(v: int) -> FactoredRational:
    """Curve x^(v-2) y^v."""
    _require(v >= 3, f"x^(v-2) y^v needs v >= 3, got {v}")
    with phase("closed_forms"):
        total = (
            _f_sum(v - 2)
            + _row_term(cf_F_vm2(v - 1, v), v - 1)
            + _row_term(cf_F_vm2(v, v), v)
        )
    return total


def cf_plane(kmax: int) -> FactoredRational:
    """prod_{i=1}^{kmax} 1 / (1 - Q^i T^(2(i-1)))"""
    _require(kmax >= 1, f"Plane product needs kmax >= 1, got {kmax}")
    return FactoredRational(ONE, plane_factors(kmax))


def cf_durfee_lhs(kmax: int) -> FactoredRational:
    """
    sum_{k=1}^{kmax} F(k) / prod_{i=1}^{k} (1 - Q^i T^(2(i-1)))^2
    """
    _require(kmax >= 1, f"Durfee sum needs kmax >= 1, got {kmax}")
    with phase("closed_forms"):
        return _f_sum(kmax)


def durfee_classical_terms(kmax: int) -> FactoredRational:
    """
    The T = 1 shadow of cf_durfee_lhs: 1 + sum_{k=1}^{kmax} Q^(k^2) / prod_{i<=k} (1 - Q^i)^2.
    """
    _require(kmax >= 1, f"Durfee sum needs kmax >= 1, got {kmax}")
    total = FactoredRational(ONE)
    for k in range(1, kmax + 1):
        total = total + FactoredRational(mono(q=k * k), [(i, 0) for i in range(1, k + 1)] * 2)
    return total


def curve_rational(u: int, v: int) -> FactoredRational:
    """
    Generating function of x^u y^v, dispatched in the order u=v, u=1, u=2,
    u=v-1, u=v-2.
    """
    family = CurveSpec(u=u, v=v).family
    if family == "xvyv":
        return cf_xvyv(v)
    if family == "xyv":
        return cf_xyv(v)
    if family == "x2yv":
        return cf_x2yv(v)
    if family == "xvm1yv":
        return cf_xvm1yv(v)
    return cf_xvm2yv(v)
