"""Finite offspring/immigration laws and the doubly symmetric critical model.

All moments are obtained by exact enumeration over the atoms of each law, so
every quantity used downstream (means, covariances, the quadratic forms that
select the asymptotic regime) is available without sampling.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Tuple, Union

import numpy as np

from .errors import (
    InvalidLaw,
    NotCritical,
    NotDoublySymmetric,
    NotPositivelyRegular,
    ZeroImmigrationMean,
)

__all__ = [
    "ONE",
    "U_TILDE",
    "FiniteLaw2D",
    "ModelSpec",
    "Regime",
    "law_mean",
    "law_cov",
    "build_model",
    "classify_regime",
    "model_general",
    "model_unit_total",
    "model_equal_pair",
    "model_equal_pair_null_immigration",
    "uniform_unit_square",
]

ONE = np.array([1.0, 1.0])
U_TILDE = np.array([1.0, -1.0])

PROB_TOL = 1e-12
SYMMETRY_TOL = 1e-10
ZERO_TOL = 1e-12

Atom = Tuple[Tuple[int, int], float]
LawInput = Union[Mapping[Tuple[int, int], float], Iterable[Atom]]


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FiniteLaw2D:
    """Probability law with finite support on pairs of non-negative integers.

    Parameters
    ----------
    atoms : mapping or iterable
        Either ``{(x1, x2): p, ...}`` or ``[((x1, x2), p), ...]``.

    Examples
    --------
    >>> law = FiniteLaw2D({(1, 0): 0.6, (0, 1): 0.4})
    >>> law_mean(law)
    array([0.6, 0.4])
    """

    atoms: Tuple[Atom, ...]

    def __init__(self, atoms: LawInput):
        items = atoms.items() if isinstance(atoms, Mapping) else atoms
        clean = []
        for point, p in items:
            x1, x2 = point
            if int(x1) != x1 or int(x2) != x2 or x1 < 0 or x2 < 0:
                raise InvalidLaw(f"atom {point!r} is not a pair of non-negative integers")
            p = float(p)
            if not (p >= 0.0) or p > 1.0:
                raise InvalidLaw(f"probability {p!r} of atom {point!r} outside [0, 1]")
            clean.append(((int(x1), int(x2)), p))
        if not clean:
            raise InvalidLaw("law has empty support")
        points = [a for a, _ in clean]
        if len(set(points)) != len(points):
            raise InvalidLaw("atom pairs must be distinct")
        total = math.fsum(p for _, p in clean)
        if abs(total - 1.0) > PROB_TOL:
            raise InvalidLaw(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "atoms", tuple(clean))

    @classmethod
    def point_mass(cls, x1: int, x2: int) -> "FiniteLaw2D":
        return cls({(x1, x2): 1.0})

    @cached_property
    def support(self) -> np.ndarray:
        s = np.array([a for a, _ in self.atoms], dtype=np.int64).reshape(-1, 2)
        s.setflags(write=False)
        return s

    @cached_property
    def probs(self) -> np.ndarray:
        return _readonly([p for _, p in self.atoms])

    def __len__(self) -> int:
        return len(self.atoms)

    def expect(self, func) -> float:
        """Exact expectation of ``func(x1, x2)`` by enumeration of the atoms."""
        return math.fsum(p * func(x1, x2) for (x1, x2), p in self.atoms)


def law_mean(law: FiniteLaw2D) -> np.ndarray:
    """Exact mean vector of a finite law."""
    return np.array([law.expect(lambda x1, x2: x1), law.expect(lambda x1, x2: x2)])


def law_cov(law: FiniteLaw2D) -> np.ndarray:
    """Exact covariance matrix of a finite law (centred enumeration)."""
    m1, m2 = law_mean(law)
    c11 = law.expect(lambda x1, x2: (x1 - m1) ** 2)
    c12 = law.expect(lambda x1, x2: (x1 - m1) * (x2 - m2))
    c22 = law.expect(lambda x1, x2: (x2 - m2) ** 2)
    return np.array([[c11, c12], [c12, c22]])


def _centered_square(law: FiniteLaw2D, direction) -> float:
    # E <d, Z - EZ>^2, summed term by term so degenerate laws give an exact zero.
    d1, d2 = direction
    mean = law.expect(lambda x1, x2: d1 * x1 + d2 * x2)
    return law.expect(lambda x1, x2: (d1 * x1 + d2 * x2 - mean) ** 2)


class Regime(enum.Enum):
    """Asymptotic regime of the CLS estimators."""

    GENERAL = "General"
    TOTAL_DEGENERATE = "TotalDegenerate"
    DIFF_DEGENERATE_IMMIGRATION_ACTIVE = "DiffDegenerateImmigrationActive"
    DIFF_DEGENERATE_IMMIGRATION_NULL = "DiffDegenerateImmigrationNull"

    @property
    def diff_degenerate(self) -> bool:
        return self in (
            Regime.DIFF_DEGENERATE_IMMIGRATION_ACTIVE,
            Regime.DIFF_DEGENERATE_IMMIGRATION_NULL,
        )


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """A validated 2-type doubly symmetric critical branching model.

    Construct with :func:`build_model` or one of the canonical builders; the
    derived moment attributes are filled in there.
    """

    offspring1: FiniteLaw2D
    offspring2: FiniteLaw2D
    immigration: FiniteLaw2D
    alpha: float
    beta: float
    mean_matrix: np.ndarray = field(repr=False)
    V_xi1: np.ndarray = field(repr=False)
    V_xi2: np.ndarray = field(repr=False)
    Vbar_xi: np.ndarray = field(repr=False)
    m_eps: np.ndarray = field(repr=False)
    V_eps: np.ndarray = field(repr=False)
    name: str = "custom"

    @property
    def drift(self) -> float:
        """<1, m_eps>, the drift of the limiting diffusion."""
        return float(self.m_eps[0] + self.m_eps[1])

    @cached_property
    def total_offspring_var(self) -> float:
        """<Vbar_xi 1, 1>, the diffusion coefficient of the limit."""
        return 0.5 * (
            _centered_square(self.offspring1, (1, 1)) + _centered_square(self.offspring2, (1, 1))
        )

    @cached_property
    def diff_offspring_var(self) -> float:
        """<Vbar_xi u~, u~>."""
        return 0.5 * (
            _centered_square(self.offspring1, (1, -1)) + _centered_square(self.offspring2, (1, -1))
        )

    @cached_property
    def immigration_diff_second_moment(self) -> float:
        """E <u~, eps>^2 (uncentred)."""
        return self.immigration.expect(lambda x1, x2: (x1 - x2) ** 2)

    @cached_property
    def immigration_total_var(self) -> float:
        """<V_eps 1, 1>."""
        return _centered_square(self.immigration, (1, 1))

    @cached_property
    def immigration_diff_var(self) -> float:
        """<V_eps u~, u~>."""
        return _centered_square(self.immigration, (1, -1))

    @property
    def regime(self) -> Regime:
        return classify_regime(self)


def build_model(
    offspring1: FiniteLaw2D,
    offspring2: FiniteLaw2D,
    immigration: FiniteLaw2D,
    name: str = "custom",
) -> ModelSpec:
    """Validate three laws and compute every derived moment.

    Raises
    ------
    NotDoublySymmetric, NotCritical, NotPositivelyRegular, ZeroImmigrationMean
    """
    m1 = law_mean(offspring1)
    m2 = law_mean(offspring2)
    mean_matrix = np.column_stack([m1, m2])
    if (
        abs(mean_matrix[0, 0] - mean_matrix[1, 1]) > SYMMETRY_TOL
        or abs(mean_matrix[0, 1] - mean_matrix[1, 0]) > SYMMETRY_TOL
    ):
        raise NotDoublySymmetric(f"offspring mean matrix {mean_matrix.tolist()} is not [[a, b], [b, a]]")
    alpha = float(mean_matrix[0, 0])
    beta = float(mean_matrix[0, 1])
    if abs(alpha + beta - 1.0) > SYMMETRY_TOL:
        raise NotCritical(f"alpha + beta = {alpha + beta!r} != 1")
    if alpha <= 0.0 or beta <= 0.0:
        raise NotPositivelyRegular(f"alpha={alpha!r}, beta={beta!r} must both be positive")
    m_eps = law_mean(immigration)
    if not np.any(m_eps != 0.0):
        raise ZeroImmigrationMean("immigration mean is the zero vector")
    V1 = law_cov(offspring1)
    V2 = law_cov(offspring2)
    return ModelSpec(
        offspring1=offspring1,
        offspring2=offspring2,
        immigration=immigration,
        alpha=alpha,
        beta=beta,
        mean_matrix=_readonly(mean_matrix),
        V_xi1=_readonly(V1),
        V_xi2=_readonly(V2),
        Vbar_xi=_readonly((V1 + V2) / 2),
        m_eps=_readonly(m_eps),
        V_eps=_readonly(law_cov(immigration)),
        name=name,
    )


def classify_regime(spec: ModelSpec) -> Regime:
    if spec.total_offspring_var <= ZERO_TOL:
        return Regime.TOTAL_DEGENERATE
    if spec.diff_offspring_var <= ZERO_TOL:
        if spec.immigration_diff_second_moment <= ZERO_TOL:
            return Regime.DIFF_DEGENERATE_IMMIGRATION_NULL
        return Regime.DIFF_DEGENERATE_IMMIGRATION_ACTIVE
    return Regime.GENERAL


# -- canonical models --------------------------------------------------------


def uniform_unit_square() -> FiniteLaw2D:
    return FiniteLaw2D({(0, 0): 0.25, (0, 1): 0.25, (1, 0): 0.25, (1, 1): 0.25})


def _mirror(law: FiniteLaw2D) -> FiniteLaw2D:
    return FiniteLaw2D([((x2, x1), p) for (x1, x2), p in law.atoms])


def model_general(alpha: float = 0.3, immigration: FiniteLaw2D | None = None) -> ModelSpec:
    """Model A: both quadratic forms positive.

    A type-1 parent has no child, one type-1 child, or two type-2 children,
    with weights chosen so the mean is ``(alpha, 1 - alpha)``.
    """
    if not 0.0 < alpha < 1.0:
        raise NotPositivelyRegular(f"alpha={alpha!r} must lie in (0, 1)")
    rest = (1.0 - alpha) / 2.0
    off1 = FiniteLaw2D({(0, 0): rest, (1, 0): alpha, (0, 2): rest})
    imm = uniform_unit_square() if immigration is None else immigration
    return build_model(off1, _mirror(off1), imm, name=f"general(alpha={alpha!r})")


def model_unit_total(alpha: float = 0.6, immigration: FiniteLaw2D | None = None) -> ModelSpec:
    """Model B: every individual has exactly one child."""
    if not 0.0 < alpha < 1.0:
        raise NotPositivelyRegular(f"alpha={alpha!r} must lie in (0, 1)")
    off1 = FiniteLaw2D({(1, 0): alpha, (0, 1): 1.0 - alpha})
    imm = uniform_unit_square() if immigration is None else immigration
    return build_model(off1, _mirror(off1), imm, name=f"unit_total(alpha={alpha!r})")


def model_equal_pair(immigration: FiniteLaw2D | None = None) -> ModelSpec:
    """Model C: alpha = beta = 1/2 and both offspring counts always coincide."""
    off = FiniteLaw2D({(0, 0): 0.5, (1, 1): 0.5})
    imm = uniform_unit_square() if immigration is None else immigration
    return build_model(off, off, imm, name="equal_pair")


def model_equal_pair_null_immigration() -> ModelSpec:
    """Model C with immigrants arriving in equal pairs, so X_k1 = X_k2 forever."""
    imm = FiniteLaw2D({(0, 0): 0.5, (1, 1): 0.5})
    off = FiniteLaw2D({(0, 0): 0.5, (1, 1): 0.5})
    return build_model(off, off, imm, name="equal_pair_null_immigration")
