"""Chain parameters, derived dissipation rates and initial states.

One :class:`ChainSpec` fixes a dissipative SSH chain: alternating hoppings
``t1``/``t2``, four bond loss/gain rates, optional on-site loss/gain rates
and the boundary condition.  Rates are always stored as the physical
(loss, gain) pairs; the half-sum ``g_i`` and half-imbalance ``e_i`` that
actually enter the matrices are derived, never set directly, so the
constraint ``|e_i| <= g_i`` can never be violated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError

PBC = "pbc"
OBC = "obc"

#: Tolerance of the cross-multiplied ratio test for the solvable limit.
SOLVABLE_TOL = 1e-12


@dataclass(frozen=True)
class ChainSpec:
    """Parameters of one dissipative SSH chain instance.

    ``n_cells`` counts unit cells; the chain has ``2*n_cells`` sites under
    periodic boundaries and ``2*n_cells - 1`` under open boundaries (the
    last B site is removed together with the bond dissipators touching it,
    which then act on the two terminal A sites only).
    """

    t1: float
    t2: float
    gl1: float = 0.0
    gg1: float = 0.0
    gl2: float = 0.0
    gg2: float = 0.0
    gl0: float = 0.0
    gg0: float = 0.0
    boundary: str = OBC
    n_cells: int = 2

    def __post_init__(self):
        for name in ("gl1", "gg1", "gl2", "gg2", "gl0", "gg0"):
            if getattr(self, name) < 0:
                raise ConfigError(f"rate {name} must be non-negative")
        if self.boundary not in (PBC, OBC):
            raise ConfigError(f"boundary must be '{PBC}' or '{OBC}', got {self.boundary!r}")
        if self.n_cells < 2:
            raise ConfigError("n_cells must be >= 2")

    def replace(self, **kw) -> "ChainSpec":
        data = {k: getattr(self, k) for k in self.__dataclass_fields__}
        data.update(kw)
        return ChainSpec(**data)


@dataclass(frozen=True)
class DerivedRates:
    """Half-sums g_i, half-imbalances e_i and their totals.

    ``g = g0 + g1 + g2`` is the uniform diagonal of the damping matrix and
    the real offset of every rapidity; ``e = e1 + e2`` is the bond
    imbalance.  ``e_total`` additionally includes the on-site imbalance and
    is what steady occupations depend on; it coincides with ``e`` whenever
    the on-site rates are zero or balanced.  ``solvable`` marks rate
    combinations admitting the closed-form steady covariance.
    """

    g1: float
    g2: float
    e1: float
    e2: float
    g0: float
    e0: float
    g: float
    e: float
    solvable: bool

    @property
    def e_total(self) -> float:
        return self.e0 + self.e1 + self.e2


def derive_rates(spec: ChainSpec) -> DerivedRates:
    """Reduce the six physical rates to the (g_i, e_i) parametrization.

    The solvable-limit test is done by cross multiplication,
    ``|g*e_i - e_total*g_i| <= tol`` for both bonds, which covers all three
    closed-form cases (one bond undissipated, equal loss/gain ratios,
    balanced bonds) without ever dividing.
    """
    g1 = 0.5 * (spec.gl1 + spec.gg1)
    e1 = 0.5 * (spec.gl1 - spec.gg1)
    g2 = 0.5 * (spec.gl2 + spec.gg2)
    e2 = 0.5 * (spec.gl2 - spec.gg2)
    g0 = 0.5 * (spec.gl0 + spec.gg0)
    e0 = 0.5 * (spec.gl0 - spec.gg0)
    g = g0 + g1 + g2
    e_tot = e0 + e1 + e2
    solvable = (abs(g * e1 - e_tot * g1) <= SOLVABLE_TOL
                and abs(g * e2 - e_tot * g2) <= SOLVABLE_TOL)
    return DerivedRates(g1=g1, g2=g2, e1=e1, e2=e2, g0=g0, e0=e0,
                        g=g, e=e1 + e2, solvable=solvable)


def site_count(spec: ChainSpec) -> int:
    """2N sites under PBC, 2N-1 under OBC."""
    return 2 * spec.n_cells if spec.boundary == PBC else 2 * spec.n_cells - 1


def require_dissipative(rates: DerivedRates) -> None:
    """Steady-state formulas divide by g; refuse the closed system."""
    if rates.g <= 0.0:
        raise ConfigError("total dissipation rate is zero; no steady state")


@dataclass(frozen=True)
class FullyFilled:
    """Every site occupied."""


@dataclass(frozen=True)
class SingleParticle:
    """One particle on site ``site`` (1-based), empty elsewhere."""

    site: int


@dataclass(frozen=True)
class Occupations:
    """Site-diagonal occupations in [0, 1], no inter-site coherence."""

    values: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


InitialState = FullyFilled | SingleParticle | Occupations


def occupation_vector(init: InitialState, n: int) -> list[float]:
    """Initial occupations n_j(0) as a length-``n`` list."""
    if isinstance(init, FullyFilled):
        return [1.0] * n
    if isinstance(init, SingleParticle):
        if not 1 <= init.site <= n:
            raise ConfigError(f"site index {init.site} outside 1..{n}")
        return [1.0 if j == init.site else 0.0 for j in range(1, n + 1)]
    if isinstance(init, Occupations):
        if len(init.values) != n:
            raise ConfigError(f"expected {n} occupations, got {len(init.values)}")
        if any(not 0.0 <= v <= 1.0 for v in init.values):
            raise ConfigError("occupations must lie in [0, 1]")
        return list(init.values)
    raise ConfigError(f"unknown initial state {init!r}")


def loss_only(t1: float, t2: float, g1: float, g2: float, *,
              boundary: str = OBC, n_cells: int = 2, **kw) -> ChainSpec:
    """Spec with pure-loss bonds (e_i = g_i)."""
    return ChainSpec(t1=t1, t2=t2, gl1=2 * g1, gg1=0.0, gl2=2 * g2, gg2=0.0,
                     boundary=boundary, n_cells=n_cells, **kw)


def balanced(t1: float, t2: float, g1: float, g2: float, *,
             boundary: str = OBC, n_cells: int = 2, **kw) -> ChainSpec:
    """Spec with balanced loss/gain on both bonds (e_i = 0)."""
    return ChainSpec(t1=t1, t2=t2, gl1=g1, gg1=g1, gl2=g2, gg2=g2,
                     boundary=boundary, n_cells=n_cells, **kw)
