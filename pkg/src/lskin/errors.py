"""Exception hierarchy.

``ConfigError`` marks unusable input (CLI exit code 1); ``PhysicsError``
subclasses mark parameter points where a requested construction is not
defined (CLI exit code 2).
"""


class LskinError(Exception):
    pass


class ConfigError(LskinError):
    """Malformed configuration or invalid parameter values."""


class PhysicsError(LskinError):
    """Requested operation undefined at this parameter point."""


class ExceptionalPointError(PhysicsError):
    """|t_i| = gamma_i: the damping matrix is defective, closed-form
    eigenvectors collapse."""


class GapClosingError(PhysicsError):
    """|t1^2 - g1^2| = |t2^2 - g2^2|: open-chain bulk eigenvectors collapse."""


class DegenerateBasisError(PhysicsError):
    """A Bloch eigenvector formula divides by an (almost) vanishing energy."""


class SingularSylvesterError(PhysicsError):
    """Steady-state equation is singular (vanishing Liouvillian gap)."""


class NotSolvableError(PhysicsError):
    """Rates violate the analytic-steady-state condition."""


class DetZeroError(PhysicsError):
    """det H_S(q) vanished on the winding-number grid (phase boundary)."""


class UnsupportedBranchError(PhysicsError):
    """No closed form is available for this parameter combination."""
