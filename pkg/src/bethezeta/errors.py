"""Exception hierarchy shared by all modules."""


class BetheZetaError(Exception):
    """Base class for every error raised by this package."""


class GraphError(BetheZetaError):
    pass


class DisconnectedGraph(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class LimitExceeded(BetheZetaError):
    """An enumeration exceeded its configured budget."""


class NumericalIntegrityError(BetheZetaError):
    """A quantity with a known exact structure failed its consistency check."""


class NonPositiveTemperature(BetheZetaError):
    pass


class NumericalOverflow(BetheZetaError):
    """Message iteration left the representable range (divergence signal)."""


class NotConverged(BetheZetaError):
    pass


class SingularHessian(BetheZetaError):
    pass


class LeftDomain(BetheZetaError):
    """No admissible step stayed inside the pseudomarginal polytope."""


class OutOfDomain(BetheZetaError):
    """Point is outside (or numerically too close to the boundary of) L(G)."""


class SingularPair(BetheZetaError):
    """Some inverse-pair weight product equals one; the vertex form is undefined."""


class TooLarge(BetheZetaError):
    pass


class NumericalInstability(BetheZetaError):
    pass


class ContinuationLost(BetheZetaError):
    """Fixed-point tracking failed to follow the branch during a sweep."""


class DegenerateFixedPoint(BetheZetaError):
    """A fixed point has (numerically) vanishing Hessian determinant."""


class PossiblyIncompleteEnumeration(BetheZetaError):
    """Index sum differs from one; the search very likely missed fixed points."""


class SchemaError(BetheZetaError):
    pass


class UnknownGenerator(BetheZetaError):
    pass
