"""Exception hierarchy shared by every module of the package."""
from __future__ import annotations


class CycMackeyError(Exception):
    """Base class for all errors raised by the package."""


class IllDefined(CycMackeyError):
    def __init__(self, row: int, col: int):
        super().__init__(f"map is not well defined at entry ({row}, {col})")
        self.row = row
        self.col = col


class NotInjective(CycMackeyError):
    pass


class CodomainHasTorsion(CycMackeyError):
    pass


class NotInImage(CycMackeyError):
    pass


class NotPPowerOrder(CycMackeyError):
    pass


class InternalInconsistency(CycMackeyError):
    pass


class NotPermutation(CycMackeyError):
    pass


class NonIntegralSolution(CycMackeyError):
    pass


class AxiomViolation(CycMackeyError):
    def __init__(self, name: str, level: int):
        super().__init__(f"axiom {name} fails at level {level}")
        self.name = name
        self.level = level


class NotNatural(CycMackeyError):
    pass


class BadIndex(CycMackeyError):
    pass


class BadIndices(CycMackeyError):
    pass


class NotExact(CycMackeyError):
    def __init__(self, position: str):
        super().__init__(f"sequence not exact at {position}")
        self.position = position


class HasTorsion(CycMackeyError):
    pass


class OracleMismatch(CycMackeyError):
    pass


class DepthExceeded(CycMackeyError):
    pass


class RelationViolation(CycMackeyError):
    def __init__(self, edge: int, which: str = ""):
        super().__init__(f"relation {which} fails at edge {edge}".replace("  ", " "))
        self.edge = edge
        self.which = which


class RankMismatch(CycMackeyError):
    pass


class NotRankOne(CycMackeyError):
    pass


class AmbiguousEdge(CycMackeyError):
    pass


class IsProjective(CycMackeyError):
    pass


class ZeroRank(CycMackeyError):
    pass


class BadDiagram(CycMackeyError):
    pass


class NotHilbert90(CycMackeyError):
    pass


class CertificationFailed(CycMackeyError):
    pass


class WitnessFailed(CycMackeyError):
    pass


class BadSpec(CycMackeyError):
    pass
