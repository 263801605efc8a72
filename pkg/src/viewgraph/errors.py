"""Exception hierarchy shared by every module.

User errors (bad input files, bad queries, bad CLI arguments) derive from
``UserError`` and map to exit code 2; ``InvariantViolation`` maps to 3.
"""
from __future__ import annotations


class ViewGraphError(Exception):
    pass


class UserError(ViewGraphError):
    pass


class InvariantViolation(ViewGraphError):
    pass


# graph store
class MissingFile(UserError):
    pass


class SchemaError(UserError):
    pass


class DanglingEdge(UserError):
    pass


class ValueParseError(UserError):
    pass


# GVDL
class GVDLSyntaxError(UserError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnknownStatement(UserError):
    pass


class UnknownProperty(UserError):
    def __init__(self, name: str):
        super().__init__(f"unknown property {name!r}")
        self.name = name


class TypeMismatch(UserError):
    pass


# ordering / engine / analytics / splitting
class TooManyViews(UserError):
    pass


class NonTermination(ViewGraphError):
    pass


class InconsistentStream(InvariantViolation):
    pass


class UnknownSource(UserError):
    pass


class ColdModel(ViewGraphError):
    pass


# workspace
class NameExists(UserError):
    pass


class UnknownName(UserError):
    pass
