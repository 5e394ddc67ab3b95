"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures onto its
documented codes: 1 model error, 2 config/scenario error, 3 analysis error.
"""


class PatError(Exception):
    exit_code = 1


class ModelError(PatError):
    exit_code = 1


class ZeroVector(ModelError):
    pass


class DegenerateFrame(ModelError):
    pass


class InvalidAngle(ModelError):
    pass


class InvalidGeometry(ModelError):
    pass


class StareFovViolation(ModelError):
    pass


class NonConvergent(ModelError):
    pass


class TrackingTimeout(ModelError):
    pass


class CoincidentNodes(ModelError):
    pass


class ScenarioError(PatError):
    exit_code = 2


class EmptyScenario(ScenarioError):
    pass


class OverlappingContacts(ScenarioError):
    pass


class ConfigError(PatError):
    exit_code = 2


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    pass


class UnknownNode(ConfigError):
    pass


class MalformedRow(ConfigError):
    pass


class AnalysisError(PatError):
    exit_code = 3


class EmptySamples(AnalysisError):
    pass


class DegenerateSamples(AnalysisError):
    pass


class SchemaError(AnalysisError):
    pass
