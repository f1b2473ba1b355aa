"""Domain error hierarchy shared by every module.

Each error carries a stable ``code`` string that the HTTP layer maps to a
status code and that clients can branch on.
"""


class StorycrowdError(Exception):
    code = "ERROR"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


# --- workspace ---

class EmptyName(StorycrowdError):
    code = "EMPTY_NAME"


class NotFound(StorycrowdError):
    code = "NOT_FOUND"


class UnknownMember(StorycrowdError):
    code = "UNKNOWN_MEMBER"


class DuplicateMember(StorycrowdError):
    code = "DUPLICATE_MEMBER"


class EmptyTeam(StorycrowdError):
    code = "EMPTY_TEAM"


class OutOfBounds(StorycrowdError):
    code = "OUT_OF_BOUNDS"


class InvalidAnchor(StorycrowdError):
    code = "INVALID_ANCHOR"


# --- orchestrator ---

class InvalidSelection(StorycrowdError):
    code = "INVALID_SELECTION"


class UnknownTeam(StorycrowdError):
    code = "UNKNOWN_TEAM"


class DeletedCharacterInTeam(StorycrowdError):
    code = "DELETED_CHARACTER_IN_TEAM"


class NoWorkAvailable(StorycrowdError):
    code = "NO_WORK_AVAILABLE"


class AlreadyActive(StorycrowdError):
    code = "ALREADY_ACTIVE"


class AlreadyWorkedTask(StorycrowdError):
    code = "ALREADY_WORKED_TASK"


class NotClaimant(StorycrowdError):
    code = "NOT_CLAIMANT"


class BadState(StorycrowdError):
    code = "BAD_STATE"


class NoIdeasYet(StorycrowdError):
    code = "NO_IDEAS_YET"


# --- distance ---

class ParseError(StorycrowdError):
    code = "PARSE_ERROR"

    def __init__(self, message: str = "", line: int | None = None):
        super().__init__(message)
        self.line = line


class DimensionMismatch(StorycrowdError):
    code = "DIMENSION_MISMATCH"

    def __init__(self, message: str = "", line: int | None = None):
        super().__init__(message)
        self.line = line


class EmptyFile(StorycrowdError):
    code = "EMPTY_FILE"


class NoKnownTokens(StorycrowdError):
    code = "NO_KNOWN_TOKENS"


class ZeroVector(StorycrowdError):
    code = "ZERO_VECTOR"


class NoVectorizableSentence(StorycrowdError):
    code = "NO_VECTORIZABLE_SENTENCE"


# --- stats ---

class LengthMismatch(StorycrowdError):
    code = "LENGTH_MISMATCH"


class ZeroVariance(StorycrowdError):
    code = "ZERO_VARIANCE"


class AllTied(StorycrowdError):
    code = "ALL_TIED"


class DegenerateDifferences(StorycrowdError):
    code = "DEGENERATE_DIFFERENCES"


class TooFew(StorycrowdError):
    code = "TOO_FEW"


class MissingRatings(StorycrowdError):
    code = "MISSING_RATINGS"


class UnpairedStory(StorycrowdError):
    code = "UNPAIRED_STORY"


# --- service / sim ---

class ConfigError(StorycrowdError):
    code = "CONFIG_ERROR"


class RecoveryError(StorycrowdError):
    code = "RECOVERY_ERROR"


class ServerUnreachable(StorycrowdError):
    code = "SERVER_UNREACHABLE"


class CorpusTooSmall(StorycrowdError):
    code = "CORPUS_TOO_SMALL"
