class SurrogateError(Exception):
    exit_code = 1

    def __init__(self, details: str = ''):
        self.details = details
        super().__init__(details)


class ValidationError(SurrogateError):
    exit_code = 2


class ParseError(ValidationError):
    def __init__(self, details, row: int, column: str):
        self.row = row
        self.column = column
        super().__init__(f"row {row}, column {column!r}: {details}")


class EmptyArmError(ValidationError):
    def __init__(self, details, arm: int):
        self.arm = arm
        super().__init__(details)


class ConfigError(ValidationError):
    pass


class EstimationError(SurrogateError):
    exit_code = 3


class SingularDesignError(EstimationError):
    pass


class UndefinedPTEError(EstimationError):
    def __init__(self, details='overall treatment effect is zero, R_S is not identifiable'):
        super().__init__(details)


class ZeroSpreadError(EstimationError):
    pass


class DegenerateProbabilityError(EstimationError):
    pass


class NearZeroProbabilityError(EstimationError):
    pass


class InsufficientSupportError(EstimationError):
    def __init__(self, details, arm: int):
        self.arm = arm
        super().__init__(details)


class InferenceUnreliableError(SurrogateError):
    exit_code = 4

    def __init__(self, details, reason: str = ''):
        self.reason = reason
        super().__init__(details)
