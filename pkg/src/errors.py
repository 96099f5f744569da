class MsmTreeError(Exception):
    pass


class DatasetParseError(MsmTreeError):
    '''Raised for malformed LIBSVM text. Carries the 1-based line number.'''

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class EmptyDatasetError(DatasetParseError):
    def __init__(self, message: str = "empty dataset"):
        super().__init__(message)


class StratificationError(MsmTreeError):
    pass


class FoldConstructionError(MsmTreeError):
    pass


class GramSizeError(MsmTreeError):
    pass


class KernelNotPsdError(MsmTreeError):
    pass


class SearchExhaustedError(MsmTreeError):
    '''Every candidate labeling of the violated-constraint search was excluded.'''
    pass


class LeafReachedError(MsmTreeError):
    pass


class InfeasibleBalanceError(MsmTreeError):
    pass


class OracleGuardError(MsmTreeError):
    pass


class TreeBuildError(MsmTreeError):
    def __init__(self, message: str, node_path: str = ""):
        self.node_path = node_path
        super().__init__(f"node '{node_path or 'root'}': {message}")


class ModelFormatError(MsmTreeError):
    pass


class UnknownMethodError(MsmTreeError):
    pass
