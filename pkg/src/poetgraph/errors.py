"""Exception types raised across the package."""


class PoetGraphError(Exception):
    """Base class for all errors raised by poetgraph."""


class CorpusError(PoetGraphError, ValueError):
    pass


class FeatureError(PoetGraphError, ValueError):
    pass


class SimilarityError(PoetGraphError, ValueError):
    pass


class GraphError(PoetGraphError, ValueError):
    pass


class ConvergenceError(PoetGraphError, RuntimeError):
    def __init__(self, message, iterations):
        super().__init__(f"{message} (after {iterations} iterations)")
        self.iterations = iterations


class PipelineError(PoetGraphError, RuntimeError):
    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
