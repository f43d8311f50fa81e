"""Thread-modular static analysis with a conditional-writes interference domain."""

from condwrites.engine import AnalysisConfig, AnalysisResult, analyse

__all__ = ["AnalysisConfig", "AnalysisResult", "analyse"]
__version__ = "0.1.0"
