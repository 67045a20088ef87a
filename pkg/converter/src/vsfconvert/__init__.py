"""Benchmark HDF5 to VSF dataset converter."""

from .convert import ConvertError, ConvertedVideo, ConvertReport, convert
from .vsf import write_vsf

__version__ = "0.1.0"

__all__ = ["ConvertError", "ConvertedVideo", "ConvertReport", "convert",
           "write_vsf", "__version__"]
