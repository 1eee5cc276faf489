"""
Annotated numpy field types for pydantic models
"""

from typing import Annotated

import numpy as np
from pydantic import BeforeValidator, PlainSerializer


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _to_float64(value) -> np.ndarray:
    return _frozen(np.array(value, dtype=np.float64))


def _to_float(value) -> np.ndarray:
    """Keep float32 inputs as float32 (scan files are f32), promote everything else to float64"""
    arr = np.array(value)
    if arr.dtype != np.float32:
        arr = arr.astype(np.float64)
    return _frozen(arr)


def _to_bool(value) -> np.ndarray:
    return _frozen(np.array(value, dtype=bool))


def _to_int(value) -> np.ndarray:
    return _frozen(np.array(value, dtype=np.int64))


def _dump(arr: np.ndarray) -> list:
    return arr.tolist()


Float64Array = Annotated[np.ndarray, BeforeValidator(_to_float64), PlainSerializer(_dump, return_type=list)]
FloatArray = Annotated[np.ndarray, BeforeValidator(_to_float), PlainSerializer(_dump, return_type=list)]
BoolArray = Annotated[np.ndarray, BeforeValidator(_to_bool), PlainSerializer(_dump, return_type=list)]
IntArray = Annotated[np.ndarray, BeforeValidator(_to_int), PlainSerializer(_dump, return_type=list)]
