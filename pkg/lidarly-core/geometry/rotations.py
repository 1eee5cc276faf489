"""
Rotation helpers. Kept free of model imports so models can use them.
"""

import math

import numpy as np


def normalize_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]"""
    wrapped = math.fmod(angle + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def yaw_pitch_matrix(yaw: float, pitch: float) -> np.ndarray:
    """Box orientation: yaw about z, then pitch about the yawed y axis"""
    return rot_z(yaw) @ rot_y(pitch)


def is_rotation(matrix: np.ndarray, tol: float = 1e-9) -> bool:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape != (3, 3):
        return False
    if not np.allclose(matrix.T @ matrix, np.eye(3), rtol=0.0, atol=tol):
        return False
    return abs(np.linalg.det(matrix) - 1.0) <= tol


def yaw_pitch_from_matrix(matrix: np.ndarray, tol: float = 1e-9) -> tuple:
    """Inverse of yaw_pitch_matrix; raises ValueError if the matrix also rolls"""
    matrix = np.asarray(matrix, dtype=np.float64)
    yaw = math.atan2(-matrix[0, 1], matrix[1, 1])
    pitch = math.atan2(-matrix[2, 0], matrix[2, 2])
    if not np.allclose(yaw_pitch_matrix(yaw, pitch), matrix, rtol=0.0, atol=tol):
        raise ValueError("rotation is not a pure yaw-pitch rotation")
    return yaw, pitch
