"""Affine tetrahedra and the metric data entering the stiffness matrix."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PRESETS = {
    "reference": [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]],
    "fundamental": [[0, 0, 0], [0, 0, 1], [0.5, 0.5, 0.5], [-0.5, 0.5, 0.5]],
    "regular": [
        [0, 0, np.sqrt(6) / 3],
        [np.sqrt(3) / 3, 0, 0],
        [-np.sqrt(3) / 6, 0.5, 0],
        [-np.sqrt(3) / 6, -0.5, 0],
    ],
}

# Face j is opposite vertex j.
_FACES = ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2))


@dataclass(frozen=True)
class Tetrahedron:
    """Tetrahedron with vertices x0..x3; reference vertex j maps to x_j."""

    vertices: np.ndarray
    volume: float = field(init=False)
    face_areas: np.ndarray = field(init=False)
    normals: np.ndarray = field(init=False)
    ref_gradients: np.ndarray = field(init=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.shape != (4, 3) or not np.all(np.isfinite(v)):
            raise ValueError("a tetrahedron needs four finite 3D vertices")
        e1, e2, e3 = v[1] - v[0], v[2] - v[0], v[3] - v[0]
        triple = float(np.dot(e1, np.cross(e2, e3)))
        edges = [np.linalg.norm(v[i] - v[j]) for i in range(4) for j in range(i)]
        if abs(triple) / 6 < 1e-12 * max(edges) ** 3:
            raise ValueError("degenerate tetrahedron")
        grads = np.array([np.cross(e2, e3), np.cross(e3, e1), np.cross(e1, e2)]) / triple
        areas, normals = np.empty(4), np.empty((4, 3))
        for j, (a, b, c) in enumerate(_FACES):
            n = np.cross(v[b] - v[a], v[c] - v[a])
            if np.dot(n, v[a] - v[j]) < 0:
                n = -n
            areas[j] = np.linalg.norm(n) / 2
            normals[j] = n / np.linalg.norm(n)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "volume", abs(triple) / 6)
        object.__setattr__(self, "face_areas", areas)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "ref_gradients", grads)

    @classmethod
    def preset(cls, name: str) -> "Tetrahedron":
        try:
            return cls(np.array(PRESETS[name], dtype=float))
        except KeyError:
            raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None

    @property
    def jacobian(self) -> np.ndarray:
        return (self.vertices[1:] - self.vertices[0]).T

    @property
    def surface_area(self) -> float:
        return float(self.face_areas.sum())

    def dihedral_cos(self, j: int, k: int) -> float:
        """Cosine of the dihedral angle between faces j and k."""
        return float(-self.normals[j] @ self.normals[k])

    def affine_map(self, points: np.ndarray) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return self.vertices[0] + p @ self.jacobian.T

    def inverse_map(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.linalg.solve(self.jacobian, (x - self.vertices[0]).reshape(-1, 3).T).T.reshape(x.shape)

    def stiffness_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """Coefficients of the six derivative pairings in the stiffness form.

        Returns (diag, cross): diag[j] weights (d_j u, d_j v) and cross[j, k]
        (j < k) weights ((d_k - d_j) u, (d_k - d_j) v); both are already
        scaled by the Jacobian 6|T| and built from face areas and dihedral
        cosines.
        """
        a, T = self.face_areas, self.volume
        scale = 2 / (3 * T)
        diag = np.array([scale * a[0] * a[j] * self.dihedral_cos(0, j) for j in (1, 2, 3)])
        cross = np.zeros((3, 3))
        for j in range(1, 4):
            for k in range(j + 1, 4):
                cross[j - 1, k - 1] = scale * a[j] * a[k] * self.dihedral_cos(j, k)
        return diag, cross
