"""Mesh and grid emission: CSV tables and an indexed-triangle text format.

The triangle format is plain text: a header line "vertices N D", N lines of
D floats, a line "triangles M", and M lines of three zero-based indices.
Vertices may live in any ambient dimension, so downstream plotters decide
projections themselves.
"""

from __future__ import annotations

import numpy as np

from .immersion import MTImmersion
from .spaceforms import GeometryError


def immersion_grid(imm: MTImmersion) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(parameter points, psi values, tau values), flattened row-major."""
    chart = imm.chart
    mesh = np.stack(np.meshgrid(*chart.axes, indexing="ij"), axis=-1)
    flat = mesh.reshape(-1, chart.dim)
    psis = np.array([imm.psi(u) for u in flat])
    taus = np.array([imm.tau_fn(u) for u in flat])
    return flat, psis, taus


def export_grid_csv(imm: MTImmersion, path: str) -> None:
    """psi and tau sampled on the chart grid: u1..un, psi1..psiA, tau."""
    us, psis, taus = immersion_grid(imm)
    n = us.shape[1]
    amb = psis.shape[1]
    header = ",".join([f"u{i+1}" for i in range(n)]
                      + [f"psi{i+1}" for i in range(amb)] + ["tau"])
    table = np.column_stack([us, psis, taus])
    np.savetxt(path, table, delimiter=",", header=header, comments="")


def grid_triangles(shape: tuple[int, int]) -> np.ndarray:
    """Two triangles per quad of a structured 2d grid, consistent winding."""
    ni, nj = shape
    faces = []
    for i in range(ni - 1):
        for j in range(nj - 1):
            a = i * nj + j
            b = a + 1
            c = a + nj
            d = c + 1
            faces.append((a, b, d))
            faces.append((a, d, c))
    return np.asarray(faces, dtype=int)


def export_triangle_mesh(imm: MTImmersion, path: str,
                         which: str = "phibar") -> None:
    """Indexed-triangle surface of psi or phibar for 2-parameter charts."""
    if imm.chart.dim != 2:
        raise GeometryError("triangle export needs a 2-parameter chart")
    us, psis, taus = immersion_grid(imm)
    if which == "psi":
        verts = psis
    elif which == "phibar":
        verts = np.column_stack([psis, taus])
    else:
        raise GeometryError(f"unknown mesh target {which!r}")
    faces = grid_triangles(imm.chart.grid_shape)
    with open(path, "w") as fh:
        fh.write(f"vertices {verts.shape[0]} {verts.shape[1]}\n")
        for v in verts:
            fh.write(" ".join(f"{x:.17g}" for x in v) + "\n")
        fh.write(f"triangles {faces.shape[0]}\n")
        for f in faces:
            fh.write(f"{f[0]} {f[1]} {f[2]}\n")


def load_triangle_mesh(path: str) -> tuple[np.ndarray, np.ndarray]:
    with open(path) as fh:
        head = fh.readline().split()
        if len(head) != 3 or head[0] != "vertices":
            raise GeometryError(f"bad mesh header in {path}")
        nv, dim = int(head[1]), int(head[2])
        verts = np.array([[float(x) for x in fh.readline().split()]
                          for _ in range(nv)])
        head = fh.readline().split()
        if len(head) != 2 or head[0] != "triangles":
            raise GeometryError(f"bad triangle header in {path}")
        nf = int(head[1])
        faces = np.array([[int(x) for x in fh.readline().split()]
                          for _ in range(nf)], dtype=int)
    if verts.shape != (nv, dim):
        raise GeometryError("vertex block size mismatch")
    return verts, faces
