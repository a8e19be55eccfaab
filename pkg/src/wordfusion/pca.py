"""Principal component analysis over a self-contained symmetric eigensolver.

The eigensolver is cyclic Jacobi: sweep all off-diagonal (p, q) pairs and
rotate each to zero until the off-diagonal mass is negligible. Quadratic
convergence makes a handful of sweeps enough at any dimension this package
meets, and the routine is exactly deterministic for identical input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np


def jacobi_eigh(matrix, tol: float = 1e-12, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and column eigenvectors of a symmetric matrix.

    ``tol`` bounds the final off-diagonal Frobenius mass relative to the
    matrix norm. Raises ArithmeticError if ``max_sweeps`` cyclic sweeps do
    not converge (which a symmetric real matrix should never hit).
    """
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if not np.allclose(a, a.T, rtol=1e-10, atol=1e-12):
        raise ValueError("matrix is not symmetric")
    a = (a + a.T) / 2.0
    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v

    def _off_diag_norm(m: np.ndarray) -> float:
        off = m - np.diag(m.diagonal())
        return float(np.sqrt(np.sum(off * off)))

    threshold = tol * max(1.0, float(np.sqrt(np.sum(a * a))))
    converged = _off_diag_norm(a) <= threshold
    for _ in range(max_sweeps):
        if converged:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                theta = diff / (2.0 * apq)
                # t = tan of the rotation angle; guard |theta| so theta**2 cannot overflow
                if abs(theta) > 1e150:
                    t = 1.0 / (2.0 * theta)
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        converged = _off_diag_norm(a) <= threshold
    if not converged:
        raise ArithmeticError(f"eigendecomposition did not converge in {max_sweeps} sweeps")
    values = a.diagonal().copy()
    order = np.argsort(-values, kind="stable")
    return values[order], v[:, order]


@dataclass(frozen=True)
class PcaModel:
    """Mean, orthonormal component rows, and per-component variances (non-increasing)."""

    mean: np.ndarray
    components: np.ndarray  # shape (d_out, d_in)
    variances: np.ndarray  # shape (d_out,)

    @property
    def d_in(self) -> int:
        return self.components.shape[1]

    @property
    def d_out(self) -> int:
        return self.components.shape[0]


def _orient_rows(components: np.ndarray) -> np.ndarray:
    # sign convention: each component's largest-magnitude entry is positive
    out = components.copy()
    for i in range(out.shape[0]):
        j = int(np.argmax(np.abs(out[i])))
        if out[i, j] < 0:
            out[i] = -out[i]
    return out


def fit(data: Sequence[np.ndarray] | np.ndarray, d_out: int) -> PcaModel:
    """Fit PCA on row vectors: mean-center, eigendecompose the sample covariance.

    Components are the top-``d_out`` eigenvectors by eigenvalue, sign-oriented
    for determinism. Requires at least 2 samples and 1 <= d_out <= d_in.
    """
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"expected 2-D data (samples x features), got shape {x.shape}")
    n, d_in = x.shape
    if n < 2:
        raise ValueError(f"need at least 2 samples to fit, got {n}")
    if not (1 <= d_out <= d_in):
        raise ValueError(f"d_out must be in [1, {d_in}], got {d_out}")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = (centered.T @ centered) / (n - 1)
    values, vectors = jacobi_eigh(cov)
    components = _orient_rows(vectors[:, :d_out].T)
    variances = np.maximum(values[:d_out], 0.0)  # clamp eps-negative eigenvalues
    return PcaModel(mean=mean, components=components, variances=variances)


def transform(model: PcaModel, vector) -> np.ndarray:
    """Project a vector onto the model's components after centering."""
    v = np.asarray(vector, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != model.d_in:
        raise ValueError(f"dimension mismatch: model expects {model.d_in}, got shape {v.shape}")
    return model.components @ (v - model.mean)


def project_embeddings(vocab: Mapping[str, np.ndarray], d_out: int) -> dict[str, np.ndarray]:
    """One fit over the whole vocabulary, then transform every word.

    The fit stacks vectors in sorted word order, so the model (and therefore
    every projection) is deterministic regardless of mapping order.
    """
    if len(vocab) < 2:
        raise ValueError(f"need at least 2 vectors to project, got {len(vocab)}")
    model = fit(np.stack([np.asarray(vocab[w], dtype=np.float64) for w in sorted(vocab)]), d_out)
    return {w: transform(model, v) for w, v in vocab.items()}
