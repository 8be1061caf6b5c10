"""Generative-quality metrics from precomputed matrices: FID, IS, CLIP score.

No feature extractor runs here. Callers supply matrices as files (CSV with a
header row, or a 2-D float ``.npy``): image features for FID, per-image
class probabilities for IS, image/text embeddings for the CLIP score.

FID between feature sets summarized as Gaussians (mu, Sigma) is

    |mu_r - mu_g|^2 + Tr(Sigma_r + Sigma_g - 2 (Sigma_r Sigma_g)^(1/2))

with the square-root trace evaluated in the symmetric form
Tr((Sigma_r^(1/2) Sigma_g Sigma_r^(1/2))^(1/2)) by eigendecomposition.
Eigenvalues slightly below zero (numerical noise from near-singular
covariances) are clamped to zero; an eigenvalue below -1e-6 times the
Frobenius norm of the decomposed matrix is treated as a numerical failure
rather than clamped.

IS is exp of the mean KL divergence between each row and its split's
marginal (0 log 0 = 0); the score is in [1, K] for K classes. CLIP score is
the mean of scale * max(cos(img_i, txt_i), 0); scale 100 by default, 2.5 in
``hessel_w`` mode (exactly 1/40 of the default).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from longtail.errors import (
    ConfigurationError,
    NumericalError,
    ParseError,
    ValidationError,
)
from longtail.rng import SplitMix64

CLIP_SCALES = {"hundred": 100.0, "hessel_w": 2.5}

_FAIL_EIG_REL = 1e-6
_CLAMP_FLAG_REL = 1e-10


@dataclass(frozen=True)
class GaussianStats:
    """Mean vector and symmetrized unbiased covariance of a feature matrix."""

    mu: np.ndarray
    sigma: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.mu)


@dataclass(frozen=True)
class FidResult:
    score: float
    clamped: bool
    min_eigenvalue: float


def load_matrix(path: Path | str) -> np.ndarray:
    """Read a 2-D float64 matrix from .npy or header-first CSV."""
    p = Path(path)
    if p.suffix.lower() == ".npy":
        try:
            m = np.load(p)
        except ValueError as exc:
            raise ParseError(f"{p}: cannot read npy ({exc})") from None
    else:
        try:
            m = np.loadtxt(p, delimiter=",", skiprows=1, ndmin=2)
        except ValueError as exc:
            raise ParseError(f"{p}: cannot parse CSV ({exc})") from None
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValidationError(f"{p}: expected a 2-D matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValidationError(f"{p}: matrix contains non-finite values")
    return m


def gaussian_stats(features: np.ndarray) -> GaussianStats:
    """Column means and the n-1 divisor covariance, symmetrized."""
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 2:
        raise ValidationError(f"expected a 2-D matrix, got shape {f.shape}")
    if f.shape[0] < 2:
        raise ConfigurationError(
            f"covariance needs at least 2 samples, got {f.shape[0]}"
        )
    if not np.isfinite(f).all():
        raise ValidationError("feature matrix contains non-finite values")
    mu = f.mean(axis=0)
    sigma = np.atleast_2d(np.cov(f, rowvar=False))
    sigma = (sigma + sigma.T) / 2.0
    return GaussianStats(mu, sigma)


def _checked_eigh(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Eigendecompose a symmetric matrix; fail on eigenvalues too far
    below zero, return (clamped eigenvalues, eigenvectors, min eigenvalue)."""
    eigvals, eigvecs = np.linalg.eigh(matrix)
    min_eig = float(eigvals.min()) if len(eigvals) else 0.0
    scale = float(np.linalg.norm(matrix))
    if min_eig < -_FAIL_EIG_REL * max(scale, np.finfo(np.float64).tiny):
        raise NumericalError(
            f"eigenvalue {min_eig:g} below tolerance for matrix of norm {scale:g}"
        )
    return np.clip(eigvals, 0.0, None), eigvecs, min_eig


def fid_details(r: GaussianStats, g: GaussianStats) -> FidResult:
    if r.dim != g.dim:
        raise ConfigurationError(
            f"dimension mismatch: {r.dim} vs {g.dim}"
        )
    vals_r, vecs_r, _ = _checked_eigh(r.sigma)
    root_r = (vecs_r * np.sqrt(vals_r)) @ vecs_r.T
    inner = root_r @ g.sigma @ root_r
    inner = (inner + inner.T) / 2.0
    vals, _, min_eig = _checked_eigh(inner)
    trace_ref = max(float(np.trace(inner)), np.finfo(np.float64).tiny)
    clamped = min_eig < -_CLAMP_FLAG_REL * trace_ref
    diff = r.mu - g.mu
    score = (
        float(diff @ diff)
        + float(np.trace(r.sigma))
        + float(np.trace(g.sigma))
        - 2.0 * float(np.sqrt(vals).sum())
    )
    return FidResult(score, clamped, min_eig)


def fid(r: GaussianStats, g: GaussianStats) -> float:
    return fid_details(r, g).score


def _validate_probs(probs: np.ndarray) -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
        raise ValidationError(f"expected an n x K probability matrix, got {p.shape}")
    if not np.isfinite(p).all():
        raise ValidationError("probability matrix contains non-finite values")
    if p.min() < 0.0 or p.max() > 1.0:
        raise ValidationError("probabilities must lie in [0, 1]")
    sums = p.sum(axis=1)
    bad = np.nonzero(np.abs(sums - 1.0) > 1e-6)[0]
    if len(bad):
        raise ValidationError(
            f"row {bad[0]} sums to {sums[bad[0]]!r}, expected 1 within 1e-6"
        )
    return p


def inception_score(
    probs: np.ndarray, splits: int = 1, seed: int = 0
) -> tuple[float, float]:
    """Mean and population std of exp(mean KL(row || split marginal)).

    Rows are shuffled with the seeded generator, then divided into
    ``splits`` contiguous chunks (the first n mod splits chunks get one
    extra row). A single split uses every row and is order independent.
    """
    p = _validate_probs(probs)
    n = p.shape[0]
    if splits < 1:
        raise ConfigurationError(f"splits must be >= 1, got {splits}")
    if splits > n:
        raise ConfigurationError(f"cannot split {n} rows into {splits} parts")

    rows = list(range(n))
    SplitMix64(seed).shuffle(rows)
    p = p[np.asarray(rows, dtype=np.int64)]

    base, rem = divmod(n, splits)
    scores = []
    start = 0
    for s in range(splits):
        size = base + (1 if s < rem else 0)
        chunk = p[start : start + size]
        start += size
        marginal = chunk.mean(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(
                chunk > 0.0, chunk * (np.log(chunk) - np.log(marginal)), 0.0
            )
        scores.append(float(np.exp(terms.sum(axis=1).mean())))
    return float(np.mean(scores)), float(np.std(scores))


def clip_score(
    img_emb: np.ndarray, txt_emb: np.ndarray, scale_mode: str = "hundred"
) -> float:
    """Mean scaled, zero-clamped cosine similarity of paired embeddings."""
    if scale_mode not in CLIP_SCALES:
        raise ConfigurationError(
            f"scale_mode must be one of {sorted(CLIP_SCALES)}, got {scale_mode!r}"
        )
    img = np.asarray(img_emb, dtype=np.float64)
    txt = np.asarray(txt_emb, dtype=np.float64)
    if img.ndim != 2 or txt.ndim != 2 or img.shape != txt.shape:
        raise ConfigurationError(
            f"embedding shapes must match, got {img.shape} vs {txt.shape}"
        )
    for name, m in (("image", img), ("text", txt)):
        norms = np.linalg.norm(m, axis=1)
        zero = np.nonzero(norms == 0.0)[0]
        if len(zero):
            raise ValidationError(f"{name} embedding row {zero[0]} has zero norm")
    cos = (img * txt).sum(axis=1) / (
        np.linalg.norm(img, axis=1) * np.linalg.norm(txt, axis=1)
    )
    return float(CLIP_SCALES[scale_mode] * np.maximum(cos, 0.0).mean())
