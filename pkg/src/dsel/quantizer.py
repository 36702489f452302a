"""Generalized Lloyd (LBG) vector quantizer for differential CSI.

An N_r x N_t complex matrix is quantized as one vector of length
N_r*N_t (row-major), equivalently 2*N_r*N_t reals. Training alternates
nearest-codeword partition and centroid update; empty cells are
repaired with a perturbed copy of the most populated cell's codeword so
the codeword count stays exactly 2^bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "TrainingMeta",
    "Codebook",
    "mat_to_vec",
    "vec_to_mat",
    "train_codebook",
    "quantize",
    "quantize_many",
    "distortion",
    "additive_error",
    "save_codebook",
    "load_codebook",
]

DEFAULT_MAX_ITER = 200
DEFAULT_REL_TOL = 1e-6
DEFAULT_TRAIN_SIZE = 100_000

# rows per partition chunk are sized so the distance block stays ~32 MB
_CHUNK_BUDGET = 4 * 2**20


@dataclass(frozen=True)
class TrainingMeta:
    n_samples: int
    iterations: int
    seed: int
    distortion_trace: tuple[float, ...]


@dataclass(frozen=True)
class Codebook:
    """2^bits codewords over complex vectors of one shared length."""

    codewords: np.ndarray
    bits: int
    training_distortion: float
    meta: TrainingMeta

    def __post_init__(self) -> None:
        k, _ = self.codewords.shape
        if k != 2**self.bits:
            raise ValueError(f"expected {2**self.bits} codewords, got {k}")
        if len(np.unique(self.codewords.view(np.float64), axis=0)) != k:
            raise ValueError("codewords are not pairwise distinct")
        self.codewords.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.codewords.shape[1]


def mat_to_vec(h: np.ndarray) -> np.ndarray:
    """Row-major flatten of a channel matrix to a complex vector."""
    return np.asarray(h, dtype=complex).reshape(-1)


def vec_to_mat(v: np.ndarray, n_r: int, n_t: int) -> np.ndarray:
    """Inverse of :func:`mat_to_vec`."""
    v = np.asarray(v, dtype=complex)
    if v.size != n_r * n_t:
        raise ValueError(f"vector of length {v.size} is not {n_r}x{n_t}")
    return v.reshape(n_r, n_t)


def _as_real(x: np.ndarray) -> np.ndarray:
    # complex128 (n, d) -> float64 (n, 2d) view; requires C-contiguity
    return np.ascontiguousarray(x).view(np.float64).reshape(x.shape[0], -1)


def _nearest(x: np.ndarray, codewords: np.ndarray) -> tuple[np.ndarray, float]:
    """Nearest codeword per row; returns (indices, exact mean squared error).

    Distances are ranked with the expanded form |x|^2 - 2<x,c> + |c|^2
    (one matmul per chunk); the reported error is recomputed directly
    against the selected codewords so exact hits give exactly zero.
    """
    xr = _as_real(x)
    cr = _as_real(codewords)
    c_sq = np.einsum("kd,kd->k", cr, cr)
    n = xr.shape[0]
    chunk = max(1, min(n, _CHUNK_BUDGET // max(1, codewords.shape[0])))
    idx = np.empty(n, dtype=np.intp)
    err_sum = 0.0
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        block = xr[lo:hi]
        scores = block @ cr.T
        scores *= -2.0
        scores += c_sq
        ix = np.argmin(scores, axis=1)  # first minimum: lowest index wins ties
        idx[lo:hi] = ix
        diff = block - cr[ix]
        err_sum += float(np.einsum("nd,nd->", diff, diff))
    return idx, err_sum / n


def train_codebook(
    samples: np.ndarray,
    bits: int,
    max_iter: int = DEFAULT_MAX_ITER,
    rel_tol: float = DEFAULT_REL_TOL,
    seed: int = 0,
) -> Codebook:
    """Train a 2^bits-codeword quantizer on (n, dim) complex samples.

    Initial codewords are 2^bits distinct samples chosen uniformly at
    random by ``seed``. Iteration stops when the relative distortion
    improvement drops below ``rel_tol`` or after ``max_iter`` centroid
    updates; the recorded distortion always describes the returned
    codewords. Identical (samples, bits, seed) give identical codebooks.

    Raises:
        ValueError: if fewer samples than codewords, or bits < 0.
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.ndim != 2:
        raise ValueError(f"samples must be (n, dim), got shape {samples.shape}")
    if bits < 0:
        raise ValueError(f"bits must be >= 0, got {bits}")
    n, dim = samples.shape
    k = 2**bits
    if n < k:
        raise ValueError(f"need at least {k} samples for {bits} bits, got {n}")

    rng = np.random.default_rng(seed)
    codewords = samples[rng.choice(n, size=k, replace=False)].copy()
    xr = _as_real(samples)

    trace: list[float] = []
    updates = 0
    while True:
        idx, dist = _nearest(samples, codewords)
        trace.append(dist)
        converged = len(trace) >= 2 and (trace[-2] - dist) <= rel_tol * trace[-2]
        if converged or updates >= max_iter:
            break
        counts = np.bincount(idx, minlength=k)
        sums = np.empty((k, 2 * dim))
        for d in range(2 * dim):
            sums[:, d] = np.bincount(idx, weights=xr[:, d], minlength=k)
        populated = counts > 0
        new_real = _as_real(codewords).copy()
        new_real[populated] = sums[populated] / counts[populated, None]
        codewords = new_real.view(complex).reshape(k, dim).copy()
        if not populated.all():
            donor = int(np.argmax(counts))
            for cell in np.flatnonzero(~populated):
                direction = rng.standard_normal(2 * dim)
                direction /= np.linalg.norm(direction)
                scale = 1e-6 * np.linalg.norm(codewords[donor])
                if scale == 0.0:
                    scale = 1e-6  # zero-norm donor would duplicate the codeword
                codewords[cell] = codewords[donor] + scale * (
                    direction[0::2] + 1j * direction[1::2]
                )
        updates += 1

    return Codebook(
        codewords=codewords,
        bits=bits,
        training_distortion=trace[-1],
        meta=TrainingMeta(
            n_samples=n,
            iterations=updates,
            seed=seed,
            distortion_trace=tuple(trace),
        ),
    )


def quantize(cb: Codebook, v: np.ndarray) -> tuple[int, np.ndarray]:
    """Nearest codeword by squared Euclidean distance; ties pick the lowest index."""
    v = np.asarray(v, dtype=complex).reshape(1, -1)
    if v.shape[1] != cb.dim:
        raise ValueError(f"vector length {v.shape[1]} does not match codebook dim {cb.dim}")
    idx, _ = _nearest(v, cb.codewords)
    i = int(idx[0])
    return i, cb.codewords[i]


def quantize_many(cb: Codebook, vs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`quantize` over rows; same tie-break contract."""
    vs = np.asarray(vs, dtype=complex)
    if vs.ndim != 2 or vs.shape[1] != cb.dim:
        raise ValueError(f"expected (n, {cb.dim}) vectors, got shape {vs.shape}")
    idx, _ = _nearest(vs, cb.codewords)
    return idx, cb.codewords[idx]


def distortion(cb: Codebook, samples: np.ndarray) -> float:
    """Mean squared Euclidean distance from samples to their quantization.

    Per-entry distortion is this value divided by the vector length.
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.ndim != 2 or samples.shape[0] == 0:
        raise ValueError(f"need a non-empty (n, dim) sample array, got {samples.shape}")
    if samples.shape[1] != cb.dim:
        raise ValueError(f"sample length {samples.shape[1]} does not match dim {cb.dim}")
    _, dist = _nearest(samples, cb.codewords)
    return dist


def additive_error(h_true: np.ndarray, h_quantized: np.ndarray) -> np.ndarray:
    """Realized quantization error E = h_true - h_quantized."""
    if np.shape(h_true) != np.shape(h_quantized):
        raise ValueError(
            f"shape mismatch: {np.shape(h_true)} vs {np.shape(h_quantized)}"
        )
    return np.asarray(h_true) - np.asarray(h_quantized)


# --- serialization -----------------------------------------------------------
#
# Flat text file:
#   line 1: "# dsel codebook v1"
#   key=value lines: bits, dim, seed, n_samples, iterations,
#                    training_distortion, trace (comma separated)
#   then 2^bits lines of 2*dim reals (re/im interleaved), 17 significant
#   digits, space separated. Reload is bit-exact.


def _fmt(x: float) -> str:
    return format(x, ".17g")


def save_codebook(cb: Codebook, path: str) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("# dsel codebook v1\n")
        fh.write(f"bits={cb.bits}\n")
        fh.write(f"dim={cb.dim}\n")
        fh.write(f"seed={cb.meta.seed}\n")
        fh.write(f"n_samples={cb.meta.n_samples}\n")
        fh.write(f"iterations={cb.meta.iterations}\n")
        fh.write(f"training_distortion={_fmt(cb.training_distortion)}\n")
        fh.write("trace=" + ",".join(_fmt(t) for t in cb.meta.distortion_trace) + "\n")
        for row in cb.codewords:
            parts = []
            for z in row:
                parts += [_fmt(z.real), _fmt(z.imag)]
            fh.write(" ".join(parts) + "\n")


def load_codebook(path: str) -> Codebook:
    with open(path, "r", encoding="ascii") as fh:
        magic = fh.readline().strip()
        if magic != "# dsel codebook v1":
            raise ValueError(f"{path}: not a codebook file")
        kv = {}
        for _ in range(7):
            key, val = fh.readline().strip().split("=", 1)
            kv[key] = val
        bits, dim = int(kv["bits"]), int(kv["dim"])
        rows = []
        for _ in range(2**bits):
            flat = np.array([float(t) for t in fh.readline().split()])
            rows.append(flat[0::2] + 1j * flat[1::2])
        codewords = np.array(rows, dtype=complex).reshape(2**bits, dim)
    return Codebook(
        codewords=codewords,
        bits=bits,
        training_distortion=float(kv["training_distortion"]),
        meta=TrainingMeta(
            n_samples=int(kv["n_samples"]),
            iterations=int(kv["iterations"]),
            seed=int(kv["seed"]),
            distortion_trace=tuple(float(t) for t in kv["trace"].split(",")),
        ),
    )
