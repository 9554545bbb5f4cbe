"""Small dense complex linear algebra for 2x2, 4x4 and 16x16 matrices.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Only the
handful of dimensions used by the two-spin model are accepted; anything
else is rejected early so shape bugs surface at the call site.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericFailure

ALLOWED_DIMS = (2, 4, 16)
HERMITIAN_TOL = 1e-10
QR_MAX_ITER = 500

IDENTITY2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def as_cmat(m, dims=ALLOWED_DIMS):
    """Return ``m`` as a square complex array, checking its dimension."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in dims:
        raise ValueError(f"expected a square matrix of dimension {dims}, got shape {m.shape}")
    return m


def dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


def hermiticity_error(m):
    """Largest entry of ``|m - m^dagger|``."""
    m = np.asarray(m)
    return float(np.max(np.abs(m - dagger(m))))


def kron(a, b):
    """Kronecker product of two 2x2 matrices.

    Entry ``(2*i + k, 2*j + l)`` of the result is ``a[i, j] * b[k, l]``.
    """
    a = as_cmat(a, dims=(2,))
    b = as_cmat(b, dims=(2,))
    out = np.empty((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            out[2 * i:2 * i + 2, 2 * j:2 * j + 2] = a[i, j] * b
    return out


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted descending, with matching eigenvector columns.

    ``vectors`` is ``None`` when only eigenvalues were computed.
    """

    values: np.ndarray
    vectors: np.ndarray = None

    def __len__(self):
        return len(self.values)


def herm_eigen(m, tol=HERMITIAN_TOL):
    """Eigen-decomposition of a Hermitian matrix, values descending."""
    m = as_cmat(m)
    err = hermiticity_error(m)
    if err > tol:
        raise ValueError(f"matrix is not Hermitian (max |m - m^dagger| = {err:.3e})")
    # LAPACK only reads one triangle, so feed it the symmetrized matrix.
    values, vectors = np.linalg.eigh(0.5 * (m + dagger(m)))
    return Spectrum(values=values[::-1].copy(), vectors=vectors[:, ::-1].copy())


def _isolate_eigenvalues(m):
    """Peel off eigenvalues exposed by zero off-diagonal rows or columns.

    Returns the isolated eigenvalues and the indices of the remaining
    coupled submatrix. This is the permutation half of LAPACK-style
    balancing; it keeps exact zeros exact.
    """
    active = list(range(m.shape[0]))
    isolated = []
    changed = True
    while changed and len(active) > 1:
        changed = False
        for i in active:
            others = [j for j in active if j != i]
            if not np.any(m[i, others]) or not np.any(m[others, i]):
                isolated.append(m[i, i])
                active.remove(i)
                changed = True
                break
    return isolated, active


def _householder_hessenberg(a):
    h = a.copy()
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        if not np.any(x[1:]):
            continue
        alpha = np.linalg.norm(x)
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        h[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, :])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        h[k + 2:, k] = 0.0
    return h


def _eig2x2(a, b, c, d):
    """Both eigenvalues of [[a, b], [c, d]], larger modulus first."""
    half_tr = 0.5 * (a + d)
    disc = np.sqrt(0.25 * (a - d) ** 2 + b * c)
    if abs(half_tr + disc) >= abs(half_tr - disc):
        big = half_tr + disc
    else:
        big = half_tr - disc
    if big == 0:
        return 0j, 0j
    # Small root from the determinant avoids cancellation.
    return big, (a * d - b * c) / big


def _qr_sweep(block, mu):
    """One shifted QR step ``RQ + mu I`` on an upper Hessenberg block."""
    m = block.shape[0]
    r = block - mu * np.eye(m)
    rotations = []
    for k in range(m - 1):
        x, y = r[k, k], r[k + 1, k]
        nrm = np.hypot(abs(x), abs(y))
        if nrm == 0:
            c, s = 1.0, 0j
        else:
            c, s = x / nrm, y / nrm
        g = np.array([[np.conj(c), np.conj(s)], [-s, c]])
        r[k:k + 2, :] = g @ r[k:k + 2, :]
        rotations.append(g)
    for k, g in enumerate(rotations):
        r[:, k:k + 2] = r[:, k:k + 2] @ dagger(g)
    return r + mu * np.eye(m)


def general_eigenvalues(m, max_iter=QR_MAX_ITER):
    """Eigenvalues of a general complex 4x4 matrix.

    Eigenvalues isolated by zero rows/columns are split off first. The
    remaining block is reduced to upper Hessenberg form with Householder
    reflections and then iterated with single-shift QR (Wilkinson shifts,
    deflation on negligible subdiagonal entries). Trailing 2x2 blocks are
    solved in closed form.

    Returns the eigenvalues sorted by descending real part.

    Raises
    ------
    NumericFailure
        If the iteration cap is reached before all eigenvalues deflate.
    """
    m = as_cmat(m, dims=(4,))
    if not np.all(np.isfinite(m)):
        raise NumericFailure("matrix contains non-finite entries", iterations=0)
    found, active = _isolate_eigenvalues(m)
    h = _householder_hessenberg(m[np.ix_(active, active)])
    eps = np.finfo(float).eps
    scale = np.max(np.abs(h)) or 1.0
    hi = h.shape[0] - 1
    iterations = 0
    since_deflation = 0
    while hi >= 0:
        if hi == 0:
            found.append(h[0, 0])
            break
        lo = hi
        while lo > 0:
            s = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if abs(h[lo, lo - 1]) <= eps * (s if s > 0 else scale):
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            found.append(h[hi, hi])
            hi -= 1
            since_deflation = 0
            continue
        if lo == hi - 1:
            found.extend(_eig2x2(h[lo, lo], h[lo, hi], h[hi, lo], h[hi, hi]))
            hi -= 2
            since_deflation = 0
            continue
        if iterations >= max_iter:
            raise NumericFailure(
                f"QR iteration did not converge after {iterations} iterations",
                iterations=iterations,
            )
        iterations += 1
        since_deflation += 1
        r1, r2 = _eig2x2(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
        mu = r1 if abs(r1 - h[hi, hi]) < abs(r2 - h[hi, hi]) else r2
        if since_deflation % 11 == 0:
            # exceptional shift to break cycles
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        h[lo:hi + 1, lo:hi + 1] = _qr_sweep(h[lo:hi + 1, lo:hi + 1], mu)
    values = np.array(found, dtype=complex)
    order = np.lexsort((-values.imag, -values.real))
    return values[order]


def partial_trace(rho, keep):
    """Reduced 2x2 state of a 4x4 two-qubit matrix.

    ``keep`` is ``"A"`` (first qubit) or ``"B"`` (second qubit).
    """
    rho = as_cmat(rho, dims=(4,))
    t = rho.reshape(2, 2, 2, 2)
    if keep == "A":
        return np.einsum("ikjk->ij", t)
    if keep == "B":
        return np.einsum("kikj->ij", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")
