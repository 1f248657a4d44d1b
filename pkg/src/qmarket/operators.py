"""Dense complex operator algebra on small Hilbert spaces.

Everything here works on plain numpy arrays of shape (d, d) with d <= 64.
Hermitian operators are validated and symmetrized by :func:`as_hermitian`;
the real inner-product geometry of the Hermitian space is exposed through
:func:`hs_inner` and the vectorization pair :func:`herm_to_vec` /
:func:`vec_to_herm`, under which hs_inner becomes the euclidean dot product.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InternalConsistencyError, SolverError, ValidationError

DIM_CAP = 64

HERM_TOL = 1e-12
PROJ_TOL = 1e-10
RECON_TOL = 1e-9

# Pauli basis of 2x2 Hermitian operators
I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def check_matrix(m):
    """Validate a square complex matrix and return it as a complex ndarray.

    Enforces: square, 1 <= dim <= 64, all entries finite.
    """
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"matrix must be square, got shape {a.shape}")
    d = a.shape[0]
    if d < 1 or d > DIM_CAP:
        raise ValidationError(f"dimension {d} outside [1, {DIM_CAP}]")
    if not (np.all(np.isfinite(a.real)) and np.all(np.isfinite(a.imag))):
        raise ValidationError("matrix has non-finite entries")
    return a


def as_hermitian(m):
    """Validate near-Hermiticity and return the symmetrized matrix (M + M*)/2."""
    a = check_matrix(m)
    scale = max(1.0, np.abs(a).max())
    dev = np.abs(a - a.conj().T).max()
    if dev > HERM_TOL * scale:
        raise ValidationError(
            f"matrix is not Hermitian: max deviation {dev:.3e} exceeds "
            f"{HERM_TOL * scale:.3e}"
        )
    return 0.5 * (a + a.conj().T)


def is_hermitian(m, tol=HERM_TOL):
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = max(1.0, np.abs(a).max())
    return bool(np.abs(a - a.conj().T).max() <= tol * scale)


@dataclass(frozen=True)
class SpectralResolution:
    """Distinct eigenvalues (ascending) with their spectral projections."""

    eigenvalues: tuple
    projections: tuple

    @property
    def dim(self):
        return self.projections[0].shape[0]

    def reconstruct(self):
        out = np.zeros_like(self.projections[0])
        for x, e in zip(self.eigenvalues, self.projections):
            out += x * e
        return out


def spectral_decompose(x, cluster_tol=None):
    """Spectral resolution X = sum_j x_j E_j with near-degenerate clustering.

    Eigenvalues within `cluster_tol` of each other are merged into a single
    projection (sum of the eigenprojections of the cluster).  Default
    tolerance is 1e-8 * max(1, ||X||).
    """
    x = as_hermitian(x)
    if cluster_tol is not None and cluster_tol < 0:
        raise ValidationError("cluster_tol must be >= 0")
    try:
        vals, vecs = np.linalg.eigh(x)
    except np.linalg.LinAlgError as exc:
        raise SolverError(
            f"eigensolver failed on matrix with norm {np.linalg.norm(x):.6e}"
        ) from exc
    if cluster_tol is None:
        cluster_tol = 1e-8 * max(1.0, np.linalg.norm(x, 2))

    eigenvalues = []
    projections = []
    i = 0
    n = len(vals)
    while i < n:
        j = i + 1
        while j < n and vals[j] - vals[j - 1] <= cluster_tol:
            j += 1
        block = vecs[:, i:j]
        proj = block @ block.conj().T
        eigenvalues.append(float(np.mean(vals[i:j])))
        projections.append(0.5 * (proj + proj.conj().T))
        i = j
    return SpectralResolution(tuple(eigenvalues), tuple(projections))


def apply_function(x, g, cluster_tol=None):
    """Operator function calculus g(X) = sum_j g(x_j) E_j."""
    res = spectral_decompose(x, cluster_tol)
    out = np.zeros((res.dim, res.dim), dtype=complex)
    for val, proj in zip(res.eigenvalues, res.projections):
        gv = g(val)
        if not np.isfinite(gv):
            raise ValidationError(f"function returned non-finite value at eigenvalue {val}")
        out += gv * proj
    return 0.5 * (out + out.conj().T)


def tensor_product(a, b):
    """Kronecker product with the global dimension cap enforced."""
    a = check_matrix(a)
    b = check_matrix(b)
    if a.shape[0] * b.shape[0] > DIM_CAP:
        raise ValidationError(
            f"tensor product dimension {a.shape[0] * b.shape[0]} exceeds cap {DIM_CAP}"
        )
    return np.kron(a, b)


def hs_inner(a, b):
    """Real trace pairing tr(AB) of two Hermitian operators."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    t = np.trace(a @ b)
    scale = max(1.0, np.linalg.norm(a) * np.linalg.norm(b))
    if abs(t.imag) > 1e-10 * scale:
        raise InternalConsistencyError(
            f"trace pairing has imaginary residue {t.imag:.3e}"
        )
    return float(t.real)


def min_eigenvalue(x):
    """Smallest eigenvalue; X is positive iff this is >= -tol."""
    x = as_hermitian(x)
    try:
        return float(np.linalg.eigvalsh(x)[0])
    except np.linalg.LinAlgError as exc:
        raise SolverError(
            f"eigensolver failed on matrix with norm {np.linalg.norm(x):.6e}"
        ) from exc


# --- real vectorization of the Hermitian space ------------------------------
#
# herm_to_vec maps d x d Hermitian operators isometrically onto R^{d^2}:
# the diagonal, then sqrt(2) * real and sqrt(2) * imag of the upper triangle,
# so that dot(herm_to_vec(A), herm_to_vec(B)) == hs_inner(A, B).

_SQRT2 = np.sqrt(2.0)


def herm_to_vec(x):
    x = np.asarray(x, dtype=complex)
    d = x.shape[0]
    iu, ju = np.triu_indices(d, k=1)
    return np.concatenate(
        [np.diag(x).real, _SQRT2 * x[iu, ju].real, _SQRT2 * x[iu, ju].imag]
    )


def vec_to_herm(v, d):
    v = np.asarray(v, dtype=float)
    if v.size != d * d:
        raise ValidationError(f"vector of size {v.size} is not a dim-{d} Hermitian")
    out = np.zeros((d, d), dtype=complex)
    out[np.diag_indices(d)] = v[:d]
    iu, ju = np.triu_indices(d, k=1)
    m = d * (d - 1) // 2
    re = v[d : d + m] / _SQRT2
    im = v[d + m :] / _SQRT2
    out[iu, ju] = re + 1j * im
    out[ju, iu] = re - 1j * im
    return out


def pauli_operator(x0, x1, x2, x3):
    """x0*I + x1*sx + x2*sy + x3*sz on C^2."""
    return x0 * I2 + x1 * SX + x2 * SY + x3 * SZ
