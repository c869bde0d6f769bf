"""Dense linear algebra for very small matrices (dimension <= 5).

Matrices and vectors are plain ``numpy`` float arrays; every function
returns a fresh array and never mutates its arguments.
"""

import cmath
import math

import numpy as np

from .errors import DimensionError, DomainError, SingularMatrixError

# (6, 6) Pade numerator coefficients c_k, k = 0..6; denominator uses (-1)^k c_k.
_PADE6 = (
    1.0,
    1.0 / 2.0,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15840.0,
    1.0 / 665280.0,
)

SINGULAR_RTOL = 1e-13


def as_matrix(M):
    """Coerce ``M`` to a finite 2-D float array."""
    A = np.array(M, dtype=float)
    if A.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix has non-finite entries")
    return A


def as_vector(v):
    """Coerce ``v`` to a finite 1-D float array."""
    x = np.array(v, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("vector has non-finite entries")
    return x


def _square(M):
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"matrix must be square, got shape {A.shape}")
    return A


def inf_norm(M):
    return float(np.max(np.sum(np.abs(M), axis=1))) if M.size else 0.0


def mat_exp(M, t=1.0):
    """Return ``exp(M t)`` by scaling and squaring with a (6, 6) Pade approximant.

    The argument is scaled by ``2**-s`` so that its infinity norm is at most
    1/2, the rational approximant is evaluated, and the result squared ``s``
    times.
    """
    A = _square(M)
    if not math.isfinite(t):
        raise DomainError(f"time must be finite, got {t}")
    n = A.shape[0]
    X = A * t
    norm = inf_norm(X)
    s = 0
    if norm > 0.5:
        s = max(0, int(math.ceil(math.log2(norm / 0.5))))
        X = X / 2.0**s

    eye = np.eye(n)
    term = eye
    num = _PADE6[0] * eye
    den = _PADE6[0] * eye
    for k in range(1, 7):
        term = term @ X
        num = num + _PADE6[k] * term
        den = den + ((-1) ** k) * _PADE6[k] * term
    E = solve_matrix(den, num)
    for _ in range(s):
        E = E @ E
    return E


def _lu(A):
    """In-place partial-pivot LU of a copy of ``A``; raises on tiny pivots."""
    n = A.shape[0]
    LU = A.copy()
    perm = list(range(n))
    threshold = SINGULAR_RTOL * inf_norm(A)
    for j in range(n):
        piv = j + int(np.argmax(np.abs(LU[j:, j])))
        if abs(LU[piv, j]) <= threshold or LU[piv, j] == 0.0:
            raise SingularMatrixError(
                f"matrix is singular to tolerance (pivot {abs(LU[piv, j]):.3e}, "
                f"threshold {threshold:.3e})",
                pivot=abs(LU[piv, j]),
            )
        if piv != j:
            LU[[j, piv]] = LU[[piv, j]]
            perm[j], perm[piv] = perm[piv], perm[j]
        LU[j + 1:, j] /= LU[j, j]
        LU[j + 1:, j + 1:] -= np.outer(LU[j + 1:, j], LU[j, j + 1:])
    return LU, perm


def _lu_solve(LU, perm, B):
    n = LU.shape[0]
    Y = B[perm].astype(float, copy=True)
    for i in range(n):
        Y[i] -= LU[i, :i] @ Y[:i]
    for i in reversed(range(n)):
        Y[i] = (Y[i] - LU[i, i + 1:] @ Y[i + 1:]) / LU[i, i]
    return Y


def solve(M, v):
    """Solve ``M w = v`` by Gaussian elimination with partial pivoting."""
    A = _square(M)
    b = as_vector(v)
    if b.shape[0] != A.shape[0]:
        raise DimensionError(f"rhs length {b.shape[0]} does not match matrix {A.shape}")
    LU, perm = _lu(A)
    return _lu_solve(LU, perm, b)


def solve_matrix(M, B):
    """Solve ``M W = B`` column by column."""
    A = _square(M)
    Bm = as_matrix(B)
    if Bm.shape[0] != A.shape[0]:
        raise DimensionError(f"rhs shape {Bm.shape} does not match matrix {A.shape}")
    LU, perm = _lu(A)
    return _lu_solve(LU, perm, Bm)


def inverse(M):
    A = _square(M)
    return solve_matrix(A, np.eye(A.shape[0]))


def _horner(coeffs, z):
    p = 0j
    dp = 0j
    for c in coeffs:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _polish(coeffs, z, iters=3):
    # Newton steps on the monic characteristic polynomial, kept only while
    # they reduce the residual (guards against underflowed coefficients)
    p, dp = _horner(coeffs, z)
    for _ in range(iters):
        if dp == 0:
            break
        step = p / dp
        z_new = z - step
        p_new, dp_new = _horner(coeffs, z_new)
        if not abs(p_new) < abs(p):
            break
        z, p, dp = z_new, p_new, dp_new
        if abs(step) <= 1e-16 * max(1.0, abs(z)):
            break
    return z


def eigenvalues(M):
    """Eigenvalues of a matrix of size 1, 2 or 3 from its characteristic polynomial.

    Size 2 uses the quadratic formula on trace/determinant, size 3 the
    depressed-cubic (Cardano) solution followed by Newton polishing.
    Returned as a list of complex numbers.
    """
    A = _square(M)
    n = A.shape[0]
    if n > 3:
        raise DimensionError(f"eigenvalues supports size <= 3, got {n}")
    if n == 1:
        return [complex(A[0, 0])]
    # work on A / ||A|| so that tiny or huge entries neither underflow nor overflow
    s = inf_norm(A)
    if s == 0.0:
        return [0j] * n
    return [s * z for z in _eigenvalues_unit(A / s)]


def _eigenvalues_unit(A):
    n = A.shape[0]
    if n == 2:
        tr = A[0, 0] + A[1, 1]
        det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
        half = 0.5 * (A[0, 0] - A[1, 1])
        disc = half * half + A[0, 1] * A[1, 0]
        root = cmath.sqrt(disc)
        # avoid cancellation: larger root first, then det / larger
        mid = 0.5 * tr
        l1 = mid + root if mid.real >= 0 else mid - root
        l2 = det / l1 if l1 != 0 else mid - (l1 - mid)
        return [complex(l1), complex(l2)]

    # det(lambda I - A) = lambda^3 + c2 lambda^2 + c1 lambda + c0
    c2 = -float(np.trace(A))
    c1 = 0.5 * (np.trace(A) ** 2 - np.trace(A @ A))
    c0 = -_det3(A)
    coeffs = (1.0, c2, c1, c0)
    r = _polish(coeffs, _real_cubic_root(c2, c1, c0)).real
    # deflate to lambda^2 + b lambda + c and solve the quadratic so that a
    # complex pair comes out exactly conjugate
    b = c2 + r
    c = c1 + r * b
    return [complex(r)] + _monic_quadratic_roots(b, c, coeffs, r)


def _real_cubic_root(c2, c1, c0):
    """One real root of ``x^3 + c2 x^2 + c1 x + c0``.

    When all three roots are real the most isolated one is returned, so that
    Newton polishing and deflation never start from a (near) multiple root.
    """
    shift = -c2 / 3.0
    p = c1 - c2 * c2 / 3.0
    q = 2.0 * c2**3 / 27.0 - c2 * c1 / 3.0 + c0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if p < 0.0 and disc <= 0.0:
        # three real roots: trigonometric form
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = max(-1.0, min(1.0, 3.0 * q / (p * m)))
        theta = math.acos(arg) / 3.0
        roots = [m * math.cos(theta - 2.0 * math.pi * j / 3.0) + shift for j in range(3)]
        gap = [min(abs(roots[i] - roots[j]) for j in range(3) if j != i) for i in range(3)]
        return roots[gap.index(max(gap))]
    sq = math.sqrt(max(disc, 0.0))
    u = math.copysign(abs(-q / 2.0 - math.copysign(sq, q)) ** (1.0 / 3.0), -q / 2.0 - math.copysign(sq, q))
    v = -p / (3.0 * u) if u != 0.0 else 0.0
    return u + v + shift


# roots closer than this (relative) are treated as a cluster; a triple root
# is only determined to about eps**(1/3) ~ 6e-6, so the margin is generous
_CLUSTER_RTOL = 1e-4


def _monic_quadratic_roots(b, c, coeffs, r):
    half = -0.5 * b
    disc = half * half - c
    if disc >= 0.0:
        root = math.sqrt(disc)
        l1 = half + math.copysign(root, half) if half != 0.0 else root
        l2 = c / l1 if l1 != 0.0 else -l1
        roots = [complex(l1), complex(l2)]
    else:
        z = complex(half, math.sqrt(-disc))
        roots = [z, z.conjugate()]
    # Newton is ill-conditioned inside a root cluster, and leaving the pair
    # unpolished keeps trace and determinant consistent with the deflation
    everything = [complex(r)] + roots
    isolated = all(
        abs(everything[i] - everything[j]) > _CLUSTER_RTOL * max(1.0, abs(everything[i]))
        for i in range(3)
        for j in range(i + 1, 3)
    )
    if not isolated:
        return roots
    if disc >= 0.0:
        return [complex(_polish(coeffs, z).real) for z in roots]
    z = _polish(coeffs, roots[0])
    return [z, z.conjugate()]


def _det3(A):
    return float(
        A[0, 0] * (A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1])
        - A[0, 1] * (A[1, 0] * A[2, 2] - A[1, 2] * A[2, 0])
        + A[0, 2] * (A[1, 0] * A[2, 1] - A[1, 1] * A[2, 0])
    )


def min_real_eigenvalue(M):
    return min(z.real for z in eigenvalues(M))
