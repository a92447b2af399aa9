"""Rotation marginalization for 3D shapes via unit quaternions.

After translations are integrated against a uniform measure, the remaining
rotation dependence of the Gaussian log-likelihood is a quadratic form
``scale_factor * q^T N q`` in the unit quaternion q: N is the symmetric 4x4
(Horn-type) matrix built from the 3x3 cross-covariance of the centered point
sets, and scale_factor carries the noise scale (1/sigma^2).  The marginal over
rotations is then the average of ``exp(scale_factor * q^T N q)`` under the
uniform measure on the 3-sphere, which is exactly the Haar measure on
rotations (and the integral type behind Bingham normalization constants).

Two evaluators are provided: a seeded Monte-Carlo average over the sphere and
a term-by-term integrated series around the isotropic part of the spectrum.
The series comes from writing the sphere constraint as a Fourier integral:
``1/sqrt(det(M(k)))`` with ``M(k) = scale_factor*N + i*k*I`` is expanded about
the mean eigenvalue and each term integrated in closed form; the constant is
fixed so the N = 0 case reproduces the exact sphere average.  The data matrix
is traceless, so the Gaussian step is performed on a spectrum shifted to be
convergence-safe; the shift cancels identically in the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .shapes import Shape

_UNIT_TOL = 1e-12


class SeriesDivergenceError(ArithmeticError):
    """Series truncation is outside its useful radius.

    Raised when successive integrated terms stop shrinking, which signals a
    strongly anisotropic spectrum; fall back to rotation_marginal_mc.
    """


@dataclass(frozen=True)
class Quaternion:
    """a + b*i + c*j + d*k with real components."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"quaternion component {name} is not finite")
            object.__setattr__(self, name, value)

    @classmethod
    def identity(cls) -> "Quaternion":
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def unit(cls, a: float, b: float, c: float, d: float) -> "Quaternion":
        """Construct a quaternion that must already be unit norm (to 1e-12)."""
        q = cls(a, b, c, d)
        if abs(q.norm_squared() - 1.0) > _UNIT_TOL:
            raise ValueError(f"not a unit quaternion: |q|^2 = {q.norm_squared()!r}")
        return q

    @classmethod
    def from_axis_angle(cls, axis, angle: float) -> "Quaternion":
        axis = np.asarray(axis, dtype=float)
        axis = axis / np.linalg.norm(axis)
        half = angle / 2.0
        s = math.sin(half)
        return cls(math.cos(half), *(s * axis))

    @classmethod
    def from_array(cls, arr) -> "Quaternion":
        a, b, c, d = np.asarray(arr, dtype=float)
        return cls(a, b, c, d)

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])

    def vector(self) -> np.ndarray:
        return np.array([self.b, self.c, self.d])

    def norm_squared(self) -> float:
        return self.a**2 + self.b**2 + self.c**2 + self.d**2

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.a, -self.b, -self.c, -self.d)

    def normalized(self) -> "Quaternion":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero quaternion")
        return Quaternion(self.a / n, self.b / n, self.c / n, self.d / n)

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        return quat_multiply(self, other)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.a, -self.b, -self.c, -self.d)


def quat_multiply(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product (the basis quaternions anti-commute: ij = k = -ji)."""
    return Quaternion(
        p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d,
        p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c,
        p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b,
        p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a,
    )


def quat_commutator(p: Quaternion, q: Quaternion) -> Quaternion:
    """pq - qp; scalar part zero, vector part twice the cross product."""
    pq = quat_multiply(p, q)
    qp = quat_multiply(q, p)
    return Quaternion(pq.a - qp.a, pq.b - qp.b, pq.c - qp.c, pq.d - qp.d)


def rotate(q: Quaternion, point) -> np.ndarray:
    """Rotate a 3D point by conjugation q * (0, p) * conj(q); q must be unit."""
    if abs(q.norm_squared() - 1.0) > _UNIT_TOL:
        raise ValueError(f"rotation requires a unit quaternion, |q|^2 = {q.norm_squared()!r}")
    p = np.asarray(point, dtype=float)
    rotated = quat_multiply(quat_multiply(q, Quaternion(0.0, *p)), q.conjugate())
    return rotated.vector()


def rotation_matrix(q: Quaternion) -> np.ndarray:
    """3x3 matrix of the conjugation action of a unit quaternion."""
    a, b, c, d = q.normalized().as_array()
    return np.array(
        [
            [a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)],
            [2 * (c * b + a * d), a * a - b * b + c * c - d * d, 2 * (c * d - a * b)],
            [2 * (d * b - a * c), 2 * (d * c + a * b), a * a - b * b - c * c + d * d],
        ]
    )


def _points3(obj) -> np.ndarray:
    if isinstance(obj, Shape):
        if obj.dim != 3:
            raise ValueError("a 3D shape is required")
        return obj.points
    arr = np.asarray(obj, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"expected (n, 3) points, got shape {arr.shape}")
    return arr


def translation_marginal_exponent(y, v_rotated, sigma: float) -> float:
    """Log factor left after integrating translations out of the Gaussian.

    With residuals Y_i = y_i - v_rotated_i this is
    |sum_i Y_i|^2 / (2 n sigma^2) - sum_i |Y_i|^2 / (2 sigma^2),
    up to a data-independent constant absorbed into normalization.  A common
    offset of all residuals cancels exactly (translations are marginal).
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    ya = _points3(y)
    va = _points3(v_rotated)
    if ya.shape != va.shape:
        raise ValueError(f"point counts differ: {ya.shape[0]} vs {va.shape[0]}")
    n = len(ya)
    residual = ya - va
    total = residual.sum(axis=0)
    return float(np.dot(total, total) / (2 * n * sigma**2) - np.sum(residual * residual) / (2 * sigma**2))


@dataclass(frozen=True, eq=False)
class RotationKernel:
    """Data part N of the rotation quadratic form, with its spectrum.

    ``scale_factor * (q^T N q)`` equals the rotation-dependent part of the
    translation-marginalized exponent when the template is rotated by q.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    n: int
    sigma: float
    scale_factor: float

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (4, 4):
            raise ValueError(f"kernel matrix must be 4x4, got {m.shape}")
        scale = max(1.0, float(np.abs(m).max()))
        if np.abs(m - m.T).max() > 1e-12 * scale:
            raise ValueError("kernel matrix must be symmetric")
        eig = np.sort(np.asarray(self.eigenvalues, dtype=float))[::-1]
        ref = np.sort(np.linalg.eigvalsh(m))[::-1]
        if np.abs(eig - ref).max() > 1e-9 * scale:
            raise ValueError("eigenvalues inconsistent with the kernel matrix")
        if abs(eig.sum() - np.trace(m)) > 1e-9 * scale:
            raise ValueError("eigenvalue sum disagrees with the trace")
        m = m.copy()
        m.setflags(write=False)
        eig = eig.copy()
        eig.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "eigenvalues", eig)

    @classmethod
    def from_matrix(cls, matrix, n: int, sigma: float, scale_factor: float | None = None) -> "RotationKernel":
        matrix = np.asarray(matrix, dtype=float)
        matrix = 0.5 * (matrix + matrix.T)  # symmetrize rounding residue
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        if scale_factor is None:
            scale_factor = 1.0 / sigma**2
        eig = np.sort(np.linalg.eigvalsh(matrix))[::-1]
        return cls(matrix=matrix, eigenvalues=eig, n=n, sigma=float(sigma), scale_factor=float(scale_factor))


def build_rotation_kernel(y, v, sigma: float) -> RotationKernel:
    """Kernel for a data/template pair: q^T N q = sum_i yc_i . R(q) vc_i.

    N is assembled from the 3x3 cross-covariance K_ab = sum_i vc_ia yc_ib of
    the centered point sets (centering folds the translation-marginal
    correction into the quadratic form exactly).  The construction is the
    unique symmetric matrix with that quadratic-form property, which is
    directly testable against explicit quaternion rotations.
    """
    ya = _points3(y)
    va = _points3(v)
    if ya.shape != va.shape:
        raise ValueError(f"point counts differ: {ya.shape[0]} vs {va.shape[0]}")
    if len(ya) < 3:
        raise ValueError("at least 3 points are required")
    yc = ya - ya.mean(axis=0)
    vc = va - va.mean(axis=0)
    k = np.einsum("ia,ib->ab", vc, yc)
    n_mat = np.array(
        [
            [k[0, 0] + k[1, 1] + k[2, 2], k[1, 2] - k[2, 1], k[2, 0] - k[0, 2], k[0, 1] - k[1, 0]],
            [k[1, 2] - k[2, 1], k[0, 0] - k[1, 1] - k[2, 2], k[0, 1] + k[1, 0], k[0, 2] + k[2, 0]],
            [k[2, 0] - k[0, 2], k[0, 1] + k[1, 0], k[1, 1] - k[0, 0] - k[2, 2], k[1, 2] + k[2, 1]],
            [k[0, 1] - k[1, 0], k[0, 2] + k[2, 0], k[1, 2] + k[2, 1], k[2, 2] - k[0, 0] - k[1, 1]],
        ]
    )
    return RotationKernel.from_matrix(n_mat, n=len(ya), sigma=sigma)


def fourier_determinant(kernel: RotationKernel, k: float) -> complex:
    """det of the full constraint matrix scale_factor*N + i*k*I.

    Evaluated as the product over the scaled spectrum, prod(mu_i + i*k); the
    spectrum is rotation-invariant, so the determinant is too.
    """
    mu = kernel.scale_factor * kernel.eigenvalues
    return complex(np.prod(mu + 1j * k))


@dataclass(frozen=True)
class MarginalEstimate:
    """Monte-Carlo estimate of a log sphere-average with its standard error."""

    value: float
    stderr: float
    samples: int


def sample_unit_quaternions(rng: np.random.Generator, count: int, hemisphere: bool = False) -> np.ndarray:
    """Exactly uniform points on the 3-sphere via normalized 4D Gaussians."""
    q = rng.standard_normal((count, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    if hemisphere:
        q[q[:, 0] < 0] *= -1.0
    return q


def rotation_marginal_mc(
    kernel: RotationKernel,
    samples: int,
    seed: int = 0,
    hemisphere: bool = False,
    batch: int = 1 << 20,
) -> MarginalEstimate:
    """log of the sphere average of exp(scale_factor * q^T N q), by sampling.

    Deterministic given the seed.  The exponent is even in q, so restricting
    to a hemisphere leaves the estimate unchanged (double-cover symmetry).
    Exponentials are max-shifted, so large kernels cannot overflow.
    """
    if samples < 1000:
        raise ValueError(f"at least 1000 samples required, got {samples}")
    rng = np.random.default_rng(seed)
    shift = -np.inf
    s1 = s2 = 0.0
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        q = sample_unit_quaternions(rng, m, hemisphere=hemisphere)
        e = kernel.scale_factor * np.einsum("si,ij,sj->s", q, kernel.matrix, q)
        top = float(e.max())
        if top > shift:
            if np.isfinite(shift):
                f = math.exp(shift - top)
                s1 *= f
                s2 *= f * f
            shift = top
        x = np.exp(e - shift)
        s1 += float(x.sum())
        s2 += float((x * x).sum())
        done += m
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0)
    stderr = math.sqrt(var / samples) / mean
    return MarginalEstimate(value=shift + math.log(mean), stderr=stderr, samples=samples)


def rotation_marginal_series(kernel: RotationKernel, order: int = 4) -> float:
    """Series value of the same log sphere-average, truncated at ``order``.

    Writing the sphere constraint as a Fourier integral and expanding
    1/sqrt(det(scale_factor*N + i*k*I)) about the mean scaled eigenvalue
    mu_bar, each power integrates in closed form and the result is

        mu_bar + log( sum_{j<=order} d_j / (j+1)! )

    where the d_j are the exponential-series coefficients of the centered
    spectrum's power sums.  The j = 0 term alone reproduces the exact N = 0
    sphere average (that calibration fixes the overall constant), and every
    correction vanishes for an isotropic kernel.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    mu = kernel.scale_factor * kernel.eigenvalues
    mu_bar = float(mu.mean())
    b = mu_bar - mu
    c = np.zeros(order + 1)
    for m in range(2, order + 1):
        c[m] = (-1) ** m * float(np.sum(b**m)) / (2 * m)
    d = np.zeros(order + 1)
    d[0] = 1.0
    for j in range(1, order + 1):
        d[j] = sum(m * c[m] * d[j - m] for m in range(2, j + 1)) / j
    terms = np.array([d[j] / math.gamma(j + 2) for j in range(order + 1)])
    magnitudes = np.abs(terms)
    floor = 1e-14 * magnitudes.max()
    previous = None
    for t in magnitudes:
        if t <= floor:
            continue
        if previous is not None and t >= previous:
            raise SeriesDivergenceError(
                "series outside radius: integrated terms stopped shrinking; use rotation_marginal_mc"
            )
        previous = t
    total = float(terms.sum())
    if total <= 0:
        raise SeriesDivergenceError("series outside radius: truncated sum is not positive; use rotation_marginal_mc")
    return mu_bar + math.log(total)
