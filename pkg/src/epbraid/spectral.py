"""Closed-form spectral analysis of the dissipative three-level Hamiltonian.

The non-Hermitian matrix analysed everywhere in this package is

        [ -delta_ef   omega      0       ]
    H = [  omega      0          g       ]
        [  0          g         -i*kappa/2 ]

written in the single-excitation basis (|e,0>, |f,0>, |g,1>).  Its
characteristic polynomial is a monic cubic whose coefficients are simple
polynomials in the controls, so the three complex eigenvalues follow from
Cardano's formula.  Solving the cubic in closed form (instead of calling a
generic eigensolver) keeps the root branches explicit, which the braid and
vorticity machinery depends on; the generic eigensolver is retained in the
test suite as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEigenbasisError, ValidationError
from .params import SystemParams

# Cube roots of unity used to enumerate the Cardano branches.
_OMEGA = complex(-0.5, 0.5 * math.sqrt(3.0))
_OMEGA2 = complex(-0.5, -0.5 * math.sqrt(3.0))

#: Diagonal symmetry operator: commuting it past H flips the sign of omega and g.
SIGN_FLIP = np.diag([1.0, -1.0, 1.0])


def build_hamiltonian(params: SystemParams) -> np.ndarray:
    """Return H(params) as a complex 3x3 array."""
    d, om, g, k = params.delta_ef, params.omega, params.g, params.kappa
    return np.array(
        [
            [-d, om, 0.0],
            [om, 0.0, g],
            [0.0, g, -0.5j * k],
        ],
        dtype=complex,
    )


def build_coupled_hamiltonian(
    delta_ef: float, omega: complex, g: complex, kappa: float
) -> np.ndarray:
    """H with complex drive and coupler amplitudes.

    A phase on either amplitude appears on the upper off-diagonal entry and
    conjugated on the lower one, so the matrix stays a physical Hamiltonian
    plus the same photon-loss term.
    """
    if kappa < 0 or not math.isfinite(kappa):
        raise ValidationError(f"kappa must be finite and >= 0, got {kappa!r}")
    return np.array(
        [
            [-delta_ef, omega, 0.0],
            [np.conjugate(omega), 0.0, g],
            [0.0, np.conjugate(g), -0.5j * kappa],
        ],
        dtype=complex,
    )


@dataclass(frozen=True)
class CubicCoefficients:
    """Coefficients of det(lambda - H) = lambda^3 + b lambda^2 + c1 lambda + c0.

    ``p`` and ``q`` are the depressed-cubic coefficients after the shift
    lambda = t - b/3 (t^3 + p t + q = 0) and ``delta = (q/2)^2 + (p/3)^3``
    is the Cardano discriminant: delta == 0 marks a repeated eigenvalue and
    p == q == 0 a triple one.
    """

    b: complex
    c1: complex
    c0: complex
    p: complex
    q: complex
    delta: complex

    @classmethod
    def from_params(cls, params: SystemParams) -> "CubicCoefficients":
        d, om, g, k = params.delta_ef, params.omega, params.g, params.kappa
        b = complex(d, 0.5 * k)
        c1 = -complex(g * g + om * om, -0.5 * k * d)
        c0 = -complex(g * g * d, 0.5 * k * om * om)
        p, q, delta = _depressed(b, c1, c0)
        return cls(b, c1, c0, complex(p), complex(q), complex(delta))

    @property
    def scale(self) -> float:
        """Characteristic eigenvalue magnitude, >= 1."""
        return max(1.0, abs(self.b), abs(self.c1) ** 0.5, abs(self.c0) ** (1.0 / 3.0))


def _depressed(b, c1, c0):
    p = c1 - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c1 / 3.0 + c0
    delta = (q / 2.0) ** 2 + (p / 3.0) ** 3
    return p, q, delta


def cardano_roots(b, c1, c0) -> np.ndarray:
    """Roots of lambda^3 + b lambda^2 + c1 lambda + c0 for complex coefficients.

    Accepts scalars or broadcastable arrays; the result has one extra trailing
    axis of length 3.  The two cube roots are paired so their product equals
    -p/3, which keeps each returned branch an exact root rather than a
    spurious combination.  When p and q both vanish to rounding the triple
    root -b/3 is returned directly.
    """
    b = np.asarray(b, dtype=complex)
    c1 = np.asarray(c1, dtype=complex)
    c0 = np.asarray(c0, dtype=complex)
    b, c1, c0 = np.broadcast_arrays(b, c1, c0)

    p, q, delta = _depressed(b, c1, c0)
    scale = np.maximum.reduce(
        [np.ones_like(np.abs(b)), np.abs(b), np.abs(c1) ** 0.5, np.abs(c0) ** (1.0 / 3.0)]
    )
    triple = (np.abs(p) <= 1e-14 * scale**2) & (np.abs(q) <= 1e-14 * scale**3)

    root_disc = np.sqrt(delta)
    half_q = -q / 2.0
    big = np.where(np.abs(half_q + root_disc) >= np.abs(half_q - root_disc),
                   half_q + root_disc, half_q - root_disc)
    # Principal cube root; avoid 0**(1/3) warnings on the triple-root cells.
    safe_big = np.where(triple, 1.0, big)
    u = safe_big ** (1.0 / 3.0)
    u_nonzero = np.where(u == 0, 1.0, u)
    v = np.where(u == 0, 0.0, -p / (3.0 * u_nonzero))

    shift = b / 3.0
    roots = np.stack(
        [
            u + v - shift,
            u * _OMEGA + v * _OMEGA2 - shift,
            u * _OMEGA2 + v * _OMEGA - shift,
        ],
        axis=-1,
    )
    if np.any(triple):
        triple_root = np.broadcast_to((-shift)[..., None], roots.shape)
        roots = np.where(triple[..., None], triple_root, roots)
    return roots


def canonical_order(lams: np.ndarray, scale: float) -> tuple[int, ...]:
    """Indices sorting three eigenvalues by ascending real part.

    Real parts closer than 1e-12 * scale are treated as ties and broken by
    ascending imaginary part, so purely-imaginary spectra sort reproducibly
    instead of by rounding noise.
    """
    tol = 1e-12 * max(1.0, scale)
    order = sorted(range(len(lams)), key=lambda i: lams[i].real)
    groups = [[order[0]]]
    for i in order[1:]:
        if lams[i].real - lams[groups[-1][0]].real <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    out: list[int] = []
    for grp in groups:
        out.extend(sorted(grp, key=lambda i: lams[i].imag))
    return tuple(out)


@dataclass(frozen=True)
class Spectrum:
    """The three eigenvalues in canonical order plus their cubic.

    ``labeling[k]`` records which raw Cardano branch landed in canonical
    slot k (ascending real part, ties by ascending imaginary part).
    """

    lambdas: np.ndarray
    labeling: tuple[int, int, int]
    coefficients: CubicCoefficients

    def min_gap(self) -> float:
        l = self.lambdas
        return min(abs(l[0] - l[1]), abs(l[0] - l[2]), abs(l[1] - l[2]))


def eigenvalues_cardano(params: SystemParams) -> Spectrum:
    """Closed-form spectrum of H(params) with deterministic labeling."""
    coeffs = CubicCoefficients.from_params(params)
    raw = cardano_roots(coeffs.b, coeffs.c1, coeffs.c0)
    order = canonical_order(raw, coeffs.scale)
    return Spectrum(raw[list(order)], tuple(order), coeffs)


def spectrum_grid(delta_ef, omega, g, kappa) -> np.ndarray:
    """Vectorised eigenvalues over broadcastable parameter arrays.

    Returns the raw Cardano branches (trailing axis 3) without canonical
    sorting; batch callers that need continuity do their own matching.
    """
    delta_ef = np.asarray(delta_ef, dtype=float)
    omega = np.asarray(omega, dtype=float)
    g = np.asarray(g, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    b = delta_ef + 0.5j * kappa
    c1 = -(g * g + omega * omega - 0.5j * kappa * delta_ef)
    c0 = -(g * g * delta_ef + 0.5j * kappa * omega * omega)
    return cardano_roots(b, c1, c0)


@dataclass(frozen=True)
class EigenSystem:
    """Right/left eigenvectors with conditioning information.

    Rows of ``right`` / ``left`` follow the canonical eigenvalue order of
    ``spectrum``.  When the spectrum is defective the coalesced labels share
    the available eigenvector, ``condition`` is infinite, and ``coalesced``
    lists the affected labels.
    """

    spectrum: Spectrum
    right: np.ndarray
    left: np.ndarray
    condition: float
    coalesced: tuple[int, ...]


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    """Unit norm with the largest-magnitude component rotated real-positive."""
    vec = vec / np.linalg.norm(vec)
    k = int(np.argmax(np.abs(vec)))
    phase = vec[k] / abs(vec[k])
    return vec / phase


def eigensystem(params: SystemParams) -> EigenSystem:
    """Eigenvalues plus right and left eigenvectors of H(params).

    Eigenvectors come from the singular triplets of (H - lambda) so the
    computation stays rank-revealing at near-degeneracies.  Away from
    degeneracy the left vectors are rescaled to make <l_i|r_j> = delta_ij.
    """
    H = build_hamiltonian(params)
    spectrum = eigenvalues_cardano(params)
    lams = spectrum.lambdas
    h_scale = max(1.0, float(np.linalg.norm(H, 2)))

    gap_tol = 1e-8 * h_scale
    clusters: list[list[int]] = [[0]]
    for i in (1, 2):
        if abs(lams[i] - lams[clusters[-1][-1]]) <= gap_tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])

    right = np.zeros((3, 3), dtype=complex)
    left = np.zeros((3, 3), dtype=complex)
    coalesced: list[int] = []
    eye = np.eye(3)

    for cluster in clusters:
        lam_bar = lams[cluster].mean()
        u_mat, sing, vh = np.linalg.svd(H - lam_bar * eye)
        nullity = int(np.sum(sing <= 1e-8 * h_scale))
        available = max(nullity, 1)
        if nullity < len(cluster):
            coalesced.extend(cluster)
        for j, label in enumerate(cluster):
            k = 2 - min(j, available - 1)
            right[label] = _fix_phase(vh[k].conj())
            left[label] = _fix_phase(u_mat[:, k])

    if coalesced:
        condition = math.inf
    else:
        condition = 1.0
        for i in range(3):
            overlap = abs(np.vdot(left[i], right[i]))
            if overlap < 1e-300:
                condition = math.inf
                coalesced = list(range(3))
                break
            condition = max(condition, 1.0 / overlap)
        else:
            # Biorthogonal normalisation <l_i|r_i> = 1, phases already fixed.
            for i in range(3):
                left[i] = left[i] / np.conjugate(np.vdot(left[i], right[i]))

    return EigenSystem(spectrum, right, left, condition, tuple(coalesced))


@dataclass(frozen=True)
class GaugeReport:
    """Comparison of one spectrum against a phase-rotated partner."""

    phi: float
    theta: float
    reference: np.ndarray
    rotated: np.ndarray
    max_distance: float


def _matched_max_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Smallest (over pairings) of the largest pointwise eigenvalue distance."""
    import itertools

    best = math.inf
    for perm in itertools.permutations(range(3)):
        d = max(abs(a[i] - b[perm[i]]) for i in range(3))
        best = min(best, d)
    return best


def gauge_transform(params: SystemParams, phi: float, theta: float) -> GaugeReport:
    """Check spectral invariance under phases on the drive and coupler.

    Diagonal unitaries push arbitrary phases (and hence signs) onto omega
    and g without touching the spectrum; this computes both spectra and
    reports the matched distance so callers can assert it numerically.
    """
    ref = eigenvalues_cardano(params).lambdas
    rotated_h = build_coupled_hamiltonian(
        params.delta_ef,
        params.omega * np.exp(1j * phi),
        params.g * np.exp(1j * theta),
        params.kappa,
    )
    rotated = np.linalg.eigvals(rotated_h)
    return GaugeReport(phi, theta, ref, rotated, _matched_max_distance(ref, rotated))


def symmetry_residuals(params: SystemParams) -> tuple[float, float]:
    """Frobenius norms measuring pseudo-chirality and anti-PT symmetry.

    With U = diag(1,-1,1) the model obeys U H U^-1 = -H^dagger and
    U H U^-1 = -H^* exactly on the delta_ef = 0 plane; both residuals are
    returned as (pseudo_chirality, anti_pt).
    """
    H = build_hamiltonian(params)
    transformed = SIGN_FLIP @ H @ SIGN_FLIP
    pseudo = float(np.linalg.norm(transformed + H.conj().T))
    anti_pt = float(np.linalg.norm(transformed + H.conj()))
    return pseudo, anti_pt
