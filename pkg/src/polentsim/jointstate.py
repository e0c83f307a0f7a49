"""Post-selected two-path state, coherence vs. delay, and delay sweeps.

After the dichroic mirror, keeping only cross-path coincidence terms
leaves two amplitudes g (signal transmitted, idler reflected) and h
(signal reflected, idler transmitted).  Tracing over frequency gives a
two-qubit density matrix whose diagonal weights alpha/beta and complex
off-diagonal coherence depend on the signal-idler delay tau.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .dichroic import SplitterResponse, sample_on_grid
from .errors import (
    DegeneratePostSelectionError,
    DomainError,
    InterpolationDomainError,
    InvalidStateError,
    NonphysicalCoherenceError,
    UnidentifiableFitError,
)
from .spectral import FrequencyGrid, JsaGrid

_HERMITICITY_TOL = 1e-12
_TRACE_TOL = 1e-12
_EIGENVALUE_FLOOR = -1e-10


@dataclass(frozen=True)
class PostSelectedAmplitudes:
    """Cross-path amplitudes g, h on a common grid.

    ``norm_constant`` is the shared normalization (the Riemann sum of
    |g|^2 + |h|^2); ``neglected_fraction`` is the same-path probability
    dropped by post-selection.
    """

    g: np.ndarray
    h: np.ndarray
    grid: FrequencyGrid
    norm_constant: float
    neglected_fraction: float

    def swapped_h(self) -> np.ndarray:
        """h evaluated with swapped arguments, h(omega'', omega').

        On a square grid with identical axes this is the transpose;
        otherwise h is bilinearly interpolated onto the swapped points.
        """
        if self.grid.axes_match():
            return self.h.T
        s_ax, i_ax = self.grid.omega_s_axis, self.grid.omega_i_axis
        if (
            i_ax[0] < s_ax[0]
            or i_ax[-1] > s_ax[-1]
            or s_ax[0] < i_ax[0]
            or s_ax[-1] > i_ax[-1]
        ):
            raise InterpolationDomainError(
                "signal and idler axes do not overlap; cannot evaluate "
                "h with swapped arguments"
            )
        interp = RegularGridInterpolator((s_ax, i_ax), self.h)
        pts_s, pts_i = np.meshgrid(s_ax, i_ax, indexing="ij")
        # value at (row j on the signal axis, column k on the idler axis)
        # is h(signal=omega_i[k], idler=omega_s[j])
        return interp(np.stack([pts_i.ravel(), pts_s.ravel()], axis=-1)).reshape(
            self.grid.n_s, self.grid.n_i
        )


def post_select(jsa: JsaGrid, splitter: SplitterResponse) -> PostSelectedAmplitudes:
    """Split the pair amplitude into the two cross-path terms."""
    curves = sample_on_grid(splitter, jsa.grid)
    f = jsa.amplitude
    g = f * np.sqrt(np.outer(curves.t_h, curves.r_v))
    h = f * np.sqrt(np.outer(curves.r_h, curves.t_v))
    norm = float((np.sum(np.abs(g) ** 2) + np.sum(np.abs(h) ** 2)) * jsa.grid.cell)
    if norm <= 1e-12:
        raise DegeneratePostSelectionError(
            "splitter produces no cross-path coincidences"
        )
    return PostSelectedAmplitudes(
        g=g,
        h=h,
        grid=jsa.grid,
        norm_constant=norm,
        neglected_fraction=float(max(0.0, 1.0 - norm)),
    )


def diagonal_weights(amps: PostSelectedAmplitudes):
    """Diagonal weights (alpha, beta) of the polarization density matrix."""
    cell = amps.grid.cell
    alpha = float(np.sum(np.abs(amps.g) ** 2) * cell / amps.norm_constant)
    beta = float(np.sum(np.abs(amps.h) ** 2) * cell / amps.norm_constant)
    return alpha, beta


def d_parameter(amps: PostSelectedAmplitudes, tau: float) -> complex:
    """Complex degree of polarization entanglement at delay tau (s)."""
    overlap = amps.swapped_h() * np.conj(amps.g)
    phase = np.exp(
        1j
        * tau
        * (amps.grid.omega_s_axis[:, None] - amps.grid.omega_i_axis[None, :])
    )
    return complex(
        np.sum(overlap * phase) * amps.grid.cell / amps.norm_constant
    )


def _coherence_spectrum(amps: PostSelectedAmplitudes):
    """Collapse the g-h overlap onto the difference-frequency axis.

    Returns (difference frequencies, summed overlap per difference); only
    valid on square grids with identical axes, where every antidiagonal of
    the overlap matrix shares one difference frequency.  Lets a delay
    sweep evaluate each tau in O(n) instead of O(n^2).
    """
    overlap = amps.h.T * np.conj(amps.g)
    n = amps.grid.n_s
    offsets = np.arange(-(n - 1), n)
    weights = np.array([np.trace(overlap, offset=o) for o in offsets])
    return -offsets * amps.grid.d_omega_s, weights


@dataclass(frozen=True)
class PolarizationDensityMatrix:
    """4x4 two-qubit density matrix over (HH, HV, VH, VV)."""

    elements: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.elements, dtype=complex)
        if rho.shape != (4, 4):
            raise InvalidStateError("density matrix must be 4x4")
        if np.max(np.abs(rho - rho.conj().T)) > _HERMITICITY_TOL:
            raise InvalidStateError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > _TRACE_TOL or abs(np.trace(rho).imag) > _TRACE_TOL:
            raise InvalidStateError("density matrix trace is not 1")
        if np.linalg.eigvalsh(rho).min() < _EIGENVALUE_FLOOR:
            raise InvalidStateError("density matrix is not positive semidefinite")
        object.__setattr__(self, "elements", rho)


def density_matrix(alpha: float, beta: float, d: complex) -> PolarizationDensityMatrix:
    """Assemble the two-term density matrix from (alpha, beta, D)."""
    if abs(alpha + beta - 1.0) > 1e-9:
        raise DomainError("alpha + beta must equal 1")
    if alpha < 0 or beta < 0:
        raise DomainError("alpha and beta must be non-negative")
    bound = np.sqrt(alpha * beta)
    if abs(d) > bound + 1e-9:
        raise NonphysicalCoherenceError(
            f"|D| = {abs(d):.6g} exceeds sqrt(alpha*beta) = {bound:.6g}"
        )
    if abs(d) > bound:  # inside tolerance; clip onto the physical cone
        d = d * (bound / abs(d))
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 1] = alpha
    rho[2, 2] = beta
    rho[2, 1] = d
    rho[1, 2] = np.conj(d)
    return PolarizationDensityMatrix(rho)


@dataclass(frozen=True)
class DelaySweep:
    """Delay-resolved record of (tau, D, alpha, beta, purity, phase)."""

    tau: np.ndarray
    d: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    purity: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        if np.any(np.diff(tau) <= 0):
            raise DomainError("sweep delays must be strictly increasing")
        expected = self.alpha**2 + self.beta**2 + 2.0 * np.abs(self.d) ** 2
        if np.max(np.abs(self.purity - expected)) > 1e-12:
            raise DomainError("purity identity violated in sweep record")


def _anchored_phase(d: np.ndarray) -> np.ndarray:
    """Unwrapped arg(D), anchored to (-pi, pi] at the sample of max |D|."""
    phase = np.unwrap(np.angle(d))
    anchor = phase[int(np.argmax(np.abs(d)))]
    return phase - 2.0 * np.pi * np.round(anchor / (2.0 * np.pi))


def _sweep_from_values(tau, d, alpha, beta) -> DelaySweep:
    d = np.asarray(d, dtype=complex)
    alpha_arr = np.full(d.shape, alpha, dtype=float)
    beta_arr = np.full(d.shape, beta, dtype=float)
    return DelaySweep(
        tau=np.asarray(tau, dtype=float),
        d=d,
        alpha=alpha_arr,
        beta=beta_arr,
        purity=alpha_arr**2 + beta_arr**2 + 2.0 * np.abs(d) ** 2,
        phase=_anchored_phase(d),
    )


def delay_sweep(
    amps: PostSelectedAmplitudes, tau_min: float, tau_max: float, n: int
) -> DelaySweep:
    """Evaluate the coherence on n uniformly spaced delays."""
    if not tau_min < tau_max:
        raise DomainError("need tau_min < tau_max")
    if n < 2:
        raise DomainError("need at least 2 sweep samples")
    tau = np.linspace(tau_min, tau_max, n)
    alpha, beta = diagonal_weights(amps)
    if amps.grid.axes_match():
        freqs, weights = _coherence_spectrum(amps)
        d = (
            np.exp(1j * np.outer(tau, freqs)) @ weights
        ) * amps.grid.cell / amps.norm_constant
    else:
        d = np.array([d_parameter(amps, t) for t in tau])
    return _sweep_from_values(tau, d, alpha, beta)


@dataclass(frozen=True)
class DegradationModel:
    """Empirical correction: scale the coherence and shift it in time."""

    amplitude_scale: float
    time_offset: float

    def __post_init__(self):
        if not 0.0 < self.amplitude_scale <= 1.0:
            raise DomainError("amplitude_scale must lie in (0, 1]")


def _interp_complex(x, xp, fp):
    return np.interp(x, xp, fp.real) + 1j * np.interp(x, xp, fp.imag)


def apply_degradation(sweep: DelaySweep, model: DegradationModel):
    """Scale and time-shift the sweep coherence.

    Returns (degraded sweep, coverage warning or None).  The shifted curve
    is resampled with linear interpolation in the complex plane; delays
    shifted outside the original window hold the boundary value.
    """
    shifted = sweep.tau - model.time_offset
    warning = None
    if shifted[-1] < sweep.tau[0] or shifted[0] > sweep.tau[-1]:
        warning = (
            "time offset moves the whole sweep support outside the window"
        )
    d = model.amplitude_scale * _interp_complex(shifted, sweep.tau, sweep.d)
    return (
        _sweep_from_values(sweep.tau, d, float(sweep.alpha[0]), float(sweep.beta[0])),
        warning,
    )


def fit_degradation(
    sweep: DelaySweep,
    observations,
    offset_resolution: float = 0.5e-15,
    offset_range: tuple[float, float] | None = None,
) -> DegradationModel:
    """Least-squares (scale, offset) fit to measured coherence values.

    ``observations`` is a sequence of (tau, D_measured).  The offset is
    scanned densely; the optimal real scale per offset is closed-form.
    """
    obs = list(observations)
    if len(obs) < 2:
        raise DomainError("need at least 2 observations")
    obs_tau = np.array([t for t, _ in obs], dtype=float)
    obs_d = np.array([d for _, d in obs], dtype=complex)
    if np.all(np.abs(obs_d) == 0.0):
        raise UnidentifiableFitError("all observed coherences are zero")
    if offset_range is None:
        half_span = (sweep.tau[-1] - sweep.tau[0]) / 2.0
        offset_range = (-half_span, half_span)
    offsets = np.arange(offset_range[0], offset_range[1], offset_resolution)
    best = None
    for t0 in offsets:
        theory = _interp_complex(obs_tau - t0, sweep.tau, sweep.d)
        denom = float(np.sum(np.abs(theory) ** 2))
        if denom == 0.0:
            continue
        scale = float(np.real(np.sum(np.conj(theory) * obs_d)) / denom)
        scale = min(1.0, scale)
        if scale <= 0.0:
            continue
        residual = float(np.sum(np.abs(scale * theory - obs_d) ** 2))
        if best is None or residual < best[0]:
            best = (residual, scale, float(t0))
    if best is None:
        raise UnidentifiableFitError("no admissible (scale, offset) found")
    return DegradationModel(amplitude_scale=best[1], time_offset=best[2])


def write_sweep(path, sweep: DelaySweep) -> None:
    """Write the plot-ready sweep table (delays in fs at the boundary)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# tau_fs re_D im_D abs_D alpha beta purity phase_rad\n")
        for k in range(sweep.tau.size):
            fh.write(
                "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n"
                % (
                    sweep.tau[k] * 1e15,
                    sweep.d[k].real,
                    sweep.d[k].imag,
                    abs(sweep.d[k]),
                    sweep.alpha[k],
                    sweep.beta[k],
                    sweep.purity[k],
                    sweep.phase[k],
                )
            )


def write_density_matrix(path, rho: PolarizationDensityMatrix) -> None:
    """Write 16 lines of ``row col re im`` over the (HH, HV, VH, VV) order."""
    with open(path, "w", encoding="utf-8") as fh:
        for r in range(4):
            for c in range(4):
                val = rho.elements[r, c]
                fh.write("%d %d %.17g %.17g\n" % (r, c, val.real, val.imag))


def read_density_matrix(path) -> PolarizationDensityMatrix:
    """Read a matrix written by :func:`write_density_matrix`."""
    from .errors import FormatError

    rho = np.zeros((4, 4), dtype=complex)
    seen = np.zeros((4, 4), dtype=bool)
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise FormatError(f"{path}:{lineno}: expected 'row col re im'")
            r, c = int(parts[0]), int(parts[1])
            if not (0 <= r < 4 and 0 <= c < 4) or seen[r, c]:
                raise FormatError(f"{path}:{lineno}: bad or duplicate index")
            rho[r, c] = float(parts[2]) + 1j * float(parts[3])
            seen[r, c] = True
    if not seen.all():
        raise FormatError(f"{path}: missing matrix entries")
    return PolarizationDensityMatrix(rho)
