"""Interaction frame and the first two near-identity changes of variables.

Operators are assembled from coefficient/phase arrays over the pairs j <= k:
off-diagonal entries carry e^{iE} above the diagonal and the conjugate below,
diagonal entries carry cos E (A family) or -sin E (B family).
"""

import logging
import math
from typing import Callable, Literal, NamedTuple, Tuple

import numpy as np

from chirpedensemble.core.frames.context import FrameContext, as_times, unbatch
from chirpedensemble.core.model import ComplexArray, FloatArray
from chirpedensemble.exceptions import ArgumentError

logger = logging.getLogger(__name__)

MatrixFunction = Callable[[float], ComplexArray]


def basis_AB(n: int, j: int, k: int, E: float) -> Tuple[ComplexArray, ComplexArray]:
    """A_jk(E) and B_jk(E) = dA_jk/dE for 1-based j <= k."""
    if not (1 <= j <= n and 1 <= k <= n):
        raise ArgumentError(f"Indices ({j}, {k}) out of range for n = {n}.")
    if j > k:
        raise ArgumentError(f"basis_AB needs j <= k, got ({j}, {k}).")
    A = np.zeros((n, n), dtype=complex)
    B = np.zeros((n, n), dtype=complex)
    if j == k:
        A[j - 1, j - 1] = math.cos(E)
        B[j - 1, j - 1] = -math.sin(E)
        return A, B
    A[j - 1, k - 1] = np.exp(1j * E)
    A[k - 1, j - 1] = np.exp(-1j * E)
    B[j - 1, k - 1] = 1j * np.exp(1j * E)
    B[k - 1, j - 1] = -1j * np.exp(-1j * E)
    return A, B


def assemble(
    coefficients: FloatArray, phases: FloatArray, kind: Literal["A", "B"] = "A"
) -> ComplexArray:
    """sum_{j <= k} c_jk X_jk(E_jk) for a batch; c and E have shape (k, n, n), upper triangle read."""
    batch, n, _ = coefficients.shape
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    phase_factor = np.exp(1j * phases)
    if kind == "B":
        phase_factor = 1j * phase_factor
    out = np.where(upper[None, :, :], coefficients * phase_factor, 0.0).astype(complex)
    out = out + np.conj(np.swapaxes(out, -1, -2))
    diag = np.arange(n)
    diag_phase = phases[:, diag, diag]
    diag_coeff = coefficients[:, diag, diag]
    if kind == "A":
        out[:, diag, diag] = diag_coeff * np.cos(diag_phase)
    else:
        out[:, diag, diag] = -diag_coeff * np.sin(diag_phase)
    return out


def interaction_hamiltonian(ctx: FrameContext, t) -> ComplexArray:
    """H_I(t) = sum_{j <= k, sigma = +-1} eps1 delta_jk u A_jk(phi^sigma_jk(t))."""
    times, scalar = as_times(t)
    u = ctx.pulse.envelope.value(ctx.rate * times)
    coeff = ctx.eps1 * ctx.coupling[None, :, :] * u[:, None, None]
    total = assemble(coeff, ctx.phases.phi_sigma(1, times)) + assemble(
        coeff, ctx.phases.phi_sigma(-1, times)
    )
    return unbatch(total, scalar)


def bch_series(
    H: ComplexArray, X: ComplexArray, dX: ComplexArray, order: int = 12
) -> Tuple[ComplexArray, float]:
    """Truncated transform of H under psi = exp(iX) psi~ and the norm of the last retained term."""
    if order < 1:
        raise ArgumentError(f"BCH order must be >= 1, got {order}.")
    iX = 1j * np.asarray(X, dtype=complex)
    ad_h = np.asarray(H, dtype=complex)
    ad_d = np.asarray(dX, dtype=complex)
    total = np.zeros_like(ad_h)
    term = total
    for k in range(order + 1):
        term = ((-1) ** k / math.factorial(k)) * (ad_h + ad_d / (k + 1))
        total = total + term
        ad_h = iX @ ad_h - ad_h @ iX
        ad_d = iX @ ad_d - ad_d @ iX
    remainder = float(np.linalg.norm(term))
    logger.debug(f"BCH series to order {order}: last term norm {remainder:.3e}.")
    return 0.5 * (total + total.conj().T), remainder


def bch_transform(
    H_func: MatrixFunction,
    X_func: MatrixFunction,
    dX_func: MatrixFunction,
    t: float,
    order: int = 12,
) -> ComplexArray:
    """sum_{k <= order} ((-1)^k / k!) ad^k_{iX(t)}(H(t) + dX/dt (t) / (k + 1))."""
    transformed, _ = bch_series(H_func(t), X_func(t), dX_func(t), order)
    return transformed


class CLCoefficients(NamedTuple):
    """c^sigma and l^sigma as full (k, n, n) arrays for sigma = +1 and -1."""

    c_plus: FloatArray
    c_minus: FloatArray
    l_plus: FloatArray
    l_minus: FloatArray


def cl_coefficients(ctx: FrameContext, s: FloatArray) -> CLCoefficients:
    s = np.atleast_1d(np.asarray(s, dtype=float))
    n, ip, iq = ctx.n, ctx.ip, ctx.iq
    u = ctx.pulse.envelope.value(s)[:, None, None]
    f = ctx.pulse.chirp.value(s)[:, None, None]
    delta_u = ctx.coupling[None, :, :] * u
    strict = np.triu(np.ones((n, n), dtype=bool), 1)[None, :, :]

    diffs = ctx.phases.differences[None, :, :]
    f_plus = diffs + f
    f_minus = diffs - f
    resonant = np.zeros((1, n, n), dtype=bool)
    resonant[0, ip, iq] = True

    c_up_plus = np.divide(
        delta_u, f_plus, out=np.zeros_like(delta_u), where=strict & ~resonant
    )
    c_up_minus = np.divide(delta_u, f_minus, out=np.zeros_like(delta_u), where=strict)
    l_up_plus = np.where(strict, np.where(resonant, delta_u, 0.5 * delta_u), 0.0)
    l_up_minus = np.where(strict, 0.5 * delta_u, 0.0)

    diag = np.arange(n)
    c_diag = np.zeros_like(delta_u)
    c_diag[:, diag, diag] = delta_u[:, diag, diag] / f[:, :, 0]
    # "exact" matches H_I + eps1/2 dX1/dt written as sum_sigma l^sigma e^{i sigma phi} on the diagonal
    l_scale = 0.5 if ctx.l_convention == "exact" else 1.0
    l_diag = np.zeros_like(delta_u)
    l_diag[:, diag, diag] = l_scale * delta_u[:, diag, diag]

    swap = lambda a: np.swapaxes(a, -1, -2)  # noqa: E731
    return CLCoefficients(
        c_plus=c_up_plus - swap(c_up_minus) + c_diag,
        c_minus=c_up_minus - swap(c_up_plus) - c_diag,
        l_plus=l_up_plus + swap(l_up_minus) + l_diag,
        l_minus=l_up_minus + swap(l_up_plus) + l_diag,
    )


class HCoefficients(NamedTuple):
    """h^sigma_jk for sigma = 2, 0, -2 as full (k, n, n) arrays."""

    h2: FloatArray
    h0: FloatArray
    hm2: FloatArray

    def by_sigma(self, sigma: int) -> FloatArray:
        return {2: self.h2, 0: self.h0, -2: self.hm2}[sigma]


def h_coefficients(ctx: FrameContext, s) -> HCoefficients:
    """Second-order coefficients from -i[X1, H_I + eps1/2 dX1/dt] = eps1 sum h^sigma_jk e^{i phi^sigma_jk} e_jk."""
    s_arr, scalar = as_times(s)
    cl = cl_coefficients(ctx, s_arr)

    def bracket(c: FloatArray, l: FloatArray) -> FloatArray:
        return c @ l - l @ c

    h2 = bracket(cl.c_plus, cl.l_plus)
    h0 = bracket(cl.c_minus, cl.l_plus) + bracket(cl.c_plus, cl.l_minus)
    hm2 = bracket(cl.c_minus, cl.l_minus)
    if scalar:
        return HCoefficients(h2[0], h0[0], hm2[0])
    return HCoefficients(h2, h0, hm2)


def x1_operator(ctx: FrameContext, t) -> ComplexArray:
    """X1(t) = sum over I' of delta_jk u / f^sigma_jk B_jk(phi^sigma_jk)."""
    ctx.phases.check_divisors(ctx.phases.index_i_prime())
    times, scalar = as_times(t)
    s = ctx.rate * times
    u = ctx.pulse.envelope.value(s)[:, None, None]
    delta_u = ctx.coupling[None, :, :] * u
    total = np.zeros((times.size, ctx.n, ctx.n), dtype=complex)
    for sigma in (1, -1):
        f_sigma = ctx.phases.f_sigma(sigma, s)
        mask = np.triu(np.ones((ctx.n, ctx.n), dtype=bool))[None, :, :].repeat(times.size, 0)
        if sigma == 1:
            mask[:, ctx.ip, ctx.iq] = False
        coeff = np.divide(delta_u, f_sigma, out=np.zeros_like(delta_u), where=mask)
        total += assemble(coeff, ctx.phases.phi_sigma(sigma, times), "B")
    return unbatch(total, scalar)


def x1_derivative(ctx: FrameContext, t) -> ComplexArray:
    """Fast part of dX1/dt: -sum over I' of delta_jk u A_jk(phi^sigma_jk)."""
    times, scalar = as_times(t)
    u = ctx.pulse.envelope.value(ctx.rate * times)[:, None, None]
    delta_u = ctx.coupling[None, :, :] * u
    total = np.zeros((times.size, ctx.n, ctx.n), dtype=complex)
    for sigma in (1, -1):
        coeff = delta_u.copy()
        if sigma == 1:
            coeff[:, ctx.ip, ctx.iq] = 0.0
        total -= assemble(coeff, ctx.phases.phi_sigma(sigma, times))
    return unbatch(total, scalar)


def x2_operator(ctx: FrameContext, t, variant: Literal["theorem", "prop2"] = "theorem") -> ComplexArray:
    """X2(t) over J', or X~2 over J'' for the doubled-window variant."""
    if variant not in ("theorem", "prop2"):
        raise ArgumentError(f"Unknown X2 variant '{variant}'.")
    phases = ctx.phases
    indices = phases.index_j_prime() if variant == "theorem" else phases.index_j_double_prime()
    phases.check_divisors(indices)

    times, scalar = as_times(t)
    s = ctx.rate * times
    h = h_coefficients(ctx, s)
    total = np.zeros((times.size, ctx.n, ctx.n), dtype=complex)
    for sigma in (-2, 0, 2):
        mask = np.zeros((ctx.n, ctx.n), dtype=bool)
        for j, k, sig in indices:
            if sig == sigma:
                mask[j - 1, k - 1] = True
        if not mask.any():
            continue
        f_sigma = phases.f_sigma(sigma, s)
        full_mask = np.broadcast_to(mask, f_sigma.shape)
        coeff = np.divide(h.by_sigma(sigma), f_sigma, out=np.zeros_like(f_sigma), where=full_mask)
        total += assemble(coeff, phases.phi_sigma(sigma, times), "B")
    return unbatch(total, scalar)
