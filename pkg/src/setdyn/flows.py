"""Planar normal-form vector fields near a weak resonance, and their rescalings.

The central object is the one-parameter family

    dz/dt = -i*mu*z + i*Omega(|z|^2)*z + i*delta*conj(z)^(q-1)
            + i*B*z^(q+1) + i*C*z*conj(z)^q,

a Z_q-equivariant truncated normal form on the complex plane.  In polar-type
coordinates z = sqrt(rho) * exp(i*phi/q) it becomes

    rho_dot = 2 * rho^(q/2) * (delta - (B-C)*rho) * sin(phi),
    phi_dot = q*(Omega(rho) - mu) + q * rho^((q-2)/2) * (delta + (B+C)*rho) * cos(phi).

Zooming into the annulus rho ~ rho0 via

    mu    = Omega(rho0),
    rho   = rho0 - rho0^(q/2) * (2B/Omega1) * V,
    delta = (B-C)*rho0 + (2B/Omega1)*(B-C)*rho0^(q/2) * D,
    s     = 2*(C-B)*rho0^(q/2) * t,

yields a slow system that converges, as rho0 -> 0, to the integrable limit

    dV/ds   = (D + V) * sin(phi),
    dphi/ds = beta * (V - cos(phi)),      beta = q*B/(B-C),

whose orbits are level sets of a closed-form first integral.  This module
implements the fields, the rescaling bookkeeping, the first integral, the
equilibrium catalogue of the limit system, and a fixed-step RK4 integrator
(fixed step so that runs are bit-reproducible).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericsError

# |D + V| is floored at this value before dividing / taking logs in the first
# integral, to keep evaluation finite on the singular line V = -D.
SINGULAR_FLOOR = 1e-12

# Orbit norms beyond this are treated as blow-up and the trajectory truncated.
BLOWUP_NORM = 1e12

DEFAULT_STEP = 1e-3


@dataclass(frozen=True)
class NormalFormParams:
    """Coefficients of the resonant normal form.

    ``omega`` holds the Taylor coefficients (Omega_1, Omega_2, ...) of the
    nonlinear rotation Omega(Z) = Omega_1*Z + Omega_2*Z^2 + ...; Omega(0) = 0
    by construction.  ``p``/``q`` define the resonant rotation angle
    2*pi*p/q used by the time-one map built on top of this field.
    """

    q: int
    p: int = 1
    mu: float = 0.0
    delta: float = 0.0
    B: float = 0.0
    C: float = 0.0
    omega: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 3:
            raise ConfigError(f"q must be an integer >= 3, got {self.q!r}")
        if int(self.p) != self.p or self.p < 1:
            raise ConfigError(f"p must be a positive integer, got {self.p!r}")
        if math.gcd(int(self.p), int(self.q)) != 1:
            raise ConfigError(f"p and q must be coprime, got p={self.p}, q={self.q}")
        for name in ("mu", "delta", "B", "C"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"parameter {name} must be finite")
        if len(self.omega) == 0 or not all(math.isfinite(c) for c in self.omega):
            raise ConfigError("omega must be a nonempty tuple of finite coefficients")

    @property
    def rotation_angle(self) -> float:
        """The resonant angle omega = 2*pi*p/q."""
        return 2.0 * math.pi * self.p / self.q


@dataclass(frozen=True)
class RescaledParams:
    """Parameters (D, beta, rho0) of the rescaled slow system."""

    D: float
    beta: float
    rho0: float

    def __post_init__(self):
        if not (math.isfinite(self.D) and math.isfinite(self.beta)):
            raise ConfigError("D and beta must be finite")
        if not (self.rho0 > 0.0 and math.isfinite(self.rho0)):
            raise ConfigError(f"rho0 must be positive and finite, got {self.rho0!r}")


def omega_eval(params: NormalFormParams, Z):
    """Evaluate Omega(Z) = sum_k omega[k-1] * Z^k (no constant term)."""
    Z = np.asarray(Z, dtype=float)
    acc = np.zeros_like(Z)
    for coeff in reversed(params.omega):
        acc = (acc + coeff) * Z
    return acc if acc.ndim else float(acc)


def nf_field(z, params: NormalFormParams):
    """Right-hand side of the normal form at complex z (scalar or array)."""
    z = np.asarray(z, dtype=complex)
    zc = np.conj(z)
    rho = (z * zc).real
    out = 1j * (
        (omega_eval(params, rho) - params.mu) * z
        + params.delta * zc ** (params.q - 1)
        + params.B * z ** (params.q + 1)
        + params.C * z * zc**params.q
    )
    return out if out.ndim else complex(out)


def polar_field(rho, phi, params: NormalFormParams):
    """(rho_dot, phi_dot) of the normal form in (rho, phi) coordinates.

    Valid for rho >= 0; the phi equation carries the rho^((q-2)/2) factor and
    stays finite at rho = 0 for q >= 3.
    """
    rho = np.asarray(rho, dtype=float)
    phi = np.asarray(phi, dtype=float)
    q = params.q
    rho_dot = 2.0 * rho ** (q / 2.0) * (params.delta - (params.B - params.C) * rho) * np.sin(phi)
    phi_dot = q * (omega_eval(params, rho) - params.mu) + q * rho ** ((q - 2) / 2.0) * (
        params.delta + (params.B + params.C) * rho
    ) * np.cos(phi)
    if rho_dot.ndim:
        return rho_dot, phi_dot
    return float(rho_dot), float(phi_dot)


@dataclass(frozen=True)
class RescaleResult:
    """Outcome of pinning the annulus rho ~ rho0: tuned (mu, delta), the time
    scale ds/dt, and the shape parameter beta of the limit system."""

    mu: float
    delta: float
    time_scale: float
    beta: float


def rescale(params: NormalFormParams, rho0: float, D: float) -> RescaleResult:
    """Compute (mu, delta, time_scale, beta) for the window at radius rho0.

    mu is set so the nonlinear rotation stalls exactly at rho0, delta places
    the detuning D inside the window, and time_scale = 2*(C-B)*rho0^(q/2) is
    the factor turning t into the slow time s.
    """
    if not (rho0 > 0 and math.isfinite(rho0)):
        raise ConfigError(f"rho0 must be positive, got {rho0!r}")
    if not math.isfinite(D):
        raise ConfigError("D must be finite")
    omega1 = params.omega[0]
    if omega1 == 0.0:
        raise ConfigError("rescaling requires Omega_1 != 0")
    if params.B == params.C:
        raise ConfigError("rescaling requires B != C")
    if params.B == 0.0:
        raise ConfigError("rescaling requires B != 0")
    q = params.q
    BmC = params.B - params.C
    mu = float(omega_eval(params, rho0))
    delta = BmC * rho0 + (2.0 * params.B / omega1) * BmC * rho0 ** (q / 2.0) * D
    time_scale = 2.0 * (params.C - params.B) * rho0 ** (q / 2.0)
    beta = q * params.B / BmC
    return RescaleResult(mu=mu, delta=delta, time_scale=time_scale, beta=beta)


def limit_field(V, phi, D: float, beta: float):
    """(dV/ds, dphi/ds) of the integrable limit system."""
    V = np.asarray(V, dtype=float)
    phi = np.asarray(phi, dtype=float)
    V_dot = (D + V) * np.sin(phi)
    phi_dot = beta * (V - np.cos(phi))
    if V_dot.ndim:
        return V_dot, phi_dot
    return float(V_dot), float(phi_dot)


def rescaled_field(V, phi, params: NormalFormParams, rho0: float, D: float):
    """(dV/ds, dphi/ds) of the *exactly* rescaled normal form (no truncation).

    The polar field is pushed through the window substitutions with mu and
    delta pinned by :func:`rescale`; params.mu / params.delta are ignored.
    The result differs from :func:`limit_field` by O(rho0^((q-2)/2)) uniformly
    on bounded V, which is what the convergence tests measure.
    """
    res = rescale(params, rho0, D)
    q = params.q
    omega1 = params.omega[0]
    scale = rho0 ** (q / 2.0) * (2.0 * params.B / omega1)
    V = np.asarray(V, dtype=float)
    phi = np.asarray(phi, dtype=float)
    rho = rho0 - scale * V
    if np.any(rho <= 0):
        raise NumericsError("rescaled window left rho > 0; shrink the V-range or rho0")
    pinned = NormalFormParams(
        q=params.q, p=params.p, mu=res.mu, delta=res.delta,
        B=params.B, C=params.C, omega=params.omega,
    )
    rho_dot, phi_dot = polar_field(rho, phi, pinned)
    rho_dot = np.asarray(rho_dot, dtype=float)
    phi_dot = np.asarray(phi_dot, dtype=float)
    V_dot_s = -rho_dot / scale / res.time_scale
    phi_dot_s = phi_dot / res.time_scale
    if V_dot_s.ndim:
        return V_dot_s, phi_dot_s
    return float(V_dot_s), float(phi_dot_s)


def first_integral_K(V, phi, D: float, beta: float):
    """First integral constant of the limit system through (V, phi).

    For beta != 1 the orbits satisfy

        cos(phi) + D = (D+V)*beta/(beta-1) + K * |D+V|^beta * sign(D+V),

    and for beta = 1

        cos(phi) + D = K*(D+V) - (D+V)*ln|D+V|.

    The sign-preserving power branch keeps K consistent on both sides of the
    singular line V = -D; |D+V| is floored at SINGULAR_FLOOR before powers
    and logs so the evaluation never produces infinities.
    """
    V = np.asarray(V, dtype=float)
    phi = np.asarray(phi, dtype=float)
    w = D + V
    aw = np.maximum(np.abs(w), SINGULAR_FLOOR)
    sw = np.where(w >= 0, 1.0, -1.0)
    lhs = np.cos(phi) + D
    if abs(beta - 1.0) < 1e-12:
        K = lhs / (sw * aw) + np.log(aw)
    else:
        K = (lhs - w * beta / (beta - 1.0)) / (sw * aw**beta)
    return K if K.ndim else float(K)


@dataclass(frozen=True)
class Equilibrium:
    """An equilibrium of the limit system with its local linearization."""

    name: str
    V: float
    phi: float
    eigenvalues: tuple[complex, complex]
    kind: str


def _classify_eigs(e1: complex, e2: complex, tol: float = 1e-9) -> str:
    re1, re2 = e1.real, e2.real
    if abs(re1) <= tol and abs(re2) <= tol:
        return "center" if max(abs(e1.imag), abs(e2.imag)) > tol else "degenerate"
    if re1 < -tol and re2 < -tol:
        return "sink"
    if re1 > tol and re2 > tol:
        return "source"
    if re1 * re2 < 0 and abs(e1.imag) <= tol and abs(e2.imag) <= tol:
        return "saddle"
    return "degenerate"


def _limit_jacobian(V: float, phi: float, D: float, beta: float) -> np.ndarray:
    return np.array(
        [
            [math.sin(phi), (D + V) * math.cos(phi)],
            [beta, beta * math.sin(phi)],
        ]
    )


def equilibria(D: float, beta: float) -> list[Equilibrium]:
    """All equilibria of the limit system for the given (D, beta).

    The symmetric pair O+ = (1, 0) and O- = (-1, pi) exists for every D; the
    asymmetric pair M_a/M_r on the line V = -D (with cos(phi) = -D) exists
    only for |D| < 1 and merges into O+- at |D| = 1.  M_a is the equilibrium
    with sin(phi) < 0.
    """
    if not (math.isfinite(D) and math.isfinite(beta)):
        raise ConfigError("D and beta must be finite")
    out = []
    for name, V0, phi0 in (("O+", 1.0, 0.0), ("O-", -1.0, math.pi)):
        jac = _limit_jacobian(V0, phi0, D, beta)
        eigs = np.linalg.eigvals(jac)
        e1, e2 = complex(eigs[0]), complex(eigs[1])
        out.append(Equilibrium(name, V0, phi0, (e1, e2), _classify_eigs(e1, e2)))
    if abs(D) < 1.0:
        phi_r = math.acos(-D)
        for name, phi0 in (("Ma", -phi_r), ("Mr", phi_r)):
            jac = _limit_jacobian(-D, phi0, D, beta)
            eigs = np.linalg.eigvals(jac)
            e1, e2 = complex(eigs[0]), complex(eigs[1])
            out.append(Equilibrium(name, -D, phi0, (e1, e2), _classify_eigs(e1, e2)))
    return out


@dataclass
class Trajectory:
    """A fixed-step orbit segment.  ``states`` has shape (n+1, dim) (or (n+1,)
    complex); ``blowup`` marks truncation by the norm guard."""

    times: np.ndarray
    states: np.ndarray
    step: float
    blowup: bool = False

    def __len__(self) -> int:
        return len(self.times)


def _rk4_step(field, y, h):
    k1 = field(y)
    k2 = field(y + 0.5 * h * k1)
    k3 = field(y + 0.5 * h * k2)
    k4 = field(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(field, x0, T: float, step: float = DEFAULT_STEP) -> Trajectory:
    """Integrate an autonomous field with classical RK4 at a uniform step.

    ``T`` may be negative (backward integration); the actual step is
    T / ceil(|T|/step) so the grid divides T exactly.  When the norm guard
    trips the trajectory is truncated and flagged instead of raising.
    """
    if not (step > 0 and math.isfinite(step)):
        raise ConfigError(f"step must be positive, got {step!r}")
    if T == 0 or not math.isfinite(T):
        raise ConfigError(f"T must be nonzero and finite, got {T!r}")
    y = np.asarray(x0)
    y = y.astype(complex) if np.iscomplexobj(y) else y.astype(float)
    n = max(1, math.ceil(abs(T) / step - 1e-12))
    h = T / n
    times = [0.0]
    states = [y]
    blowup = False
    for k in range(n):
        y = _rk4_step(field, y, h)
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > BLOWUP_NORM:
            blowup = True
            break
        times.append((k + 1) * h)
        states.append(y)
    return Trajectory(
        times=np.array(times), states=np.array(states), step=abs(h), blowup=blowup
    )


def flow_map(field, x, T: float, step: float = DEFAULT_STEP):
    """Endpoint of the RK4 flow; vectorized over a batch of initial states.

    ``x`` may be shape (dim,), (N, dim) or a complex array; non-finite inputs
    propagate to non-finite outputs without raising.
    """
    if not (step > 0 and math.isfinite(step)):
        raise ConfigError(f"step must be positive, got {step!r}")
    y = np.asarray(x)
    y = y.astype(complex) if np.iscomplexobj(y) else y.astype(float)
    if T == 0:
        return y
    n = max(1, math.ceil(abs(T) / step - 1e-12))
    h = T / n
    with np.errstate(all="ignore"):
        for _ in range(n):
            y = _rk4_step(field, y, h)
    return y


def nf_rhs(params: NormalFormParams):
    """Field callback z -> dz/dt for :func:`integrate` on complex states."""

    def rhs(z):
        return nf_field(z, params)

    return rhs


def polar_rhs(params: NormalFormParams):
    """Field callback y=(rho, phi) -> dy/dt on real 2-vectors (batched ok)."""

    def rhs(y):
        y = np.asarray(y, dtype=float)
        rho_dot, phi_dot = polar_field(y[..., 0], y[..., 1], params)
        return np.stack(
            [np.asarray(rho_dot, dtype=float), np.asarray(phi_dot, dtype=float)], axis=-1
        )

    return rhs


def limit_rhs(D: float, beta: float):
    """Field callback y=(V, phi) -> dy/ds of the limit system."""

    def rhs(y):
        y = np.asarray(y, dtype=float)
        V_dot, phi_dot = limit_field(y[..., 0], y[..., 1], D, beta)
        return np.stack(
            [np.asarray(V_dot, dtype=float), np.asarray(phi_dot, dtype=float)], axis=-1
        )

    return rhs


def rescaled_rhs(params: NormalFormParams, rho0: float, D: float):
    """Field callback y=(V, phi) -> dy/ds of the exactly rescaled system."""

    def rhs(y):
        y = np.asarray(y, dtype=float)
        V_dot, phi_dot = rescaled_field(y[..., 0], y[..., 1], params, rho0, D)
        return np.stack(
            [np.asarray(V_dot, dtype=float), np.asarray(phi_dot, dtype=float)], axis=-1
        )

    return rhs


def write_trajectory_csv(path, traj: Trajectory, columns: list[str]) -> None:
    """Dump a trajectory as CSV with a time column plus one per coordinate."""
    states = traj.states
    if np.iscomplexobj(states):
        states = np.stack([states.real, states.imag], axis=-1)
    states = np.atleast_2d(states.reshape(len(traj.times), -1))
    if len(columns) != states.shape[1]:
        raise ConfigError(
            f"expected {states.shape[1]} column names, got {len(columns)}"
        )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", *columns])
        for t, row in zip(traj.times, states):
            writer.writerow([repr(float(t)), *[repr(float(v)) for v in row]])
