"""Coupling profiles omega(t) and the accumulated phase phi(t).

The dynamics depends on time only through phi(t), the integral of omega from
-inf to t. All functions accept scalars or numpy arrays of times.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from scipy.special import erfc

from .errors import ConfigurationError

SQRT_PI = math.sqrt(math.pi)


def _scalar_or_array(x, like):
    return float(x) if np.ndim(like) == 0 else x


@dataclass(frozen=True)
class Gaussian:
    """omega(t) = omega0 exp(-(t/tau)^2)."""

    omega0: float
    tau: float = 1.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigurationError("gaussian tau must be positive")

    def omega(self, t):
        t = np.asarray(t, dtype=float)
        return _scalar_or_array(self.omega0 * np.exp(-((t / self.tau) ** 2)), t)

    def phi(self, t):
        t = np.asarray(t, dtype=float)
        # 1 + erf(x) == erfc(-x), without cancellation in the far left tail
        return _scalar_or_array(0.5 * SQRT_PI * self.omega0 * self.tau * erfc(-t / self.tau), t)

    def phi_infinity(self) -> float:
        return SQRT_PI * self.omega0 * self.tau

    @property
    def support(self) -> tuple[float, float]:
        return (-5.0 * self.tau, 5.0 * self.tau)


@dataclass(frozen=True)
class Rectangular:
    omega0: float
    t_on: float
    t_off: float

    def __post_init__(self):
        if not self.t_off >= self.t_on:
            raise ConfigurationError("rectangular pulse needs t_off >= t_on")

    def omega(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= self.t_on) & (t <= self.t_off)
        return _scalar_or_array(np.where(inside, self.omega0, 0.0), t)

    def phi(self, t):
        t = np.asarray(t, dtype=float)
        return _scalar_or_array(self.omega0 * np.clip(t - self.t_on, 0.0, self.t_off - self.t_on), t)

    def phi_infinity(self) -> float:
        return self.omega0 * (self.t_off - self.t_on)

    @property
    def support(self) -> tuple[float, float]:
        return (self.t_on, self.t_off)


class Tabulated:
    """Piecewise-linear omega through (t, omega) samples, zero outside.

    phi is the exact integral of the interpolant, i.e. trapezoidal
    accumulation over the sample grid.
    """

    def __init__(self, times, values):
        times = np.asarray(times, dtype=float).reshape(-1)
        values = np.asarray(values, dtype=float).reshape(-1)
        if times.shape != values.shape or times.size < 2:
            raise ConfigurationError("tabulated pulse needs at least two (t, omega) samples")
        if np.any(np.diff(times) <= 0):
            raise ConfigurationError("tabulated pulse times must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("tabulated pulse values must be finite")
        self.times = times
        self.values = values
        self._cumulative = np.concatenate(
            ([0.0], np.cumsum(0.5 * np.diff(times) * (values[1:] + values[:-1])))
        )

    def __repr__(self):
        return f"Tabulated(<{self.times.size} samples on [{self.times[0]}, {self.times[-1]}]>)"

    def omega(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.interp(t_arr, self.times, self.values, left=0.0, right=0.0)
        return _scalar_or_array(out, t_arr)

    def phi(self, t):
        t_arr = np.asarray(t, dtype=float)
        k = np.clip(np.searchsorted(self.times, t_arr, side="right") - 1, 0, self.times.size - 2)
        dt = np.clip(t_arr - self.times[k], 0.0, self.times[k + 1] - self.times[k])
        slope = (self.values[k + 1] - self.values[k]) / (self.times[k + 1] - self.times[k])
        partial = self._cumulative[k] + dt * (self.values[k] + 0.5 * slope * dt)
        out = np.where(t_arr < self.times[0], 0.0, partial)
        out = np.where(t_arr >= self.times[-1], self._cumulative[-1], out)
        return _scalar_or_array(out, t_arr)

    def phi_infinity(self) -> float:
        return float(self._cumulative[-1])

    @property
    def support(self) -> tuple[float, float]:
        return (float(self.times[0]), float(self.times[-1]))


PulseProfile = Union[Gaussian, Rectangular, Tabulated]


def omega(profile: PulseProfile, t):
    return profile.omega(t)


def phi(profile: PulseProfile, t):
    return profile.phi(t)


def phi_infinity(profile: PulseProfile) -> float:
    return profile.phi_infinity()


def pulse_from_dict(spec: dict) -> PulseProfile:
    """Build a profile from its JSON description.

    ``{"type": "gaussian", "omega0_tau": 2.0}`` uses tau = 1; ``omega0`` and
    ``tau`` may be given instead. Rectangular takes ``omega0, t_on, t_off``;
    tabulated takes ``samples: [[t, omega], ...]``.
    """
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigurationError("pulse description must be an object with a 'type' key")
    kind = str(spec["type"]).lower()
    try:
        if kind == "gaussian":
            tau = float(spec.get("tau", 1.0))
            if "omega0_tau" in spec:
                return Gaussian(float(spec["omega0_tau"]) / tau, tau)
            return Gaussian(float(spec["omega0"]), tau)
        if kind == "rectangular":
            return Rectangular(float(spec["omega0"]), float(spec["t_on"]), float(spec["t_off"]))
        if kind == "tabulated":
            samples = np.asarray(spec["samples"], dtype=float)
            if samples.ndim != 2 or samples.shape[1] != 2:
                raise ConfigurationError("tabulated samples must be [[t, omega], ...]")
            return Tabulated(samples[:, 0], samples[:, 1])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"bad {kind} pulse description: {exc}") from exc
    raise ConfigurationError(f"unknown pulse type {spec['type']!r}")


def load_pulse(text: str) -> PulseProfile:
    """Parse a pulse given as inline JSON or as a path to a JSON file."""
    text = text.strip()
    if not text.startswith("{"):
        path = Path(text)
        if not path.is_file():
            raise ConfigurationError(f"pulse is neither JSON nor a readable file: {text!r}")
        text = path.read_text()
    try:
        return pulse_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid pulse JSON: {exc}") from exc
