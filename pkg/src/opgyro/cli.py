"""Command-line interface.

    opgyro simulate     <S_z>(t) along a pulse, closed form (+ oracle columns)
    opgyro sweep        final <S_z> against the gaussian coupling omega0*tau
    opgyro verify       run the invariant suites; exit 3 on any breach
    opgyro coefficients alpha_n, beta_n, gamma_n for one J
    opgyro expansion    cosine series of <S_z>(phi) as JSON

Exit codes: 0 success, 2 configuration error, 3 invariant breach.
Numbers are printed with 12 significant digits so output is reproducible.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from pathlib import Path

import numpy as np

from .angular_momentum import (
    CompositeSystem,
    InitialState,
    Mode,
    build_composite,
    couple_basis,
    ferromagnetic_state,
)
from .closed_form import (
    closed_form_expansion,
    coefficients_explicit,
    coefficients_recursive,
    expectation_S,
)
from .errors import ConfigurationError, InvariantBreach
from .halfint import HalfInt
from .oracle import (
    PropagatorCache,
    exact_propagate,
    expectation_via_oracle,
    step_integrator,
    verify_Pn_identities,
)
from .pulse import Gaussian, load_pulse, pulse_from_dict

SIM_COLUMNS = ["t", "phi", "Sz_closed", "Sz_oracle", "Sx", "Sy", "Iz", "Jz", "JdotS"]
SWEEP_COLUMNS = ["omega0_tau", "phi_inf", "Sz_final", "Sz_oracle"]
COEFF_COLUMNS = ["n", "alpha_re", "alpha_im", "beta_re", "beta_im", "gamma_re", "gamma_im", "flag"]

DEFAULTS = {
    "n": 2,
    "s": "1/2",
    "i": "1",
    "mode": "collective",
    "m_i": None,
    "initial_vector": None,
    "pulse": None,
    "omega0_tau": 1.0,
    "t_min": None,
    "t_max": None,
    "steps": 201,
    "phi_grid": None,
    "oracle": "off",
    "out": "csv",
    "range": "0:4",
    "points": 400,
    "J": None,
    "n_max": 10,
    "max_dim": 4096,
}

# closed form vs exact propagation, and conservation along the exact path
SIMULATE_AGREEMENT_TOL = 1e-8
CONSERVATION_TOL = 1e-9


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    s = f"{float(x):.12g}"
    return "0" if s == "-0" else s


def _json_number(x):
    if x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    v = float(f"{float(x):.12g}")
    return 0.0 if v == 0 else v


def emit_table(columns, rows, out_format: str, stream) -> None:
    if out_format == "json":
        doc = {"columns": list(columns), "rows": [[_json_number(v) for v in r] for r in rows]}
        stream.write(json.dumps(doc) + "\n")
        return
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([fmt(v) for v in r])
    stream.write(buf.getvalue())


def _range(text: str, what: str, count: bool = False):
    parts = str(text).split(":")
    try:
        if count:
            if len(parts) != 3:
                raise ValueError
            a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 2:
                raise ConfigurationError(f"{what} needs at least 2 points")
            return a, b, n
        if len(parts) != 2:
            raise ValueError
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        shape = "start:stop:count" if count else "start:stop"
        raise ConfigurationError(f"{what} must look like {shape}, got {text!r}") from exc


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then the --config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigurationError("config file must hold a JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def system_from_config(cfg: dict) -> tuple[CompositeSystem, InitialState]:
    try:
        n = int(cfg["n"])
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"--n must be an integer, got {cfg['n']!r}") from exc
    mode = str(cfg["mode"]).lower()
    if mode not in ("full", "collective"):
        raise ConfigurationError(f"--mode must be full or collective, got {cfg['mode']!r}")
    system = build_composite(n, HalfInt.parse(cfg["s"]), HalfInt.parse(cfg["i"]), Mode(mode),
                             max_dim=int(cfg["max_dim"]))
    if cfg["initial_vector"]:
        initial = InitialState.from_vector(system, _read_vector(cfg["initial_vector"]))
    else:
        m_i = -system.i_spin if cfg["m_i"] is None else HalfInt.parse(cfg["m_i"])
        initial = ferromagnetic_state(system, m_i)
    return system, initial


def _read_vector(path: str) -> np.ndarray:
    """JSON list of reals or of [re, im] pairs."""
    try:
        data = json.loads(Path(path).read_text())
        arr = np.asarray(data, dtype=float)
    except (OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"cannot read initial vector {path}: {exc}") from exc
    if arr.ndim == 2 and arr.shape[1] == 2:
        return arr[:, 0] + 1j * arr[:, 1]
    if arr.ndim == 1:
        return arr.astype(complex)
    raise ConfigurationError("initial vector must be a list of numbers or [re, im] pairs")


def pulse_from_config(cfg: dict):
    if cfg["pulse"] is None:
        return Gaussian(float(cfg["omega0_tau"]), 1.0)
    if isinstance(cfg["pulse"], dict):
        return pulse_from_dict(cfg["pulse"])
    return load_pulse(str(cfg["pulse"]))


def _oracle_on(cfg: dict) -> bool:
    value = str(cfg["oracle"]).lower()
    if value not in ("on", "off"):
        raise ConfigurationError(f"--oracle must be on or off, got {cfg['oracle']!r}")
    return value == "on"


def cmd_simulate(cfg: dict, stream) -> int:
    system, initial = system_from_config(cfg)
    basis = couple_basis(system, initial.M_J)
    if cfg["phi_grid"] is not None:
        a, b, n = _range(cfg["phi_grid"], "--phi-grid", count=True)
        times = [None] * n
        phis = np.linspace(a, b, n)
    else:
        profile = pulse_from_config(cfg)
        lo, hi = profile.support
        t_min = lo if cfg["t_min"] is None else float(cfg["t_min"])
        t_max = hi if cfg["t_max"] is None else float(cfg["t_max"])
        steps = int(cfg["steps"])
        if steps < 2 or not t_max > t_min:
            raise ConfigurationError("need --steps >= 2 and --t-max > --t-min")
        times = list(np.linspace(t_min, t_max, steps))
        phis = np.asarray(profile.phi(np.asarray(times)), dtype=float)

    sx, sy, sz = expectation_S(system, basis, initial, phis)
    if not _oracle_on(cfg):
        rows = [(t, p, z) for t, p, z in zip(times, phis, sz)]
        emit_table(SIM_COLUMNS[:3], rows, cfg["out"], stream)
        return 0

    cache = PropagatorCache.build(system)
    states = exact_propagate(cache, initial, phis)
    ev = lambda op: np.einsum("ij,ij->i", states.conj(), states @ op.T).real  # noqa: E731
    sz_oracle, jz, jds = ev(system.Sz), ev(system.Jz), ev(system.JdotS)
    scale = max(1.0, float(system.max_j))
    if np.max(np.abs(sz - sz_oracle)) > SIMULATE_AGREEMENT_TOL * scale:
        raise InvariantBreach("closed form and oracle disagree")
    if np.ptp(jz) > CONSERVATION_TOL * scale or np.ptp(jds) > CONSERVATION_TOL * scale**2:
        raise InvariantBreach("J_z or J.S not conserved along the exact path")
    iz = float(initial.M_J) - sz
    rows = list(zip(times, phis, sz, sz_oracle, sx, sy, iz, jz, jds))
    emit_table(SIM_COLUMNS, rows, cfg["out"], stream)
    return 0


def cmd_sweep(cfg: dict, stream) -> int:
    system, initial = system_from_config(cfg)
    basis = couple_basis(system, initial.M_J)
    a, b = _range(cfg["range"], "--range")
    points = int(cfg["points"])
    if points < 2 or a > b:
        raise ConfigurationError("sweep needs --points >= 2 and a <= b")
    couplings = np.linspace(a, b, points)
    phi_inf = np.array([Gaussian(w, 1.0).phi_infinity() for w in couplings])
    sz = expectation_S(system, basis, initial, phi_inf)[2]
    if _oracle_on(cfg):
        sz_oracle = expectation_via_oracle(PropagatorCache.build(system), initial, phi_inf, system.Sz)
        if np.max(np.abs(sz - sz_oracle)) > SIMULATE_AGREEMENT_TOL * max(1.0, float(system.max_j)):
            raise InvariantBreach("closed form and oracle disagree")
        emit_table(SWEEP_COLUMNS, list(zip(couplings, phi_inf, sz, sz_oracle)), cfg["out"], stream)
    else:
        emit_table(SWEEP_COLUMNS[:3], list(zip(couplings, phi_inf, sz)), cfg["out"], stream)
    return 0


def coefficient_rows(J: HalfInt, n_max: int):
    rec = coefficients_recursive(J, n_max)
    rows = []
    for n in range(n_max + 1):
        exp_ = coefficients_explicit(J, n)
        bad = any(abs(e - r) > 1e-9 * max(1.0, abs(r)) for e, r in zip(exp_, rec[n]))
        rows.append((n, exp_.alpha.real, exp_.alpha.imag, exp_.beta.real, exp_.beta.imag,
                     exp_.gamma.real, exp_.gamma.imag, "MISMATCH" if bad else ""))
    return rows


def cmd_coefficients(cfg: dict, stream) -> int:
    if cfg["J"] is None:
        raise ConfigurationError("coefficients needs --J")
    J = HalfInt.parse(cfg["J"])
    if J.twice < 0:
        raise ConfigurationError("J must be non-negative")
    n_max = int(cfg["n_max"])
    if n_max < 0:
        raise ConfigurationError("--n-max must be >= 0")
    emit_table(COEFF_COLUMNS, coefficient_rows(J, n_max), cfg["out"], stream)
    return 0


def cmd_expansion(cfg: dict, stream) -> int:
    system, initial = system_from_config(cfg)
    basis = couple_basis(system, initial.M_J)
    doc = closed_form_expansion(system, basis, initial).to_dict()
    doc["constant"] = _json_number(doc["constant"])
    for term in doc["terms"]:
        term["amplitude"] = _json_number(term["amplitude"])
    stream.write(json.dumps(doc) + "\n")
    return 0


# tolerances for `verify`, per check
VERIFY_TOLS = {
    "Pn_identities": 1e-12,
    "closed_vs_oracle": 1e-10,
    "selection_rules": 1e-11,
    "Jz_drift": 1e-11,
    "J2_drift": 1e-11,
    "JdotS_drift": 1e-11,
    "stepped_vs_exact": 1e-6,
    "coefficients": 1e-9,
}


def _corrupt(system: CompositeSystem) -> CompositeSystem:
    """Negative control: break S_x, keeping it Hermitian and commuting with I."""
    d_i = system.i_spin.twice + 1
    d_s = system.dim // d_i
    bump = np.zeros((d_s, d_s), dtype=complex)
    bump[0, -1] = bump[-1, 0] = 1e-3
    return dataclasses.replace(system, Sx=system.Sx + np.kron(bump, np.eye(d_i)))


def verify_system(system: CompositeSystem, initial: InitialState) -> dict[str, float]:
    phis = np.linspace(0.0, 4 * np.pi, 101)
    out = {"Pn_identities": max(verify_Pn_identities(system).values())}
    basis = couple_basis(system, initial.M_J)
    sx, sy, sz = expectation_S(system, basis, initial, phis)
    cache = PropagatorCache.build(system)
    out["closed_vs_oracle"] = float(np.max(np.abs(sz - expectation_via_oracle(cache, initial, phis, system.Sz))))
    out["selection_rules"] = float(max(np.max(np.abs(sx)), np.max(np.abs(sy))))
    for name, op in (("Jz_drift", system.Jz), ("J2_drift", system.J2), ("JdotS_drift", system.JdotS)):
        out[name] = float(np.ptp(expectation_via_oracle(cache, initial, phis, op)))
    pulse = Gaussian(1.0, 1.0)
    stepped = step_integrator(system, initial, pulse)
    exact = exact_propagate(cache, initial, float(pulse.phi(stepped.times[-1])))
    out["stepped_vs_exact"] = float(np.max(np.abs(stepped.states[-1] - exact)))
    return out


def default_test_matrix():
    for i_spin in ("1/2", "1"):
        for n in range(1, 5):
            for mode in (Mode.FULL, Mode.COLLECTIVE):
                yield n, "1/2", i_spin, mode


def cmd_verify(cfg: dict, stream, explicit_system: bool, corrupt: bool = False) -> int:
    if explicit_system:
        cases = [(int(cfg["n"]), cfg["s"], cfg["i"], Mode(str(cfg["mode"]).lower()))]
    else:
        cases = list(default_test_matrix())
    worst = {k: 0.0 for k in VERIFY_TOLS}
    breaches = []
    for n, s, i_spin, mode in cases:
        label = f"N={n} s={s} I={i_spin} {mode.value}"
        sub = dict(cfg, n=n, s=s, i=i_spin, mode=mode.value)
        system, initial = system_from_config(sub)
        if corrupt:
            system = _corrupt(system)
        try:
            result = verify_system(system, initial)
        except InvariantBreach as exc:
            breaches.append(f"{label}: {type(exc).__name__}: {exc}")
            stream.write(f"{label}: FAIL ({exc})\n")
            continue
        bad = [k for k, v in result.items() if not v <= VERIFY_TOLS[k]]
        for k, v in result.items():
            worst[k] = max(worst[k], v)
        breaches += [f"{label}: {k} = {result[k]:.3e}" for k in bad]
        stream.write(f"{label}: {'FAIL' if bad else 'ok'}\n")

    coeff_dev = 0.0
    for twice in range(0, 13):
        rec = coefficients_recursive(HalfInt(twice), 30)
        for n in range(31):
            for e, r in zip(coefficients_explicit(HalfInt(twice), n), rec[n]):
                coeff_dev = max(coeff_dev, abs(e - r) / max(1.0, abs(r)))
    worst["coefficients"] = coeff_dev
    if coeff_dev > VERIFY_TOLS["coefficients"]:
        breaches.append(f"coefficients: relative deviation {coeff_dev:.3e}")

    stream.write("max deviations:\n")
    for k, v in worst.items():
        status = "ok" if v <= VERIFY_TOLS[k] else "FAIL"
        stream.write(f"  {k:<18} {v:.3e}  (tol {VERIFY_TOLS[k]:.0e})  {status}\n")
    if breaches:
        stream.write(f"{len(breaches)} breach(es):\n")
        for b in breaches:
            stream.write(f"  {b}\n")
        return 3
    stream.write("all checks passed\n")
    return 0


def _add_system_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, help="number of identical spins N")
    p.add_argument("--s", help="spin of each S_i, e.g. 1/2")
    p.add_argument("--i", help="impurity spin I, e.g. 1 or 1/2")
    p.add_argument("--mode", choices=["full", "collective"])
    p.add_argument("--m-i", dest="m_i", help="impurity projection of the ferromagnetic start (default -I)")
    p.add_argument("--initial-vector", dest="initial_vector", help="JSON file with an explicit J_z eigenvector")
    p.add_argument("--max-dim", dest="max_dim", type=int, help="cap on the full tensor dimension")
    p.add_argument("--out", choices=["csv", "json"])
    p.add_argument("--oracle", nargs="?", const="on", choices=["on", "off"])
    p.add_argument("--config", help="JSON file with any of the options above")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opgyro", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="<S_z>(t) along a pulse")
    _add_system_args(sim)
    sim.add_argument("--pulse", help='JSON pulse or file, e.g. {"type": "gaussian", "omega0_tau": 2}')
    sim.add_argument("--omega0-tau", dest="omega0_tau", type=float, help="gaussian shortcut (tau = 1)")
    sim.add_argument("--t-min", dest="t_min", type=float)
    sim.add_argument("--t-max", dest="t_max", type=float)
    sim.add_argument("--steps", type=int, help="number of time points (default 201)")
    sim.add_argument("--phi-grid", dest="phi_grid", help="start:stop:count grid in phi instead of t")

    sw = sub.add_parser("sweep", help="final <S_z> against omega0*tau for a gaussian pulse")
    _add_system_args(sw)
    sw.add_argument("--range", help="omega0*tau range a:b (default 0:4)")
    sw.add_argument("--points", type=int, help="number of sweep points (default 400)")

    ver = sub.add_parser("verify", help="run invariant checks")
    _add_system_args(ver)
    ver.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)

    co = sub.add_parser("coefficients", help="alpha_n, beta_n, gamma_n table")
    co.add_argument("--J", dest="J", required=False)
    co.add_argument("--n-max", dest="n_max", type=int)
    co.add_argument("--out", choices=["csv", "json"])
    co.add_argument("--config")

    ex = sub.add_parser("expansion", help="cosine series of <S_z>(phi) as JSON")
    _add_system_args(ex)
    return parser


def main(argv=None, stream=None) -> int:
    stream = sys.stdout if stream is None else stream
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "simulate":
            return cmd_simulate(cfg, stream)
        if args.command == "sweep":
            return cmd_sweep(cfg, stream)
        if args.command == "verify":
            explicit = any(getattr(args, k, None) is not None for k in ("n", "s", "i", "mode", "config"))
            return cmd_verify(cfg, stream, explicit, corrupt=args.corrupt)
        if args.command == "coefficients":
            return cmd_coefficients(cfg, stream)
        if args.command == "expansion":
            return cmd_expansion(cfg, stream)
    except ConfigurationError as exc:
        print(f"opgyro: configuration error: {exc}", file=sys.stderr)
        return 2
    except InvariantBreach as exc:
        print(f"opgyro: invariant breach: {exc}", file=sys.stderr)
        return 3
    return 2  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
