"""Command-line interface: JSON config in, CSV/JSON artifacts out.

Floating point fields are printed with 17 significant digits so files
round-trip bit-exactly and re-runs diff clean.  Every artifact is written
to a temp file and moved into place with os.replace, so a crashed run
never leaves a partial file under the final name.

Exit codes: 0 success, 1 computation or convergence failure (artifacts
are still written where possible), 2 configuration errors.  Failures are
reported as a single JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .evolve import IntegratorConfig, final_manifold, passage_basis, population_trace, sweep
from .models import ising_passage, spinboson_passage
from .passage import PassageSpec, build_fair_pair, linear_spec, tabulate_table
from .spectrum import (
    DENSE_DIM_LIMIT,
    classify_eigenstates,
    eigen_lowest,
    eigenstate_character,
    track_bands,
)

ENV_OUT = "SBANNEAL_OUT"

_TOP_KEYS = {
    "model", "passage", "n_spins", "omega", "omega0", "n_max", "grid_points",
    "T_list", "integrator", "output_dir", "n_levels", "spec_path", "trace",
    "k_max",
}
_INTEGRATOR_KEYS = {"steps_per_unit_time", "norm_renormalize"}
_TRACE_KEYS = {"T", "samples"}


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


def _as_int(raw: dict, key: str, default: int, minimum: int) -> int:
    value = raw.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer")
    if value < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {value}")
    return value


def _as_number(raw: dict, key: str, default: float, *, positive: bool) -> float:
    value = raw.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number")
    if positive and value <= 0:
        raise ConfigError(f"{key} must be positive, got {value}")
    return float(value)


@dataclass(frozen=True)
class RunConfig:
    model: str
    passage: str
    n_spins: int
    omega: float
    n_max: int
    grid_points: int
    T_list: tuple[float, ...] | None
    integrator: IntegratorConfig
    output_dir: str
    n_levels: int
    spec_path: str | None
    trace_T: float | None
    trace_samples: int
    k_max: int

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        unknown = sorted(set(raw) - _TOP_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        model = raw.get("model")
        if model not in ("ising", "spinboson"):
            raise ConfigError("model must be 'ising' or 'spinboson'")
        passage = raw.get("passage", "linear")
        if passage not in ("linear", "fair"):
            raise ConfigError("passage must be 'linear' or 'fair'")
        n_spins = _as_int(raw, "n_spins", 3, minimum=3)
        if n_spins % 2 == 0:
            raise ConfigError(f"n_spins must be odd, got {n_spins}")
        omega = _as_number(raw, "omega", 3.0, positive=True)
        omega0 = _as_number(raw, "omega0", 1.0, positive=True)
        if omega0 != 1.0:
            raise ConfigError("omega0 must equal 1.0 (it sets the energy unit)")
        n_max = _as_int(raw, "n_max", 4 if omega >= 3 else 6, minimum=1)
        grid_points = _as_int(raw, "grid_points", 201, minimum=2)

        t_list = None
        if "T_list" in raw:
            seq = raw["T_list"]
            if not isinstance(seq, list) or not seq:
                raise ConfigError("T_list must be a nonempty list of durations")
            for t in seq:
                if isinstance(t, bool) or not isinstance(t, (int, float)) or t <= 0:
                    raise ConfigError(f"T_list entries must be positive numbers, got {t!r}")
            t_list = tuple(float(t) for t in seq)

        integ = raw.get("integrator", {})
        if not isinstance(integ, dict):
            raise ConfigError("integrator must be an object")
        bad = sorted(set(integ) - _INTEGRATOR_KEYS)
        if bad:
            raise ConfigError(f"unknown integrator keys: {', '.join(bad)}")
        steps = _as_int(integ, "steps_per_unit_time", 200, minimum=1)
        renorm = integ.get("norm_renormalize", True)
        if not isinstance(renorm, bool):
            raise ConfigError("norm_renormalize must be a boolean")

        output_dir = raw.get("output_dir", ".")
        if not isinstance(output_dir, str):
            raise ConfigError("output_dir must be a string")
        n_levels = _as_int(raw, "n_levels", 12, minimum=2)
        spec_path = raw.get("spec_path")
        if spec_path is not None and not isinstance(spec_path, str):
            raise ConfigError("spec_path must be a string")

        trace_T, trace_samples = None, 101
        if "trace" in raw:
            tr = raw["trace"]
            if not isinstance(tr, dict):
                raise ConfigError("trace must be an object")
            bad = sorted(set(tr) - _TRACE_KEYS)
            if bad:
                raise ConfigError(f"unknown trace keys: {', '.join(bad)}")
            if "T" not in tr:
                raise ConfigError("trace requires a duration T")
            trace_T = _as_number(tr, "T", 0.0, positive=True)
            trace_samples = _as_int(tr, "samples", 101, minimum=2)

        k_max = _as_int(raw, "k_max", 1024, minimum=8)
        return cls(model=model, passage=passage, n_spins=n_spins, omega=omega,
                   n_max=n_max, grid_points=grid_points, T_list=t_list,
                   integrator=IntegratorConfig(steps_per_unit_time=steps,
                                               norm_renormalize=renorm),
                   output_dir=output_dir, n_levels=n_levels,
                   spec_path=spec_path, trace_T=trace_T,
                   trace_samples=trace_samples, k_max=k_max)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return RunConfig.from_dict(raw)


def _cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    atomic_write(path, "\n".join(lines) + "\n")


def write_json(path: Path, obj) -> None:
    atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_spectrum(cfg: RunConfig, out: Path, threads: int) -> list[str]:
    """Energies, relevant gap and ring correlation along a linear passage."""
    if cfg.passage != "linear":
        raise ConfigError("spectrum works on linear passages")
    grid = np.linspace(0.0, 1.0, cfg.grid_points)
    table = tabulate_table(cfg.model, grid, n_spins=cfg.n_spins,
                           omega=cfg.omega, n_max=cfg.n_max,
                           k0=max(16, cfg.n_levels), k_max=cfg.k_max)
    n_cols = min(cfg.n_levels, min(len(e) for e in table.energies))
    header = "s," + ",".join(f"E{j}" for j in range(n_cols)) + ",relevant_gap,O"
    rows = []
    for i, s in enumerate(grid):
        rows.append([s, *table.energies[i][:n_cols], table.gap[i], table.o[i]])
    write_csv(out / "spectrum.csv", header, rows)
    problems = []
    for s, flags in zip(grid, table.flags):
        if "k_ceiling" in flags:
            problems.append(f"k_ceiling at s={s:.6g}")
    return problems


def cmd_passage(cfg: RunConfig, out: Path, threads: int) -> list[str]:
    """Build the matched passage pair and emit its specs plus the table."""
    if cfg.passage != "fair":
        raise ConfigError("passage requires passage=fair")
    pair = build_fair_pair(cfg.n_spins, cfg.omega, cfg.n_max,
                           grid_points=cfg.grid_points, k_max=cfg.k_max)
    write_json(out / "spec_sb.json", pair.spec_sb.to_json_dict())
    write_json(out / "spec_ising.json", pair.spec_ising.to_json_dict())
    t = pair.table
    header = "lambda,s_sb,c,O_sb,O_ising,gap_sb,gap_ising"
    rows = [[t.lam[i], t.s_sb[i], t.c[i], t.o_sb[i], t.o_ising[i],
             t.gap_sb[i], t.gap_ising[i]] for i in range(len(t.lam))]
    write_csv(out / "fairness.csv", header, rows)
    problems = []
    for i, lam in enumerate(t.lam):
        if "k_ceiling" in t.flags[i]:
            problems.append(f"k_ceiling at lambda={lam:.6g}")
        if abs(t.o_sb[i] - t.o_ising[i]) > 1e-3:
            problems.append(f"observable mismatch at lambda={lam:.6g}")
    return problems


def _sweep_spec(cfg: RunConfig) -> PassageSpec:
    if cfg.passage == "linear":
        kind = f"{cfg.model}_linear"
        return linear_spec(kind, cfg.n_spins, cfg.omega, cfg.n_max)
    if not cfg.spec_path:
        raise ConfigError("fair sweeps need spec_path (emitted by the passage command)")
    path = Path(cfg.spec_path)
    if path.is_dir():
        path = path / ("spec_sb.json" if cfg.model == "spinboson" else "spec_ising.json")
    try:
        with open(path, encoding="utf-8") as f:
            spec = PassageSpec.from_json_dict(json.load(f))
    except FileNotFoundError:
        raise ConfigError(f"passage spec not found: {path}") from None
    except (json.JSONDecodeError, ValueError) as exc:
        raise ConfigError(f"invalid passage spec {path}: {exc}") from None
    if not spec.kind.startswith(cfg.model):
        raise ConfigError(f"spec kind {spec.kind!r} does not match model {cfg.model!r}")
    return spec


def cmd_sweep(cfg: RunConfig, out: Path, threads: int) -> list[str]:
    """Error probabilities over T_list; optional population trace."""
    if not cfg.T_list:
        raise ConfigError("sweep requires T_list")
    spec = _sweep_spec(cfg)
    rows = sweep(spec, cfg.T_list, cfg.integrator, threads=threads)
    header = "omega,T,p_error,n_max,steps_per_unit,flags"
    write_csv(out / "sweep.csv", header,
              [[r.omega, r.T, r.p_error, r.n_max, r.steps_per_unit, r.flags]
               for r in rows])
    problems = [f"T={r.T:.6g}: {r.flags}" for r in rows if r.flags]
    if cfg.trace_T is not None:
        res = population_trace(spec, cfg.trace_T, cfg.integrator,
                               n_samples=cfg.trace_samples)
        tr = res.traces
        write_csv(out / "trace.csv", "t,solution,excited_solution,spin_error,other",
                  [[tr.times[i], tr.populations["solution"][i],
                    tr.populations["excited_solution"][i],
                    tr.populations["spin_error"][i],
                    tr.populations["other"][i]]
                   for i in range(len(tr.times))])
        problems.extend(f"trace: {flag}" for flag in res.flags)
    return problems


def cmd_classify(cfg: RunConfig, out: Path, threads: int) -> list[str]:
    """Label the low spectrum along a linear passage, band by band."""
    if cfg.passage != "linear":
        raise ConfigError("classify works on linear passages")
    kind = f"{cfg.model}_linear"
    spec = linear_spec(kind, cfg.n_spins, cfg.omega, cfg.n_max)
    basis = passage_basis(spec)
    manifold = final_manifold(spec, basis)
    projector = manifold.spin_projector(basis)
    cap = basis.dim if basis.dim <= DENSE_DIM_LIMIT else basis.dim - 2
    k = min(cfg.n_levels, cap)
    grid = np.linspace(0.0, 1.0, cfg.grid_points)

    def hamiltonian(s: float):
        if cfg.model == "ising":
            return ising_passage(cfg.n_spins, s, basis)
        return spinboson_passage(cfg.n_spins, cfg.omega, s, basis)

    slices = [eigen_lowest(hamiltonian(s), k, s=s) for s in grid]
    bands = track_bands(slices)
    end_labels = classify_eigenstates(slices[-1], projector)
    band_label = {bands[-1, j]: end_labels[j] for j in range(k)}
    rows = []
    for i, sl in enumerate(slices):
        fid, nbar = eigenstate_character(sl, projector)
        for j in range(k):
            rows.append([sl.s, j, sl.energies[j], band_label[bands[i, j]],
                         fid[j], nbar[j]])
    write_csv(out / "levels.csv", "s,index,energy,label,spin_fidelity,mean_bosons",
              rows)
    return [] if manifold.complete else ["final ground manifold truncated"]


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "passage": cmd_passage,
    "sweep": cmd_sweep,
    "classify": cmd_classify,
}


def _emit_error(kind: str, message: str, detail: list[str] | None = None) -> None:
    payload = {"error": {"type": kind, "message": message}}
    if detail:
        payload["error"]["detail"] = detail
    print(json.dumps(payload), file=sys.stderr)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sbanneal",
        description="Annealing passages for a frustrated spin ring with "
                    "direct or boson-mediated couplings.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "spectrum": "tabulate energies, relevant gap and ring correlation",
        "passage": "construct a matched spin-boson / direct-coupling passage pair",
        "sweep": "error probability versus total passage time",
        "classify": "label low-lying levels along a passage",
    }
    for name, text in helps.items():
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--config", required=True, help="JSON run configuration")
        cmd.add_argument("--out", default=None,
                         help=f"output directory (default: ${ENV_OUT} or config output_dir)")
        cmd.add_argument("--threads", type=int, default=1,
                         help="parallel workers for sweeps")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = load_config(args.config)
        out = Path(args.out or os.environ.get(ENV_OUT) or cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
    except ConfigError as exc:
        _emit_error("ConfigError", str(exc))
        return 2
    try:
        problems = _COMMANDS[args.command](cfg, out, args.threads)
    except ConfigError as exc:
        _emit_error("ConfigError", str(exc))
        return 2
    except Exception as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 1
    if problems:
        _emit_error("ConvergenceError", "some computations did not converge",
                    problems)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
