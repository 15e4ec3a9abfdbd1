"""``sshchain`` command-line interface.

Exit codes: 0 ok, 1 usage/config error, 2 numerical failure, 3 IO error.
Every error path prints a single ``error: ...`` line on stderr.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .config import COMMANDS, ConfigError, RunConfig, build_run_config, read_config_file
from .export import ExportError, Table, export_table, matrices_json, matrix_csv, write_text
from .kspace import ResolutionError, SingularPointError, band_energy, bloch_vector, winding_analytic, winding_numeric
from .lattice import build_hamiltonian
from .observables import PolarizationUndefined, bell_conditions, reduced_density_matrix, resta_polarization
from .phasescan import PhaseScanResult, diagram, run_sweep
from .selftest import run_selftest
from .spectrum import EdgeAmbiguityError, EigensolverError, diagonalize, edge_weight, energy_gap

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--config", help="INI config file; flags override its values")
    p.add_argument("--n", dest="n_cells", type=int, help="number of unit cells (default 40)")
    p.add_argument("--v", type=float, help="intra-cell hopping (default 0.3)")
    p.add_argument("--w", type=float, help="inter-cell hopping (default 0.5)")
    p.add_argument("--z", type=float, help="second-neighbour hopping (default 0)")
    p.add_argument("--boundary", choices=["open", "periodic"])
    p.add_argument("--out", dest="path", help="output file (default stdout)")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--precision", type=int, help="significant digits, 6..17 (default 12)")
    p.add_argument("--workers", type=int, help="worker processes for sweeps (default: all cores)")
    p.add_argument("--fast", action="store_true", help="desk-scale preset: 40 cells, 64 points per axis")
    p.add_argument("--no-timestamp", dest="timestamp", action="store_false", help="omit the timestamp from metadata")
    p.add_argument("--nk", dest="n_k", type=int, help="Brillouin-zone samples (default 1024)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = _Parser(
        prog="sshchain",
        description="Finite SSH chains: spectra, polarization, winding and entanglement.",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    helps = {
        "spectrum": "eigenvalues with state labels",
        "bands": "k-space band energies and Bloch vector",
        "winding": "winding number (closed form and numerical)",
        "polarization": "Resta polarization per eigenstate",
        "schmidt": "Schmidt number and Bell diagnostics per eigenstate",
        "sweep": "1- or 2-axis parameter sweep",
        "diagram": "2-axis sweep exported as matrices",
        "selftest": "run built-in consistency checks",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common], help=helps[name], argument_default=argparse.SUPPRESS)
        if name in ("polarization", "schmidt", "sweep", "diagram"):
            sp.add_argument("--states", help="comma-separated labels, e.g. edge,psi1,psi20")
        if name in ("sweep", "diagram"):
            sp.add_argument("--axis", dest="axes_list", action="append", help="name:start:stop:n_points")
            sp.add_argument("--observables", help="comma-separated subset of K,P,bell,zeta_analytic,zeta_numeric,gap")
            sp.add_argument("--preset", help="figure preset: fig2b, fig2c, fig2d, fig3c..fig3f, fig4")
            sp.add_argument("--bell-tol", dest="bell_tol", type=float)
    return parser


def parse_config(argv: list[str] | None = None) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    if "axes_list" in ns:
        ns["axes"] = ",".join(ns.pop("axes_list"))
    file_values = read_config_file(ns.pop("config")) if "config" in ns else {}
    return build_run_config(file_values, ns)


def _metadata(cfg: RunConfig, **extra) -> dict:
    meta = {"tool": "sshchain", "version": __version__, "command": cfg.command, "chain": cfg.chain.as_dict()}
    meta.update(extra)
    if cfg.timestamp:
        meta["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return meta


def _spectrum_or_none(cfg: RunConfig):
    spec = diagonalize(build_hamiltonian(cfg.chain))
    try:
        spec.labels
    except EdgeAmbiguityError:
        return spec, None
    return spec, spec.label_of()


def cmd_spectrum(cfg: RunConfig) -> Table:
    spec, labels = _spectrum_or_none(cfg)
    n = cfg.chain.n_cells
    rows = []
    for i, e in enumerate(spec.eigenvalues):
        rows.append([i, labels[i] if labels else "", float(e), edge_weight(spec.eigenvectors[:, i], n)])
    extra = {"edge_states": None if labels is None else spec.has_edge_states}
    if labels is not None and n >= 2:
        extra["gap"] = energy_gap(spec)
    return Table(["index", "label", "energy", "edge_weight"], rows, _metadata(cfg, **extra))


def cmd_bands(cfg: RunConfig) -> Table:
    p = cfg.chain
    rows = []
    for k in np.linspace(-math.pi, math.pi, cfg.n_k + 1):
        em, ep = band_energy(p.v, p.w, p.z, k)
        b = bloch_vector(p.v, p.w, p.z, float(k))
        rows.append([float(k), em, ep, b.hx, b.hy, b.phi])
    return Table(["k", "eps_minus", "eps_plus", "hx", "hy", "phi"], rows, _metadata(cfg))


def cmd_winding(cfg: RunConfig) -> Table:
    p = cfg.chain
    rows = []
    try:
        r = winding_analytic(p.v, p.w, p.z)
        rows.append(["analytic", r.zeta, r.berry_phase, r.polarization, None, None, "ok"])
    except SingularPointError as exc:
        rows.append(["analytic", None, None, None, None, None, f"singular: {exc}"])
    except ValueError as exc:
        rows.append(["analytic", None, None, None, None, None, f"unsupported: {exc}"])
    try:
        r = winding_numeric(p.v, p.w, p.z, cfg.n_k)
        rows.append(["numeric", r.zeta, r.berry_phase, r.polarization, r.n_k, r.raw, "ok"])
    except SingularPointError as exc:
        rows.append(["numeric", None, None, None, cfg.n_k, None, f"singular: {exc}"])
    return Table(["method", "zeta", "berry_phase", "polarization", "n_k", "raw", "status"], rows, _metadata(cfg))


def _selected(cfg: RunConfig, spec, labels):
    if cfg.states is None:
        return [(i, labels[i] if labels else "") for i in range(spec.eigenvalues.size)]
    if labels is None:
        raise ConfigError("state labels are ambiguous for these parameters; omit --states")
    out = []
    for name in cfg.states:
        if name not in spec.labels:
            raise ConfigError(f"no state labelled {name!r} for these parameters")
        out.append((spec.labels[name], name))
    return out


def cmd_polarization(cfg: RunConfig) -> Table:
    if cfg.chain.n_cells < 2:
        raise ConfigError("polarization needs --n >= 2")
    spec, labels = _spectrum_or_none(cfg)
    rows = []
    for i, name in _selected(cfg, spec, labels):
        state = spec.state(i)
        try:
            pol = resta_polarization(state)
            rows.append([i, name, state.energy, pol.value, pol.phase, pol.modulus, "ok"])
        except PolarizationUndefined:
            rows.append([i, name, state.energy, None, None, None, "ill_defined"])
    return Table(["index", "label", "energy", "P", "phase", "modulus", "status"], rows, _metadata(cfg))


def cmd_schmidt(cfg: RunConfig) -> Table:
    spec, labels = _spectrum_or_none(cfg)
    rows = []
    for i, name in _selected(cfg, spec, labels):
        state = spec.state(i)
        red = reduced_density_matrix(state)
        bell = bell_conditions(state)
        rows.append([i, name, state.energy, red.schmidt_k, *red.bloch.tolist(),
                     bell.sum_a, bell.sum_b, bell.overlap, bell.is_hybrid_bell])
    cols = ["index", "label", "energy", "K", "rx", "ry", "rz", "sum_A", "sum_B", "overlap", "hybrid_bell"]
    return Table(cols, rows, _metadata(cfg))


def sweep_table(result: PhaseScanResult) -> Table:
    return Table(result.columns, list(result.rows()), result.metadata)


def export_diagram(result: PhaseScanResult, cfg: RunConfig) -> None:
    out = cfg.output
    row_axis, col_axis = result.spec.axes
    value_cols = result.spec.value_columns
    if out.format == "json":
        status = np.array(result.status, dtype=object).reshape(result.spec.shape).tolist()
        text = matrices_json(
            result.metadata, row_axis.name, row_axis.values(), col_axis.name, col_axis.values(),
            {c: result.matrix(c) for c in value_cols}, status, out.precision,
        )
        write_text(text, out.path)
        return
    for col in value_cols:
        text = matrix_csv(row_axis.name, row_axis.values(), col_axis.name, col_axis.values(),
                          result.matrix(col), out.precision)
        if out.path in (None, "-"):
            if len(value_cols) > 1:
                text = f"# {col}\n" + text
            write_text(text, None)
        else:
            path = out.path
            if len(value_cols) > 1:
                stem, ext = os.path.splitext(out.path)
                path = f"{stem}_{col}{ext or '.csv'}"
            write_text(text, path)


def run(cfg: RunConfig) -> int:
    if cfg.command == "selftest":
        report = run_selftest()
        for line in report.lines():
            print(line)
        return EXIT_OK if report.passed else EXIT_NUMERIC
    if cfg.command == "sweep":
        result = run_sweep(cfg.sweep, workers=cfg.workers, timestamp=cfg.timestamp)
        export_table(sweep_table(result), cfg.output.path, cfg.output.format, cfg.output.precision)
        return EXIT_OK
    if cfg.command == "diagram":
        result = diagram(cfg.sweep, workers=cfg.workers, timestamp=cfg.timestamp)
        export_diagram(result, cfg)
        return EXIT_OK
    handlers = {
        "spectrum": cmd_spectrum,
        "bands": cmd_bands,
        "winding": cmd_winding,
        "polarization": cmd_polarization,
        "schmidt": cmd_schmidt,
    }
    table = handlers[cfg.command](cfg)
    export_table(table, cfg.output.path, cfg.output.format, cfg.output.precision)
    return EXIT_OK


def _fail(code: int, message: str) -> int:
    print(f"error: {' '.join(str(message).split())}", file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(argv)
        return run(cfg)
    except ConfigError as exc:
        return _fail(EXIT_USAGE, exc)
    except (EigensolverError, ResolutionError) as exc:
        return _fail(EXIT_NUMERIC, exc)
    except (ExportError, OSError) as exc:
        return _fail(EXIT_IO, exc)
    except ValueError as exc:
        return _fail(EXIT_USAGE, exc)


if __name__ == "__main__":
    sys.exit(main())
