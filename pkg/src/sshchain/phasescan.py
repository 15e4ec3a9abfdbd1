"""Parameter sweeps over one or two hopping axes.

Every grid point is independent: build, diagonalize, label, then
evaluate the requested observables.  Points are evaluated in contiguous
chunks (optionally in worker processes) and written back into
preallocated row-major slots, so the output never depends on scheduling.
"""

from __future__ import annotations

import logging
import math
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
import multiprocessing

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .kspace import ResolutionError, SingularPointError, winding_analytic, winding_numeric
from .lattice import ChainParams, build_hamiltonian
from .observables import PolarizationUndefined, bell_conditions, reduced_density_matrix, resta_polarization
from .spectrum import EdgeAmbiguityError, EigensolverError, diagonalize, energy_gap

log = logging.getLogger(__name__)

AXIS_NAMES = ("v", "w", "z", "w/v", "z/v")
STATE_OBSERVABLES = ("K", "P", "bell")
GLOBAL_OBSERVABLES = ("zeta_analytic", "zeta_numeric", "gap")
OBSERVABLES = STATE_OBSERVABLES + GLOBAL_OBSERVABLES
_LABEL_RE = re.compile(r"^-?(edge|psi(\d+))$")


class SweepSpecError(ValueError):
    pass


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    n_points: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.n_points)

    def as_dict(self) -> dict:
        return {"name": self.name, "start": self.start, "stop": self.stop, "n_points": self.n_points}

    @classmethod
    def parse(cls, text: str) -> "Axis":
        """Parse ``name:start:stop:n_points``, e.g. ``v:0:1:200``."""
        parts = text.split(":")
        if len(parts) != 4:
            raise SweepSpecError(f"axis {text!r} must look like name:start:stop:n_points")
        name, start, stop, n = parts
        try:
            return cls(name.strip(), float(start), float(stop), int(n))
        except ValueError:
            raise SweepSpecError(f"axis {text!r} has non-numeric bounds or count") from None


@dataclass(frozen=True)
class SweepSpec:
    fixed: ChainParams
    axes: tuple[Axis, ...]
    states: tuple[str, ...] = ("psi1",)
    observables: tuple[str, ...] = ("K",)
    n_k: int = 1024
    bell_tol: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "observables", tuple(self.observables))
        self.validate()

    def validate(self) -> None:
        if not 1 <= len(self.axes) <= 2:
            raise SweepSpecError(f"a sweep takes 1 or 2 axes, got {len(self.axes)}")
        names = [a.name for a in self.axes]
        for a in self.axes:
            if a.name not in AXIS_NAMES:
                raise SweepSpecError(f"unknown axis {a.name!r}; choose from {', '.join(AXIS_NAMES)}")
            if not (math.isfinite(a.start) and math.isfinite(a.stop)):
                raise SweepSpecError(f"axis {a.name} bounds must be finite")
            if a.n_points < 2:
                raise SweepSpecError(f"axis {a.name} needs n_points >= 2")
        if len(set(names)) != len(names):
            raise SweepSpecError(f"duplicate axis {names[0]!r}")
        for base in ("w", "z"):
            if base in names and f"{base}/v" in names:
                raise SweepSpecError(f"conflicting axes {base} and {base}/v")
        if any("/" in n for n in names) and "v" not in names and self.fixed.v == 0:
            raise SweepSpecError("ratio axes need a nonzero v")
        for label in self.states:
            m = _LABEL_RE.match(label)
            if not m:
                raise SweepSpecError(f"unknown state label {label!r}")
            if m.group(2) is not None and int(m.group(2)) >= self.fixed.n_cells:
                raise SweepSpecError(f"state {label} needs n_cells >= {int(m.group(2)) + 1}")
        for obs in self.observables:
            if obs not in OBSERVABLES:
                raise SweepSpecError(f"unknown observable {obs!r}; choose from {', '.join(OBSERVABLES)}")
        if self.fixed.n_cells < 2:
            raise SweepSpecError("sweeps need n_cells >= 2")
        if self.n_k < 64:
            raise SweepSpecError("n_k must be >= 64")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.n_points for a in self.axes)

    @property
    def value_columns(self) -> list[str]:
        cols = []
        for obs in self.observables:
            if obs in STATE_OBSERVABLES:
                cols.extend(f"{obs}_{s}" for s in self.states)
            else:
                cols.append(obs)
        return cols

    def grid(self) -> list[tuple[float, ...]]:
        """Axis values for every point, row-major (last axis fastest)."""
        grids = [a.values() for a in self.axes]
        if len(grids) == 1:
            return [(float(x),) for x in grids[0]]
        return [(float(x), float(y)) for x in grids[0] for y in grids[1]]

    def params_at(self, point: tuple[float, ...]) -> ChainParams:
        values = dict(zip((a.name for a in self.axes), point))
        changes = {k: values[k] for k in ("v", "w", "z") if k in values}
        v = changes.get("v", self.fixed.v)
        for base in ("w", "z"):
            if f"{base}/v" in values:
                changes[base] = values[f"{base}/v"] * v
        return self.fixed.with_(**changes)

    def as_dict(self) -> dict:
        return {
            "fixed": self.fixed.as_dict(),
            "axes": [a.as_dict() for a in self.axes],
            "states": list(self.states),
            "observables": list(self.observables),
            "n_k": self.n_k,
            "bell_tol": self.bell_tol,
        }


@dataclass(eq=False)
class PhaseScanResult:
    spec: SweepSpec
    points: list[tuple[float, ...]]
    values: np.ndarray
    status: list[str]
    metadata: dict = field(default_factory=dict)

    @property
    def axis_names(self) -> list[str]:
        return [a.name for a in self.spec.axes]

    @property
    def columns(self) -> list[str]:
        return self.axis_names + self.spec.value_columns + ["status"]

    def column(self, name: str) -> np.ndarray:
        names = self.axis_names
        if name in names:
            return np.array([p[names.index(name)] for p in self.points])
        return self.values[:, self.spec.value_columns.index(name)]

    def matrix(self, name: str) -> np.ndarray:
        """Values of one column laid out on the 2-D grid (rows = first axis)."""
        if len(self.spec.axes) != 2:
            raise ValueError("matrix layout needs a 2-axis sweep")
        return self.column(name).reshape(self.spec.shape)

    def rows(self):
        for p, vals, st in zip(self.points, self.values, self.status):
            yield [*p, *vals.tolist(), st]


def evaluate_point(spec: SweepSpec, params: ChainParams) -> tuple[list[float], str]:
    """All requested observables at one parameter point, plus a status string."""
    flags: list[str] = []
    nan = float("nan")
    out: dict[str, float] = {c: nan for c in spec.value_columns}

    def flag(text):
        if text not in flags:
            flags.append(text)

    spec_needs_states = any(o in STATE_OBSERVABLES for o in spec.observables)
    spectrum = None
    if spec_needs_states or "gap" in spec.observables:
        try:
            spectrum = diagonalize(build_hamiltonian(params))
            spectrum.labels
        except EigensolverError:
            flag("eigensolver")
            spectrum = None
        except EdgeAmbiguityError:
            flag("ambiguous_edge")
            spectrum = None

    if spectrum is not None:
        for label in spec.states:
            if label not in spectrum.labels:
                flag("no_edge" if "edge" in label else f"missing:{label}")
                continue
            state = spectrum.state(label)
            if "K" in spec.observables:
                out[f"K_{label}"] = reduced_density_matrix(state).schmidt_k
            if "P" in spec.observables:
                try:
                    out[f"P_{label}"] = resta_polarization(state).value
                except PolarizationUndefined:
                    flag(f"P_undefined:{label}")
            if "bell" in spec.observables:
                out[f"bell_{label}"] = float(bell_conditions(state, spec.bell_tol).is_hybrid_bell)
        if "gap" in spec.observables:
            out["gap"] = energy_gap(spectrum)

    if "zeta_analytic" in spec.observables:
        try:
            out["zeta_analytic"] = float(winding_analytic(params.v, params.w, params.z).zeta)
        except SingularPointError:
            flag("singular")
        except ValueError:
            flag("zeta_unsupported")
    if "zeta_numeric" in spec.observables:
        try:
            out["zeta_numeric"] = float(winding_numeric(params.v, params.w, params.z, spec.n_k).zeta)
        except SingularPointError:
            flag("singular")
        except ResolutionError:
            flag("resolution")

    return [out[c] for c in spec.value_columns], (";".join(flags) if flags else "ok")


def _evaluate_chunk(spec: SweepSpec, points: list[tuple[float, ...]]):
    with threadpool_limits(limits=1):
        return [evaluate_point(spec, spec.params_at(p)) for p in points]


def _chunks(n: int, size: int) -> list[range]:
    return [range(i, min(i + size, n)) for i in range(0, n, size)]


def run_sweep(spec: SweepSpec, workers: int | None = None, timestamp: bool = True) -> PhaseScanResult:
    points = spec.grid()
    n = len(points)
    if workers is None:
        workers = os.cpu_count() or 1
    if workers < 1:
        raise ValueError("workers must be >= 1")
    values = np.full((n, len(spec.value_columns)), np.nan)
    status = [""] * n

    if workers == 1 or n < 2 * workers:
        parts = [(range(n), _evaluate_chunk(spec, points))]
    else:
        size = max(1, math.ceil(n / (4 * workers)))
        chunks = _chunks(n, size)
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            futures = [pool.submit(_evaluate_chunk, spec, [points[i] for i in c]) for c in chunks]
            parts = [(c, f.result()) for c, f in zip(chunks, futures)]

    for idx, results in parts:
        for i, (vals, st) in zip(idx, results):
            values[i] = vals
            status[i] = st

    metadata = {"tool": "sshchain", "version": __version__, "sweep": spec.as_dict()}
    if timestamp:
        metadata["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    bad = sum(s != "ok" for s in status)
    if bad:
        log.info("%d of %d points carry status flags", bad, n)
    return PhaseScanResult(spec, points, values, status, metadata)


def diagram(spec: SweepSpec, workers: int | None = None, timestamp: bool = True) -> PhaseScanResult:
    """2-axis sweep; use ``PhaseScanResult.matrix`` for heatmap layout."""
    if len(spec.axes) != 2:
        raise SweepSpecError("a diagram needs exactly 2 axes")
    return run_sweep(spec, workers=workers, timestamp=timestamp)


PRESETS = {
    "fig2b": dict(n_cells=80, v=0.0, w=0.5, z=0.0, axes=["v:0:1:200"], states=["psi1"], observables=["P"]),
    "fig2c": dict(
        n_cells=80, v=0.0, w=0.5, z=0.0, axes=["v:0:1:200"],
        states=["edge", "psi1", "psi20", "psi50"], observables=["K"],
    ),
    "fig2d": dict(n_cells=80, v=0.0, w=0.0, z=0.0, axes=["v:0:1:100", "w:0:1:100"], states=["psi1"], observables=["K"]),
    "fig3c": dict(n_cells=300, v=0.3, w=0.5, z=0.0, axes=["z:0:1:200"], states=["psi1"], observables=["K"]),
    "fig3d": dict(n_cells=300, v=0.5, w=0.3, z=0.0, axes=["z:0:1:200"], states=["psi1"], observables=["K"]),
    "fig3e": dict(n_cells=300, v=0.3, w=0.5, z=0.0, axes=["z:0:1:200"], states=["psi20"], observables=["K"]),
    "fig3f": dict(n_cells=300, v=0.5, w=0.3, z=0.0, axes=["z:0:1:200"], states=["psi20"], observables=["K"]),
    "fig4": dict(
        n_cells=300, v=0.4, w=0.0, z=0.0, axes=["w/v:0:2.5:100", "z/v:0:2.5:100"],
        states=["psi1", "psi20"], observables=["K", "P"],
    ),
}

FAST_N_CELLS = 40
FAST_POINTS = 64


def preset(name: str, fast: bool = False) -> SweepSpec:
    """Sweep reproducing one of the published figures.

    ``fast`` drops to 40 cells and 64 points per axis; state labels that
    no longer exist at that size are dropped.
    """
    try:
        cfg = dict(PRESETS[name])
    except KeyError:
        raise SweepSpecError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    axes = [Axis.parse(a) for a in cfg["axes"]]
    states = list(cfg["states"])
    n_cells = cfg["n_cells"]
    if fast:
        n_cells = FAST_N_CELLS
        axes = [Axis(a.name, a.start, a.stop, FAST_POINTS) for a in axes]
        states = [s for s in states if not s.startswith("psi") or int(s[3:]) < n_cells]
    fixed = ChainParams(n_cells, cfg["v"], cfg["w"], cfg["z"])
    return SweepSpec(fixed, tuple(axes), tuple(states), tuple(cfg["observables"]))
