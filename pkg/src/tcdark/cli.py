"""Command-line front end: run experiments, dump spectra and dark subspaces,
report convergence floors, and emit CSV + manifest files.

Exit codes: 0 success, 1 usage/configuration error, 2 numerical failure.
CSV files are byte-identical across reruns of the same configuration.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .darkspace import (
    CavityGraph,
    black_subspace,
    dark_subspace,
    graph_dark_state,
    is_dark,
    nullspace,
)
from .experiments import (
    EXPERIMENTS,
    build_experiment,
    run_experiment,
)
from .hilbert import AtomSpec, enumerate_space, atomic_space
from .observables import spectral_flow, spectrum
from .operators import build_hamiltonian, collective_lowering
from .propagator import convergence_check
from .schedules import coupling_at

FLOAT_FMT = "{:.11e}"  # 12 significant digits, scientific


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x: float) -> str:
    return FLOAT_FMT.format(float(x))


def write_csv(path: Path, header: list[str], columns: list[np.ndarray]):
    lines = [",".join(header)]
    n = len(columns[0])
    for i in range(n):
        lines.append(",".join(_fmt(col[i]) for col in columns))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _manifest_lines(spec, extra: dict) -> list[str]:
    unit = float(spec.raw["time.unit_seconds"])
    t_units = float(spec.raw["time.T_units"])
    dt_units = float(spec.raw["time.dt_units"])
    g = float(spec.raw["params.g"])
    lines = [
        f"experiment: {spec.name}",
        f"description: {spec.description}",
        f"package: tcdark {__version__}",
        f"space.dim: {spec.model.space.dim}",
    ]
    for key in sorted(spec.raw):
        lines.append(f"config.{key}: {spec.raw[key]}")
    lines += [
        f"derived.T_seconds: {t_units * unit:.6e}",
        f"derived.dt_seconds: {dt_units * unit:.6e}",
        f"derived.steps: {spec.config.nsteps}",
        f"derived.phase_budget_g_T: {g * t_units * unit:.6f}",
        "derived.schedule_quantization_bound: "
        + (f"{0.5 * spec.config.cache_quantum:.1e} (relative, per multiplier)"
           if spec.config.cache_quantum > 0 else "0 (quantization disabled)"),
        "determinism: seedless (no randomness anywhere in the run)",
    ]
    for key, val in extra.items():
        lines.append(f"{key}: {val}")
    return lines


def _build(args, name=None):
    """Build an experiment, mapping configuration problems to usage errors."""
    try:
        return build_experiment(name or args.experiment, _overrides(args))
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _run_one(name: str, overrides: dict, out: str) -> str:
    """Run one experiment and write its files (worker-process friendly)."""
    spec = build_experiment(name, overrides)
    rec = run_experiment(spec)
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / f"{spec.name}.csv"
    names = list(rec.series)
    write_csv(csv_path, ["t"] + names, [rec.times] + [rec.series[n] for n in names])
    manifest = _manifest_lines(spec, {
        "observables: t": ", ".join(names),
        "result.norm_drift": f"{rec.meta['norm_drift']:.3e}",
        "result.runtime_s": f"{rec.meta['runtime_s']:.2f}",
        "floors": "not computed (run: tcdark converge --experiment "
                  f"{spec.name})",
    })
    (outdir / f"{spec.name}.manifest.txt").write_text(
        "\n".join(manifest) + "\n", encoding="utf-8"
    )
    return str(csv_path)


def cmd_run(args) -> int:
    names = [n.strip() for n in args.experiment.split(",") if n.strip()]
    if not names:
        raise UsageError("no experiment names given")
    overrides = _overrides(args)
    specs = {name: _build(args, name) for name in names}
    for name, spec in specs.items():
        if spec.kind == "spectrum":
            _write_spectrum(spec, args)
    names = [n for n in names if specs[n].kind != "spectrum"]
    if not names:
        return 0
    if args.workers > 1 and len(names) > 1:
        # runs are independent and write disjoint files; outputs are
        # identical to a sequential execution
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            futures = [pool.submit(_run_one, n, overrides, args.out)
                       for n in names]
            for fut in futures:
                print(f"wrote {fut.result()}")
    else:
        for name in names:
            print(f"wrote {_run_one(name, overrides, args.out)}")
    return 0


def _write_spectrum(spec, args) -> int:
    samples = spec.spectrum_samples or 201
    times = np.linspace(0.0, spec.config.T, samples)
    if spec.raw.get("debug.break_hermiticity", "false").lower() in ("true", "1"):
        h = build_hamiltonian(spec.model.space, spec.model.params).toarray()
        h[0, 1] += 0.5j  # injected defect; spectrum() must refuse it
        spectrum(h)
        raise RuntimeError("hermiticity hook failed to trigger")
    flow = spectral_flow(spec.model, times)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    dim = flow.levels.shape[1]
    header = (["t"] + [f"level[{j}]" for j in range(dim)]
              + [f"deg[{j}]" for j in range(dim - 1)])
    cols = [flow.times]
    cols += [flow.levels[:, j] for j in range(dim)]
    cols += [flow.degenerate[:, j].astype(float) for j in range(dim - 1)]
    csv_path = outdir / f"{spec.name}.spectrum.csv"
    write_csv(csv_path, header, cols)
    manifest = _manifest_lines(spec, {"spectrum.samples": samples})
    (outdir / f"{spec.name}.spectrum.manifest.txt").write_text(
        "\n".join(manifest) + "\n", encoding="utf-8"
    )
    print(f"wrote {csv_path} ({dim} level curves)")
    return 0


def cmd_spectrum(args) -> int:
    return _write_spectrum(_build(args), args)


def _parse_graph(text: str) -> CavityGraph:
    edges = []
    vertices = set()
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        a, b = (int(x) for x in token.split("-"))
        edges.append((a, b))
        vertices |= {a, b}
    if not vertices:
        vertices = {0}
    return CavityGraph(vertices=tuple(sorted(vertices)), edges=tuple(edges))


def _kernel_csv(path: Path, labels: list[str], vectors: np.ndarray):
    header = ["label"]
    for j in range(vectors.shape[1]):
        header += [f"k{j}_re", f"k{j}_im"]
    lines = [",".join(header)]
    for i, label in enumerate(labels):
        row = [label]
        for j in range(vectors.shape[1]):
            row += [_fmt(vectors[i, j].real), _fmt(vectors[i, j].imag)]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_darkspace(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    if args.graph:
        graph = _parse_graph(args.graph)
        cavities = max(graph.vertices) + 1
        space = enumerate_space(cavities, AtomSpec(2, mobile=True), sector=1)
        state = graph_dark_state(graph, space)  # raises on odd cycles
        resid = is_dark(state, space, np.ones((cavities, 2)))
        print(f"graph dark state over {cavities} cavities, "
              f"V+ residual {resid:.3e}")
        _kernel_csv(outdir / "graph_dark_state.csv", space.labels(),
                    state.reshape(-1, 1))
        return 0

    spec = _build(args)
    model = spec.model
    t = args.time
    g_now = coupling_at(model.params, model.assignment, t)
    if args.g:
        g_vals = [float(x) for x in args.g.split(",")]
        if len(g_vals) != model.space.atom_spec.count:
            raise UsageError(
                f"--g needs {model.space.atom_spec.count} comma-separated values"
            )
        g_now = np.tile(g_vals, (model.space.cavities, 1))

    if model.space.cavities == 1:
        atoms = model.space.atom_spec.count
        asp = atomic_space(atoms)
        sbar = collective_lowering(asp, g_now[0])
        nb = nullspace(sbar)
        print(f"sigma_bar over {asp.dim}-dim atomic space: "
              f"rank={nb.rank} nullity={nb.nullity}")
        _kernel_csv(outdir / f"{spec.name}.sigma_kernel.csv", asp.labels(),
                    nb.vectors)
    db = dark_subspace(model.space, g_now)
    print(f"dark subspace of the full model (photon vacuum support): "
          f"dimension {db.nullity}")
    _kernel_csv(outdir / f"{spec.name}.dark_subspace.csv",
                model.space.labels(), db.vectors)
    if model.space.atom_spec.mobile:
        from .operators import interaction_raising

        delta = spec.config.dt
        vp = interaction_raising(model.space, g_now).toarray()
        for d in (delta, delta / 2):
            bb = black_subspace(model.space, model.params, model.assignment, d)
            if bb.nullity:
                sv = np.linalg.svd(vp @ bb.vectors, compute_uv=False)
                dark_now = int(np.sum(sv < 1e-8 * max(sv[0], 1e-300)))
            else:
                dark_now = 0
            print(f"black subspace at delta={d:g}: dimension {bb.nullity}, "
                  f"of which dark at t=0: {dark_now}")
    return 0


def cmd_converge(args) -> int:
    spec = _build(args)
    if spec.kind != "trajectory":
        raise UsageError(f"{spec.name} is not a trajectory experiment")
    report = convergence_check(spec.initial, spec.model, spec.config,
                               spec.observers)
    print(f"state floor (dt={report.dt:g} vs dt/2): {report.state_floor:.6e}")
    for name, val in report.observable_floors.items():
        print(f"floor[{name}]: {val:.6e}")
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        lines = [f"state_floor: {report.state_floor:.6e}"]
        lines += [f"floor[{k}]: {v:.6e}"
                  for k, v in report.observable_floors.items()]
        (outdir / f"{spec.name}.floors.txt").write_text(
            "\n".join(lines) + "\n", encoding="utf-8"
        )
    return 0


def cmd_list(args) -> int:
    for name, desc in EXPERIMENTS.items():
        print(f"{name:5s} {desc}")
    return 0


def _overrides(args) -> dict:
    out = {}
    for item in args.set or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        key, val = item.split("=", 1)
        out[key.strip()] = val.strip()
    if getattr(args, "backend", None):
        out["backend"] = args.backend
    if getattr(args, "dt", None) is not None:
        out["time.dt_units"] = repr(args.dt)
    if getattr(args, "stride", None) is not None:
        out["sample_every"] = str(args.stride)
    return out


def _add_common(p, require_experiment=True):
    p.add_argument("--experiment", "-e", required=require_experiment,
                   help="experiment name (see: tcdark list)")
    p.add_argument("--out", "-o", default="runs", help="output directory")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config key (repeatable)")
    p.add_argument("--backend", choices=("dense_spectral", "krylov"))
    p.add_argument("--dt", type=float, help="time step in schedule units")
    p.add_argument("--stride", type=int, help="sampling stride in steps")
    p.add_argument("--workers", type=int, default=1,
                   help="concurrent workers for multi-experiment runs")


def build_parser() -> _Parser:
    parser = _Parser(prog="tcdark",
                     description="Dark-state deformation simulator")
    sub = parser.add_subparsers(dest="command")
    p_run = sub.add_parser("run", help="run an experiment, write CSV+manifest")
    _add_common(p_run)
    p_spec = sub.add_parser("spectrum", help="spectral flow CSV for a model")
    _add_common(p_spec)
    p_dark = sub.add_parser("darkspace", help="kernel analysis of a model")
    _add_common(p_dark, require_experiment=False)
    p_dark.set_defaults(experiment="E2")
    p_dark.add_argument("--time", type=float, default=0.0,
                        help="schedule time at which couplings are taken")
    p_dark.add_argument("--g", help="explicit per-atom couplings, comma list")
    p_dark.add_argument("--graph", help="cavity graph edges, e.g. 0-1,1-2")
    p_conv = sub.add_parser("converge", help="step-halving numerical floors")
    _add_common(p_conv)
    sub.add_parser("list", help="list available experiments")
    return parser


COMMANDS = {
    "run": cmd_run,
    "spectrum": cmd_spectrum,
    "darkspace": cmd_darkspace,
    "converge": cmd_converge,
    "list": cmd_list,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            parser.print_help()
            return 1
        single_name_commands = ("spectrum", "converge") + (
            ("darkspace",) if not getattr(args, "graph", None) else ()
        )
        if args.command in single_name_commands:
            name = args.experiment
            if name not in EXPERIMENTS and not (
                name.endswith(".cfg") and Path(name).exists()
            ):
                raise UsageError(
                    f"unknown experiment {name!r}; available: "
                    + ", ".join(EXPERIMENTS)
                )
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (KeyError, FileNotFoundError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
