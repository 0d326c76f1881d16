"""Command-line front end: groundstate | fit | reference | rothe | compare.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.  Heavy
imports happen inside the command functions so that --threads can pin the
BLAS/FFT thread pools through environment variables first.
"""

import argparse
import os
import sys
from pathlib import Path

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="rothe1d",
        description=(
            "1D time-dependent Schrodinger solver: adaptive complex-Gaussian "
            "propagation with a grid Crank-Nicolson reference"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", type=Path, default=None, help="INI config file")
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None, help="BLAS/FFT threads (1 = reproducible)")
        p.add_argument("--seed", type=int, default=None, help="seed for randomized initializations")
        p.add_argument("--h", type=float, default=None, help="time step")
        p.add_argument("--epsilon", type=float, default=None, help="per-step tolerance")
        p.add_argument("--t-end", type=float, default=None, help="final time")
        p.add_argument("--grid-n", type=int, default=None, help="grid points (power of two)")
        p.add_argument("--grid-l", type=float, default=None, help="grid half length")

    p = sub.add_parser("groundstate", help="grid ground state and energy")
    add_common(p)
    p.add_argument("--tol", type=float, default=1e-12, help="eigen-residual tolerance")

    p = sub.add_parser("fit", help="least-squares Gaussian fit of the ground state")
    add_common(p)
    p.add_argument("--k", type=int, default=4, help="number of Gaussians")
    p.add_argument("--tol", type=float, default=1e-12, help="residual-squared goal")
    p.add_argument(
        "--target", type=Path, default=None,
        help="GWF1 snapshot to fit instead of the computed ground state",
    )

    p = sub.add_parser("reference", help="Crank-Nicolson reference propagation")
    add_common(p)

    p = sub.add_parser("rothe", help="adaptive Gaussian propagation")
    add_common(p)
    p.add_argument("--k", type=int, default=4, help="Gaussians in the initial fit")
    p.add_argument("--initial", type=Path, default=None, help="LCG1 file to start from")

    p = sub.add_parser("compare", help="pointwise and global errors between two runs")
    p.add_argument("run_a", type=Path)
    p.add_argument("run_b", type=Path)
    p.add_argument("--out", type=Path, default=None, help="output directory (default: run_b)")
    return parser


def _apply_threads(argv):
    # must happen before numpy is imported anywhere in this process
    for i, arg in enumerate(argv):
        if arg == "--threads" and i + 1 < len(argv):
            value = argv[i + 1]
        elif arg.startswith("--threads="):
            value = arg.split("=", 1)[1]
        else:
            continue
        if value.isdigit() and int(value) > 0:
            for var in _THREAD_VARS:
                os.environ[var] = value
        return


def _load_config(args):
    from .config import load_run_config

    return load_run_config(
        args.config,
        h=getattr(args, "h", None),
        epsilon=getattr(args, "epsilon", None),
        t_end=getattr(args, "t_end", None),
        grid_l=getattr(args, "grid_l", None),
        grid_n=getattr(args, "grid_n", None),
        out=str(args.out) if getattr(args, "out", None) is not None else None,
        seed=getattr(args, "seed", None),
    )


def _outdir(cfg):
    path = Path(cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_keyvals(path, **items):
    with open(path, "w") as fh:
        for key, value in items.items():
            if hasattr(value, "item"):  # numpy scalar
                value = value.item()
            fh.write(f"{key} = {value!r}\n")


def _ground_state(cfg, tol=1e-12):
    from .grid import ground_state

    return ground_state(cfg.model, cfg.grid(), tol=tol, full_output=True)


def cmd_groundstate(args):
    cfg = _load_config(args)
    out = _outdir(cfg)
    from .formats import write_gwf, write_wavefunction_csv

    psi, energy, info = _ground_state(cfg, tol=args.tol)
    write_gwf(out / "groundstate.gwf", psi, 0.0)
    write_wavefunction_csv(out / "groundstate.csv", psi)
    _write_keyvals(
        out / "energy.txt",
        energy=energy,
        residual=info["residuals"][-1],
        iterations=len(info["residuals"]),
    )
    print(f"ground state energy {energy:.12f} -> {out}")
    return EXIT_OK


def cmd_fit(args):
    cfg = _load_config(args)
    out = _outdir(cfg)
    import numpy as np

    from .fit import fit_lcg, synthesize
    from .formats import read_gwf, write_csv, write_lcg

    if args.target is not None:
        psi, _ = read_gwf(args.target)
        energy = float("nan")
        grid = psi.grid
    else:
        psi, energy, _ = _ground_state(cfg)
        grid = cfg.grid()
    result = fit_lcg(psi, args.k, tol=args.tol)
    fitted = synthesize(result.state, grid)
    write_lcg(out / f"fit_k{args.k}.lcg", result.state)
    write_csv(
        out / "fit_local_error.csv",
        ["x", "error_sq"],
        [psi.grid.x, np.abs(psi.values - fitted.values) ** 2],
    )
    _write_keyvals(
        out / "fit_summary.txt",
        n_gaussians=args.k,
        residual_sq=result.residual_sq,
        converged=result.converged,
        iterations=result.iterations,
        energy=energy,
    )
    print(f"fit K={args.k}: residual^2 = {result.residual_sq:.6e} -> {out}")
    if not result.converged and result.residual_sq > args.tol:
        print("warning: fit stopped before reaching the requested tolerance", file=sys.stderr)
    return EXIT_OK


def _snapshot_name(step):
    return f"snap_{step:08d}.gwf"


def cmd_reference(args):
    cfg = _load_config(args)
    out = _outdir(cfg)
    import numpy as np

    from .formats import write_csv, write_gwf, write_wavefunction_csv
    from .grid import cn_step
    from .model import effective_potential, field_extrema, potential

    grid = cfg.grid()
    psi, energy, _ = _ground_state(cfg)

    # effective potentials at the field extrema of the first half pulse
    extrema = field_extrema(cfg.model.pulse)
    columns = [grid.x, potential(grid.x, cfg.model)]
    header = ["x", "v"]
    for t in extrema:
        header.append(f"veff_t{t:.4f}")
        columns.append(effective_potential(grid.x, t, cfg.model))
    write_csv(out / "potentials.csv", header, columns)

    n_steps = int(round(cfg.t_end / cfg.h))
    stride = max(1, grid.n // 512)
    history_rows = [(0.0, np.abs(psi.values[::stride]) ** 2)]
    write_gwf(out / _snapshot_name(0), psi, 0.0)
    norms = [psi.norm()]
    state = psi
    for n in range(1, n_steps + 1):
        state = cn_step(state, (n - 1) * cfg.h, cfg.h, cfg.model)
        if n % cfg.snapshot_every == 0 or n == n_steps:
            t = n * cfg.h
            write_gwf(out / _snapshot_name(n), state, t)
            history_rows.append((t, np.abs(state.values[::stride]) ** 2))
            norms.append(state.norm())
    write_wavefunction_csv(out / "final.csv", state)
    times = np.array([row[0] for row in history_rows])
    density = np.array([row[1] for row in history_rows])
    write_csv(
        out / "history.csv",
        ["t"] + [f"x{xv:.6g}" for xv in grid.x[::stride]],
        [times] + [density[:, j] for j in range(density.shape[1])],
    )
    _write_keyvals(
        out / "reference.txt",
        energy=energy,
        t_end=cfg.t_end,
        h=cfg.h,
        norm_initial=norms[0],
        norm_final=norms[-1],
        norm_drift=max(abs(nv - norms[0]) for nv in norms),
    )
    print(f"reference propagation to t={cfg.t_end} -> {out}")
    return EXIT_OK


def cmd_rothe(args):
    cfg = _load_config(args)
    out = _outdir(cfg)
    import numpy as np

    from .fit import fit_lcg, synthesize
    from .formats import append_report_jsonl, write_csv, write_gwf, write_lcg
    from .rothe import RotheSettings, rothe_propagate

    grid = cfg.grid()
    if args.initial is not None:
        from .formats import read_lcg

        initial = read_lcg(args.initial)
    else:
        psi, _, _ = _ground_state(cfg)
        fit_result = fit_lcg(psi, args.k)
        initial = fit_result.state
    write_lcg(out / "initial.lcg", initial)
    write_gwf(out / _snapshot_name(0), synthesize(initial, grid), initial.time_label)

    settings = RotheSettings(
        epsilon=cfg.epsilon,
        max_iterations=cfg.max_iterations,
        max_additions=cfg.max_additions,
    )
    from .rothe import RotheStepError

    step_index = 0
    with open(out / "runlog.jsonl", "w") as log:

        def on_step(report, state):
            nonlocal step_index
            step_index += 1
            append_report_jsonl(log, report)
            if step_index % cfg.checkpoint_every == 0:
                write_lcg(out / f"checkpoint_{step_index:08d}.lcg", state)

        try:
            result = rothe_propagate(
                initial,
                model=cfg.model,
                grid=grid,
                h=cfg.h,
                t_end=cfg.t_end,
                snapshot_every=cfg.snapshot_every,
                settings=settings,
                on_step=on_step,
            )
        except RotheStepError as exc:
            append_report_jsonl(log, exc.report)
            write_lcg(out / "failed_state.lcg", exc.state)
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL

    steps_per_snap = cfg.snapshot_every
    n_steps = int(round((cfg.t_end - initial.time_label) / cfg.h))
    for i, (t, snap) in enumerate(zip(result.snapshot_times, result.snapshots)):
        if i == 0:
            continue
        step = min(i * steps_per_snap, n_steps)
        write_gwf(out / _snapshot_name(step), synthesize(snap, grid), t)
    write_lcg(out / "final.lcg", result.final_state)

    t_trace, objective, n_gauss = result.trace()
    write_csv(out / "trace.csv", ["t", "F", "K"], [t_trace, objective, n_gauss])
    iters = np.array([r.gn_iterations for r in result.reports])
    _write_keyvals(
        out / "rothe.txt",
        t_end=cfg.t_end,
        h=cfg.h,
        epsilon=cfg.epsilon,
        k_initial=len(initial),
        k_final=len(result.final_state),
        max_objective=float(objective.max()),
        single_iteration_fraction=float(np.mean(iters <= 1)),
        norm_initial=float(result.norms[0]),
        norm_final=float(result.norms[-1]),
    )
    print(
        f"rothe propagation to t={cfg.t_end}: K = {len(initial)} -> "
        f"{len(result.final_state)}, max F = {objective.max():.3e} -> {out}"
    )
    return EXIT_OK


def cmd_compare(args):
    import numpy as np

    from .formats import read_gwf, write_csv

    out = Path(args.out) if args.out is not None else args.run_b
    for run in (args.run_a, args.run_b):
        if not run.is_dir():
            print(f"error: {run} is not a directory", file=sys.stderr)
            return EXIT_CONFIG

    def load(run):
        files = sorted(run.glob("snap_*.gwf"))
        if not files:
            print(f"error: no snap_*.gwf snapshots in {run}", file=sys.stderr)
            return None
        return [read_gwf(path) for path in files]

    snaps_a = load(args.run_a)
    snaps_b = load(args.run_b)
    if snaps_a is None or snaps_b is None:
        return EXIT_CONFIG

    grid = snaps_a[0][0].grid
    if any(psi.grid != grid for psi, _ in snaps_a + snaps_b):
        print("error: snapshot grids disagree between the runs", file=sys.stderr)
        return EXIT_CONFIG

    times_b = {round(t, 9): psi for psi, t in snaps_b}
    matched = [(t, psi, times_b[round(t, 9)]) for psi, t in snaps_a if round(t, 9) in times_b]
    if not matched:
        ts_a = [t for _, t in snaps_a]
        ts_b = [t for _, t in snaps_b]
        print(
            f"error: no common snapshot times (run_a has {ts_a[:4]}..., run_b has {ts_b[:4]}...)",
            file=sys.stderr,
        )
        return EXIT_CONFIG

    out.mkdir(parents=True, exist_ok=True)
    l2 = []
    for i, (t, psi_a, psi_b) in enumerate(matched):
        delta = psi_a.values - psi_b.values
        err_sq = np.abs(delta) ** 2
        l2.append(np.sqrt(grid.dx * err_sq.sum()))
        write_csv(out / f"error_profile_{i:04d}.csv", ["x", "error_sq"], [grid.x, err_sq])
    write_csv(
        out / "l2_error.csv",
        ["t", "l2_error"],
        [np.array([m[0] for m in matched]), np.array(l2)],
    )
    t_final, psi_a, psi_b = matched[-1]
    write_csv(
        out / "final_comparison.csv",
        ["x", "re_a", "re_b", "error_sq"],
        [grid.x, psi_a.values.real, psi_b.values.real, np.abs(psi_a.values - psi_b.values) ** 2],
    )
    print(
        f"compared {len(matched)} snapshots; final L2 error at t={t_final:g}: {l2[-1]:.6e} -> {out}"
    )
    return EXIT_OK


_COMMANDS = {
    "groundstate": cmd_groundstate,
    "fit": cmd_fit,
    "reference": cmd_reference,
    "rothe": cmd_rothe,
    "compare": cmd_compare,
}


def main(argv=None):
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    _apply_threads(argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:  # classify for exit codes
        from .config import ConfigError

        if isinstance(exc, (ConfigError, OSError)):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        if isinstance(exc, (ArithmeticError, RuntimeError, ValueError)):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        raise


if __name__ == "__main__":
    sys.exit(main())
