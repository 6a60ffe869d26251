"""Command line driver: ``ugkwp run | compare | presets``.

Exit codes: 0 success, 2 configuration error, 3 numerical abort, 4 IO error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .cases import PRESETS, CaseConfig, ConfigError, parse_config, preset, with_overrides
from .gas import primitive_from_rupT, to_conservative, to_primitive
from .io import (
    OutputError,
    Snapshot,
    error_norms,
    extract_profile,
    read_profile,
    similarity_profile,
    write_profile,
    write_snapshot,
)
from .mesh import Mesh
from .reference import GridInadequate, dvm_bgk_solve
from .stepper import NumericalAbort, run

log = logging.getLogger("ugkwp")

EXIT_OK, EXIT_CONFIG, EXIT_ABORT, EXIT_IO = 0, 2, 3, 4


def _load(args) -> CaseConfig:
    if (args.case is None) == (args.config is None):
        raise ConfigError("give exactly one of --case, --config")
    if args.case is not None:
        cfg = preset(args.case)
    else:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc.strerror}") from None
        cfg = parse_config(text)
    cfg = with_overrides(cfg, mode=args.mode, seed=args.seed, t_end=args.t_end, max_steps=args.max_steps,
                         ppc=args.ppc)
    if args.ppc is not None:
        cfg.run.m_p = None
    return cfg.validate()


def _outputs(cfg: CaseConfig, snap: Snapshot, out: str, seed: int, tag: str = "final") -> None:
    h = cfg.hash()
    write_snapshot(snap, os.path.join(out, f"{tag}.csv"), seed, cfg.name, h)
    for spec in cfg.output.profiles:
        key, _, val = spec.partition("=")
        axis = 0 if key.strip() == "x" else 1
        prof = extract_profile(snap, axis, float(val))
        name = spec.replace("=", "_").replace(" ", "")
        write_profile(prof, os.path.join(out, f"{tag}_profile_{name}.csv"), seed, cfg.name, h, spec)
        if cfg.output.similarity is not None and axis == 0:
            x0, U0, nu = cfg.output.similarity
            sim = similarity_profile(prof, float(val), x0, U0, nu)
            write_profile(sim, os.path.join(out, f"{tag}_similarity_{name}.csv"), seed, cfg.name, h, spec)


def _run_dvm(cfg: CaseConfig, args, out: str) -> int:
    if cfg.dims != 1:
        raise ConfigError("dvm mode supports 1D cases only")
    gas = cfg.gas.model()
    e0 = cfg.axes[0].edges()
    edges = np.linspace(e0[0], e0[-1], (e0.size - 1) * args.dvm_refine + 1)
    fine = Mesh((edges,))
    W = cfg.initial_state(fine)
    pr = to_primitive(W, gas)
    kinds = {b.face: b.kind for b in cfg.bcs}
    bc = tuple("reservoir" if kinds[f] == "reservoir" else kinds[f] for f in ("left", "right"))
    if any(k not in ("periodic", "outflow", "reservoir") for k in bc):
        raise ConfigError("dvm mode supports periodic, outflow and reservoir boundaries")
    if cfg.run.t_end is None:
        raise ConfigError("dvm mode needs t_end")
    try:
        res = dvm_bgk_solve(edges, pr.rho[:, 0], pr.U[:, 0, 0], pr.T[:, 0], gas, cfg.run.t_end,
                            nv=args.dvm_nv, bc=bc)
    except GridInadequate as exc:
        raise ConfigError(f"velocity grid: {exc}") from None
    Wd = to_conservative(primitive_from_rupT(res.rho[:, None], np.stack([res.U, 0 * res.U, 0 * res.U], -1)[:, None],
                                             T=res.T[:, None]), gas)
    snap = Snapshot.from_state(Wd, fine, gas, res.time)
    _outputs(cfg, snap, out, cfg.run.seed)
    log.info("dvm: %d steps to t=%g", res.steps, res.time)
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load(args)
    out = args.out
    try:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, "config.ini"), "w") as fh:
            fh.write(cfg.to_text())
    except OSError as exc:
        raise OutputError(f"cannot write to {out}: {exc.strerror}") from exc
    if args.threads:
        import numba
        numba.set_num_threads(args.threads)
    if cfg.run.mode == "dvm":
        return _run_dvm(cfg, args, out)
    state = cfg.build()
    seed = state.seed
    every = cfg.output.every

    def snap_of(st, W=None):
        return Snapshot.from_state(st.W if W is None else W, st.mesh, st.gas, st.time, st.pool,
                                   st.particle_state() if st.mode != "gks" else None)

    def cb(st):
        if every and st.step % every == 0:
            _outputs(cfg, snap_of(st), out, seed, f"step{st.step:07d}")

    r = cfg.run
    try:
        res = run(state, t_end=r.t_end, max_steps=r.max_steps, avg_start=r.avg_start,
                  steady_tol=r.steady_tol, check_every=r.check_every, callback=cb)
    except NumericalAbort as exc:
        good = exc.state
        _outputs(cfg, snap_of(good), out, seed, "last_good")
        log.error("numerical abort: %s (last good state at t=%g written)", exc, good.time)
        return EXIT_ABORT
    _outputs(cfg, snap_of(res.state), out, seed)
    if res.averaged is not None:
        _outputs(cfg, snap_of(res.state, res.averaged), out, seed, "averaged")
    d = res.state.diag
    log.info("%s: %d steps, t=%g, particles=%d, corrections=%d", cfg.name, res.state.step, res.state.time,
             d.n_particles, d.corrections)
    return EXIT_OK


def cmd_compare(args) -> int:
    a, b = read_profile(args.result), read_profile(args.reference)
    cols = [args.column] if args.column else [c for c in a.values if c in b.values]
    if not cols:
        raise ConfigError("profiles share no columns")
    for c in cols:
        if c not in a.values or c not in b.values:
            raise ConfigError(f"column {c!r} missing from one of the profiles")
        n = error_norms(a.s, a.values[c], b.s, b.values[c])
        print(f"{c}: L1={n['L1']:.6e} L2={n['L2']:.6e} Linf={n['Linf']:.6e}")
    return EXIT_OK


def cmd_presets(args) -> int:
    for name in PRESETS:
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ugkwp", description="Wave-particle kinetic solver for 1D/2D BGK gas flows")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", parents=[common], help="run a preset or a configuration file")
    r.add_argument("--case", help="preset name (see 'presets')")
    r.add_argument("--config", help="configuration file")
    r.add_argument("--mode", choices=("ugkwp", "ugkp", "gks", "dvm"))
    r.add_argument("--seed", type=int)
    r.add_argument("--out", default="out")
    r.add_argument("--threads", type=int, default=0)
    r.add_argument("--t-end", dest="t_end", type=float)
    r.add_argument("--max-steps", dest="max_steps", type=int)
    r.add_argument("--ppc", type=float, help="particles per cell (replaces m_p)")
    r.add_argument("--dvm-refine", dest="dvm_refine", type=int, default=5)
    r.add_argument("--dvm-nv", dest="dvm_nv", type=int, default=201)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", parents=[common], help="error norms of a profile against a reference profile")
    c.add_argument("result")
    c.add_argument("reference")
    c.add_argument("--column")
    c.set_defaults(func=cmd_compare)

    s = sub.add_parser("presets", parents=[common], help="list the built-in cases")
    s.set_defaults(func=cmd_presets)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OutputError, OSError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
