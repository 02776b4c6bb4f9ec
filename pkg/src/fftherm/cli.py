"""Command line front end.

Subcommands: ``generate`` (packing -> sphere list file), ``voxelize``
(packing + layer + N -> phase grid files + slice images), ``solve``
(grid + phase conductivities -> tensor JSON), ``sweep`` (plan -> CSV) and
``check`` (built-in oracle suite).

Exit codes: 0 success, 1 usage error, 2 convergence/computation failure,
3 partial sweep failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .fft_solver import DEFAULT_ACC, DEFAULT_MAX_ITER, PhaseConductivities, accelerated_solve
from .homogenize import NonConvergedError, homogenized_tensor, result_record
from .microstructure import (
    DEFAULT_MAX_ATTEMPTS,
    RsaSaturationError,
    load_pack,
    rsa_generate,
    save_pack,
)
from .oracles import hs_bounds, laminate_effective, three_phase_bracket
from .sweep import (
    desk_plan,
    emit_csv,
    paper_plan,
    parse_config,
    plan_from_mapping,
    run_sweep,
)
from .voxelgrid import INCLUSION, MATRIX, PhaseGrid, load_grid, save_grid, save_slice, voxelize


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with code 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="fftherm", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"fftherm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a periodic sphere packing")
    p.add_argument("--n-sp", type=int, required=True, help="number of spheres")
    p.add_argument("--f-sp", type=float, required=True, help="total sphere volume fraction")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-attempts", type=int, default=DEFAULT_MAX_ATTEMPTS)
    p.add_argument("-o", "--output", required=True, help="sphere list text file")

    p = sub.add_parser("voxelize", help="rasterize a packing to a phase grid")
    p.add_argument("--pack", required=True, help="sphere list file from 'generate'")
    p.add_argument("--layer", type=float, required=True, help="coating width / sphere radius")
    p.add_argument("--resolution", type=int, required=True, help="voxels per edge")
    p.add_argument("-o", "--output", required=True, help="output stem for .phases.raw/.json")
    p.add_argument(
        "--slice-format",
        choices=("png", "pgm", "none"),
        default="png",
        help="mid-section image format (default png)",
    )

    p = sub.add_parser("solve", help="homogenize a phase grid")
    p.add_argument("--grid", required=True, help="grid stem written by 'voxelize'")
    p.add_argument("--k-matrix", type=float, default=1.0)
    p.add_argument("--k-inclusion", type=float, default=0.2)
    p.add_argument("--k-coating", type=float, default=400.0)
    p.add_argument("--acc", type=float, default=DEFAULT_ACC)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--scheme", choices=("accelerated", "basic"), default="accelerated")
    p.add_argument("-o", "--output", required=True, help="result JSON file")

    p = sub.add_parser("sweep", help="run a (resolution, n_sp, layer) sweep")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--preset", choices=("desk", "paper"), default="desk")
    p.add_argument("--resolutions", help="comma separated, e.g. 64,128")
    p.add_argument("--sphere-counts", help="comma separated, e.g. 30,50,100")
    p.add_argument("--layers", help="comma separated, e.g. 0.1,0.3,0.5")
    p.add_argument("--samples-per-cell", type=int)
    p.add_argument("--f-sp", type=float)
    p.add_argument("--k-matrix", type=float)
    p.add_argument("--k-inclusion", type=float)
    p.add_argument("--k-coating", type=float)
    p.add_argument("--acc", type=float)
    p.add_argument("--base-seed", type=int)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--max-attempts", type=int)
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("-o", "--output", required=True, help="CSV output file")

    p = sub.add_parser("check", help="run the built-in oracle suite")
    p.add_argument("--resolution", type=int, default=32, help="grid size for the sphere checks")
    return parser


def _cmd_generate(args) -> int:
    try:
        pack = rsa_generate(args.n_sp, args.f_sp, args.seed, max_attempts=args.max_attempts)
    except ValueError as exc:
        print(f"fftherm generate: {exc}", file=sys.stderr)
        return 1
    except RsaSaturationError as exc:
        print(f"fftherm generate: {exc}", file=sys.stderr)
        return 2
    save_pack(pack, args.output)
    print(f"wrote {args.output}: {pack.n_sp} spheres, radius {pack.radius:.6f}")
    return 0


def _cmd_voxelize(args) -> int:
    try:
        pack = load_pack(args.pack)
        grid = voxelize(pack, args.layer, args.resolution)
    except (ValueError, OSError) as exc:
        print(f"fftherm voxelize: {exc}", file=sys.stderr)
        return 1
    raw_path, json_path = save_grid(grid, args.output)
    written = [str(raw_path), str(json_path)]
    if args.slice_format != "none":
        stem = Path(args.output)
        for axis, name in enumerate("xyz"):
            img = stem.with_name(f"{stem.name}.slice_{name}.{args.slice_format}")
            save_slice(grid, img, axis=axis)
            written.append(str(img))
    print("wrote " + ", ".join(written))
    return 0


def _cmd_solve(args) -> int:
    try:
        grid = load_grid(args.grid)
        phases = PhaseConductivities(args.k_matrix, args.k_inclusion, args.k_coating)
    except (ValueError, OSError) as exc:
        print(f"fftherm solve: {exc}", file=sys.stderr)
        return 1
    try:
        result = homogenized_tensor(
            grid, phases, acc=args.acc, scheme=args.scheme, max_iter=args.max_iter
        )
    except NonConvergedError as exc:
        print(f"fftherm solve: {exc}", file=sys.stderr)
        return 2
    Path(args.output).write_text(
        json.dumps(result_record(result, grid, phases), indent=2, sort_keys=True) + "\n"
    )
    print(f"wrote {args.output}: k_iso={result.isotropic_estimate:.6g}")
    return 0


def _cmd_sweep(args) -> int:
    base = paper_plan() if args.preset == "paper" else desk_plan()
    mapping = {}
    if args.config:
        try:
            mapping.update(parse_config(args.config))
        except (ValueError, OSError) as exc:
            print(f"fftherm sweep: {exc}", file=sys.stderr)
            return 1
    flag_map = {
        "resolutions": args.resolutions,
        "sphere_counts": args.sphere_counts,
        "layers": args.layers,
        "samples_per_cell": args.samples_per_cell,
        "f_sp": args.f_sp,
        "k_matrix": args.k_matrix,
        "k_inclusion": args.k_inclusion,
        "k_coating": args.k_coating,
        "acc": args.acc,
        "base_seed": args.base_seed,
        "max_iter": args.max_iter,
        "max_attempts": args.max_attempts,
    }
    mapping.update({key: value for key, value in flag_map.items() if value is not None})
    try:
        plan = plan_from_mapping(mapping, base=base)
    except ValueError as exc:
        print(f"fftherm sweep: {exc}", file=sys.stderr)
        return 1
    results = run_sweep(plan, parallelism=args.parallelism)
    emit_csv(results, args.output)
    n_total = sum(len(cell.samples) for cell in results)
    n_ok = sum(cell.n_ok for cell in results)
    print(f"wrote {args.output}: {len(results)} cells, {n_ok}/{n_total} samples ok")
    return 0 if n_ok == n_total else 3


def _check_case(name: str, passed: bool, detail: str) -> bool:
    print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return passed


def _cmd_check(args) -> int:
    """Quick oracle suite: exact limits the solver must reproduce."""
    n = args.resolution
    ok = True
    phases_uniform = PhaseConductivities(2.0, 2.0, 2.0)
    grid = PhaseGrid(
        labels=np.zeros((16, 16, 16), dtype=np.uint8), layer=0.0, seed=0, n_sp=0, f_sp=0.0
    )
    result = homogenized_tensor(grid, phases_uniform, acc=1e-10)
    err = np.abs(result.tensor - 2.0 * np.eye(3)).max()
    ok &= _check_case("homogeneous limit", err < 1e-8 * 2.0, f"max error {err:.2e}")

    labels = np.zeros((16, 16, 16), dtype=np.uint8)
    labels[8:, :, :] = INCLUSION
    grid = PhaseGrid(labels=labels, layer=0.0, seed=0, n_sp=0, f_sp=0.5)
    phases = PhaseConductivities(1.0, 0.2, 400.0)
    result = homogenized_tensor(grid, phases, acc=1e-8)
    normal, transverse = laminate_effective(1.0, 0.2, 0.5)
    err = max(
        abs(result.tensor[0, 0] - normal) / normal,
        abs(result.tensor[1, 1] - transverse) / transverse,
        abs(result.tensor[2, 2] - transverse) / transverse,
    )
    ok &= _check_case("laminate exactness", err < 1e-6, f"max rel error {err:.2e}")

    pack = rsa_generate(4, 0.3, seed=7)
    grid = voxelize(pack, 0.0, n)
    f_sph = np.count_nonzero(grid.labels == INCLUSION) / grid.labels.size
    phases = PhaseConductivities(1.0, 0.2, 1.0)
    result = homogenized_tensor(grid, phases, acc=1e-6)
    bounds = hs_bounds(0.2, 1.0, f_sph)
    k_iso = result.isotropic_estimate
    ok &= _check_case(
        "bound containment",
        bounds.contains(k_iso),
        f"k_iso={k_iso:.4f} in [{bounds.lower:.4f}, {bounds.upper:.4f}]",
    )

    grid = voxelize(pack, 0.4, n)
    phases = PhaseConductivities(1.0, 0.2, 50.0)
    hi = homogenized_tensor(grid, phases, acc=1e-6, scheme="accelerated")
    lo = homogenized_tensor(grid, phases, acc=1e-6, scheme="basic", max_iter=20000)
    rel = abs(hi.isotropic_estimate - lo.isotropic_estimate) / hi.isotropic_estimate
    ok &= _check_case("scheme agreement", rel < 1e-5, f"rel diff {rel:.2e}")

    bracket = three_phase_bracket(1.0, 0.2, 50.0, f_sph)
    ok &= _check_case(
        "three-phase bracket",
        bracket.contains(hi.isotropic_estimate),
        f"k_iso={hi.isotropic_estimate:.4f} in [{bracket.lower:.4f}, {bracket.upper:.4f}]",
    )
    return 0 if ok else 2


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {
        "generate": _cmd_generate,
        "voxelize": _cmd_voxelize,
        "solve": _cmd_solve,
        "sweep": _cmd_sweep,
        "check": _cmd_check,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
