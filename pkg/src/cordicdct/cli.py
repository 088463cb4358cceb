"""Command-line front end.

    cordicdct analyze --variant II
    cordicdct analyze --all --format json
    cordicdct accuracy --variant I --trials 2000 --seed 3
    cordicdct search-atr --target -0.19634954 --indices 1,2,4 --use-all
    cordicdct transform image.pgm -o coeffs.csv --variant reference
    cordicdct roundtrip image.pgm --qtable table.txt --plot-dir figs/
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path


from . import __version__
from .codec import forward, roundtrip
from .cordic import paired_search, search_atr
from .dct8 import (
    FixedPointConfig,
    ScaledTransform,
    Variant,
    accuracy_report,
    build,
    dct2_matrix_exact,
)
from .flowgraph import CostReport, GraphError, cost_report
from .fxp import FxpFormatError, FxpOverflowError
from .pgm import PgmError, read_pgm, write_pgm
from .quant import QuantTable

# binDCT-C column of the comparison table; literature values, never recomputed
BINDCT_C = {"additions": 30, "shifts": 12, "bit_inversions": 0, "critical_path": "9·T_ADD"}
BINDCT_C_PATH_ADDERS = 9
LITERATURE_NOTE = "reported in paper, not recomputed"

VARIANT_CHOICES = ("reference", "raw", "I", "II")


def _canon_variant(text: str) -> str:
    for c in VARIANT_CHOICES:
        if text.lower() == c.lower():
            return c
    return text


@dataclass(frozen=True)
class RunConfig:
    variant: Variant = Variant.C_II
    in_width: int = 8
    out_width: int = 12
    seed: int = 0
    trials: int = 1000
    fmt: str = "text"

    def __post_init__(self):
        if not 2 <= self.in_width <= 24:
            raise ValueError(f"--in-width must be in [2, 24], got {self.in_width}")
        if not self.in_width <= self.out_width <= 32:
            raise ValueError(f"--out-width must be in [{self.in_width}, 32], got {self.out_width}")
        if self.trials < 1:
            raise ValueError("--trials must be >= 1")

    @property
    def fixed_point(self) -> FixedPointConfig:
        return FixedPointConfig(self.in_width, self.out_width, max(self.in_width + 8, self.out_width + 4))

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        return cls(
            variant=Variant.parse(getattr(args, "variant", None) or "II"),
            in_width=args.in_width,
            out_width=args.out_width,
            seed=args.seed,
            trials=args.trials,
            fmt=args.format,
        )


def _cost_dict(rep: CostReport) -> dict:
    return rep.to_dict()


def _report(t: ScaledTransform, accuracy: dict | None = None) -> dict:
    return {
        "variant": t.variant.value,
        "cost": _cost_dict(cost_report(t.graph)),
        "accuracy": accuracy,
        "scales": [float(s) for s in t.out_scale],
    }


def _emit(text: str, out=None) -> None:
    (out or sys.stdout).write(text if text.endswith("\n") else text + "\n")


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False)


def _dump_graph(args, t: ScaledTransform) -> None:
    if getattr(args, "dump_graph", None):
        Path(args.dump_graph).write_text(t.graph.to_json(indent=1) + "\n")


def _plot_dir(args) -> Path | None:
    d = getattr(args, "plot_dir", None)
    return Path(d) if d else None


# --------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    cfg = RunConfig.from_args(args)
    variants = [Variant.C_I, Variant.C_II] if args.all else [cfg.variant]
    ts = [build(v) for v in variants]
    reps = [cost_report(t.graph) for t in ts]
    if ts:
        _dump_graph(args, ts[-1])

    comparison = None
    if args.all:
        ii = reps[-1]
        comparison = {
            "critical_path_ratio": ii.critical_path.adds / BINDCT_C_PATH_ADDERS,
            "critical_path_reduction": 1 - ii.critical_path.adds / BINDCT_C_PATH_ADDERS,
            "additions_ratio": ii.additions / BINDCT_C["additions"],
            "additions_increase": ii.additions / BINDCT_C["additions"] - 1,
        }

    header = ["variant", "additions", "shifts", "bit_inversions", "critical_path"]
    if cfg.fmt == "json":
        if args.all:
            doc = {
                "reports": [_report(t) for t in ts],
                "literature": {"binDCT-C": dict(BINDCT_C, note=LITERATURE_NOTE)},
                "comparison": comparison,
            }
        else:
            doc = _report(ts[0])
        _emit(_json(doc))
    elif cfg.fmt == "csv":
        rows = [header] + [[t.variant.value, *r.as_row()] for t, r in zip(ts, reps)]
        if args.all:
            rows.append(["binDCT-C (" + LITERATURE_NOTE + ")", *BINDCT_C.values()])
        _emit(_csv(rows))
    else:
        if args.all:
            cols = [f"Variant {t.variant.value}" for t in ts] + ["binDCT-C*"]
            labels = ["No. of additions", "No. of shifts", "No. bit inversion", "Critical path"]
            vals = [list(r.as_row()) for r in reps] + [list(BINDCT_C.values())]
            lines = [f"{'':<20}" + "".join(f"{c:>20}" for c in cols)]
            for i, lab in enumerate(labels):
                lines.append(f"{lab:<20}" + "".join(f"{str(v[i]):>20}" for v in vals))
            lines.append(f"* {LITERATURE_NOTE}")
            lines.append(
                "critical path vs binDCT-C: {:d}/{:d} adders ({:+.0%}); additions {:d}/{:d} ({:+.0%})".format(
                    reps[-1].critical_path.adds, BINDCT_C_PATH_ADDERS, -comparison["critical_path_reduction"],
                    reps[-1].additions, BINDCT_C["additions"], comparison["additions_increase"]))
            _emit("\n".join(lines))
        else:
            for t, r in zip(ts, reps):
                _emit(f"variant {t.variant.value}: " + ", ".join(str(v) for v in r.as_row()))

    pdir = _plot_dir(args)
    if pdir:
        from .plotting import plot_costs

        rows = {f"Variant {t.variant.value}": {"additions": r.additions, "shifts": r.shifts,
                                               "path_adders": r.critical_path.adds}
                for t, r in zip(ts, reps)}
        if args.all:
            rows["binDCT-C (lit.)"] = {"additions": BINDCT_C["additions"], "shifts": BINDCT_C["shifts"],
                                       "path_adders": BINDCT_C_PATH_ADDERS}
        plot_costs(rows, pdir / "cost.png")
    return 0


def cmd_accuracy(args) -> int:
    cfg = RunConfig.from_args(args)
    t = build(cfg.variant)
    _dump_graph(args, t)
    rep = accuracy_report(t, cfg.trials, cfg.seed, cfg.fixed_point)
    acc = rep.to_dict()
    if cfg.fmt == "json":
        _emit(_json(_report(t, acc)))
    elif cfg.fmt == "csv":
        rows = [["metric", "value"]]
        for k, v in acc.items():
            if isinstance(v, (list, dict)):
                v = json.dumps(v)
            rows.append([k, v])
        _emit(_csv(rows))
    else:
        lines = [f"variant {t.variant.value}",
                 f"  matrix max |error|      {rep.matrix_max_abs:.6e}",
                 f"  matrix Frobenius error  {rep.matrix_frobenius:.6e}"]
        if rep.fxp_max_abs is not None:
            lines += [f"  fixed point, {rep.trials} blocks, seed {rep.seed}",
                      f"    vs exact DCT   max {rep.fxp_max_abs:.4f}  rms {rep.fxp_rms:.4f}",
                      f"    rounding only  max {rep.rounding_max_abs:.4f}  rms {rep.rounding_rms:.4f}",
                      "    per-output max  " + " ".join(f"{v:.3f}" for v in rep.fxp_port_max_abs)]
        else:
            lines.append("  (real multipliers: no fixed-point datapath)")
        lines.append("  scales " + " ".join(f"{s:.7f}" for s in t.out_scale))
        _emit("\n".join(lines))
    pdir = _plot_dir(args)
    if pdir:
        from .plotting import plot_matrix_error, plot_port_errors

        plot_matrix_error(t.matrix(), dct2_matrix_exact(), pdir / f"matrix_{t.variant.value}.png",
                          title=f"variant {t.variant.value}")
        if rep.fxp_port_max_abs is not None:
            plot_port_errors(rep.fxp_port_max_abs, pdir / f"port_error_{t.variant.value}.png",
                             title=f"variant {t.variant.value}, fixed point vs exact")
    return 0


def _parse_indices(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ValueError(f"--indices must be a comma-separated list of integers, got {text!r}") from exc


def _plan_dict(plan) -> dict:
    return {
        "target": plan.target_angle,
        "indices": list(plan.indices),
        "sigmas": list(plan.sigmas),
        "achieved": plan.achieved_angle,
        "error": plan.error,
        "scale_k": plan.scale_k,
    }


def cmd_search_atr(args) -> int:
    if args.target is None:
        raise ValueError("--target is required")
    if args.pair is not None:
        pa, pb = paired_search(args.target, args.pair, args.max_shift, args.max_steps or 3)
        plans = [pa, pb]
    else:
        indices = _parse_indices(args.indices)
        max_steps = args.max_steps if args.max_steps is not None else len(indices)
        plans = [search_atr(args.target, indices, max_steps, use_all=args.use_all)]
    if args.format == "json":
        _emit(_json({"plans": [_plan_dict(p) for p in plans]}))
    elif args.format == "csv":
        rows = [["target", "indices", "sigmas", "achieved", "error", "scale_k"]]
        for p in plans:
            rows.append([f"{p.target_angle:.8f}", " ".join(map(str, p.indices)),
                         " ".join(f"{s:+d}" for s in p.sigmas), f"{p.achieved_angle:.7f}",
                         f"{p.error:.7f}", f"{p.scale_k:.7f}"])
        _emit(_csv(rows))
    else:
        for p in plans:
            _emit(f"target {p.target_angle:.8f}  indices {','.join(map(str, p.indices))}  "
                  f"sigma = {','.join(f'{s:+d}' for s in p.sigmas)}  achieved {p.achieved_angle:.7f}  "
                  f"error {p.error:.7f}  K {p.scale_k:.7f}")
    return 0


def _mode(args, cfg: RunConfig):
    mode = args.mode
    if mode == "auto":
        mode = "real" if cfg.variant is Variant.REFERENCE else "fxp"
    if mode == "fxp":
        if cfg.variant is Variant.REFERENCE:
            raise ValueError("the reference graph has real multipliers; use --mode real")
        return cfg.fixed_point, "fxp"
    return "real", "real"


def cmd_transform(args) -> int:
    cfg = RunConfig.from_args(args)
    t = build(cfg.variant)
    _dump_graph(args, t)
    img = read_pgm(args.input)
    mode, mode_name = _mode(args, cfg)
    y, grid = forward(img, t, mode)
    nbr, nbc = y.shape[:2]
    if cfg.fmt == "json":
        doc = {
            "variant": t.variant.value,
            "mode": mode_name,
            "width": int(img.shape[1]),
            "height": int(img.shape[0]),
            "scales": grid.tolist(),
            "blocks": [{"row": r, "col": c, "coefficients": y[r, c].tolist()}
                       for r in range(nbr) for c in range(nbc)],
        }
        text = _json(doc)
    else:
        rows = [["kind", "block_row", "block_col", "row"] + [f"c{j}" for j in range(8)]]
        for i in range(8):
            rows.append(["scale", "", "", i] + [repr(float(v)) for v in grid[i]])
        for r in range(nbr):
            for c in range(nbc):
                for i in range(8):
                    rows.append(["coef", r, c, i] + [repr(float(v)) for v in y[r, c, i]])
        text = _csv(rows)
    if args.output and args.output != "-":
        Path(args.output).write_text(text if text.endswith("\n") else text + "\n")
    else:
        _emit(text)
    return 0


def cmd_roundtrip(args) -> int:
    cfg = RunConfig.from_args(args)
    t = build(cfg.variant)
    _dump_graph(args, t)
    img = read_pgm(args.image)
    table = QuantTable.load(args.qtable) if args.qtable else QuantTable.uniform(args.q_uniform)
    mode, mode_name = _mode(args, cfg)
    res = roundtrip(img, t, table, mode)
    if args.output_image:
        write_pgm(args.output_image, res.reconstruction)
    psnr_val = None if math.isinf(res.psnr) else res.psnr
    info = {"psnr_db": psnr_val, "mse": res.mse, "nonzero_levels": res.nonzero_levels,
            "blocks": int(res.levels.shape[0] * res.levels.shape[1]), "mode": mode_name}
    if cfg.fmt == "json":
        doc = _report(t)
        doc["roundtrip"] = info
        _emit(_json(doc))
    elif cfg.fmt == "csv":
        _emit(_csv([list(info), list(info.values())]))
    else:
        _emit(f"variant {t.variant.value} ({mode_name}): PSNR {res.psnr:.3f} dB, MSE {res.mse:.4f}, "
              f"{res.nonzero_levels} nonzero levels in {info['blocks']} blocks")
    pdir = _plot_dir(args)
    if pdir:
        from .plotting import plot_roundtrip

        plot_roundtrip(img, res.reconstruction, pdir / f"roundtrip_{t.variant.value}.png",
                       title=f"variant {t.variant.value}: {res.psnr:.2f} dB")
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=1000)
    common.add_argument("--in-width", type=int, default=8)
    common.add_argument("--out-width", type=int, default=12)
    common.add_argument("--dump-graph", metavar="PATH")
    common.add_argument("--plot-dir", metavar="DIR", help="write PNG figures here")

    variant = argparse.ArgumentParser(add_help=False)
    variant.add_argument("--variant", type=_canon_variant, choices=VARIANT_CHOICES, default="II")

    p = argparse.ArgumentParser(prog="cordicdct", description="Multiplierless CORDIC-based 8-point DCT toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common, variant], help="operation counts and critical path")
    a.add_argument("--all", action="store_true", help="variants I and II plus the binDCT-C literature column")
    a.set_defaults(func=cmd_analyze)

    a = sub.add_parser("accuracy", parents=[common, variant], help="approximation and fixed-point error")
    a.set_defaults(func=cmd_accuracy)

    a = sub.add_parser("search-atr", parents=[common], help="search microrotation sets for an angle")
    a.add_argument("--target", type=float, help="target angle in radians")
    a.add_argument("--indices", default="0,1,2,3,4", help="allowed shift indices, comma separated")
    a.add_argument("--use-all", action="store_true", help="use every listed index")
    a.add_argument("--max-steps", type=int)
    a.add_argument("--pair", type=float, metavar="RADIANS",
                   help="second target; search one index set shared by both angles")
    a.add_argument("--max-shift", type=int, default=4, help="largest shift index for --pair")
    a.set_defaults(func=cmd_search_atr)

    for name, helptext, func in (("transform", "2-D block transform of a PGM image", cmd_transform),
                                  ("roundtrip", "quantisation round trip with PSNR", cmd_roundtrip)):
        a = sub.add_parser(name, parents=[common, variant], help=helptext)
        a.add_argument("--mode", choices=("auto", "real", "fxp"), default="auto")
        a.set_defaults(func=func)
        if name == "transform":
            a.add_argument("input", help="P5 PGM image, dimensions multiples of 8")
            a.add_argument("-o", "--output", help="output file (default stdout)")
        else:
            a.add_argument("image", help="P5 PGM image, dimensions multiples of 8")
            a.add_argument("--qtable", metavar="PATH", help="8x8 whitespace-separated table")
            a.add_argument("--q-uniform", type=float, default=16.0, help="uniform table value without --qtable")
            a.add_argument("--output-image", metavar="PATH", help="write the reconstruction as PGM")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, GraphError, FxpOverflowError, FxpFormatError, PgmError) as exc:
        print(f"cordicdct: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
