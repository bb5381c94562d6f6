"""Command-line workbench.

Subcommands: catalog, analyze, diff, sweep, scale, count-space, serve.
Exit codes: 0 success, 2 validation error (bad input), 1 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import catalog, firegen, mods, scaling
from .accounting import analyze, data_weight_ratio
from .arch import ArchitectureError
from .catalog import CatalogError
from .units import format_bytes, format_flops, format_multiplier, multiplier_decimal_string
from .workspace import Workspace, WorkspaceError

__all__ = ["main"]


class CliError(Exception):
    pass


def _resolve(name: str, workspace_dir: str | None):
    ws = Workspace(workspace_dir) if workspace_dir else Workspace()
    try:
        return ws.resolve(name)
    except KeyError as e:
        raise CliError(str(e.args[0])) from None


def _print_table(headers: list[str], rows: list[list[str]], out) -> None:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    line = " | ".join(h.ljust(w) for h, w in zip(headers, widths))
    print(line, file=out)
    print("-" * len(line), file=out)
    for r in rows:
        print(" | ".join(c.ljust(w) for c, w in zip(r, widths)), file=out)


def _cmd_catalog(args, out) -> int:
    if args.action == "list":
        rows = []
        for name in catalog.builtin_names():
            entry = catalog.builtin(name)
            r = analyze(entry.architecture, batch=1)
            rows.append([name, str(len(entry.architecture.layers)),
                         format_bytes(r.param_bytes),
                         entry.annotations.get("top1_accuracy", "-")])
        _print_table(["name", "layers", "params", "top-1 (published)"], rows, out)
        return 0
    raise CliError(f"unknown catalog action {args.action!r}")


def _report_rows(report) -> list[list[str]]:
    rows = []
    for r in report.rows:
        rows.append([
            r.name,
            f"{r.out_shape.channels}",
            f"{r.out_shape.height}x{r.out_shape.width}",
            format_bytes(r.activation_bytes),
            format_bytes(r.param_bytes),
            format_flops(r.forward_flops),
        ])
    return rows


def _cmd_analyze(args, out) -> int:
    entry = _resolve(args.arch, args.workspace)
    report = analyze(entry.architecture, batch=args.batch, bytes_per_value=args.bytes)
    if args.format == "json":
        from .server import _report_json
        json.dump(_report_json(report), out, indent=2)
        out.write("\n")
        return 0
    if args.format == "csv":
        w = csv.writer(out)
        w.writerow(["layer", "out_channels", "out_hw", "activation_bytes", "param_bytes", "forward_flops"])
        for r in report.rows:
            w.writerow([r.name, r.out_shape.channels,
                        f"{r.out_shape.height}x{r.out_shape.width}",
                        r.activation_bytes, r.param_bytes, r.forward_flops])
        w.writerow(["total", "", "", report.activation_bytes, report.param_bytes, report.forward_flops])
        w.writerow(["data_volume", "", "", report.data_volume_bytes, "", ""])
        return 0
    rows = _report_rows(report)
    rows.append(["sum of layer outputs", "", "", format_bytes(report.activation_bytes),
                 format_bytes(report.param_bytes), format_flops(report.forward_flops)])
    rows.append(["total", "", "",
                 format_bytes(report.param_bytes) + " | " + format_bytes(report.data_volume_bytes)
                 + " | " + format_flops(report.forward_flops), "", ""])
    _print_table(["layer", "ch", "out HxW", "output", "params", "flops"], rows, out)
    print(f"\nbatch {report.batch}: weights {format_bytes(report.param_bytes)}, "
          f"data volume {format_bytes(report.data_volume_bytes)} "
          f"(all-layer outputs {format_bytes(report.activation_bytes)}), "
          f"forward {format_flops(report.forward_flops)}, "
          f"forward+backward {format_flops(report.train_flops_per_batch)}", file=out)
    if report.param_bytes:
        print(f"data/weight ratio: {multiplier_decimal_string(data_weight_ratio(report), 2)}", file=out)
    return 0


def _cmd_diff(args, out) -> int:
    entry = _resolve(args.arch, args.workspace)
    spec_list = []
    for text in args.mod:
        if text.endswith(".json"):
            try:
                doc = json.loads(open(text, encoding="utf-8").read())
            except (OSError, json.JSONDecodeError) as e:
                raise CliError(f"cannot read modification file {text}: {e}") from None
            items = doc if isinstance(doc, list) else [doc]
            spec_list.extend(mods.mod_from_dict(d) for d in items)
        else:
            spec_list.append(mods.parse_inline_mod(text))
    modified = entry.architecture
    for spec in spec_list:
        modified = mods.apply_mod(modified, spec)
    delta = mods.diff(entry.architecture, modified, batch=args.batch, bytes_per_value=args.bytes)
    if args.format == "json":
        from .server import _delta_json
        json.dump(_delta_json(delta, [mods.mod_to_dict(s) for s in spec_list]), out, indent=2)
        out.write("\n")
        return 0
    rows = []
    for r in delta.rows:
        rows.append([
            r.name, r.status,
            r.modified_shape or "-",
            format_multiplier(r.output_mult),
            format_multiplier(r.params_mult),
            format_multiplier(r.flops_mult),
        ])
    rows.append([
        "total", delta.classification, "",
        f"Δoutput {format_multiplier(delta.activations_mult)} ({format_bytes(delta.modified.data_volume_bytes)})",
        f"Δparams {format_multiplier(delta.params_mult)} ({format_bytes(delta.modified.param_bytes)})",
        f"Δflops {format_multiplier(delta.flops_mult)} ({format_flops(delta.modified.forward_flops)})",
    ])
    _print_table(["layer", "status", "out shape", "Δ output", "Δ params", "Δ flops"], rows, out)
    print(f"\nclassification: {delta.classification}", file=out)
    return 0


def _parse_values(values: list[str]) -> list:
    out = []
    for v in values:
        try:
            out.append(Fraction(v))
        except (ValueError, ZeroDivisionError):
            raise CliError(f"invalid sweep value {v!r}") from None
    return out


def _cmd_sweep(args, out) -> int:
    try:
        doc = json.loads(open(args.meta, encoding="utf-8").read())
    except (OSError, json.JSONDecodeError) as e:
        raise CliError(f"cannot read metaparameter file {args.meta}: {e}") from None
    try:
        meta = firegen.FireMeta(
            base_e=int(doc["base_e"]),
            incr_e=int(doc.get("incr_e", 0)),
            freq=int(doc.get("freq", 1)),
            pct_3x3=Fraction(str(doc.get("pct_3x3", "1/2"))),
            sr=Fraction(str(doc.get("sr", "1/8"))),
            num_modules=int(doc.get("num_modules", 8)),
        )
    except (KeyError, ValueError, TypeError, ZeroDivisionError, ArchitectureError) as e:
        raise CliError(f"invalid metaparameters in {args.meta}: {e}") from None
    points = firegen.sweep(meta, args.vary, _parse_values(args.values), batch=args.batch)
    if args.format == "csv":
        out.write(firegen.sweep_csv(args.vary, points))
        return 0
    rows = [[str(p.value), format_bytes(p.report.param_bytes),
             format_flops(p.report.forward_flops), format_bytes(p.report.activation_bytes)]
            for p in points]
    _print_table([args.vary, "params", "flops", "activations"], rows, out)
    return 0


def _cmd_scale(args, out) -> int:
    entry = _resolve(args.arch, args.workspace)
    report = analyze(entry.architecture, batch=args.batch)
    topology = args.topology
    branching = 2
    if topology.startswith("tree"):
        if ":" in topology:
            topology, _, b = topology.partition(":")
            try:
                branching = int(b)
            except ValueError:
                raise CliError(f"invalid tree branching factor in {args.topology!r}") from None
        topo = scaling.Topology.REDUCTION_TREE
    elif topology == "ps":
        topo = scaling.Topology.PARAMETER_SERVER
    else:
        raise CliError(f"unknown topology {args.topology!r}; use ps or tree[:b]")
    try:
        workers = [int(w) for w in args.workers.split(",")]
        cluster = scaling.ClusterSpec(
            workers=workers[0],
            bandwidth_bytes_per_s=scaling.parse_bandwidth(args.bw),
            topology=topo,
            branching=branching,
            peak_flops_per_s=scaling.parse_flops(args.throughput),
            efficiency=Fraction(str(args.efficiency)),
        )
    except (ValueError, ZeroDivisionError) as e:
        raise CliError(f"invalid cluster option: {e}") from None
    plan = None
    if args.frames:
        plan = scaling.TrainPlan(dataset_frames=args.frames, epochs=args.epochs, batch=args.batch)
    curve = scaling.scaling_curve(report, cluster, workers, plan)
    if args.format == "csv":
        out.write(scaling.scaling_curve_csv(curve))
        return 0
    rows = [[str(e.workers), f"{float(e.comm_time_per_iter):.4g}",
             f"{float(e.compute_time_per_iter):.4g}", f"{float(e.total_time):.4g}",
             f"{float(e.speedup_vs_1):.3g}",
             "-" if e.comp_comm_ratio is None else f"{float(e.comp_comm_ratio):.3g}"]
            for e in curve]
    _print_table(["p", "comm s", "compute s", "total s", "speedup", "comp/comm"], rows, out)
    print(f"\ngradient bytes per worker: {format_bytes(report.param_bytes)}; "
          f"best worker count on this curve: {scaling.best_worker_count(curve)}", file=out)
    if plan is not None:
        print(f"total training ops: {scaling.total_training_ops(report, plan):,}", file=out)
    return 0


def _cmd_count_space(args, out) -> int:
    count = firegen.count_design_space(args.slots, args.options)
    print(count, file=out)
    print(f"note: {firegen.DESIGN_SPACE_NOTE}", file=out)
    return 0


def _cmd_serve(args, out) -> int:
    import uvicorn

    from .server import create_app

    ws = Workspace(args.workspace) if args.workspace else Workspace()
    app = create_app(ws, ui_dir=args.ui)
    print(f"workspace: {ws.root}", file=out)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="archlens",
                                description="CNN architecture design-space workbench")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("catalog", help="list built-in architectures")
    c.add_argument("action", choices=["list"])

    a = sub.add_parser("analyze", help="per-layer accounting for an architecture")
    a.add_argument("arch")
    a.add_argument("--batch", type=int, default=1)
    a.add_argument("--bytes", type=int, default=4)
    a.add_argument("--format", choices=["table", "csv", "json"], default="table")
    a.add_argument("--workspace", default=None)

    d = sub.add_parser("diff", help="delta report for one or more modifications")
    d.add_argument("arch")
    d.add_argument("--mod", action="append", required=True,
                   help="inline form (remove:pool3, scale-filters:conv8:4, ...) or a JSON file")
    d.add_argument("--batch", type=int, default=1024)
    d.add_argument("--bytes", type=int, default=4)
    d.add_argument("--format", choices=["table", "json"], default="table")
    d.add_argument("--workspace", default=None)

    s = sub.add_parser("sweep", help="generate architectures across one metaparameter")
    s.add_argument("meta", help="JSON file of metaparameters")
    s.add_argument("--vary", required=True)
    s.add_argument("--values", nargs="+", required=True)
    s.add_argument("--batch", type=int, default=1)
    s.add_argument("--format", choices=["table", "csv"], default="table")

    sc = sub.add_parser("scale", help="distributed training cost estimates")
    sc.add_argument("arch")
    sc.add_argument("--workers", required=True, help="comma-separated worker counts")
    sc.add_argument("--bw", default="1GB/s")
    sc.add_argument("--topology", default="tree:2", help="ps or tree[:b]")
    sc.add_argument("--throughput", default="3.5TF/s")
    sc.add_argument("--efficiency", default="0.2")
    sc.add_argument("--batch", type=int, default=1024)
    sc.add_argument("--frames", type=int, default=None)
    sc.add_argument("--epochs", type=int, default=1)
    sc.add_argument("--format", choices=["table", "csv"], default="table")
    sc.add_argument("--workspace", default=None)

    cs = sub.add_parser("count-space", help="exact design-space cardinality")
    cs.add_argument("--slots", type=int, required=True)
    cs.add_argument("--options", type=int, required=True)

    sv = sub.add_parser("serve", help="run the HTTP API")
    sv.add_argument("--port", type=int, default=8000)
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--workspace", default=None)
    sv.add_argument("--ui", default=None, help="directory of built UI assets to serve")

    return p


_COMMANDS = {
    "catalog": _cmd_catalog,
    "analyze": _cmd_analyze,
    "diff": _cmd_diff,
    "sweep": _cmd_sweep,
    "scale": _cmd_scale,
    "count-space": _cmd_count_space,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None, out: io.TextIOBase | None = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return _COMMANDS[args.command](args, out)
    except (CliError, ArchitectureError, CatalogError, WorkspaceError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 1
    except Exception as e:  # internal failure, not a user-input problem
        print(f"internal error: {e!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
