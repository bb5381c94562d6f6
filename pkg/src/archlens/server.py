"""HTTP JSON API exposing the analysis operations to clients such as the
browser explorer. All computation happens in the pure core modules; the
service holds no state except workspace writes.

Numbers on the wire: byte/FLOP quantities are exact JSON integers plus
pre-formatted display strings; delta multipliers are decimal strings at fixed
precision plus exact numerator/denominator pairs.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import catalog, firegen, mods, scaling
from .accounting import AccountingReport, analyze, data_weight_ratio
from .arch import ArchitectureError
from .catalog import CatalogError
from .units import format_bytes, format_flops, format_multiplier, multiplier_decimal_string
from .workspace import Workspace, WorkspaceError

__all__ = ["create_app"]


class RequestError(ValueError):
    def __init__(self, message: str, field: str | None = None, status: int = 400):
        super().__init__(message)
        self.field = field
        self.status = status


def _field(body: dict, name: str, types, required: bool = True, default=None):
    if name not in body:
        if required:
            raise RequestError(f"missing required field {name!r}", field=name)
        return default
    value = body[name]
    if types is not None and not isinstance(value, types):
        raise RequestError(f"field {name!r} has wrong type", field=name)
    return value


def _positive_int(body: dict, name: str, required: bool = True, default=None) -> int | None:
    value = _field(body, name, int, required, default)
    if value is not None and (isinstance(value, bool) or value < 1):
        raise RequestError(f"field {name!r} must be a positive integer", field=name)
    return value


def _report_json(report: AccountingReport) -> dict[str, Any]:
    rows = []
    for r in report.rows:
        rows.append({
            "name": r.name,
            "kind": r.kind.value,
            "out_channels": r.out_shape.channels,
            "out_hw": f"{r.out_shape.height}x{r.out_shape.width}",
            "param_bytes": r.param_bytes,
            "activation_bytes": r.activation_bytes,
            "forward_flops": r.forward_flops,
            "consumed_bytes": r.consumed_bytes,
            "formatted": {
                "param_bytes": format_bytes(r.param_bytes),
                "activation_bytes": format_bytes(r.activation_bytes),
                "forward_flops": format_flops(r.forward_flops),
            },
        })
    ratio = None
    if report.param_bytes > 0:
        ratio = multiplier_decimal_string(data_weight_ratio(report), places=2)
    return {
        "architecture": report.architecture,
        "batch": report.batch,
        "bytes_per_value": report.bytes_per_value,
        "rows": rows,
        "totals": {
            "param_bytes": report.param_bytes,
            "activation_bytes": report.activation_bytes,
            "data_volume_bytes": report.data_volume_bytes,
            "forward_flops": report.forward_flops,
            "train_flops_per_batch": report.train_flops_per_batch,
            "formatted": {
                "param_bytes": format_bytes(report.param_bytes),
                "activation_bytes": format_bytes(report.activation_bytes),
                "data_volume_bytes": format_bytes(report.data_volume_bytes),
                "forward_flops": format_flops(report.forward_flops),
                "train_flops_per_batch": format_flops(report.train_flops_per_batch),
            },
        },
        "data_weight_ratio": ratio,
    }


def _mult_json(ratio: Fraction | None) -> dict[str, Any] | None:
    if ratio is None:
        return None
    return {
        "text": format_multiplier(ratio),
        "decimal": multiplier_decimal_string(ratio),
        "num": str(ratio.numerator),
        "den": str(ratio.denominator),
    }


def _delta_json(delta: mods.DeltaReport, applied: list[dict]) -> dict[str, Any]:
    return {
        "baseline": delta.baseline.architecture,
        "modified": delta.modified.architecture,
        "batch": delta.baseline.batch,
        "mods": applied,
        "classification": delta.classification,
        "rows": [
            {
                "name": r.name,
                "status": r.status,
                "baseline_shape": r.baseline_shape,
                "modified_shape": r.modified_shape,
                "output_mult": _mult_json(r.output_mult),
                "params_mult": _mult_json(r.params_mult),
                "flops_mult": _mult_json(r.flops_mult),
            }
            for r in delta.rows
        ],
        "totals": {
            "flops_mult": _mult_json(delta.flops_mult),
            "params_mult": _mult_json(delta.params_mult),
            "activations_mult": _mult_json(delta.activations_mult),
            "output_sum_mult": _mult_json(delta.output_sum_mult),
        },
        "baseline_totals": _report_json(delta.baseline)["totals"],
        "modified_totals": _report_json(delta.modified)["totals"],
    }


def _parse_meta(doc: dict) -> firegen.FireMeta:
    if not isinstance(doc, dict):
        raise RequestError("field 'meta' must be an object", field="meta")
    try:
        return firegen.FireMeta(
            base_e=int(doc["base_e"]),
            incr_e=int(doc.get("incr_e", 0)),
            freq=int(doc.get("freq", 1)),
            pct_3x3=Fraction(str(doc.get("pct_3x3", "1/2"))),
            sr=Fraction(str(doc.get("sr", "1/8"))),
            num_modules=int(doc.get("num_modules", 8)),
        )
    except KeyError as e:
        raise RequestError(f"missing field meta.{e.args[0]}", field=f"meta.{e.args[0]}") from None
    except (ValueError, TypeError, ZeroDivisionError, ArchitectureError) as e:
        raise RequestError(f"invalid metaparameters: {e}", field="meta") from None


def _parse_cluster(doc: dict, workers: int) -> scaling.ClusterSpec:
    topology = doc.get("topology", "tree")
    branching = 2
    if isinstance(topology, str) and topology.startswith("tree"):
        if ":" in topology:
            topology, _, b = topology.partition(":")
            try:
                branching = int(b)
            except ValueError:
                raise RequestError("invalid tree branching factor", field="cluster.topology") from None
        topo = scaling.Topology.REDUCTION_TREE
    elif topology in ("ps", "parameter-server"):
        topo = scaling.Topology.PARAMETER_SERVER
    else:
        raise RequestError("field 'cluster.topology' must be 'ps' or 'tree[:b]'",
                           field="cluster.topology")
    try:
        bw = scaling.parse_bandwidth(str(doc.get("bandwidth", "1GB/s")))
        kwargs: dict[str, Any] = {}
        if "peak_flops" in doc:
            kwargs["peak_flops_per_s"] = scaling.parse_flops(str(doc["peak_flops"]))
        if "efficiency" in doc:
            kwargs["efficiency"] = Fraction(str(doc["efficiency"]))
        return scaling.ClusterSpec(workers=workers, bandwidth_bytes_per_s=bw,
                                   topology=topo, branching=branching, **kwargs)
    except (ValueError, ZeroDivisionError) as e:
        raise RequestError(f"invalid cluster spec: {e}", field="cluster") from None


def create_app(workspace: Workspace | None = None, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="archlens", docs_url=None, redoc_url=None)
    ws = workspace or Workspace()

    @app.exception_handler(RequestError)
    async def _request_error(_: Request, exc: RequestError):
        body: dict[str, Any] = {"error": str(exc)}
        if exc.field:
            body["field"] = exc.field
        return JSONResponse(status_code=exc.status, content=body)

    @app.exception_handler(ArchitectureError)
    async def _arch_error(_: Request, exc: ArchitectureError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(CatalogError)
    async def _catalog_error(_: Request, exc: CatalogError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(WorkspaceError)
    async def _workspace_error(_: Request, exc: WorkspaceError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(KeyError)
    async def _key_error(_: Request, exc: KeyError):
        return JSONResponse(status_code=404, content={"error": str(exc.args[0]) if exc.args else "not found"})

    async def _json_body(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise RequestError("request body must be valid JSON") from None
        if not isinstance(body, dict):
            raise RequestError("request body must be a JSON object")
        return body

    def _resolve(name: str):
        return ws.resolve(name)

    @app.get("/api/architectures")
    def list_architectures():
        entries = []
        for name in catalog.builtin_names():
            entry = catalog.builtin(name)
            entries.append({"name": name, "source": "builtin",
                            "layers": len(entry.architecture.layers),
                            "annotations": entry.annotations})
        for record in ws.list("architecture"):
            entry = ws.load_architecture(record.name)
            entries.append({"name": record.name, "source": "workspace",
                            "layers": len(entry.architecture.layers),
                            "annotations": entry.annotations})
        return {"architectures": entries}

    @app.post("/api/architectures", status_code=201)
    async def save_architecture(request: Request):
        body = await _json_body(request)
        entry = catalog.loads(json.dumps(body))
        record = ws.save_architecture(entry)
        return {"name": record.name, "content_hash": record.content_hash,
                "created_at": record.created_at}

    @app.get("/api/architectures/{name}/analysis")
    def analysis(name: str, batch: int = 1, bytes: int = 4):  # noqa: A002 (wire name)
        if batch < 1:
            raise RequestError("query parameter 'batch' must be >= 1", field="batch")
        if bytes < 1:
            raise RequestError("query parameter 'bytes' must be >= 1", field="bytes")
        entry = _resolve(name)
        report = analyze(entry.architecture, batch=batch, bytes_per_value=bytes)
        doc = _report_json(report)
        doc["annotations"] = entry.annotations
        return doc

    @app.post("/api/diff")
    async def diff_endpoint(request: Request):
        body = await _json_body(request)
        base_name = _field(body, "baseline", str)
        batch = _positive_int(body, "batch")
        raw_mods = _field(body, "mods", list)
        if not raw_mods:
            raise RequestError("field 'mods' must be a non-empty list", field="mods")
        entry = _resolve(base_name)
        modified = entry.architecture
        applied = []
        for i, doc in enumerate(raw_mods):
            try:
                spec = mods.mod_from_dict(doc)
                modified = mods.apply_mod(modified, spec)
            except ArchitectureError as e:
                raise RequestError(str(e), field=f"mods[{i}]") from None
            applied.append(mods.mod_to_dict(spec))
        delta = mods.diff(entry.architecture, modified, batch=batch)
        return _delta_json(delta, applied)

    @app.post("/api/sweep")
    async def sweep_endpoint(request: Request):
        body = await _json_body(request)
        meta = _parse_meta(_field(body, "meta", dict))
        vary = _field(body, "vary", str)
        values = _field(body, "values", list)
        if not values:
            raise RequestError("field 'values' must be a non-empty list", field="values")
        batch = _positive_int(body, "batch", required=False, default=1)
        try:
            points = firegen.sweep(meta, vary, values, batch=batch)
        except (ArchitectureError, ValueError) as e:
            raise RequestError(str(e), field="values") from None
        return {
            "vary": vary,
            "points": [
                {
                    "value": str(p.value),
                    "value_float": float(p.value),
                    "architecture": p.architecture.name,
                    "param_bytes": p.report.param_bytes,
                    "forward_flops": p.report.forward_flops,
                    "activation_bytes": p.report.activation_bytes,
                    "formatted": {"param_bytes": format_bytes(p.report.param_bytes)},
                }
                for p in points
            ],
            "csv": firegen.sweep_csv(vary, points),
        }

    @app.post("/api/scale")
    async def scale_endpoint(request: Request):
        body = await _json_body(request)
        name = _field(body, "arch", str)
        batch = _positive_int(body, "batch", required=False, default=1024)
        cluster_doc = _field(body, "cluster", dict)
        workers = cluster_doc.get("workers", [1])
        if isinstance(workers, int):
            workers = [workers]
        if not (isinstance(workers, list) and workers
                and all(isinstance(w, int) and w >= 1 for w in workers)):
            raise RequestError("field 'cluster.workers' must be a positive integer or list of them",
                               field="cluster.workers")
        plan = None
        if body.get("plan") is not None:
            plan_doc = _field(body, "plan", dict)
            plan = scaling.TrainPlan(
                dataset_frames=_positive_int(plan_doc, "frames"),
                epochs=_positive_int(plan_doc, "epochs"),
                batch=batch,
            )
        entry = _resolve(name)
        report = analyze(entry.architecture, batch=batch)
        base = _parse_cluster(cluster_doc, workers[0])
        curve = scaling.scaling_curve(report, base, workers, plan)
        payload = [
            {
                "workers": e.workers,
                "comm_s": float(e.comm_time_per_iter),
                "compute_s": float(e.compute_time_per_iter),
                "total_s": float(e.total_time),
                "speedup": float(e.speedup_vs_1),
                "ratio": None if e.comp_comm_ratio is None else float(e.comp_comm_ratio),
                "batch_smaller_than_workers": e.batch_smaller_than_workers,
            }
            for e in curve
        ]
        extra = {}
        if plan is not None:
            extra["total_training_ops"] = scaling.total_training_ops(report, plan)
        return {
            "architecture": name,
            "grad_bytes": report.param_bytes,
            "curve": payload,
            "best_workers": scaling.best_worker_count(curve),
            "csv": scaling.scaling_curve_csv(curve),
            **extra,
        }

    @app.get("/api/count-space")
    def count_space(slots: int, options: int):
        if slots < 0 or options < 0:
            raise RequestError("'slots' and 'options' must be non-negative")
        count = firegen.count_design_space(slots, options)
        return {
            "slots": slots,
            "options": options,
            "count": count,
            "count_str": str(count),
            "note": firegen.DESIGN_SPACE_NOTE,
        }

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
