#!/usr/bin/env python3
"""Record API fixtures for the explorer UI tests.

Runs the real service in-process and captures responses the UI tests replay.
The two-edit stack is recorded three ways: each prefix of the stack against
the original baseline, and the second edit against the first edit's saved
result — so the tests can assert combined-vs-sequential equality end to end.

Usage: python3 scripts/record_fixtures.py  (from frontend/)
"""

import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from archlens import apply_mod, builtin
from archlens.catalog import CatalogEntry, dumps
from archlens.mods import mod_from_dict
from archlens.server import create_app
from archlens.workspace import Workspace

FIXTURES = Path(__file__).resolve().parent.parent / "test" / "fixtures"

EDIT_1 = {"kind": "scale_input_channels", "factor": "4"}
EDIT_2 = {"kind": "remove_layer", "layer": "pool3"}
BATCH = 1024


def record() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        client = TestClient(create_app(Workspace(tmp)))

        def grab(name: str, response) -> None:
            assert response.status_code in (200, 201), (name, response.text)
            path = FIXTURES / f"{name}.json"
            path.write_text(json.dumps(response.json(), indent=2, sort_keys=True) + "\n")
            print(f"wrote {path.relative_to(FIXTURES.parent.parent)}")

        grab("architectures", client.get("/api/architectures"))
        grab("nin-analysis-1024",
             client.get("/api/architectures/nin/analysis", params={"batch": BATCH}))
        grab("diff-remove-pool3", client.post("/api/diff", json={
            "baseline": "nin", "batch": BATCH, "mods": [EDIT_2]}))

        # two-edit stack: combined, first prefix, and true sequential second step
        grab("diff-stack-combined", client.post("/api/diff", json={
            "baseline": "nin", "batch": BATCH, "mods": [EDIT_1, EDIT_2]}))
        grab("diff-stack-edit1", client.post("/api/diff", json={
            "baseline": "nin", "batch": BATCH, "mods": [EDIT_1]}))

        after_edit1 = apply_mod(builtin("nin").architecture, mod_from_dict(EDIT_1))
        after_edit1 = after_edit1.with_layers(after_edit1.layers, name="nin-after-edit1")
        doc = json.loads(dumps(CatalogEntry(after_edit1)))
        assert client.post("/api/architectures", json=doc).status_code == 201
        grab("diff-stack-edit2-sequential", client.post("/api/diff", json={
            "baseline": "nin-after-edit1", "batch": BATCH, "mods": [EDIT_2]}))

        grab("sweep-sr", client.post("/api/sweep", json={
            "meta": {"base_e": 128, "incr_e": 128, "freq": 2, "pct_3x3": 0.5, "sr": "1/8"},
            "vary": "sr",
            "values": ["1/8", "1/4", "1/2", "3/4", "1"],
        }))
        grab("scale-nin", client.post("/api/scale", json={
            "arch": "nin", "batch": BATCH,
            "cluster": {"workers": [1, 2, 4, 8, 16, 32, 64, 128],
                        "bandwidth": "1GB/s", "topology": "tree:2"},
        }))
        grab("count-space", client.get("/api/count-space",
                                       params={"slots": 16, "options": 5}))


if __name__ == "__main__":
    sys.exit(record())
