#!/usr/bin/env python3
"""Interactive what-if analysis through the HTTP service: stage fact edits in
a session, re-run checks, and commit only deliberate changes."""

import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from fastapi.testclient import TestClient

from lexverify.bundle import bundle_to_json
from lexverify.cases import load_fsc_fixture
from lexverify.service import create_app
from lexverify.store import CaseStore

store = CaseStore(tempfile.mkdtemp(prefix="lexverify-demo-"))
client = TestClient(create_app(store))

fixture = load_fsc_fixture()
case_id = client.post("/cases", json={"bundle": bundle_to_json(fixture)}).json()["case_id"]
print(f"stored case {case_id} at version 1")

verdict = client.post(f"/cases/{case_id}/check/illegality").json()
print(f"illegality on record: {verdict['status']} "
      f"(core groups: {', '.join(verdict['core']['groups'])})")

sid = client.post("/sessions", json={"case_id": case_id}).json()["session_id"]
print(f"\nopened what-if session {sid}")

client.post(f"/sessions/{sid}/modify", json={
    "expected_version": 0,
    "target": "plan_executed",
    "action": {"type": "toggle"},
})
print("staged: toggle plan_executed (false -> true)")

check = client.post(f"/sessions/{sid}/run/check").json()
print(f"session check: {check['status']}  (the staged world is lawful)")

optimize = client.post(f"/sessions/{sid}/run/optimize").json()
print(f"session optimize: cost {optimize['cost']}; trace: {optimize['trace']}")

untouched = client.post(f"/cases/{case_id}/check/illegality").json()
print(f"\nstored case is untouched until commit: still {untouched['status']}")

commit = client.post(f"/sessions/{sid}/commit").json()
print(f"committed: case now at version {commit['version']}")
after = client.post(f"/cases/{case_id}/check/illegality").json()
print(f"stored case after commit: {after['status']}")
