import hashlib
import json
import os
import signal
import subprocess
import sys
import time

import numpy as np
import pytest

from cloudatelier.cli import main
from cloudatelier.measure.jsonio import export_layer_json

from conftest import plane_cloud, random_document, uniform_cloud


def write_xyz(path, points) -> None:
    xyz = np.stack([points["x"], points["y"], points["z"]], axis=1)
    np.savetxt(path, xyz, fmt="%.6f")


@pytest.fixture
def one_point(tmp_path):
    path = tmp_path / "one_point.xyz"
    path.write_text("1.0 2.0 3.0\n")
    return path


def tree_digest(root):
    out = {}
    for path in sorted(root.rglob("*")):
        if path.is_file():
            out[str(path.relative_to(root))] = hashlib.sha256(
                path.read_bytes()).hexdigest()
    return out


# ----------------------------------------------------------------- convert


def test_convert_one_point(one_point, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["convert", str(one_point), "-o", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["totalPoints"] == 1
    assert (out / "byproduct.json").exists()
    assert (out / "byproduct.bin").exists()


def test_info_golden_line(one_point, tmp_path, capsys):
    out = tmp_path / "out"
    main(["convert", str(one_point), "-o", str(out)])
    capsys.readouterr()
    assert main(["info", str(out)]) == 0
    printed = capsys.readouterr().out
    manifest = json.loads((out / "manifest.json").read_text())
    spacing = manifest["rootSpacing"]
    assert printed == f"points: 1, nodes: 1, spacing: {spacing}\n"


def test_convert_missing_input(tmp_path, capsys):
    code = main(["convert", str(tmp_path / "missing.las"),
                 "-o", str(tmp_path / "out")])
    assert code == 3
    err = capsys.readouterr().err
    assert err.startswith("ERROR IO: ")
    assert err.count("\n") == 1  # single machine-parsable line


def test_convert_unrecognized_format(tmp_path, capsys):
    junk = tmp_path / "junk.bin"
    junk.write_bytes(bytes(range(16)))
    code = main(["convert", str(junk), "-o", str(tmp_path / "out")])
    assert code == 2
    assert capsys.readouterr().err.startswith("ERROR UNSUPPORTED_FORMAT: ")


def test_convert_deterministic_across_runs_and_threads(tmp_path):
    src = tmp_path / "cloud.xyz"
    write_xyz(src, uniform_cloud(2000, seed=3))
    digests = []
    for name, threads in (("a", "1"), ("b", "1"), ("c", "4")):
        out = tmp_path / name
        assert main(["convert", str(src), "-o", str(out),
                     "--threads", threads]) == 0
        digests.append(tree_digest(out))
    assert digests[0] == digests[1] == digests[2]


# ------------------------------------------------------------------- info


def test_info_missing_directory(tmp_path, capsys):
    assert main(["info", str(tmp_path / "nope")]) == 3
    assert capsys.readouterr().err.startswith("ERROR IO: ")


def test_info_bad_manifest(tmp_path, capsys):
    out = tmp_path / "out"
    out.mkdir()
    (out / "manifest.json").write_text("{\"foo\": 1}")
    assert main(["info", str(out)]) == 2
    assert capsys.readouterr().err.startswith("ERROR TILE_CORRUPT: ")


# ---------------------------------------------------------------- segment


def test_segment_reruns_with_new_params(tmp_path, capsys):
    src = tmp_path / "plane.xyz"
    write_xyz(src, plane_cloud(800, normal=(0, 0, 1), d=0.0, jitter=0.001,
                               seed=4))
    out = tmp_path / "out"
    assert main(["convert", str(src), "-o", str(out)]) == 0
    first = json.loads((out / "byproduct.json").read_text())
    assert len(first["planes"]) == 1

    # raising min-inliers beyond the cloud size clears every plane
    assert main(["segment", str(out), "--min-inliers", "5000"]) == 0
    second = json.loads((out / "byproduct.json").read_text())
    assert second["planes"] == []
    assert second["pointCount"] == first["pointCount"]


def test_segment_requires_existing_build(tmp_path, capsys):
    assert main(["segment", str(tmp_path / "nothing")]) == 3
    assert capsys.readouterr().err.startswith("ERROR IO: ")


# ------------------------------------------------------------------ layers


def test_layer_roundtrip_commands(tmp_path, capsys):
    doc = random_document(seed=21)
    src = tmp_path / "layer.json"
    src.write_bytes(export_layer_json(doc))

    out_json = tmp_path / "copy.json"
    assert main(["export-layer", str(src), "-o", str(out_json)]) == 0
    assert out_json.read_bytes() == export_layer_json(doc)

    out_dxf = tmp_path / "layer.dxf"
    assert main(["export-layer", str(src), "-o", str(out_dxf)]) == 0
    text = out_dxf.read_text()
    assert text.startswith("0\nSECTION")
    assert "ENTITIES" in text

    capsys.readouterr()
    assert main(["import-layer", str(src)]) == 0
    printed = capsys.readouterr().out
    assert printed == f"layer: {doc.id}, series: {len(doc.series)}\n"


def test_import_layer_rejects_bad_documents(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["import-layer", str(bad)]) == 2
    assert capsys.readouterr().err.startswith("ERROR VALIDATION: ")

    stale = tmp_path / "stale.json"
    stale.write_text(json.dumps({"schema": "measure/99", "id": "x"}))
    assert main(["import-layer", str(stale)]) == 2
    assert capsys.readouterr().err.startswith("ERROR SCHEMA_VERSION: ")


def test_export_layer_unknown_format(tmp_path, capsys):
    doc = random_document(seed=22)
    src = tmp_path / "layer.json"
    src.write_bytes(export_layer_json(doc))
    code = main(["export-layer", str(src), "-o", str(tmp_path / "x.stl"),
                 "--format", "stl"])
    assert code == 1  # argparse choice rejection is a usage error
    assert capsys.readouterr().err.startswith("ERROR USAGE: ")


# ------------------------------------------------------------------- usage


def test_usage_errors(capsys):
    assert main([]) == 1
    assert capsys.readouterr().err.startswith("ERROR USAGE: ")
    assert main(["frobnicate"]) == 1
    assert main(["convert", "in.las"]) == 1  # missing -o
    assert main(["--help"]) == 0


def test_json_logs(one_point, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["--json-logs", "convert", str(one_point),
                 "-o", str(out)]) == 0
    lines = [l for l in capsys.readouterr().err.splitlines() if l.strip()]
    assert lines, "expected NDJSON log lines"
    for line in lines:
        obj = json.loads(line)
        assert {"ts", "level", "logger", "message"} <= set(obj)


def test_serve_requires_config(capsys, monkeypatch):
    monkeypatch.delenv("CLOUDATELIER_CONFIG", raising=False)
    assert main(["serve"]) == 1
    assert capsys.readouterr().err.startswith("ERROR USAGE: ")


# ------------------------------------------------------------------- serve


def test_serve_end_to_end(tmp_path):
    from cloudatelier.collab import CollabClient

    src = tmp_path / "cloud.xyz"
    write_xyz(src, uniform_cloud(300, seed=8))
    data_dir = tmp_path / "data"
    assert main(["convert", str(src), "-o", str(data_dir)]) == 0

    cfg_path = tmp_path / "project.json"
    cfg_path.write_text(json.dumps({
        "projectId": "demo",
        "dataDir": "data",
        "users": [{"name": "ana", "token": "tok", "role": "curator"}],
    }))

    env = dict(os.environ)
    proc = subprocess.Popen(
        [sys.executable, "-m", "cloudatelier", "serve", str(cfg_path),
         "--http", "0", "--collab", "0"],
        stderr=subprocess.PIPE, text=True, env=env)
    try:
        ports = {}
        deadline = time.time() + 20
        while time.time() < deadline and "collab" not in ports:
            line = proc.stderr.readline()
            if not line:
                break
            if "collab port" in line:
                parts = line.replace(",", "").split()
                ports["collab"] = int(parts[parts.index("port") + 1])
                ports["http"] = int(parts[-1])
        assert ports, "server did not report its ports"

        with CollabClient("127.0.0.1", ports["collab"], "demo", "tok") as c:
            lid = "00000000-0000-0000-0000-0000000000aa"
            out = c.send_op("createLayer", lid, payload={"name": "field"})
            assert out["status"] == "accepted"

        import urllib.request
        got = urllib.request.urlopen(
            f"http://127.0.0.1:{ports['http']}/projects/demo/manifest.json")
        assert got.status == 200

        proc.send_signal(signal.SIGINT)
        assert proc.wait(timeout=20) == 0
    finally:
        if proc.poll() is None:
            proc.kill()
            proc.wait()


def test_serve_env_config_fallback(tmp_path, monkeypatch):
    src = tmp_path / "cloud.xyz"
    write_xyz(src, uniform_cloud(50, seed=9))
    data_dir = tmp_path / "data"
    assert main(["convert", str(src), "-o", str(data_dir)]) == 0
    cfg_path = tmp_path / "project.json"
    cfg_path.write_text(json.dumps({
        "projectId": "envdemo",
        "dataDir": "data",
        "users": [{"name": "ana", "token": "tok", "role": "curator"}],
    }))

    env = dict(os.environ, CLOUDATELIER_CONFIG=str(cfg_path))
    proc = subprocess.Popen(
        [sys.executable, "-m", "cloudatelier", "serve",
         "--http", "0", "--collab", "0"],
        stderr=subprocess.PIPE, text=True, env=env)
    try:
        line = ""
        deadline = time.time() + 20
        while time.time() < deadline:
            line = proc.stderr.readline()
            if "collab port" in line or not line:
                break
        assert "envdemo" in line
        proc.send_signal(signal.SIGINT)
        assert proc.wait(timeout=20) == 0
    finally:
        if proc.poll() is None:
            proc.kill()
            proc.wait()
