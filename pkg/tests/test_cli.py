import json
import os
import signal
import socket
import subprocess
import sys
import threading
import time
import urllib.request

import pytest

from olacat import cli
from olacat.catalog import Catalog
from olacat.oai.provider import ProviderIdentity, RecordHeader
from olacat.record import MetadataElement, OlacRecord
from olacat.server import ServiceState, build_server
from olacat.vocab import parse_language_code
from olacat.xmlio import read_stream, serialize_record

from conftest import FIXTURES, fixed_clock

LAU_RECORD = OlacRecord((
    MetadataElement(name="title", lang=parse_language_code("x-sil-LLU"),
                    content="Na tala 'uria na idulaa diana"),
    MetadataElement(name="subject", qualifier="language", code="x-sil-LLU",
                    content="Lau"),
    MetadataElement(name="language", qualifier="language", code="x-sil-LLU"),
))


def write_config(tmp_path, **overrides) -> str:
    config = {"catalog_dir": str(tmp_path / "catalog")}
    config.update(overrides)
    path = tmp_path / "olacat.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    return str(path)


def seeded_catalog(tmp_path) -> Catalog:
    catalog = Catalog(tmp_path / "catalog", clock=fixed_clock())
    catalog.ingest("fix", [
        (RecordHeader("lau-1", "2002-01-01"), LAU_RECORD),
        (RecordHeader("plain-1", "2002-01-02"), OlacRecord((
            MetadataElement(name="title", content="Field notes"),
            MetadataElement(name="language", qualifier="language", code="en"),
        ))),
    ])
    catalog.close()
    return catalog


# -- validate ---------------------------------------------------------------------


def test_validate_reference_file_exits_zero(capsys):
    assert cli.main(["validate", str(FIXTURES / "bloomfield.xml")]) == 0
    out = capsys.readouterr().out
    assert "errors: 0" in out


def test_validate_bad_language_code_exits_one(tmp_path, capsys):
    bad = OlacRecord((MetadataElement(
        name="subject", qualifier="language", code="x-sil"),))
    path = tmp_path / "bad.xml"
    path.write_bytes(serialize_record(bad))
    assert cli.main(["validate", str(path)]) == 1
    assert "lang.malformed" in capsys.readouterr().out


def test_validate_unreadable_path_exits_two(tmp_path, capsys):
    assert cli.main(["validate", str(tmp_path / "missing.xml")]) == 2
    assert "unreadable" in capsys.readouterr().err


def test_validate_strict_demotes_warnings(tmp_path, capsys):
    warny = OlacRecord((MetadataElement(name="subject", code="bare"),))
    path = tmp_path / "warny.xml"
    path.write_bytes(serialize_record(warny))
    assert cli.main(["validate", str(path)]) == 0
    assert cli.main(["validate", "--strict", str(path)]) == 1


def test_validate_stream_files(tmp_path, capsys):
    catalog = seeded_catalog(tmp_path)
    stream_path = tmp_path / "dump.olacx"
    stream_path.write_bytes(Catalog(tmp_path / "catalog").export_bytes("olac"))
    assert cli.main(["validate", str(stream_path)]) == 0
    assert "records: 2" in capsys.readouterr().out


def test_validate_json_output_is_machine_lines(tmp_path, capsys):
    warny = OlacRecord((MetadataElement(name="subject", code="bare"),))
    path = tmp_path / "warny.xml"
    path.write_bytes(serialize_record(warny))
    cli.main(["validate", "--json", str(path)])
    line = capsys.readouterr().out.strip().splitlines()[0]
    assert line.split("\t")[0] == "warning"


# -- config -----------------------------------------------------------------------


def test_bad_config_aborts_before_side_effects(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    code = cli.main(["--config", str(path), "search", "--text", "x"])
    assert code == 2
    assert "config error" in capsys.readouterr().err
    assert not (tmp_path / "catalog").exists()


def test_unknown_config_key_rejected(tmp_path, capsys):
    path = tmp_path / "extra.json"
    path.write_text(json.dumps({"catalog_dir": "c", "funny": 1}), encoding="utf-8")
    assert cli.main(["--config", str(path), "search", "--text", "x"]) == 2


def test_config_env_var(tmp_path, capsys, monkeypatch):
    seeded_catalog(tmp_path)
    monkeypatch.setenv("OLACAT_CONFIG", write_config(tmp_path))
    assert cli.main(["search", "--text", "notes"]) == 0
    assert "plain-1" in capsys.readouterr().out


# -- search -----------------------------------------------------------------------


def test_search_language_code_finds_lau_record(tmp_path, capsys):
    seeded_catalog(tmp_path)
    config = write_config(tmp_path)
    assert cli.main(["--config", config, "search", "--language", "x-sil-LLU"]) == 0
    out = capsys.readouterr().out
    assert "lau-1" in out and "Na tala" in out


def test_search_name_and_code_print_identical_output(tmp_path, capsys):
    seeded_catalog(tmp_path)
    config = write_config(tmp_path)
    cli.main(["--config", config, "search", "--language", "Lau", "--json"])
    by_name = capsys.readouterr().out
    cli.main(["--config", config, "search", "--language", "x-sil-llu", "--json"])
    by_code = capsys.readouterr().out
    assert by_name == by_code
    assert json.loads(by_name)["total"] == 1


def test_search_without_criteria_exits_two(tmp_path, capsys):
    seeded_catalog(tmp_path)
    assert cli.main(["--config", write_config(tmp_path), "search"]) == 2
    assert "criterion" in capsys.readouterr().err


# -- register / export ---------------------------------------------------------------


def test_register_and_duplicate(tmp_path, capsys):
    config = write_config(tmp_path)
    assert cli.main(["--config", config, "register", "ldc", "http://ldc.test/oai"]) == 0
    assert cli.main(["--config", config, "register", "ldc", "http://x.test/oai"]) == 1
    assert cli.main(["--config", config, "register", "BAD ID", "http://x.test"]) == 2


def test_export_writes_parseable_stream(tmp_path, capsys):
    seeded_catalog(tmp_path)
    out_path = tmp_path / "dump.olacx"
    code = cli.main(["--config", write_config(tmp_path), "export",
                     "-o", str(out_path)])
    assert code == 0
    entries, diagnostics = read_stream(out_path.read_bytes())
    assert len(entries) == 2 and diagnostics == []


# -- harvest over real HTTP -----------------------------------------------------------


@pytest.fixture
def http_provider(tmp_path_factory):
    """A provider catalog served over loopback HTTP."""
    root = tmp_path_factory.mktemp("provider")
    catalog = Catalog(root / "catalog", clock=fixed_clock())
    items = [(RecordHeader(f"h-{i}", "2002-03-0%d" % (i + 1)), OlacRecord((
        MetadataElement(name="title", content=f"Holding {i}"),)))
        for i in range(5)]
    catalog.ingest("self", items)
    identity = ProviderIdentity(repository_name="HTTP Fixture",
                                base_url="http://127.0.0.1/oai")
    state = ServiceState(catalog, identity, clock=fixed_clock(), secret=b"hp")
    server = build_server(state, port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}/oai"
    server.shutdown()
    server.server_close()
    catalog.close()


def test_harvest_over_http(tmp_path, http_provider, capsys):
    config = write_config(tmp_path)
    assert cli.main(["--config", config, "register", "up", http_provider]) == 0
    capsys.readouterr()
    assert cli.main(["--config", config, "harvest", "--full"]) == 0
    assert "added=5" in capsys.readouterr().out
    catalog = Catalog(tmp_path / "catalog")
    assert len(catalog) == 5
    catalog.close()


def test_harvest_unknown_archive_exits_two(tmp_path, capsys):
    seeded_catalog(tmp_path)
    config = write_config(tmp_path)
    assert cli.main(["--config", config, "harvest", "--full",
                     "--archive", "ghost"]) == 2


def test_one_unreachable_archive_of_two_exits_one(tmp_path, http_provider, capsys):
    config = write_config(tmp_path)
    cli.main(["--config", config, "register", "up", http_provider])
    cli.main(["--config", config, "register", "down", "http://127.0.0.1:9/oai"])
    capsys.readouterr()
    code = cli.main(["--config", config, "harvest", "--full", "--json"])
    assert code == 1
    reports = {r["archive"]: r for r in json.loads(capsys.readouterr().out)}
    assert reports["up"]["added"] == 5 and not reports["up"]["errors"]
    assert reports["down"]["errors"]


def test_incremental_without_history_is_domain_failure(tmp_path, http_provider, capsys):
    config = write_config(tmp_path)
    cli.main(["--config", config, "register", "up", http_provider])
    capsys.readouterr()
    assert cli.main(["--config", config, "harvest", "--incremental"]) == 1
    assert "no successful harvest" in capsys.readouterr().out


# -- serve ------------------------------------------------------------------------


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def test_serve_port_in_use_exits_two(tmp_path, capsys):
    seeded_catalog(tmp_path)
    holder = socket.socket()
    holder.bind(("127.0.0.1", 0))
    port = holder.getsockname()[1]
    try:
        code = cli.main(["--config", write_config(tmp_path), "serve",
                         "--port", str(port)])
    finally:
        holder.close()
    assert code == 2
    assert "cannot bind" in capsys.readouterr().err


def test_serve_subprocess_answers_and_shuts_down_cleanly(tmp_path):
    seeded_catalog(tmp_path)
    config = write_config(tmp_path)
    port = _free_port()
    process = subprocess.Popen(
        [sys.executable, "-m", "olacat.cli", "--config", config,
         "serve", "--port", str(port)],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE)
    try:
        base = f"http://127.0.0.1:{port}"
        deadline = time.time() + 15
        last_error = None
        while time.time() < deadline:
            try:
                with urllib.request.urlopen(base + "/oai?verb=Identify", timeout=2) as r:
                    body = r.read()
                break
            except OSError as exc:
                last_error = exc
                time.sleep(0.1)
        else:
            raise AssertionError(f"server never came up: {last_error}")
        assert b"<Identify>" in body
        with urllib.request.urlopen(
                base + "/api/search?language=Lau", timeout=5) as r:
            payload = json.loads(r.read())
        assert payload["total"] == 1
        process.send_signal(signal.SIGTERM)
        assert process.wait(timeout=15) == 0
    finally:
        if process.poll() is None:
            process.kill()
    # the catalog must reload consistently after shutdown
    catalog = Catalog(tmp_path / "catalog")
    catalog.check()
    assert len(catalog) == 2
    catalog.close()
