import csv
import json

import pytest

from bithash.cli import EXIT_CONFIG, EXIT_DATA, EXIT_IO, main
from bithash.harness.experiment import CSV_COLUMNS
from bithash.vectors import BitVector, deserialize

SMALL = ["--users", "30", "--categories", "4", "--titles-per-category", "120", "--history-median", "10"]


@pytest.fixture
def items3(tmp_path):
    path = tmp_path / "items.jsonl"
    rows = [
        {"item_id": "a", "title": "Nikon D90 body", "category": "cam"},
        {"item_id": "b", "title": "Canon EOS 5D", "category": "cam"},
        {"item_id": "c", "title": "Bose IE2 earphones", "category": "audio"},
    ]
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))
    return path


class TestVectorize:
    def test_bit_records(self, tmp_path, items3):
        out = tmp_path / "v.bin"
        assert main(["vectorize", "--items", str(items3), "--out", str(out), "--type", "bit", "--dim", "8000"]) == 0
        blob = out.read_bytes()
        assert len(blob) == 3 * 1009
        manifest = json.loads((tmp_path / "v.bin.manifest.json").read_text())
        assert len(manifest["records"]) == 3
        for rec in manifest["records"].values():
            v = deserialize(blob[rec["offset"] : rec["offset"] + rec["length"]])
            assert isinstance(v, BitVector) and v.dim == 8000 and v.popcount > 0

    def test_rerun_is_byte_identical(self, tmp_path, items3):
        a, b = tmp_path / "a.bin", tmp_path / "b.bin"
        for out in (a, b):
            assert main(["vectorize", "--items", str(items3), "--out", str(out), "--type", "float", "--dim", "100"]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert len(a.read_bytes()) == 3 * (9 + 400)

    def test_tab_separated_input(self, tmp_path):
        src = tmp_path / "titles.tsv"
        src.write_text("x\tfirst title\ny\tsecond title\n")
        out = tmp_path / "v.bin"
        assert main(["vectorize", "--items", str(src), "--out", str(out), "--dim", "1000"]) == 0
        assert len(out.read_bytes()) == 2 * (9 + 125)

    def test_duplicate_ids(self, tmp_path, capsys):
        src = tmp_path / "titles.tsv"
        src.write_text("x\tone\nx\ttwo\n")
        out = tmp_path / "v.bin"
        assert main(["vectorize", "--items", str(src), "--out", str(out)]) == EXIT_DATA
        assert not out.exists()
        assert "duplicate" in capsys.readouterr().err

    def test_sign_hash_on_bits_rejected(self, tmp_path, items3):
        assert main(["vectorize", "--items", str(items3), "--out", str(tmp_path / "v"), "--sign-hash"]) == EXIT_CONFIG


class TestEvaluate:
    def test_synthetic_rows(self, tmp_path):
        out = tmp_path / "report.csv"
        argv = ["evaluate", "--synthetic", "--seed", "7", *SMALL, "--format", "csv", "--out", str(out)]
        assert main(argv) == 0
        lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert lines[0] == ",".join(CSV_COLUMNS)
        rows = list(csv.DictReader(lines))
        assert len(rows) == 8
        for r in rows:
            assert float(r["top1"]) <= float(r["top5"]) <= float(r["top10"])

    def test_both_formats(self, tmp_path):
        out = tmp_path / "rep"
        assert main(["evaluate", "--synthetic", *SMALL, "--dim", "256", "--out", str(out), "-q"]) == 0
        assert (tmp_path / "rep.csv").exists() and (tmp_path / "rep.md").exists()

    def test_from_files(self, tmp_path):
        data = tmp_path / "data"
        assert main(["synth", "--out", str(data), *SMALL]) == 0
        out = tmp_path / "r.csv"
        argv = ["evaluate", "--items", str(data / "items.jsonl"), "--events", str(data / "events.jsonl"), "--dim", "1000", "--format", "csv", "--out", str(out)]
        assert main(argv) == 0
        header = out.read_text().splitlines()[1]
        assert '"recall_sizes"' in header

    def test_missing_events_file(self, tmp_path, items3):
        out = tmp_path / "r.csv"
        code = main(["evaluate", "--items", str(items3), "--events", str(tmp_path / "nope.jsonl"), "--format", "csv", "--out", str(out)])
        assert code == EXIT_IO
        assert not out.exists()

    def test_no_usable_cases(self, tmp_path, items3):
        events = tmp_path / "events.jsonl"
        events.write_text(json.dumps({"user_id": "u", "ts": 1, "type": "view", "item_id": "a", "session_id": "s"}) + "\n")
        out = tmp_path / "r.csv"
        assert main(["evaluate", "--items", str(items3), "--events", str(events), "--out", str(out)]) == EXIT_DATA
        assert not out.with_suffix(".csv").exists()

    @pytest.mark.parametrize(
        "extra",
        [["--methods", "sideways-bit"], ["--dim", "0"], ["--ngram", "0"], ["--signal", "2"]],
    )
    def test_config_errors(self, tmp_path, extra):
        # argparse rejections exit with the same status as configuration errors
        try:
            code = main(["evaluate", "--synthetic", *SMALL, *extra, "-q"])
        except SystemExit as exc:
            code = exc.code
        assert code == EXIT_CONFIG

    def test_needs_input(self):
        assert main(["evaluate", "-q"]) == EXIT_CONFIG


def test_synth_writes_three_files(tmp_path):
    out = tmp_path / "d"
    assert main(["synth", "--out", str(out), *SMALL]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["events.jsonl", "items.jsonl", "truth.jsonl"]
    assert len((out / "truth.jsonl").read_text().splitlines()) == 30


def test_bench_csv(tmp_path, capsys):
    out = tmp_path / "b.csv"
    argv = ["bench", "--dim", "64", "--corpus", "8", "--history", "4", "--repeat", "1", "--min-time", "0.001", "--format", "csv", "--out", str(out)]
    assert main(argv) == 0
    assert out.read_text().startswith("op,mode,dim")


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "bithash" in capsys.readouterr().out
