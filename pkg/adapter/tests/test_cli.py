"""CLI exit-code contract. The model library is absent in this environment,
so the real-generator paths are exercised up to their documented errors."""
from sam_adapter.cli import main


def write_manifest(tmp_path, lines):
    path = tmp_path / "jobs.jsonl"
    path.write_text("".join(line + "\n" for line in lines))
    return path


def test_empty_manifest_exits_zero(tmp_path, capsys):
    manifest = write_manifest(tmp_path, [])
    code = main(["run", "--manifest", str(manifest), "--checkpoint",
                 str(tmp_path / "absent.pth"), "--out", str(tmp_path / "out")])
    assert code == 0
    assert "nothing to do" in capsys.readouterr().err
    assert not (tmp_path / "out" / "masks").exists()


def test_bad_manifest_exits_two(tmp_path, capsys):
    manifest = write_manifest(tmp_path, ['{"tile_id": "a"}'])
    code = main(["run", "--manifest", str(manifest), "--checkpoint",
                 str(tmp_path / "absent.pth"), "--out", str(tmp_path / "out")])
    assert code == 2
    assert "missing keys" in capsys.readouterr().err


def test_missing_checkpoint_exits_one(tmp_path, three_band_png, capsys):
    manifest = write_manifest(tmp_path, [
        f'{{"tile_id": "a", "snapshot": "{three_band_png}", "pps": 3, "mmra": 0}}'])
    code = main(["run", "--manifest", str(manifest), "--checkpoint",
                 str(tmp_path / "absent.pth"), "--out", str(tmp_path / "out")])
    assert code == 1
    assert "checkpoint not found" in capsys.readouterr().err


def test_missing_model_library_exits_one(tmp_path, three_band_png, capsys):
    checkpoint = tmp_path / "fake.pth"
    checkpoint.write_bytes(b"\x00")
    manifest = write_manifest(tmp_path, [
        f'{{"tile_id": "a", "snapshot": "{three_band_png}", "pps": 3, "mmra": 0}}'])
    code = main(["run", "--manifest", str(manifest), "--checkpoint",
                 str(checkpoint), "--out", str(tmp_path / "out")])
    assert code == 1
    assert "segment_anything" in capsys.readouterr().err
