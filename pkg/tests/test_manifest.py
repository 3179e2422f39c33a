from pathlib import Path

from ghostkitchen.manifest import MANIFEST_NAME, RunManifest, content_hash, read_manifest


def test_hash_is_stable(tmp_path: Path) -> None:
    """Key order does not matter; argument values and file bytes do."""
    data = tmp_path / "day.json"
    data.write_text("[]")
    base = content_hash({"a": 1, "b": 2}, [data])
    assert content_hash({"b": 2, "a": 1}, [data]) == base
    assert content_hash({"a": 1, "b": 3}, [data]) != base
    data.write_text("[1]")
    assert content_hash({"a": 1, "b": 2}, [data]) != base


def test_manifest_round_trip(tmp_path: Path) -> None:
    """A written manifest reads back unchanged, with the config among its inputs."""
    config = tmp_path / "run.toml"
    config.write_text("seed = 3\n")
    manifest = RunManifest.build(
        "generate",
        seed=3,
        output=tmp_path / "out",
        arguments={"days": 2, "instances": tmp_path / "days"},
        preset="desk",
        config_path=config,
    )
    path = manifest.write(tmp_path / "out")
    assert path.name == MANIFEST_NAME
    loaded = read_manifest(tmp_path / "out")
    assert loaded == manifest
    assert loaded.inputs == [str(config)]
    assert loaded.arguments["instances"] == str(tmp_path / "days")


def test_seed_changes_hash(tmp_path: Path) -> None:
    """Two runs differing only in seed hash differently."""
    a = RunManifest.build("generate", seed=1, output=tmp_path, arguments={})
    b = RunManifest.build("generate", seed=2, output=tmp_path, arguments={})
    assert a.content_hash != b.content_hash
