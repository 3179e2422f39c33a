"""Run manifests: what a command was asked to do, and a hash of what it read."""

from __future__ import annotations

import hashlib
import json
import typing as ty
from collections.abc import Iterable, Mapping
from pathlib import Path

from pydantic import BaseModel, ConfigDict

MANIFEST_NAME = "manifest.json"


def _blob_digest(data: bytes) -> bytes:
    """Git's object hash of a blob."""
    header = f"blob {len(data)}\0".encode()
    return hashlib.sha1(header + data, usedforsecurity=False).digest()


def content_hash(arguments: Mapping[str, ty.Any], inputs: Iterable[Path] = ()) -> str:
    """Hash of the canonical arguments and the bytes of every input file.

    Inputs are hashed in sorted path order, each as a git blob.
    """
    hasher = hashlib.sha256()
    hasher.update(json.dumps(arguments, sort_keys=True, default=str).encode())
    for path in sorted(inputs, key=str):
        hasher.update(str(path).encode() + b"\0")
        hasher.update(_blob_digest(path.read_bytes()))
    return hasher.hexdigest()


class RunManifest(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    command: str
    config_path: str | None = None
    seed: int
    preset: str | None = None
    output: str
    arguments: dict[str, ty.Any] = {}
    inputs: list[str] = []
    content_hash: str

    @classmethod
    def build(
        cls,
        command: str,
        *,
        seed: int,
        output: Path,
        arguments: Mapping[str, ty.Any],
        preset: str | None = None,
        config_path: Path | None = None,
        inputs: Iterable[Path] = (),
    ) -> RunManifest:
        files = sorted({*inputs, *([config_path] if config_path else [])}, key=str)
        canonical = json.loads(json.dumps(dict(arguments), sort_keys=True, default=str))
        return cls(
            command=command,
            config_path=str(config_path) if config_path else None,
            seed=seed,
            preset=preset,
            output=str(output),
            arguments=canonical,
            inputs=[str(path) for path in files],
            content_hash=content_hash(
                {"command": command, "seed": seed, "preset": preset, **canonical}, files
            ),
        )

    def write(self, directory: Path) -> Path:
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / MANIFEST_NAME
        path.write_text(self.model_dump_json(indent=2) + "\n")
        return path


def read_manifest(directory: Path) -> RunManifest:
    return RunManifest.model_validate_json((directory / MANIFEST_NAME).read_text())
