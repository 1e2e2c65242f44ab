"""Run manifests: resolved configuration plus input digests, written as a
human-readable ``key = value`` file alongside every CLI output.

The ``cfg.*`` section doubles as a config file: feeding a manifest back via
``--config`` re-runs the command with the same resolved settings.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    command: str
    version: str
    config: dict[str, str] = field(default_factory=dict)
    inputs: dict[str, str] = field(default_factory=dict)  # name -> path
    digests: dict[str, str] = field(default_factory=dict)  # name -> sha256
    outputs: dict[str, str] = field(default_factory=dict)  # name -> path

    def add_input(self, name: str, path):
        self.inputs[name] = str(path)
        self.digests[name] = sha256_file(path)

    def write(self, path):
        lines = [f"command = {self.command}", f"version = {self.version}"]
        for key in sorted(self.config):
            lines.append(f"cfg.{key} = {self.config[key]}")
        for name in sorted(self.inputs):
            lines.append(f"input.{name} = {self.inputs[name]}")
            lines.append(f"digest.{name} = {self.digests[name]}")
        for name in sorted(self.outputs):
            lines.append(f"output.{name} = {self.outputs[name]}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def read(cls, path) -> "RunManifest":
        pairs = parse_keyvalue_file(path)
        manifest = cls(command=pairs.pop("command", ""), version=pairs.pop("version", ""))
        for key, value in pairs.items():
            section, _, name = key.partition(".")
            if section == "cfg":
                manifest.config[name] = value
            elif section == "input":
                manifest.inputs[name] = value
            elif section == "digest":
                manifest.digests[name] = value
            elif section == "output":
                manifest.outputs[name] = value
        return manifest


def parse_keyvalue_file(path) -> dict[str, str]:
    """Parse ``key = value`` lines (``#`` comments and blanks skipped)."""
    pairs = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            pairs[key.strip()] = value.strip()
    return pairs


def parse_config_file(path) -> dict[str, str]:
    """Config values from a plain config file or a previous run's manifest.

    Manifest bookkeeping keys (command, version, input/digest/output
    sections) are dropped; ``cfg.`` prefixes are stripped.
    """
    pairs = parse_keyvalue_file(path)
    config = {}
    for key, value in pairs.items():
        if key in ("command", "version"):
            continue
        section, _, name = key.partition(".")
        if section in ("input", "digest", "output"):
            continue
        if section == "cfg":
            config[name] = value
        else:
            config[key] = value
    return config
