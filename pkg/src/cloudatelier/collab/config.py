"""Project configuration: identity, data directory, users, build overrides.

One JSON file per project:

    {
      "projectId": "demo",
      "dataDir": "out/demo",
      "users": [{"name": "ana", "token": "s3cret", "role": "curator"}],
      "maxCurators": 3,
      "build": {"node_capacity": 20000},
      "chunkThreshold": 100000000
    }

Tokens are opaque bearer strings; the server maps token -> (name, role).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..errors import ValidationFailed
from .model import Role

DEFAULT_MAX_CURATORS = 3


@dataclass(frozen=True)
class User:
    name: str
    token: str
    role: Role


@dataclass(frozen=True)
class ProjectConfig:
    project_id: str
    data_dir: Path
    users: tuple[User, ...]
    max_curators: int = DEFAULT_MAX_CURATORS
    build_overrides: dict = field(default_factory=dict)
    chunk_threshold: Optional[int] = None

    def validated(self) -> "ProjectConfig":
        if not self.project_id:
            raise ValidationFailed("project id must be non-empty")
        curators = sum(1 for u in self.users if u.role is Role.CURATOR)
        if curators < 1:
            raise ValidationFailed("a project needs at least one curator")
        if curators > self.max_curators:
            raise ValidationFailed(
                f"project has {curators} curators, limit is {self.max_curators}")
        tokens = [u.token for u in self.users]
        if len(set(tokens)) != len(tokens):
            raise ValidationFailed("user tokens must be unique")
        names = [u.name for u in self.users]
        if len(set(names)) != len(names):
            raise ValidationFailed("user names must be unique")
        return self

    def authenticate(self, token: str) -> Optional[User]:
        for u in self.users:
            if u.token == token:
                return u
        return None


def _require(obj: dict, key: str, kind: type):
    if key not in obj:
        raise ValidationFailed(f"project config is missing {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise ValidationFailed(f"project config field {key!r} must be "
                               f"{kind.__name__}")
    return value


def config_from_obj(obj: dict, base_dir: Path | str = ".") -> ProjectConfig:
    project_id = _require(obj, "projectId", str)
    data_dir = Path(base_dir) / _require(obj, "dataDir", str)
    users = []
    for entry in _require(obj, "users", list):
        if not isinstance(entry, dict):
            raise ValidationFailed("each user must be an object")
        name = _require(entry, "name", str)
        token = _require(entry, "token", str)
        role_raw = _require(entry, "role", str)
        try:
            role = Role(role_raw)
        except ValueError:
            raise ValidationFailed(
                f"unknown role {role_raw!r} for user {name!r}") from None
        users.append(User(name=name, token=token, role=role))
    max_curators = obj.get("maxCurators", DEFAULT_MAX_CURATORS)
    if not isinstance(max_curators, int) or max_curators < 1:
        raise ValidationFailed("maxCurators must be a positive integer")
    build = obj.get("build", {})
    if not isinstance(build, dict):
        raise ValidationFailed("build overrides must be an object")
    chunk_threshold = obj.get("chunkThreshold")
    if chunk_threshold is not None and not isinstance(chunk_threshold, int):
        raise ValidationFailed("chunkThreshold must be an integer")
    return ProjectConfig(
        project_id=project_id,
        data_dir=data_dir,
        users=tuple(users),
        max_curators=max_curators,
        build_overrides=dict(build),
        chunk_threshold=chunk_threshold,
    ).validated()


def load_project_config(path: Path | str) -> ProjectConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileNotFoundError(f"cannot read project config {path}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationFailed(f"project config is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValidationFailed("project config must be a JSON object")
    # relative dataDir resolves against the config file's directory
    return config_from_obj(obj, base_dir=path.parent)
