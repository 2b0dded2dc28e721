"""Ready-made analytic rules shipped with the package."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from ..foe import AnalyticRule, load_rule


def names() -> list[str]:
    return sorted(p.name[:-4] for p in resources.files(__name__).iterdir() if p.name.endswith(".foe"))


def path(name: str) -> Path:
    """Filesystem path of a bundled rule, by file stem (e.g. ``"pingpong_team"``)."""
    p = Path(str(resources.files(__name__).joinpath(f"{name}.foe")))
    if not p.is_file():
        raise KeyError(f"no bundled rule named {name!r}; available: {', '.join(names())}")
    return p


def load(name: str) -> AnalyticRule:
    return load_rule(path(name))
