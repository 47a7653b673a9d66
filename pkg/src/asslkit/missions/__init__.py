"""Shipped mission packages: checked specs, scenarios, and properties.

Each package is a directory with ``spec.assl``, ``scenarios/*.scenario``,
``props/*.prop``, and a ``README`` describing the modeled behavior. Every
shipped spec passes ``check_all`` with zero diagnostics, every scenario runs
to its halt within 1,000 ticks, and every property file holds at default
bounds under the environment documented in the package README.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..checker import CheckedSpec, check_all
from ..parser import parse_text
from ..runtime import Scenario, parse_scenario

MISSION_NAMES = (
    "ants_self_protecting",
    "ants_self_healing",
    "ants_self_configuring_and_scheduling",
    "voyager_image_processing",
)


@dataclass(frozen=True)
class MissionPackage:
    name: str
    root: Path

    @property
    def spec_path(self) -> Path:
        return self.root / "spec.assl"

    @property
    def readme_path(self) -> Path:
        return self.root / "README"

    def scenario_paths(self) -> tuple[Path, ...]:
        return tuple(sorted((self.root / "scenarios").glob("*.scenario")))

    def prop_paths(self) -> tuple[Path, ...]:
        return tuple(sorted((self.root / "props").glob("*.prop")))

    def source(self) -> str:
        return self.spec_path.read_text(encoding="utf-8")

    def load(self) -> CheckedSpec:
        """Parse and check the package spec."""
        return check_all(parse_text(self.source(), str(self.spec_path)))

    def scenario(self, name: str, spec: CheckedSpec | None = None) -> Scenario:
        path = self.root / "scenarios" / f"{name}.scenario"
        return parse_scenario(
            path.read_text(encoding="utf-8"), spec or self.load(), name
        )


def _package(name: str) -> MissionPackage:
    root = resources.files(__package__) / name
    return MissionPackage(name, Path(str(root)))


def ants_self_protecting() -> MissionPackage:
    """Worker security-checks incoming private messages."""
    return _package("ants_self_protecting")


def ants_self_healing() -> MissionPackage:
    """Ruler heals a worker whose heartbeats stop arriving."""
    return _package("ants_self_healing")


def ants_self_configuring_and_scheduling() -> MissionPackage:
    """Workers re-target instruments; the swarm orders targets by priority."""
    return _package("ants_self_configuring_and_scheduling")


def voyager_image_processing() -> MissionPackage:
    """Flyby picture sessions downlinked to an Earth station."""
    return _package("voyager_image_processing")


def all_missions() -> tuple[MissionPackage, ...]:
    return tuple(_package(name) for name in MISSION_NAMES)
