"""Abstract base class for dataset sources."""

from __future__ import annotations

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any

from ..exceptions import ConfigError
from ..schemas import DatasetSpec
from .records import GraphRecord


class DatasetSource(ABC):
    """
    Abstract base class for all dataset formats.

    Implement this to add a new on-disk format; register the class in
    `SourceRegistry.SOURCE_CLASSES` under its format name.
    """

    #: config keys that must name existing files
    path_keys: tuple[str, ...] = ()

    def __init__(self, name: str, config: dict[str, Any]):
        """
        Initialize a dataset source.

        Args:
            name: Unique identifier for this source
            config: Format-specific configuration (file paths)
        """
        self.name = name
        self.config = config

    def validate(self) -> None:
        """Check that every required path is configured and exists."""
        for key in self.path_keys:
            value = self.config.get(key)
            if not value:
                raise ConfigError(f"dataset source '{self.name}' needs '{key}'", detail=key)
            if not Path(value).exists():
                raise ConfigError(f"{key}: path does not exist: {value}", detail=str(value))

    @abstractmethod
    def load(self) -> tuple[DatasetSpec, list[GraphRecord]]:
        """Read and validate the whole dataset."""
        ...
