"""Dataset source registry keyed by name."""

from __future__ import annotations

from typing import Any, Dict, List

from ..exceptions import NotRegisteredError
from ..schemas import DatasetSpec
from .base import DatasetSource
from .citation_source import CitationSource
from .jsonl_source import JsonlSource
from .records import GraphRecord


class SourceRegistry:
    """Registry of dataset sources keyed by name."""

    SOURCE_CLASSES: dict[str, type[DatasetSource]] = {
        "jsonl": JsonlSource,
        "citation": CitationSource,
    }

    def __init__(self) -> None:
        self._sources: Dict[str, DatasetSource] = {}

    def register(self, name: str, fmt: str, config: dict[str, Any]) -> DatasetSource:
        """Create, validate and store a source for format ``fmt``."""
        source_class = self.SOURCE_CLASSES.get(fmt)
        if source_class is None:
            raise NotRegisteredError("dataset format", fmt, sorted(self.SOURCE_CLASSES))
        source = source_class(name=name, config=config)
        source.validate()
        self._sources[name] = source
        return source

    def list(self) -> List[str]:
        return list(self._sources.keys())

    def get(self, name: str) -> DatasetSource:
        if name not in self._sources:
            raise NotRegisteredError("dataset source", name, self.list())
        return self._sources[name]

    def load(self, name: str) -> tuple[DatasetSpec, list[GraphRecord]]:
        return self.get(name).load()
