"""Per-slot exchange bounds, the quantity the outer iteration tightens."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import PlanningInstance


class UnboundedExchange(ValueError):
    """An exchange bound is missing or non-finite."""


class InfeasibleBounds(ValueError):
    """Bounds contain negative or malformed entries."""


@dataclass(frozen=True)
class ExchangeBounds:
    """Import/export power ceilings per (block, day), p.u."""
    imports: np.ndarray           # (n_blocks, n_days)
    exports: np.ndarray

    @staticmethod
    def from_instance(instance: PlanningInstance,
                      n_blocks: int) -> "ExchangeBounds":
        n_days = len(instance.days)
        shape = (n_blocks, n_days)
        return ExchangeBounds(np.full(shape, instance.grid.import_limit),
                              np.full(shape, instance.grid.export_limit))

    def check(self) -> None:
        for name, arr in (("import", self.imports), ("export", self.exports)):
            if arr is None:
                raise UnboundedExchange(f"{name} bounds missing")
            if not np.all(np.isfinite(arr)):
                raise UnboundedExchange(f"{name} bounds contain non-finite "
                                        "entries; use a large finite cap")
            if np.any(arr < 0):
                raise InfeasibleBounds(f"{name} bounds contain negatives")

    def replace(self, imports: np.ndarray | None = None,
                exports: np.ndarray | None = None) -> "ExchangeBounds":
        return ExchangeBounds(
            self.imports if imports is None else np.asarray(imports, float),
            self.exports if exports is None else np.asarray(exports, float))
