"""System-base normalization and its inverse.

Power quantities divide by the system base; each unit's inertia, damping,
and droop are rebased from its own rating to the system base so fleet
aggregation becomes a plain sum.  Prices and time constants are untouched.
"""
from __future__ import annotations

from dataclasses import replace

from .types import GeneratorAsset, PlanningInstance, RepresentativeDay


class AlreadyNormalized(ValueError):
    """to_per_unit applied to an instance that is already per-unit."""


def _scale_generator(gen: GeneratorAsset, s_base: float,
                     to_pu: bool) -> GeneratorAsset:
    share = gen.capacity / s_base if to_pu else gen.capacity  # capacity is p.u. when inverting
    changes: dict = {}
    if to_pu:
        changes["capacity"] = gen.capacity / s_base
        if gen.ramp_up is not None:
            changes["ramp_up"] = gen.ramp_up / s_base
        if gen.ramp_down is not None:
            changes["ramp_down"] = gen.ramp_down / s_base
        if gen.inertia is not None:
            changes["inertia"] = gen.inertia * share
        if gen.damping is not None:
            changes["damping"] = gen.damping * share
        if gen.droop is not None:
            changes["droop"] = gen.droop / share
    else:
        changes["capacity"] = gen.capacity * s_base
        if gen.ramp_up is not None:
            changes["ramp_up"] = gen.ramp_up * s_base
        if gen.ramp_down is not None:
            changes["ramp_down"] = gen.ramp_down * s_base
        if gen.inertia is not None:
            changes["inertia"] = gen.inertia / share
        if gen.damping is not None:
            changes["damping"] = gen.damping / share
        if gen.droop is not None:
            changes["droop"] = gen.droop * share
    return replace(gen, **changes)


def _scale_day(day: RepresentativeDay, factor: float) -> RepresentativeDay:
    return replace(
        day,
        load_kw={n: s * factor for n, s in day.load_kw.items()},
        solar_kw={g: s * factor for g, s in day.solar_kw.items()},
    )


def to_per_unit(instance: PlanningInstance) -> PlanningInstance:
    """Return a copy with all power quantities on the system base."""
    if instance.per_unit:
        raise AlreadyNormalized("instance is already normalized")
    s_base = instance.grid.s_base
    if not s_base > 0:
        raise ValueError("system base must be positive")
    inv = 1.0 / s_base
    return replace(
        instance,
        lines=tuple(replace(ln, s_max=ln.s_max * inv) for ln in instance.lines),
        generators=tuple(_scale_generator(g, s_base, True)
                         for g in instance.generators),
        grid=replace(instance.grid,
                     import_limit=instance.grid.import_limit * inv,
                     export_limit=instance.grid.export_limit * inv,
                     import_limit_q=instance.grid.import_limit_q * inv,
                     export_limit_q=instance.grid.export_limit_q * inv),
        days=tuple(_scale_day(d, inv) for d in instance.days),
        per_unit=True,
    )


def from_per_unit(instance: PlanningInstance) -> PlanningInstance:
    """Inverse of to_per_unit."""
    if not instance.per_unit:
        raise ValueError("instance is not normalized")
    s_base = instance.grid.s_base
    return replace(
        instance,
        lines=tuple(replace(ln, s_max=ln.s_max * s_base) for ln in instance.lines),
        generators=tuple(_scale_generator(g, s_base, False)
                         for g in instance.generators),
        grid=replace(instance.grid,
                     import_limit=instance.grid.import_limit * s_base,
                     export_limit=instance.grid.export_limit * s_base,
                     import_limit_q=instance.grid.import_limit_q * s_base,
                     export_limit_q=instance.grid.export_limit_q * s_base),
        days=tuple(_scale_day(d, s_base) for d in instance.days),
        per_unit=False,
    )
