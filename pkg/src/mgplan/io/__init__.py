"""File formats, the bundled study network, and synthetic profiles."""
from .cigre18 import (attach_profiles, build_cigre18, cigre18_instance,
                      cigre18_with_days, default_days)
from .plots import IoError, emit_plot_csv
from .profiles import read_profiles_csv, synth_profiles, write_profiles_csv
from .report import (build_report, load_plan, plan_from_dict, plan_to_dict,
                     save_plan, save_report)
from .schema import (ParseError, ValidationError, load_instance,
                     parse_instance, save_instance, serialize_instance)

__all__ = [
    "IoError",
    "ParseError",
    "ValidationError",
    "attach_profiles",
    "build_cigre18",
    "build_report",
    "cigre18_instance",
    "cigre18_with_days",
    "default_days",
    "emit_plot_csv",
    "load_instance",
    "load_plan",
    "parse_instance",
    "plan_from_dict",
    "plan_to_dict",
    "read_profiles_csv",
    "save_instance",
    "save_plan",
    "save_report",
    "serialize_instance",
    "synth_profiles",
    "write_profiles_csv",
]
