"""Microgrid investment planning under static and transient islanding security.

The package plans generator and line investments for a distribution grid that
must ride through unannounced islanding events.  A master MILP sizes the
investments against grid-connected economics and worst-case islanding
penalties; a frequency-dynamics layer checks each islanding event for
rate-of-change, nadir, and steady-state frequency violations; an outer loop
tightens the allowed grid-exchange band until every event is transient-safe.
"""

__version__ = "0.1.0"
