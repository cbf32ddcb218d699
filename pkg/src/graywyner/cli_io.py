"""Grid sweeps and plot-ready serialization shared by the CLI and the
verification suite.

CSV schema: one comment line with the sweep parameters and units, then
the header ``alpha,beta,value,region`` and the rows in row-major grid
order.  Values are printed with 9 significant digits, '.' decimal
separator; unreachable points leave the value field empty; unbounded
values print the literal ``inf``.  Output is byte-for-byte deterministic
for fixed arguments.
"""

from __future__ import annotations

import json
import math

import numpy as np

from . import dsbs, gaussian, otdiv
from .core import DomainError, binary_entropy, binary_entropy_inv

SURFACE_QUANTITIES = (
    "increasing",
    "lower",
    "upper",
    "rd",
    "lossy",
    "psi-lower",
    "phi-upper",
    "conv-phi",
)


def units_for(source):
    return "bits" if source == "dsbs" else "nats"


def _dsbs_rows(p, which, steps, d1, d2):
    src = dsbs.DsbsSource(p)
    if which == "rd":
        grid = np.linspace(0.0, 0.5, steps)
    else:
        grid = np.linspace(0.0, 1.0, steps)
    for x in grid:
        for y in grid:
            if which == "rd":
                val = dsbs.rate_distortion_dsbs(src, x, y)
                label = dsbs.classify_point(
                    src, 1 - binary_entropy(x), 1 - binary_entropy(y)
                )
            elif which == "lossy":
                if d1 is None or d2 is None:
                    raise DomainError("lossy sweep needs --d1 and --d2")
                val = dsbs.lossy_gw_rate_dsbs(src, x, y, d1, d2)
                ae = float(np.clip(1 - binary_entropy(d1) - x, 0, 1))
                be = float(np.clip(1 - binary_entropy(d2) - y, 0, 1))
                label = dsbs.classify_point(src, ae, be)
            elif which == "increasing":
                val = dsbs.upsilon_star(src, x, y)
                label = dsbs.classify_point(src, x, y)
            elif which == "lower":
                label = dsbs.classify_point(src, x, y, fine=True)
                val = None if label == "OUTSIDE" else dsbs.lower_envelope_dsbs(src, x, y)
            elif which == "upper":
                label = dsbs.classify_point(src, x, y, fine=True)
                val = None if label == "OUTSIDE" else dsbs.upper_envelope_dsbs(src, x, y)
            elif which == "psi-lower":
                val = otdiv.psi_lower_dsbs(src, x, y)
                label = otdiv.psi_lower_region(src, x, y)
            elif which == "phi-upper":
                val = otdiv.phi_upper(src, x, y)
                label = ""
            elif which == "conv-phi":
                val, _ = otdiv.conv_phi_lower(src, x, y)
                label = otdiv.conv_phi_region(src, x, y)
            else:
                raise DomainError(f"unknown quantity {which!r} for dsbs surface")
            yield float(x), float(y), val, label


def _gaussian_rows(rho, which, steps, maxval, d1, d2):
    src = gaussian.GaussianSource(rho)
    grid = np.linspace(0.0, maxval, steps)
    for x in grid:
        for y in grid:
            if which in ("increasing", "lower"):
                val = gaussian.upsilon_g_star(src, x, y)
                label = gaussian.classify_point_g(src, x, y)
            elif which == "upper":
                val = math.inf
                label = gaussian.classify_point_g(src, x, y)
            elif which == "lossy":
                if d1 is None or d2 is None:
                    raise DomainError("lossy sweep needs --d1 and --d2")
                val = gaussian.lossy_gw_rate_gaussian(src, x, y, d1, d2)
                ae = max(0.5 * math.log(1 / d1) - x, 0.0)
                be = max(0.5 * math.log(1 / d2) - y, 0.0)
                label = gaussian.classify_point_g(src, ae, be)
            elif which == "psi-lower" or which == "conv-phi":
                val = gaussian.psi_lower_gaussian(src, x, y)
                label = ""
            elif which == "phi-upper":
                val = gaussian.phi_upper_gaussian(src, x, y)
                label = ""
            else:
                raise DomainError(f"unknown quantity {which!r} for gaussian surface")
            yield float(x), float(y), val, label


def surface_rows(source, param, which, steps=101, maxval=None, d1=None, d2=None):
    """Row-major (x, y, value, label) sweep of the requested quantity."""
    if steps < 2:
        raise DomainError("steps must be at least 2")
    if source == "dsbs":
        yield from _dsbs_rows(param, which, steps, d1, d2)
    elif source == "gaussian":
        yield from _gaussian_rows(param, which, steps, 2.0 if maxval is None else maxval, d1, d2)
    else:
        raise DomainError(f"unknown source {source!r}")


def format_value(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if v == math.inf:
        return "inf"
    return f"{float(v):.9g}"


def write_surface_csv(fh, source, param, which, steps=101, maxval=None, d1=None, d2=None):
    pname = "p" if source == "dsbs" else "rho"
    meta = f"# source={source} {pname}={format_value(param)} which={which} steps={steps} units={units_for(source)}"
    if d1 is not None:
        meta += f" d1={format_value(d1)} d2={format_value(d2)}"
    fh.write(meta + "\n")
    fh.write("alpha,beta,value,region\n")
    for x, y, v, label in surface_rows(source, param, which, steps, maxval, d1, d2):
        fh.write(f"{format_value(x)},{format_value(y)},{format_value(v)},{label}\n")


def json_ready(value):
    """Make a record JSON-serializable: infinities become the string 'inf'."""
    if isinstance(value, dict):
        return {k: json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_ready(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if isinstance(value, float):
        if value == math.inf:
            return "inf"
        if value == -math.inf:
            return "-inf"
    return value


def dump_record(record):
    return json.dumps(json_ready(record))
