"""CSV schemas accepted by the renderer, keyed by figure id.

The renderer plots numbers verbatim from these files and computes nothing
itself, so the headers must match bit-exactly.
"""

from __future__ import annotations

import csv


class SchemaError(ValueError):
    """Input CSV does not match the expected schema."""


SWEEP = ["beta", "cfi", "qfi", "gamma_t"]
DISCONTINUITIES = ["beta_star", "M", "delta_f"]
JENSEN = ["beta", "cfi", "jensen_bound", "fragile_trace", "residual_trace"]
MLE_BIAS = ["beta", "theta0", "mean_bias", "sem", "runs"]
BOSONIC = ["alpha", "cfi", "probe_n", "gamma_t"]
SPHERE = ["theta_n", "phi_n", "cfi", "epsilon"]
HPA = ["j_value", "m0_relative", "n1_absolute"]

FIGURE_SCHEMAS = {
    "fig1": SWEEP,
    "fig2": SWEEP,
    "fig3": JENSEN,
    "fig4": JENSEN,
    "fig5": SPHERE,
    "fig6": BOSONIC,
    "fig7": MLE_BIAS,
}


def read_table(path, expected_header: list) -> dict:
    """Parse a CSV into {column: list[float]} after an exact header check.

    Raises SchemaError naming the missing/unexpected columns, or on an empty
    body.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: file is empty")
        rows = list(reader)
    if header != expected_header:
        missing = [c for c in expected_header if c not in header]
        extra = [c for c in header if c not in expected_header]
        parts = []
        if missing:
            parts.append(f"missing columns: {', '.join(missing)}")
        if extra:
            parts.append(f"unexpected columns: {', '.join(extra)}")
        if not parts:
            parts.append(f"column order differs: got {header}")
        raise SchemaError(f"{path}: " + "; ".join(parts))
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    columns = {name: [] for name in expected_header}
    for i, row in enumerate(rows, start=2):
        if len(row) != len(expected_header):
            raise SchemaError(f"{path}: line {i} has {len(row)} fields, "
                              f"expected {len(expected_header)}")
        for name, value in zip(expected_header, row):
            try:
                columns[name].append(float(value))
            except ValueError:
                raise SchemaError(f"{path}: line {i}, column {name!r}: "
                                  f"not a number: {value!r}")
    return columns
