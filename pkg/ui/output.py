"""
CSV, JSON and plain-text emission for command results.
"""
import csv
import io
import logging
import math

from core.errors import OutputError
from core.file_utils import normalize_path, read_file_with_auto_encoding, write_file_with_encoding
from core.finite_tails import PREFACTOR_FORMS

logger = logging.getLogger(__name__)

GRID_COLUMNS = ["delta", "rho", "family", "L", "U", "lambda_min", "lambda_max", "gamma_min", "gamma_max", "nu_opt"]
RATIO_COLUMNS = ["rho", "u_ratio_min", "u_ratio_max", "l_ratio_min", "l_ratio_max"]
PHASE_COLUMNS = ["delta", "family", "rho_star", "inverse", "feasible"]
TABLE_COLUMNS = ["k", "n", "N", "eps", "prob", "log10_prob"]
FINITE_COLUMNS = TABLE_COLUMNS + ["eig_term", "cover_term", "lambda_star", "gamma", "psi_derivative"] + [
    f"log_prefactor_{form}" for form in PREFACTOR_FORMS
]
COVER_COLUMNS = ["row", "N", "k", "m", "u", "r", "trials", "failures", "frequency", "standard_error",
                 "envelope_bound", "union_bound"]
COVER_TRIAL_COLUMNS = ["trial", "seed", "covered", "uncovered_count"]
EMPIRICAL_COLUMNS = ["n", "N", "k", "delta", "rho", "count", "U_est_max", "U_est_mean", "L_est_max",
                     "L_est_mean", "U_BT", "L_BT", "ratio_U", "ratio_L", "status"]


def format_cell(value):
    """Shortest round-trip text for floats, empty for missing values"""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_cell(text):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


def rows_to_csv(rows, columns):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(row.get(c)) for c in columns])
    return buffer.getvalue()


def csv_to_rows(text):
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    return [dict(zip(header, (parse_cell(cell) for cell in line))) for line in reader if line]


def read_csv(file_path):
    content, error = read_file_with_auto_encoding(file_path)
    if error:
        raise OutputError(f"cannot read {file_path}: {error}")
    return csv_to_rows(content)


def write_text(file_path, content):
    path = normalize_path(file_path)
    ok, error = write_file_with_encoding(path, content)
    if not ok:
        raise OutputError(f"cannot write {path}: {error}")
    logger.info("Wrote %s", path)
    return path


def emit(content, file_path=None, stream=None):
    """Write to a file when a path is given, otherwise to the stream (stdout)"""
    if file_path:
        return write_text(file_path, content)
    stream.write(content)
    if not content.endswith("\n"):
        stream.write("\n")
    return None


def sci(value):
    """Three significant digits in scientific notation, as in published tables"""
    if value is None:
        return "-"
    if isinstance(value, float) and (math.isnan(value) or math.isinf(value)):
        return str(value)
    return f"{value:.2e}"


def human_table(rows, columns):
    cells = [[c for c in columns]]
    for row in rows:
        line = []
        for c in columns:
            value = row.get(c)
            line.append(sci(value) if isinstance(value, float) or value is None else str(value))
        cells.append(line)
    widths = [max(len(r[i]) for r in cells) for i in range(len(columns))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(r, widths)) for r in cells) + "\n"
