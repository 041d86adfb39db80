"""
SVG figures: (delta, rho) heatmaps and phase-transition curves.

Colour map is viridis throughout; delta runs along x and rho along y.
"""
import logging

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from core.errors import OutputError  # noqa: E402
from core.file_utils import normalize_path  # noqa: E402

logger = logging.getLogger(__name__)

COLOR_MAP = "viridis"
HEATMAP_PANELS = ("U", "L", "gamma_min_gap", "gamma_max_gap")


def _surface(rows, deltas, rhos, key):
    z = np.full((len(rhos), len(deltas)), np.nan)
    di = {d: i for i, d in enumerate(deltas)}
    ri = {r: i for i, r in enumerate(rhos)}
    for row in rows:
        if key == "gamma_min_gap":
            value = None if row.get("gamma_min") is None else row["gamma_min"] - row["rho"]
        elif key == "gamma_max_gap":
            value = None if row.get("gamma_max") is None else row["gamma_max"] - row["rho"]
        else:
            value = row.get(key)
        if value is not None:
            z[ri[row["rho"]], di[row["delta"]]] = value
    return z


def _save(fig, file_path):
    path = normalize_path(file_path)
    try:
        fig.savefig(path, format="svg", bbox_inches="tight")
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e
    finally:
        plt.close(fig)
    logger.info("Wrote %s", path)
    return path


def grid_heatmaps(rows, file_path, family):
    """One pcolormesh panel per quantity for a single bound family; all-NaN quantities are left out"""
    rows = [r for r in rows if r["family"] == family]
    deltas = sorted({r["delta"] for r in rows})
    rhos = sorted({r["rho"] for r in rows})
    panels = [p for p in HEATMAP_PANELS if not np.all(np.isnan(_surface(rows, deltas, rhos, p)))]

    fig, axes = plt.subplots(1, len(panels), figsize=(4.5 * len(panels), 4), squeeze=False)
    for ax, key in zip(axes[0], panels):
        z = _surface(rows, deltas, rhos, key)
        mesh = ax.pcolormesh(deltas, rhos, z, cmap=COLOR_MAP, shading="nearest")
        fig.colorbar(mesh, ax=ax)
        ax.set_title(f"{key} ({family})")
        ax.set_xlabel("delta")
        ax.set_ylabel("rho")
    return _save(fig, file_path)


def phase_plot(curves, file_path):
    """rho_star(delta) per family, with 1/rho_star on a log scale alongside"""
    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
    cmap = plt.get_cmap(COLOR_MAP)
    for i, (family, points) in enumerate(sorted(curves.items())):
        color = cmap(i / max(len(curves) - 1, 1))
        deltas = [p.delta for p in points]
        left.plot(deltas, [p.rho_star for p in points], label=family, color=color)
        feasible = [p for p in points if p.inverse is not None]
        right.semilogy([p.delta for p in feasible], [p.inverse for p in feasible], label=family, color=color)
    left.set_xlabel("delta")
    left.set_ylabel("rho_star")
    right.set_xlabel("delta")
    right.set_ylabel("1 / rho_star")
    left.legend()
    right.legend()
    return _save(fig, file_path)
