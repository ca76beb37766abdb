"""Figure rendering for the report paths (PNG next to the CSV/JSON)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_PNG_META = {"Software": "micromaser"}


def render_figure1(rows: list[dict], path: str) -> None:
    """Ideal vs open photon growth with the limiting value."""
    t = [r["t"] for r in rows]
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.plot(t, [r["N_ideal"] for r in rows], color="tab:green", label="ideal cavity")
    ax.plot(t, [r["N_open_analytic"] for r in rows], color="tab:blue", label="open cavity (formula)")
    ax.plot(
        t, [r["N_open_numeric"] for r in rows],
        color="tab:orange", ls="--", lw=1.0, label="open cavity (simulation)",
    )
    ax.axhline(rows[0]["asymptote"], color="tab:red", lw=1.0, label="limiting value")
    ax.set_xlabel("t")
    ax.set_ylabel("mean photon number")
    ax.legend(loc="upper left")
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)


def render_sweep(rows: list[dict], param_name: str, path: str) -> None:
    """All swept quantities against the varied parameter."""
    x = [r[param_name] for r in rows]
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for key in rows[0]:
        if key == param_name:
            continue
        ax.plot(x, [r[key] for r in rows], marker="o", ms=3, label=key)
    ax.set_xlabel(param_name)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)


def render_compare(rows: list[dict], path: str) -> None:
    """Absolute errors of every checked quantity, log scale."""
    fig, ax = plt.subplots(figsize=(8.0, 4.2))
    groups: dict[str, list[tuple[int, float]]] = {}
    for i, r in enumerate(rows):
        name = r["quantity"].split("[")[0]
        groups.setdefault(name, []).append((i, max(r["abs_err"], 1e-18)))
    for name, pts in groups.items():
        ax.semilogy([p[0] for p in pts], [p[1] for p in pts], marker=".", ls="", label=name)
    ax.set_xlabel("check index")
    ax.set_ylabel("absolute error")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)


def render_simulation(rows: list[dict], path: str) -> None:
    """Photon number and first-moment magnitude along the trajectory."""
    t = [r["t"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 5.4), sharex=True)
    ax1.plot(t, [r["photon_number"] for r in rows], color="tab:blue")
    ax1.set_ylabel("mean photon number")
    ax2.plot(
        t,
        [abs(complex(r["re_first_moment"], r["im_first_moment"])) for r in rows],
        color="tab:purple",
    )
    ax2.set_ylabel("|<b>|")
    ax2.set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)
