"""Central style spec: all figure aesthetics live here.

``svg.hashsalt`` is pinned and SVG metadata drops the date so rerunning
a script on identical inputs produces identical bytes.
"""

POLICY_COLORS = {
    "exp3-wix": "#1f77b4",
    "exp3-ixt": "#d62728",
    "exp3-ixb": "#2ca02c",
    "exp3": "#7f7f7f",
}
FALLBACK_COLORS = ["#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22"]

SCATTER = {"s": 14, "alpha": 0.55, "color": "#1f77b4", "linewidths": 0}
ERRORBAR = {"capsize": 3, "markersize": 4, "marker": "o", "linewidth": 1.2}
REFERENCE_LINE = {"linestyle": "--", "linewidth": 1.2}

RC_PARAMS = {
    "figure.dpi": 100,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "grid.linewidth": 0.5,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.frameon": False,
    "svg.hashsalt": "noisybandits",
}

SVG_METADATA = {"Date": None}


def policy_color(name: str, index: int) -> str:
    return POLICY_COLORS.get(name, FALLBACK_COLORS[index % len(FALLBACK_COLORS)])
