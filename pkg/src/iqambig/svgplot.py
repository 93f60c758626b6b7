"""Deterministic SVG charts for benchmark reports.

Hand-assembled SVG text: no timestamps, no randomness, numbers rendered
with a fixed format, so a rerun of the same experiment produces the same
bytes.
"""

_BAR_COLOR = "#4878cf"
_WIDTH_COLOR = "#2e8b57"
_GROUP_COLOR = "#d9d9d9"


def _fmt(value):
    return format(float(value), ".6g")


def accuracy_ambiguity_chart(entries, title):
    """Chart one distortion: PLCC bars plus mean ambiguity width markers.

    ``entries`` is a list of (label, plcc, mean_width, top_group)
    tuples. Bars show correlation on a 0..1 axis, circles show mean
    normalized interval width on a secondary axis scaled to its maximum,
    and a gray backdrop marks the statistical top group.
    """
    entries = sorted(entries, key=lambda e: (-e[1], e[0]))
    n = len(entries)
    if n == 0:
        raise ValueError("chart needs at least one entry")
    slot = 88
    left, right, top, bottom = 70, 70, 46, 60
    plot_w = slot * n
    plot_h = 260
    width = left + plot_w + right
    height = top + plot_h + bottom
    max_width_value = max((e[2] for e in entries), default=0.0)
    scale_w = max_width_value if max_width_value > 0 else 1.0

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="15">{title}</text>',
    ]
    for idx, (label, _, _, top_group) in enumerate(entries):
        if top_group:
            x = left + idx * slot + 6
            parts.append(
                f'<rect x="{x}" y="{top}" width="{slot - 12}" height="{plot_h}" '
                f'fill="{_GROUP_COLOR}"/>'
            )
    axis_y = top + plot_h
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = axis_y - frac * plot_h
        parts.append(
            f'<line x1="{left}" y1="{_fmt(y)}" x2="{left + plot_w}" y2="{_fmt(y)}" '
            f'stroke="#cccccc" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{left - 8}" y="{_fmt(y + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt(frac)}</text>'
        )
    for idx, (label, corr, mean_w, _) in enumerate(entries):
        x0 = left + idx * slot
        bar_h = max(0.0, min(1.0, corr)) * plot_h
        parts.append(
            f'<rect x="{x0 + 14}" y="{_fmt(axis_y - bar_h)}" width="28" '
            f'height="{_fmt(bar_h)}" fill="{_BAR_COLOR}"/>'
        )
        cy = axis_y - (mean_w / scale_w) * plot_h
        parts.append(
            f'<circle cx="{x0 + 60}" cy="{_fmt(cy)}" r="6" fill="{_WIDTH_COLOR}"/>'
        )
        parts.append(
            f'<line x1="{x0 + 60}" y1="{_fmt(cy)}" x2="{x0 + 60}" y2="{axis_y}" '
            f'stroke="{_WIDTH_COLOR}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{x0 + slot / 2}" y="{axis_y + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{label}</text>'
        )
        parts.append(
            f'<text x="{x0 + slot / 2}" y="{axis_y + 38}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{_fmt(corr)} / {_fmt(mean_w)}</text>'
        )
    parts.append(
        f'<text x="{left - 44}" y="{top + plot_h / 2}" font-family="sans-serif" font-size="11" '
        f'transform="rotate(-90 {left - 44} {top + plot_h / 2})" text-anchor="middle">'
        "correlation</text>"
    )
    parts.append(
        f'<text x="{left + plot_w + 44}" y="{top + plot_h / 2}" font-family="sans-serif" '
        f'font-size="11" transform="rotate(90 {left + plot_w + 44} {top + plot_h / 2})" '
        f'text-anchor="middle">mean width (max {_fmt(max_width_value)})</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
