"""Plain-text rendering of run metrics with golden-file-stable formatting."""

from __future__ import annotations

_STAGE_ORDER = ("ble", "fusion", "inference", "risk", "dispatch", "channel", "end_to_end")
_CHANNEL_ORDER = ("sms", "push", "call", "overall")


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


def render_report(metrics: dict) -> str:
    lines = []
    lines.append("RUN SUMMARY")
    lines.append(f"  windows processed   {metrics['windows']}")
    lines.append(f"  readings ingested   {metrics['readings_ingested']}")
    lines.append(f"  readings rejected   {metrics['readings_rejected']}")
    lines.append("")

    lines.append("LATENCY BREAKDOWN (ms)")
    lines.append(f"  {'stage':<12}{'count':>8}{'p50':>12}{'p95':>12}{'max':>12}")
    stage_latency = metrics["stage_latency_ms"]
    for stage in _STAGE_ORDER:
        row = stage_latency.get(stage, {"count": 0, "p50": 0.0, "p95": 0.0, "max": 0.0})
        lines.append(
            f"  {stage:<12}{row['count']:>8}"
            f"{_fmt(row['p50']):>12}{_fmt(row['p95']):>12}{_fmt(row['max']):>12}"
        )
    lines.append("")

    lines.append("ALERTS")
    alerts = metrics["alerts"]
    for key in ("YELLOW", "ORANGE", "RED", "manual", "suppressed", "undelivered"):
        lines.append(f"  {key:<12}{alerts.get(key, 0):>8}")
    lines.append("")

    lines.append("NOTIFICATION DELIVERY")
    lines.append(f"  {'channel':<10}{'sent':>8}{'delivered':>12}{'failed':>8}{'rate':>10}")
    notifications = metrics["notifications"]
    for name in _CHANNEL_ORDER:
        row = notifications[name]
        rate = "-" if row["success_rate"] is None else f"{row['success_rate']:.4f}"
        lines.append(
            f"  {name:<10}{row['sent']:>8}{row['delivered']:>12}{row['failed']:>8}{rate:>10}"
        )
    lines.append("")

    volunteers = metrics["volunteers"]
    lines.append("VOLUNTEERS")
    lines.append(f"  notified    {volunteers['notified']}")
    lines.append(f"  accepted    {volunteers['accepted']}")
    lines.append(f"  declined    {volunteers['declined']}")
    lines.append("")

    uplink = metrics.get("uplink", {})
    lines.append("UPLINK")
    for key in ("published", "sent", "still_buffered", "replayed", "dropped",
                "cloud_received", "sequence_gaps"):
        lines.append(f"  {key:<16}{uplink.get(key, 0):>8}")
    lines.append("")
    lines.append(f"DETERMINISM DIGEST {metrics['digest']}")
    lines.append("")
    return "\n".join(lines)
