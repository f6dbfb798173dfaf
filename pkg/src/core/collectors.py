"""Summary collectors for report panels.

Each collector turns one report section into a Rich Panel; the commands print
them on stderr after the report has been written.
"""

from __future__ import annotations

from rich.panel import Panel
from rich.table import Table

from src.core.report import (
    CertificateReport,
    CrossCheck,
    MonodromyReport,
    OracleReport,
    Report,
    SflReport,
)

_VERDICT_STYLE = {
    "guaranteed": "green",
    "computed": "green",
    "inconclusive": "yellow",
    "endpoint-violated": "red",
}


def collect_sfl(section: SflReport) -> Panel:
    """Spectral flow value and one row per crossing."""
    table = Table(show_header=True, header_style="bold", expand=True, box=None)
    table.add_column("lambda", style="cyan")
    table.add_column("dim ker")
    table.add_column("signature")
    table.add_column("contribution")
    table.add_column("where", style="dim")
    for c in section.crossings:
        table.add_row(
            f"{c.lam:.10f}",
            str(c.kernel_dim),
            str(c.signature),
            f"{c.contribution:+d}",
            c.position if c.left_form is None else f"{c.position} (kink)",
        )
    title = (
        f"Spectral flow = {section.value:+d}  "
        f"[dim]N={section.cutoff_n}, delta={section.delta_used:.3g}, "
        f"at least {section.count_bound} bifurcation point(s)[/dim]"
    )
    return Panel(table, title=title, border_style="blue")


def collect_certificate(section: CertificateReport) -> Panel:
    """Sandwich margins, criteria and bound."""
    lines = [
        f"[bold]Sandwich:[/bold]   {'valid' if section.sandwich.valid else '[red]invalid[/red]'} "
        f"[dim](margins {section.sandwich.lower_margin:.3g}, "
        f"{section.sandwich.middle_margin:.3g}, {section.sandwich.upper_margin:.3g})[/dim]",
        f"[bold]C sources:[/bold]  {', '.join(section.c_sources)}",
        f"[bold]Endpoints:[/bold]  invertible = {section.endpoints_invertible}",
        f"[bold]Sign change:[/bold] index {section.sign_change_index}",
        f"[bold]Integer crossing:[/bold] witness {section.integer_witness}"
        + ("" if section.integer_criterion_applicable else " [dim](C not J-commuting)[/dim]"),
        f"[bold]Counts:[/bold]     {section.per_index_counts} -> raw {section.raw_bound}",
        f"[bold]Lower bound:[/bold] {section.count_lower_bound}",
        f"[bold]Finiteness:[/bold] {section.finiteness}",
    ]
    style = _VERDICT_STYLE.get(section.verdict, "cyan")
    return Panel("\n".join(lines), title=f"Certificate: {section.verdict}", border_style=style)


def collect_monodromy(section: MonodromyReport) -> Panel:
    table = Table(show_header=True, header_style="bold", expand=True, box=None)
    table.add_column("lambda", style="cyan")
    table.add_column("dim ker")
    table.add_column("sigma_min")
    table.add_column("resolved")
    for p in section.singular_points:
        table.add_row(f"{p.lam:.10f}", str(p.kernel_dim), f"{p.sigma_min:.2e}", str(p.resolved))
    if not section.singular_points:
        table.add_row("[dim]none[/dim]", "", "", "")
    order = f", order {section.observed_order:.2f}" if section.observed_order else ""
    return Panel(
        table,
        title=f"Monodromy scan [dim]({section.steps} steps{order})[/dim]",
        border_style="magenta",
    )


def collect_oracle(section: OracleReport) -> Panel:
    lines = [
        f"[bold]c:[/bold] {section.c_start:g} -> {section.c_end:g} (n = {section.n})",
        f"[bold]Spectral flow:[/bold] {section.sfl:+d}",
        f"[bold]Scalar bound:[/bold] {section.scalar_bound}",
    ]
    lines += [
        f"  lambda={c.lam:.10f}  c={c.value}  dim ker={c.kernel_dim}  {c.contribution:+d}"
        for c in section.crossings
    ]
    return Panel("\n".join(lines), title="Closed form", border_style="cyan")


def collect_checks(checks: list[CrossCheck]) -> Panel:
    table = Table(show_header=False, expand=True, box=None)
    table.add_column("status")
    table.add_column("check")
    table.add_column("detail", style="dim")
    for c in checks:
        mark = {True: "[green]pass[/green]", False: "[red]FAIL[/red]", None: "[dim]n/a[/dim]"}
        table.add_row(mark[c.passed], c.name, c.detail)
    return Panel(table, title="Cross-checks", border_style="blue")


def collect_report(report: Report) -> list[Panel]:
    """Every panel that applies to the report, in display order."""
    panels = []
    if report.oracle is not None:
        panels.append(collect_oracle(report.oracle))
    if report.certificate is not None:
        panels.append(collect_certificate(report.certificate))
    if report.sfl is not None:
        panels.append(collect_sfl(report.sfl))
    if report.monodromy is not None:
        panels.append(collect_monodromy(report.monodromy))
    if report.cross_checks:
        panels.append(collect_checks(report.cross_checks))
    return panels
