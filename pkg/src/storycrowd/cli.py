"""Command-line entry points: serve the API, build a study report, or run
the scripted-crowd simulator."""

from __future__ import annotations

import os
import sys

import click

from .errors import StorycrowdError


@click.group()
def main():
    """Crowd story-ideation platform."""


@main.command()
@click.option("--config", "config_path", default=None,
              help="Config file (key = value); overrides HG_CONFIG.")
def serve(config_path):
    """Start the HTTP service."""
    from .config import load_config
    from .service import serve as run_server

    try:
        cfg = load_config(config_path)
        run_server(cfg)
    except StorycrowdError as exc:
        raise click.ClickException(f"{exc.code}: {exc.message}")


@main.command()
@click.option("--ratings", required=True, type=click.Path(exists=True))
@click.option("--distances", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def report(ratings, distances, out_dir):
    """Aggregate ratings + distances into the study report."""
    from .reporting import report_csv, report_text
    from .stats import build_study_report

    try:
        rep = build_study_report(ratings, distances)
    except StorycrowdError as exc:
        raise click.ClickException(f"{exc.code}: {exc.message}")
    os.makedirs(out_dir, exist_ok=True)
    text = report_text(rep)
    with open(os.path.join(out_dir, "report.txt"), "w") as fh:
        fh.write(text)
    with open(os.path.join(out_dir, "report.csv"), "w") as fh:
        fh.write(report_csv(rep))
    click.echo(text)
    click.echo(f"wrote {out_dir}/report.txt and {out_dir}/report.csv")


@main.command()
@click.option("--profile", "profile_path", required=True,
              type=click.Path(exists=True))
@click.option("--server", required=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def sim(profile_path, server, out_dir):
    """Run the scripted worker crowd against a live service."""
    from .sim import SimProfile, run_sim

    try:
        profile = SimProfile.from_file(profile_path)
        result = run_sim(profile, server, out_dir)
    except StorycrowdError as exc:
        raise click.ClickException(f"{exc.code}: {exc.message}")
    click.echo(f"acceptances: {result.acceptances}")
    for reason, count in sorted(result.rejections.items()):
        click.echo(f"rejections[{reason}]: {count}")
    click.echo(f"histogram: {result.histogram_path}")
    for measure, s in result.summary.items():
        if s:
            click.echo(f"{measure}: median={s['median']:.2f}s "
                       f"mean={s['mean']:.2f}s sd={s['sd']:.2f}s")


if __name__ == "__main__":
    sys.exit(main())
