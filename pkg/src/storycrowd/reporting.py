"""Render a StudyReport as an aligned text table and a long-format CSV."""

from __future__ import annotations

import csv
import io

from .stats import StudyReport


def report_text(report: StudyReport) -> str:
    out = io.StringIO()
    w = out.write
    w(f"Study report over {report.n_stories} paired stories\n\n")

    w("Ratings by aspect and condition (story-level means, 95% CI)\n")
    w(f"{'aspect':<16}{'condition':<10}{'mean':>8}{'ci95 low':>10}{'ci95 high':>11}\n")
    for aspect, conds in report.conditions.items():
        for cond, s in conds.items():
            w(f"{aspect:<16}{cond:<10}{s.mean:>8.3f}{s.ci95_low:>10.3f}{s.ci95_high:>11.3f}\n")
    w("\nPaired comparisons (NO_ROLE - ROLE)\n")
    w(f"{'aspect':<16}{'t':>8}{'df':>4}{'p (2-tail)':>12}{'cohen d':>9}\n")
    for aspect, c in report.comparisons.items():
        w(f"{aspect:<16}{c.t:>8.3f}{c.df:>4}{c.p_two_tailed:>12.4f}{c.cohens_d:>9.3f}\n")
    w("\nDistance metrics vs item-level relevance (negative expected)\n")
    w(f"{'metric':<16}{'pearson':>9}{'kendall':>9}{'n':>5}\n")
    for metric, c in report.correlations.items():
        w(f"{metric:<16}{c.pearson_rho:>9.3f}{c.kendall_tau:>9.3f}{c.n_items:>5}\n")
    return out.getvalue()


def report_csv(report: StudyReport) -> str:
    out = io.StringIO()
    w = csv.writer(out)
    w.writerow(["section", "key", "subkey", "stat", "value"])
    for aspect, conds in report.conditions.items():
        for cond, s in conds.items():
            w.writerow(["condition", aspect, cond, "mean", repr(s.mean)])
            w.writerow(["condition", aspect, cond, "ci95_low", repr(s.ci95_low)])
            w.writerow(["condition", aspect, cond, "ci95_high", repr(s.ci95_high)])
    for aspect, c in report.comparisons.items():
        w.writerow(["comparison", aspect, "", "t", repr(c.t)])
        w.writerow(["comparison", aspect, "", "df", c.df])
        w.writerow(["comparison", aspect, "", "p_two_tailed", repr(c.p_two_tailed)])
        w.writerow(["comparison", aspect, "", "cohens_d", repr(c.cohens_d)])
    for metric, c in report.correlations.items():
        w.writerow(["correlation", metric, "", "pearson_rho", repr(c.pearson_rho)])
        w.writerow(["correlation", metric, "", "kendall_tau", repr(c.kendall_tau)])
        w.writerow(["correlation", metric, "", "n_items", c.n_items])
    return out.getvalue()
