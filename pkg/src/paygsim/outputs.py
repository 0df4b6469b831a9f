"""Writers for the run output files, and the readers that re-parse them.

Every file is comma-separated UTF-8 with a header row and '.' as decimal
mark. Money columns come from the integer-cent ledger: the display ledger
rounds to thousands of euros (halves up), the raw companion keeps exact
cents as fixed-point euro strings. Free-floating values are written with
repr so a re-parse returns the identical double. Nothing here reads the
clock or the environment, so equal runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np

from ._version import __version__
from .cashflows import FundLedger, LedgerRow, cents_to_thousands
from .config import ScenarioConfig

LEDGER_HEADER = ("year",) + tuple(
    f"{letter}_{name}" for letter, name in LedgerRow.LETTERS.items())

MOMENT_STATS = ("mean", "std", "skewness", "excess_kurtosis")


def _num(x) -> str:
    return repr(float(x))


def _eur(cents) -> str:
    """Exact fixed-point euros from integer cents."""
    c = int(cents)
    sign = "-" if c < 0 else ""
    return f"{sign}{abs(c) // 100}.{abs(c) % 100:02d}"


def _parse_eur(text: str) -> int:
    sign = -1 if text.startswith("-") else 1
    whole, _, frac = text.lstrip("+-").partition(".")
    return sign * (int(whole) * 100 + int((frac + "00")[:2]))


def _write_lines(path, lines) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# yearly statement

def write_ledger_csv(path, ledger: FundLedger) -> None:
    """Statement in thousands of euros, each column rounded independently."""
    cols = [cents_to_thousands(ledger.columns[c]) for c in LedgerRow.COLUMNS]
    lines = [",".join(LEDGER_HEADER)]
    for t, year in enumerate(ledger.years):
        lines.append(",".join([str(int(year))] + [str(int(c[t])) for c in cols]))
    _write_lines(path, lines)


def write_ledger_raw_csv(path, ledger: FundLedger) -> None:
    """Statement at full precision, euros with exact cents."""
    lines = [",".join(LEDGER_HEADER)]
    for t, year in enumerate(ledger.years):
        cells = [_eur(ledger.columns[c][t]) for c in LedgerRow.COLUMNS]
        lines.append(",".join([str(int(year))] + cells))
    _write_lines(path, lines)


def read_ledger_csv(path) -> list[dict[str, int]]:
    """Rows of the display ledger as {header: int} dicts."""
    with open(path, encoding="utf-8", newline="") as fh:
        return [{k: int(v) for k, v in rec.items()} for rec in csv.DictReader(fh)]


def read_ledger_raw_csv(path) -> FundLedger:
    """Rebuild the cent-exact ledger from its raw file."""
    with open(path, encoding="utf-8", newline="") as fh:
        recs = list(csv.DictReader(fh))
    if not recs:
        raise ValueError(f"{path}: no data rows")
    years = [int(r["year"]) for r in recs]
    if years != list(range(years[0], years[0] + len(years))):
        raise ValueError(f"{path}: years are not consecutive")
    cols = {}
    for letter, name in LedgerRow.LETTERS.items():
        key = f"{letter}_{name}"
        cols[name] = np.array([_parse_eur(r[key]) for r in recs], dtype=np.int64)
    return FundLedger(first_year=years[0], columns=cols)


# ---------------------------------------------------------------------------
# distribution files

def write_fan_chart_csv(path, result, probes) -> None:
    """Long format, one row per (series, year, probe)."""
    lines = ["series,year,probe,value"]
    for name in result.series_names:
        fan = result.fan_chart(name, probes)
        values = fan["values"]
        for t, year in enumerate(fan["years"]):
            for pi, probe in enumerate(fan["probes"]):
                lines.append(f"{name},{int(year)},{_num(probe)},{_num(values[pi, t])}")
    _write_lines(path, lines)


def read_fan_chart_csv(path) -> dict:
    """{series: {year: {probe: value}}}."""
    out: dict = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for rec in csv.DictReader(fh):
            per_year = out.setdefault(rec["series"], {}).setdefault(int(rec["year"]), {})
            per_year[float(rec["probe"])] = float(rec["value"])
    return out


def write_moments_csv(path, result, years) -> None:
    """Long format, one row per (series, reporting year, statistic)."""
    lines = ["series,year,statistic,value"]
    for name in result.series_names:
        mom = result.moments(name, years)
        for t, year in enumerate(mom["years"]):
            for stat in MOMENT_STATS:
                lines.append(f"{name},{int(year)},{stat},{_num(mom[stat][t])}")
    _write_lines(path, lines)


def read_moments_csv(path) -> dict:
    """{series: {year: {statistic: value}}}."""
    out: dict = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for rec in csv.DictReader(fh):
            per_year = out.setdefault(rec["series"], {}).setdefault(int(rec["year"]), {})
            per_year[rec["statistic"]] = float(rec["value"])
    return out


# ---------------------------------------------------------------------------
# arrivals

def write_entrants_csv(path, years, by_sex: dict) -> None:
    """Expected arrivals per year, one column per sex, unrounded."""
    sexes = list(by_sex)
    lines = [",".join(["year"] + sexes)]
    for t, year in enumerate(years):
        lines.append(",".join([str(int(year))] + [_num(by_sex[s][t]) for s in sexes]))
    _write_lines(path, lines)


def read_entrants_csv(path):
    """(years, {sex: array}) from an arrivals file."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    years = [int(r[0]) for r in rows]
    by_sex = {s: np.array([float(r[i + 1]) for r in rows]) for i, s in enumerate(header[1:])}
    return years, by_sex


def write_entrants_mc_csv(path, years, mean_by_sex: dict, std_by_sex: dict) -> None:
    """Replication mean and spread of sampled arrivals, long format."""
    lines = ["year,sex,mean,std"]
    for t, year in enumerate(years):
        for s in mean_by_sex:
            lines.append(f"{int(year)},{s},{_num(mean_by_sex[s][t])},{_num(std_by_sex[s][t])}")
    _write_lines(path, lines)


def read_entrants_mc_csv(path) -> dict:
    """{sex: {year: (mean, std)}}."""
    out: dict = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for rec in csv.DictReader(fh):
            out.setdefault(rec["sex"], {})[int(rec["year"])] = (
                float(rec["mean"]), float(rec["std"]))
    return out


# ---------------------------------------------------------------------------
# JSON documents

def write_json(path, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text + "\n")


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def run_manifest(cfg: ScenarioConfig, mode: str) -> dict:
    """Record of what ran: replaying the same scenario file with these
    settings reproduces every output byte for byte."""
    run = cfg.run
    return {
        "schema": "paygsim.manifest/1",
        "version": __version__,
        "mode": mode,
        "config_sha256": cfg.source_digest,
        "seed": run.seed,
        "n_reps": run.n_reps,
        "stochastic": list(run.flags.names()),
        "percentile_probes": [float(p) for p in run.probes],
        "moments_years": [int(y) for y in run.moments_years],
        "horizon": {"first_year": cfg.first_year, "last_year": cfg.last_year},
    }


def projection_summary(cfg: ScenarioConfig, result) -> dict:
    ledger = result.ledger
    balance = ledger.columns["pension_balance"]
    negative = [int(y) for y, v in zip(ledger.years, balance) if v < 0]
    return {
        "schema": "paygsim.summary/1",
        "mode": "project",
        "horizon": {"first_year": cfg.first_year, "last_year": cfg.last_year},
        "identities_hold": bool(ledger.identities_hold()),
        "fund_value_end_eur": float(ledger.columns["value_end"][-1]) / 100.0,
        "pension_balance_first_negative_year": negative[0] if negative else None,
        "entrants_final_year": {s: float(result.entrants[s][-1]) for s in cfg.sexes},
    }


def simulation_summary(cfg: ScenarioConfig, result) -> dict:
    final = {}
    for name in result.series_names:
        x = result.series[name][:, -1]
        final[name] = {
            "mean": float(x.mean()),
            "std": float(x.std(ddof=1)) if result.n_reps > 1 else None,
            "min": float(x.min()),
            "max": float(x.max()),
        }
    fund = result.series["fund_value"]
    return {
        "schema": "paygsim.summary/1",
        "mode": "simulate",
        "horizon": {"first_year": cfg.first_year, "last_year": cfg.last_year},
        "seed": result.seed,
        "n_reps": result.n_reps,
        "stochastic": list(result.flags.names()),
        "final_year": int(result.years[-1]),
        "final_year_series": final,
        "prob_fund_value_nonnegative": float(np.mean(fund.min(axis=1) >= 0.0)),
    }


# ---------------------------------------------------------------------------
# per-command bundles

def _prepare(outdir) -> None:
    os.makedirs(outdir, exist_ok=True)


def emit_projection_outputs(outdir, cfg: ScenarioConfig, result) -> list[str]:
    """ledger.csv, ledger_raw.csv, entrants.csv, summary.json, manifest.json."""
    _prepare(outdir)
    written = []

    def out(name):
        written.append(os.path.join(outdir, name))
        return written[-1]

    write_ledger_csv(out("ledger.csv"), result.ledger)
    write_ledger_raw_csv(out("ledger_raw.csv"), result.ledger)
    write_entrants_csv(out("entrants.csv"), result.years, result.entrants)
    write_json(out("summary.json"), projection_summary(cfg, result))
    write_json(out("manifest.json"), run_manifest(cfg, "project"))
    return written


def emit_simulation_outputs(outdir, cfg: ScenarioConfig, result) -> list[str]:
    """fanchart.csv, moments.csv, summary.json, manifest.json.

    Moments need at least two replications; with one the file is skipped.
    """
    _prepare(outdir)
    written = []

    def out(name):
        written.append(os.path.join(outdir, name))
        return written[-1]

    write_fan_chart_csv(out("fanchart.csv"), result, cfg.run.probes)
    if result.n_reps >= 2:
        write_moments_csv(out("moments.csv"), result, cfg.run.moments_years)
    write_json(out("summary.json"), simulation_summary(cfg, result))
    write_json(out("manifest.json"), run_manifest(cfg, "simulate"))
    return written


def emit_entrants_outputs(outdir, cfg: ScenarioConfig, expected: dict,
                          sampled: tuple | None = None) -> list[str]:
    """entrants.csv, optional entrants_mc.csv, manifest.json."""
    _prepare(outdir)
    written = []

    def out(name):
        written.append(os.path.join(outdir, name))
        return written[-1]

    write_entrants_csv(out("entrants.csv"), cfg.years, expected)
    if sampled is not None:
        mean_by_sex, std_by_sex = sampled
        write_entrants_mc_csv(out("entrants_mc.csv"), cfg.years, mean_by_sex, std_by_sex)
    write_json(out("manifest.json"), run_manifest(cfg, "entrants"))
    return written
