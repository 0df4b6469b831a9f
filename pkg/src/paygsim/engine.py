"""Cohort-level projection engine.

The projection has a convenient linear structure. Every per-capita amount
(contribution, notional balance, pension) is a deterministic function of a
member's sex, first visible year, age and seniority at that date, so members
sharing those coordinates form a cohort whose cash profile can be tabulated
once. Randomness moves headcounts only: entrant arrivals and survival. Each
yearly flow is then a dot product of cohort counts with a precomputed
per-capita column, and a whole Monte Carlo batch reduces to small
(replication, cohort) matrix updates.

`build_system` enumerates the cohorts (one per populated census cell, one
per future arrival year and sex) and tabulates their per-capita flows;
`simulate_flows` evolves the counts of many replications at once. Shocks
enter as plain arrays so the deterministic path is the same code with the
shocks at zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cashflows import inflation_index
from .cohorts import ACTIVE, RETIRED
from .config import ScenarioConfig
from .entrants import DRAWS_PER_CELL, FACTOR_NAMES
from .errors import CoverageError
from .stochastic import ar1_path


def price_index(cfg: ScenarioConfig, year: int) -> float:
    """Cumulative inflation from the profile base year; flat 1 before it.

    Years before the base year only occur while backcasting contribution
    histories, where the profiles are simply taken at base-year prices.
    """
    if year <= cfg.economics.profile_base_year:
        return 1.0
    return inflation_index(cfg.economics, year)


def opening_balance(cfg: ScenarioConfig, sex: str, age: int, seniority: int) -> float:
    """Backcast per-capita notional balance for a census member.

    Replays the member's assumed contribution history: entry `seniority`
    years before the census at age - seniority, crediting each year's
    subjective contribution under the same accrual and exemption rules the
    projection uses. Without backfilling, census members start from zero and
    their eventual pensions reflect projected contributions only.
    """
    if not cfg.backfill_notional or seniority <= 0:
        return 0.0
    rule = cfg.contrib_subjective
    bal = 0.0
    for sen in range(seniority):
        year = cfg.first_year - seniority + sen
        credit = 0.0
        if sen > rule.exemption_years:
            credit = (rule.rate.value(year)
                      * rule.profile.value(sex, age - seniority + sen)
                      * price_index(cfg, year))
        bal = bal * (1.0 + cfg.accrual_rate) + credit
    return bal


@dataclass
class Cohort:
    """One group of members with a common deterministic path."""

    sex: str
    sex_index: int
    first_year: int                 # first census year with the cohort on the grid
    first_age: int
    first_seniority: int
    initially_retired: bool
    initial_count: float            # census headcount; 0 for arrival cohorts
    arrival_year: int | None = None  # entrants: the year whose arrivals feed the cohort
    retirement_year: int | None = None
    benefit_type: str | None = None
    opening_notional: float = 0.0   # per-capita balance the year before first_year


@dataclass
class CohortSystem:
    """Cohort tables for one scenario, ready for batched count simulation.

    Per-capita arrays have shape (n_cohorts, n_years); `ages` is -1 where a
    cohort is not on the grid. `arrival_rows[t, s]` is the cohort row that
    receives the year-t arrivals of sex s (or -1). Mortality lookups carry
    the mortality table's own age axis, which may start below the grid's.
    """

    first_year: int
    last_year: int
    sexes: tuple[str, ...]
    terminal_age: int
    cohorts: list[Cohort]
    subjective: np.ndarray = field(repr=False)
    integrative: np.ndarray = field(repr=False)
    disbursement: np.ndarray = field(repr=False)
    active_mask: np.ndarray = field(repr=False)
    retired_mask: np.ndarray = field(repr=False)
    ages: np.ndarray = field(repr=False)
    sex_index: np.ndarray = field(repr=False)
    initial_counts: np.ndarray = field(repr=False)
    arrival_rows: np.ndarray = field(repr=False)
    qbar: np.ndarray = field(repr=False)     # (n_years, n_sex, n_mort_ages)
    qsigma: np.ndarray = field(repr=False)   # (n_sex, n_mort_ages)
    mort_min_age: int = 0

    @property
    def n_cohorts(self) -> int:
        return len(self.cohorts)

    @property
    def n_years(self) -> int:
        return self.last_year - self.first_year + 1

    @property
    def years(self) -> np.ndarray:
        return np.arange(self.first_year, self.last_year + 1)


def _retirement_of(cfg: ScenarioConfig, sex: str, first_year: int, first_age: int,
                   first_seniority: int, last_on_grid: int, first_check_year: int):
    """First census year the cohort retires, and the winning benefit type.

    Eligibility uses the thresholds in force that year: age strictly above
    the minimum, seniority at or above it. Among simultaneously satisfied
    types the one whose requirements were exceeded by the widest margin
    wins; ties go to the type listed first. Census cohorts are first checked
    the year after the census (the census states who is already retired);
    arrival cohorts are checked from their first census on.
    """
    rule = cfg.retirement
    for t in range(first_check_year, last_on_grid + 1):
        x = first_age + (t - first_year)
        a = min(first_seniority + (t - first_year), cfg.max_seniority)
        best, best_type = -np.inf, None
        for b in rule.benefit_types:
            age_min, sen_min = rule.thresholds[b][sex]
            lead = min(x - age_min.value(t) - 1.0, a - sen_min.value(t))
            if lead > best:
                best, best_type = lead, b
        if best >= 0:
            return t, best_type
    return None, None


def _fill_cohort(cfg: ScenarioConfig, co: Cohort, row: int, subj, integ, disb,
                 active_mask, retired_mask, ages):
    """Tabulate one cohort's per-capita flows across its grid lifetime."""
    last_on_grid = min(cfg.last_year, co.first_year + (cfg.max_age - co.first_age))
    exemption = cfg.contrib_subjective.exemption_years
    infl = cfg.economics.inflation
    pension = 0.0
    if co.initially_retired:
        pension = cfg.pre_existing.value(co.sex, co.first_age)
    bal = co.opening_notional
    for t in range(co.first_year, last_on_grid + 1):
        ti = t - cfg.first_year
        x = co.first_age + (t - co.first_year)
        ages[row, ti] = x
        retired = co.initially_retired or (co.retirement_year is not None
                                           and t >= co.retirement_year)
        if retired:
            if t == co.retirement_year:
                ben = cfg.benefits[co.benefit_type]
                if ben.kind == "notional_account":
                    pension = bal * ben.conversion.value(co.sex, x)
                else:
                    pension = ben.profile.value(co.sex, x) * price_index(cfg, t)
            elif t > co.first_year:
                pension *= 1.0 + infl.value(t)
            retired_mask[row, ti] = True
            disb[row, ti] = pension
            continue
        active_mask[row, ti] = True
        sen = min(co.first_seniority + (t - co.first_year), cfg.max_seniority)
        if sen > exemption:
            idx = price_index(cfg, t)
            subj[row, ti] = (cfg.contrib_subjective.rate.value(t)
                             * cfg.contrib_subjective.profile.value(co.sex, x) * idx)
            integ[row, ti] = (cfg.contrib_integrative.rate.value(t)
                              * cfg.contrib_integrative.profile.value(co.sex, x) * idx)
        bal = bal * (1.0 + cfg.accrual_rate) + subj[row, ti]


def build_system(cfg: ScenarioConfig) -> CohortSystem:
    """Enumerate cohorts and tabulate their per-capita flow columns."""
    years = cfg.years
    n_years = len(years)
    census = cfg.census
    cohorts: list[Cohort] = []
    for status in (ACTIVE, RETIRED):
        for si, ai, ki in np.argwhere(census.counts[status] > 0):
            sex = cfg.sexes[si]
            age = cfg.min_age + int(ai)
            sen = int(ki)
            co = Cohort(sex=sex, sex_index=int(si), first_year=cfg.first_year,
                        first_age=age, first_seniority=sen,
                        initially_retired=status == RETIRED,
                        initial_count=float(census.counts[status, si, ai, ki]))
            if status == ACTIVE:
                co.opening_notional = opening_balance(cfg, sex, age, sen)
            cohorts.append(co)
    arrival_rows = np.full((n_years, len(cfg.sexes)), -1, dtype=int)
    for te in years[:-1]:
        for si, sex in enumerate(cfg.sexes):
            arrival_rows[te - cfg.first_year, si] = len(cohorts)
            cohorts.append(Cohort(sex=sex, sex_index=si, first_year=te + 1,
                                  first_age=cfg.entry_age, first_seniority=0,
                                  initially_retired=False, initial_count=0.0,
                                  arrival_year=te))

    n = len(cohorts)
    subj = np.zeros((n, n_years))
    integ = np.zeros((n, n_years))
    disb = np.zeros((n, n_years))
    active_mask = np.zeros((n, n_years), dtype=bool)
    retired_mask = np.zeros((n, n_years), dtype=bool)
    ages = np.full((n, n_years), -1, dtype=np.int32)
    for row, co in enumerate(cohorts):
        last_on_grid = min(cfg.last_year, co.first_year + (cfg.max_age - co.first_age))
        if not co.initially_retired:
            first_check = co.first_year if co.arrival_year is not None else co.first_year + 1
            co.retirement_year, co.benefit_type = _retirement_of(
                cfg, co.sex, co.first_year, co.first_age, co.first_seniority,
                last_on_grid, first_check)
        _fill_cohort(cfg, co, row, subj, integ, disb, active_mask, retired_mask, ages)

    mm = cfg.mortality
    qbar = np.empty((n_years, len(cfg.sexes), mm.max_age - mm.min_age + 1))
    for ti, t in enumerate(years):
        qbar[ti] = np.minimum(1.0, (1.0 + mm.drift) ** (t - mm.base_year) * mm.q0)
    return CohortSystem(
        first_year=cfg.first_year, last_year=cfg.last_year, sexes=cfg.sexes,
        terminal_age=cfg.max_age, cohorts=cohorts, subjective=subj,
        integrative=integ, disbursement=disb, active_mask=active_mask,
        retired_mask=retired_mask, ages=ages,
        sex_index=np.array([c.sex_index for c in cohorts], dtype=int),
        initial_counts=np.array([c.initial_count for c in cohorts]),
        arrival_rows=arrival_rows, qbar=qbar, qsigma=mm.sigma,
        mort_min_age=mm.min_age)


def simulate_flows(system: CohortSystem, ne: np.ndarray,
                   eps_mort: np.ndarray | None = None) -> dict[str, np.ndarray]:
    """Evolve cohort counts for a batch of replications and sum the flows.

    Args:
        system: tables from `build_system`.
        ne: arrival headcounts, shape (n_reps, n_years, n_sex). The last
            year's arrivals fall outside the horizon and are ignored.
        eps_mort: mortality shocks aligned with the mortality table, shape
            (n_reps, n_years, n_sex, n_mort_ages), or None for the expected
            path.
    Returns:
        Euro flow and headcount arrays, each (n_reps, n_years): subjective,
        integrative, disbursements, actives, retirees.
    """
    n_reps, n_years = ne.shape[0], system.n_years
    if ne.shape != (n_reps, n_years, len(system.sexes)):
        raise ValueError(f"arrivals shape {ne.shape}, expected "
                         f"{(n_reps, n_years, len(system.sexes))}")
    counts = np.tile(system.initial_counts, (n_reps, 1))
    out = {k: np.empty((n_reps, n_years)) for k in
           ("subjective", "integrative", "disbursements", "actives", "retirees")}
    act = system.active_mask.astype(float)
    ret = system.retired_mask.astype(float)

    def dot(col):
        # not `counts @ col`: BLAS picks its reduction order from the batch
        # shape, and replications must not feel how the batch was chunked.
        # A last-axis sum reduces each row the same way at any batch size.
        return (counts * col).sum(axis=1)

    for ti in range(n_years):
        out["subjective"][:, ti] = dot(system.subjective[:, ti])
        out["integrative"][:, ti] = dot(system.integrative[:, ti])
        out["disbursements"][:, ti] = dot(system.disbursement[:, ti])
        out["actives"][:, ti] = dot(act[:, ti])
        out["retirees"][:, ti] = dot(ret[:, ti])
        if ti == n_years - 1:
            break
        on_grid = system.ages[:, ti] >= 0
        cols = np.flatnonzero(on_grid)
        si = system.sex_index[cols]
        xi = system.ages[cols, ti] - system.mort_min_age
        q = system.qbar[ti, si, xi]
        if eps_mort is not None:
            q = np.clip(q + system.qsigma[si, xi] * eps_mort[:, ti, si, xi], 0.0, 1.0)
        counts[:, cols] *= 1.0 - q
        # survivors of the terminal age leave the grid
        counts[:, on_grid & (system.ages[:, ti] == system.terminal_age)] = 0.0
        for s in range(len(system.sexes)):
            row = system.arrival_rows[ti, s]
            if row >= 0:
                counts[:, row] = ne[:, ti, s]
    return out


# ---------------------------------------------------------------------------
# Shock-to-input mappings shared by the deterministic and Monte Carlo paths


def entrant_moment_tables(cfg: ScenarioConfig) -> tuple[np.ndarray, np.ndarray]:
    """Mean and sigma of the five arrival factors per (year, sex).

    Slot 0 is the reference population at its lag; slots 1..4 the transition
    rates, each evaluated at the calendar year its schedule prescribes.
    """
    params = cfg.entrants_params
    shape = (len(cfg.years), len(cfg.sexes), DRAWS_PER_CELL)
    mean, sigma = np.empty(shape), np.empty(shape)
    for ti, t in enumerate(cfg.years):
        lagged = params.factor_years(t)
        for si, s in enumerate(cfg.sexes):
            mean[ti, si, 0], sigma[ti, si, 0] = cfg.population.at(
                s, params.population_year(t))
            for k, name in enumerate(FACTOR_NAMES):
                p = params.factors[s][name].at(lagged[name])
                mean[ti, si, 1 + k], sigma[ti, si, 1 + k] = p.mean, p.sigma
    return mean, sigma


def entrants_matrix(cfg: ScenarioConfig, eps: np.ndarray) -> np.ndarray:
    """Arrival headcounts from shock blocks: (n_reps, n_years, n_sex).

    Each factor draw is floored at zero before the product, so a deep
    negative shock annihilates the year's arrivals rather than producing
    a negative count. Zero shocks give exactly the expected-value product.
    """
    mean, sigma = entrant_moment_tables(cfg)
    if eps.shape[1:] != mean.shape:
        raise ValueError(f"entrant shocks shape {eps.shape}, expected "
                         f"(n_reps,) + {mean.shape}")
    return np.prod(np.maximum(0.0, mean + sigma * eps), axis=-1)


def return_rates(cfg: ScenarioConfig, eps: np.ndarray, stochastic: bool) -> np.ndarray:
    """Yearly fund returns per replication: expected rate plus AR(1) deviation.

    With `stochastic` False the deviation is pinned at zero and eps is
    ignored, matching the single-year sampler's deterministic mode.
    """
    base = np.array([cfg.economics.expected_return.value(t) for t in cfg.years])
    if not stochastic:
        return np.broadcast_to(base, eps.shape).copy()
    return base + ar1_path(cfg.economics.deviations, eps)


def admin_path(cfg: ScenarioConfig) -> np.ndarray:
    """Deterministic administration costs per projection year."""
    ec = cfg.economics
    return np.array([ec.admin_base * (1.0 + ec.admin_growth) ** (t - ec.admin_base_year)
                     for t in cfg.years])
