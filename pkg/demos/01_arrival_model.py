"""How new members reach the fund.

Membership is restricted: a candidate enrols in a degree course, graduates,
passes the admission exam, and only then may register with the fund. The
arrival model chains those stages onto a reference population of 18-25 year
olds, each stage lagged by the years it takes. Expected arrivals in year t
therefore depend on the population nine years earlier (five years of study,
four of training), the enrolment and graduation rates of those cohorts, and
the admission and membership rates of year t itself.
"""

import numpy as np

from paygsim import (NormalSource, default_config_path, expected_new_entrants,
                     load_config, sample_new_entrants, simulate_entrants_path,
                     variance_new_entrants)

cfg = load_config(default_config_path())
params, series = cfg.entrants_params, cfg.population

# the lag structure for one arrival year
year = 2020
lagged = params.factor_years(year)
print(f"arrivals of {year} draw on:")
print(f"  population of {params.population_year(year)}")
for factor, t in lagged.items():
    print(f"  {factor:<11} rate of {t}")

# expected arrivals, men and women, a few years along the horizon
print("\nexpected arrivals")
print("year    male  female")
for y in (2006, 2010, 2020, 2030, 2040):
    row = [expected_new_entrants(params, series, s, y) for s in cfg.sexes]
    print(f"{y}  {row[0]:6.0f}  {row[1]:6.0f}")

# closed-form variance against a plain Monte Carlo check. The closed form
# multiplies second raw moments across the five independent factors and
# ignores the floor at zero, so the sample comes out a touch below it.
rng_check = 20_000
src = NormalSource(seed=7, stream_id=0)
draws = np.array([sample_new_entrants(params, series, "male", 2020, src)
                  for _ in range(rng_check)])
closed = variance_new_entrants(params, series, "male", 2020)
print(f"\nNE(2020), male: mean {draws.mean():.1f}, "
      f"sample var {draws.var(ddof=1):,.0f}, closed form {closed:,.0f}")

# one stochastic path of the whole horizon, reproducible from its stream key
path = simulate_entrants_path(params, series, cfg.sexes, cfg.years,
                              NormalSource(seed=7, stream_id=1))
total = path["male"] + path["female"]
print("\none sampled path, total arrivals:")
print("  " + "  ".join(f"{y}:{n:,.0f}" for y, n in
                       zip(cfg.years[::8], total[::8])))
