"""Deterministic census-style tabular data generator.

Produces an income-classification dataset shaped like the classic adult
census benchmarks: 14 raw input columns (6 numeric, 7 categorical with
8+16+7+14+6+5+40 = 96 levels, plus a binary sensitive column) and a binary
label, so the one-hot encoded feature matrix has 102 columns. The label
depends on age, schooling, hours, marital status, and occupation, with a
deliberate gender skew routed through proxy columns (relationship, hours,
occupation) so fairness interventions have something real to remove; age
enters nonlinearly, which makes age-stratified silos genuinely heterogeneous.
"""

from __future__ import annotations

import numpy as np
import pandas as pd

WORKCLASS = [
    "private", "self_emp", "self_emp_inc", "federal_gov",
    "state_gov", "local_gov", "unemployed", "other",
]
EDUCATION = [
    "preschool", "primary", "middle", "hs_no_diploma", "ged", "hs_grad",
    "trade_cert", "some_college", "postsec_cert", "assoc_voc", "assoc_acad",
    "bachelors", "masters", "prof_school", "doctorate", "other",
]
EDUCATION_YEARS = [1, 4, 7, 9, 10, 10, 11, 12, 12, 13, 13, 15, 17, 18, 20, 9]
MARITAL = [
    "never_married", "married", "married_af", "separated",
    "divorced", "widowed", "married_absent",
]
OCCUPATION = [
    "admin", "armed_forces", "craft_repair", "exec_managerial",
    "farming_fishing", "handlers_cleaners", "machine_op", "other_service",
    "priv_house_serv", "prof_specialty", "protective_serv", "sales",
    "tech_support", "transport_moving",
]
RELATIONSHIP = ["husband", "wife", "own_child", "unmarried_partner", "other_relative", "not_in_family"]
RACE = ["amer_indian", "asian_pac", "black", "other", "white"]
COUNTRIES = ["united_states"] + [f"country_{i:02d}" for i in range(1, 40)]

SCHEMA = {
    "age": "partition_attribute",
    "workclass": "feature_categorical",
    "final_weight": "feature_numeric",
    "education": "feature_categorical",
    "education_years": "feature_numeric",
    "marital_status": "feature_categorical",
    "occupation": "feature_categorical",
    "relationship": "feature_categorical",
    "race": "feature_categorical",
    "sex": "sensitive",
    "capital_gain": "feature_numeric",
    "capital_loss": "feature_numeric",
    "hours_per_week": "feature_numeric",
    "native_country": "feature_categorical",
    "income": "label",
}


def _skewed_probs(n_levels: int, decay: float, floor: float) -> np.ndarray:
    raw = decay ** np.arange(n_levels) + floor
    return raw / raw.sum()


def _ensure_all_levels(rng: np.random.Generator, column: np.ndarray, levels: list[str]) -> None:
    # Guarantee the one-hot width of the bundled file: re-seat any level that
    # happened to draw zero rows onto a random row.
    present = set(column.tolist())
    for level in levels:
        if level not in present:
            column[rng.integers(0, column.shape[0])] = level


def make_census_frame(n: int = 5000, seed: int = 20240811) -> pd.DataFrame:
    """Generate n rows of census-style data, deterministic in the seed."""
    rng = np.random.default_rng(seed)

    age = np.clip(rng.gamma(shape=2.6, scale=8.0, size=n) + 17, 17, 90).astype(int)
    # the workforce skews male with age, so age strata differ in group mix too
    male = rng.random(n) < np.clip(0.56 + 0.004 * (age - 17), None, 0.80)
    sex = np.where(male, "Male", "Female")

    edu_idx = rng.choice(len(EDUCATION), size=n, p=_skewed_probs(16, 0.78, 0.01))
    # schooling drifts upward for younger cohorts
    bump = (age < 35) & (rng.random(n) < 0.25)
    edu_idx = np.minimum(edu_idx + bump, len(EDUCATION) - 1)
    education = np.array(EDUCATION)[edu_idx]
    education_years = np.array(EDUCATION_YEARS)[edu_idx] + rng.integers(0, 2, size=n)

    married = rng.random(n) < 1.0 / (1.0 + np.exp(-0.11 * (age - 29)))
    marital_other = rng.choice(
        ["never_married", "separated", "divorced", "widowed", "married_absent"],
        size=n,
        p=[0.62, 0.08, 0.20, 0.06, 0.04],
    )
    marital_married = rng.choice(["married", "married_af"], size=n, p=[0.97, 0.03])
    marital = np.where(married, marital_married, marital_other)

    # occupation skews white-collar with schooling and slightly with gender
    blue = rng.choice(len(OCCUPATION), size=n, p=_skewed_probs(14, 0.82, 0.015))
    white_jobs = np.array([OCCUPATION.index(o) for o in ("exec_managerial", "prof_specialty", "sales", "tech_support")])
    white = white_jobs[rng.integers(0, len(white_jobs), size=n)]
    use_white = rng.random(n) < np.clip(0.08 + 0.055 * (education_years - 9) + 0.16 * male, 0.02, 0.92)
    occupation = np.array(OCCUPATION)[np.where(use_white, white, blue)]

    rel_unmarried = rng.choice(
        ["own_child", "unmarried_partner", "other_relative", "not_in_family"],
        size=n,
        p=[0.25, 0.18, 0.12, 0.45],
    )
    spouse = np.where(male, "husband", "wife")
    relationship = np.where(married & (rng.random(n) < 0.93), spouse, rel_unmarried)

    race = rng.choice(RACE, size=n, p=[0.01, 0.04, 0.10, 0.05, 0.80])
    country = rng.choice(COUNTRIES, size=n, p=_skewed_probs(40, 0.80, 0.004))

    workclass = rng.choice(WORKCLASS, size=n, p=[0.70, 0.08, 0.04, 0.04, 0.05, 0.06, 0.02, 0.01])
    final_weight = np.round(rng.lognormal(mean=11.6, sigma=0.6, size=n)).astype(int)
    hours = np.clip(rng.normal(40 + 6.0 * male - 2.0 * (~married), 9.0, size=n), 5, 99).round().astype(int)
    has_gain = rng.random(n) < 0.09
    capital_gain = np.where(has_gain, np.round(rng.lognormal(8.2, 1.0, size=n)), 0.0).astype(int)
    has_loss = rng.random(n) < 0.05
    capital_loss = np.where(has_loss, np.round(rng.lognormal(7.3, 0.5, size=n)), 0.0).astype(int)

    exec_prof = np.isin(occupation, ["exec_managerial", "prof_specialty"])
    z = (
        -3.9
        + 0.11 * (age - 38)
        - 0.0022 * (age - 38) ** 2
        + 0.18 * (education_years - 10)
        + 0.045 * (hours - 40)
        + 1.5 * male
        + 0.8 * married
        + 0.55 * exec_prof
        + 0.10 * np.log1p(capital_gain)
    )
    income_hi = rng.random(n) < 1.0 / (1.0 + np.exp(-z))
    income = np.where(income_hi, ">50K", "<=50K")

    for column, levels in (
        (workclass, WORKCLASS),
        (education, EDUCATION),
        (marital, MARITAL),
        (occupation, OCCUPATION),
        (relationship, RELATIONSHIP),
        (race, RACE),
        (country, COUNTRIES),
    ):
        _ensure_all_levels(rng, column, levels)

    return pd.DataFrame(
        {
            "age": age,
            "workclass": workclass,
            "final_weight": final_weight,
            "education": education,
            "education_years": education_years,
            "marital_status": marital,
            "occupation": occupation,
            "relationship": relationship,
            "race": race,
            "sex": sex,
            "capital_gain": capital_gain,
            "capital_loss": capital_loss,
            "hours_per_week": hours,
            "native_country": country,
            "income": income,
        }
    )


def write_census_dataset(csv_path, schema_path, n: int = 5000, seed: int = 20240811) -> None:
    """Write the generated CSV and its matching schema file."""
    make_census_frame(n, seed).to_csv(csv_path, index=False)
    with open(schema_path, "w", encoding="utf-8") as fh:
        fh.write("# column roles for the bundled census-style dataset\n")
        for col, role in SCHEMA.items():
            fh.write(f"{col} = {role}\n")


if __name__ == "__main__":
    import sys

    out_csv = sys.argv[1] if len(sys.argv) > 1 else "census5k.csv"
    out_schema = sys.argv[2] if len(sys.argv) > 2 else "census5k.schema"
    write_census_dataset(out_csv, out_schema)
    print(f"wrote {out_csv} and {out_schema}")
