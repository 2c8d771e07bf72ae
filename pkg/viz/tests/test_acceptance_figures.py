"""Acceptance gate for the figure package: all four kinds regenerate
deterministically from real run artifacts, and the log-log slope
annotation carries the same fit as the direct-passage error-law check."""

import numpy as np

from sbviz import FigureRecipe, fit_loglog_slope, plot, read_table

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
FIT_WINDOW = (30.0, 100.0)


def check(num, name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] acceptance {num}: {name} ({detail})")
    assert ok, f"acceptance {num}: {name} ({detail})"


def _render_twice(recipe):
    facts = plot(recipe)
    first = open(facts["output"], "rb").read()
    plot(recipe)
    second = open(facts["output"], "rb").read()
    assert first[:8] == PNG_MAGIC
    return facts, first == second


def test_criterion_10_figure_regeneration(artifacts, tmp_path):
    recipes = {
        "error_vs_T": FigureRecipe(
            "error_vs_T", (str(artifacts["sweep"]),),
            str(tmp_path / "error_vs_T.png"), labels=["direct"],
            fit_window=FIT_WINDOW),
        "gap_vs_s": FigureRecipe(
            "gap_vs_s", (str(artifacts["spectrum_direct"]),
                         str(artifacts["spectrum_mediated"])),
            str(tmp_path / "gap_vs_s.png"),
            labels=["direct", "mediated omega=10"]),
        "levels": FigureRecipe(
            "levels", (str(artifacts["levels"]),),
            str(tmp_path / "levels.png")),
        "fairness": FigureRecipe(
            "fairness", (str(artifacts["fairness"]),),
            str(tmp_path / "fairness.png")),
    }
    stable = {}
    facts = {}
    for kind, recipe in recipes.items():
        facts[kind], stable[kind] = _render_twice(recipe)
    all_stable = all(stable.values())

    # the annotated slope must be the error-law fit: same least-squares
    # log-log regression on the same sweep table
    annotated = facts["error_vs_T"]["fits"][0]["slope"]
    table = read_table(artifacts["sweep"], ("T", "p_error"))
    t = np.array(table["T"], dtype=float)
    p = np.array(table["p_error"], dtype=float)
    mask = (t >= FIT_WINDOW[0]) & (t <= FIT_WINDOW[1])
    reference = float(np.polyfit(np.log(t[mask]), np.log(p[mask]), 1)[0])
    slope_ok = abs(annotated - reference) <= 0.01
    law_ok = abs(annotated + 2.0) <= 0.15

    ok = all_stable and slope_ok and law_ok
    check(10, "figures regenerate deterministically with the fitted slope",
          ok, f"stable={sorted(k for k, v in stable.items() if v)}, "
              f"slope={annotated:+.4f} vs fit {reference:+.4f}")

    independent = fit_loglog_slope(t, p, FIT_WINDOW)[0]
    assert annotated == independent


def test_fairness_facts_reflect_dispersive_matching(artifacts, tmp_path):
    facts = plot(FigureRecipe("fairness", (str(artifacts["fairness"]),),
                              str(tmp_path / "fair_check.png")))
    # matched construction keeps the order parameter aligned at the nodes
    assert facts["max_O_mismatch"] <= 1e-3
    assert 1.5 <= facts["c_end"] <= 2.1
