"""Recipe schema validation."""

import json

import pytest

from sbviz import FigureRecipe, KINDS, RecipeError, from_json_dict, load_recipe


def base(**overrides):
    payload = {"kind": "gap_vs_s", "inputs": ["runs/a/spectrum.csv"],
               "output": "figs/gap.png"}
    payload.update(overrides)
    return payload


def test_kinds_frozen():
    assert KINDS == ("error_vs_T", "gap_vs_s", "levels", "fairness")


def test_minimal_recipe_roundtrip():
    r = from_json_dict(base())
    assert r.kind == "gap_vs_s"
    assert r.inputs == ("runs/a/spectrum.csv",)
    assert r.scales == ("linear", "linear")
    assert r.fit_window is None


def test_single_input_string_is_normalized():
    r = from_json_dict(base(inputs="runs/a/spectrum.csv"))
    assert r.inputs == ("runs/a/spectrum.csv",)


def test_unknown_key_rejected():
    with pytest.raises(RecipeError, match="unknown"):
        from_json_dict(base(style="dark"))


def test_missing_key_rejected():
    payload = base()
    del payload["output"]
    with pytest.raises(RecipeError, match="missing"):
        from_json_dict(payload)


def test_unknown_kind_rejected():
    with pytest.raises(RecipeError, match="kind"):
        from_json_dict(base(kind="heatmap"))


def test_empty_inputs_rejected():
    with pytest.raises(RecipeError):
        from_json_dict(base(inputs=[]))


def test_output_must_be_png():
    with pytest.raises(RecipeError, match="png"):
        from_json_dict(base(output="figs/gap.pdf"))


def test_labels_must_match_inputs():
    with pytest.raises(RecipeError, match="labels"):
        from_json_dict(base(labels=["one", "two"]))


@pytest.mark.parametrize("kind", ["levels", "fairness"])
def test_composite_kinds_take_one_input(kind):
    with pytest.raises(RecipeError, match="exactly one"):
        from_json_dict(base(kind=kind, inputs=["a.csv", "b.csv"]))


@pytest.mark.parametrize("kind", ["error_vs_T", "fairness"])
def test_fixed_layout_kinds_reject_scales(kind):
    with pytest.raises(RecipeError, match="scales"):
        from_json_dict(base(kind=kind, scales={"x": "log"}))


def test_scales_applied_to_single_axes_kinds():
    r = from_json_dict(base(scales={"y": "log"}))
    assert r.scales == ("linear", "log")


def test_bad_scale_value_rejected():
    with pytest.raises(RecipeError, match="scale"):
        from_json_dict(base(scales={"x": "sqrt"}))


def test_fit_window_only_for_error_curves():
    with pytest.raises(RecipeError, match="fit_window"):
        from_json_dict(base(fit_window=[30, 100]))


def test_fit_window_ordering_enforced():
    with pytest.raises(RecipeError, match="fit_window"):
        from_json_dict(base(kind="error_vs_T", inputs=["sweep.csv"],
                            fit_window=[100, 30]))


def test_fit_window_type_checked():
    with pytest.raises(RecipeError, match="fit_window"):
        from_json_dict(base(kind="error_vs_T", inputs=["sweep.csv"],
                            fit_window=[30, "end"]))


def test_error_recipe_accepts_window():
    r = from_json_dict(base(kind="error_vs_T", inputs=["sweep.csv"],
                            fit_window=[30, 100]))
    assert r.fit_window == (30.0, 100.0)


def test_derived_labels_use_parent_directory():
    r = from_json_dict(base(inputs=["runs/direct/spectrum.csv",
                                    "mediated.csv"]))
    assert r.series_labels() == ("direct", "mediated")


def test_explicit_labels_win():
    r = from_json_dict(base(labels=["named"]))
    assert r.series_labels() == ("named",)


def test_load_recipe_missing_file(tmp_path):
    with pytest.raises(RecipeError, match="not found"):
        load_recipe(tmp_path / "nope.json")


def test_load_recipe_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(RecipeError, match="JSON"):
        load_recipe(path)


def test_load_recipe_from_disk(tmp_path):
    path = tmp_path / "recipe.json"
    path.write_text(json.dumps(base()))
    assert load_recipe(path) == FigureRecipe(
        kind="gap_vs_s", inputs=("runs/a/spectrum.csv",),
        output="figs/gap.png")


def test_direct_constructor_validates_too():
    with pytest.raises(RecipeError):
        FigureRecipe(kind="levels", inputs=("a.csv", "b.csv"),
                     output="x.png")
