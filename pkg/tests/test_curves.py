from hecke_pm.curves import count_points, newform_from_curve, trace_of_frobenius

CURVE_52A1 = (0, 0, 0, 1, -10)
CURVE_26A1 = (1, 0, 1, -5, -8)
CURVE_26B1 = (1, -1, 1, -3, 3)


def test_traces_of_frobenius():
    assert trace_of_frobenius(CURVE_52A1, 5) == 2
    assert trace_of_frobenius(CURVE_26A1, 5) == -3
    assert trace_of_frobenius(CURVE_26B1, 3) == -3
    assert count_points(CURVE_26B1, 7) == 7


def test_newforms_match_fixture_rows(space52, space26):
    bound = 120
    for ainvs, conductor, space, label in (
        (CURVE_52A1, 52, space52, "f"),
        (CURVE_26A1, 26, space26, "g1"),
        (CURVE_26B1, 26, space26, "g"),
    ):
        form = newform_from_curve(ainvs, conductor, bound, label)
        assert form.coefficients == space.generator(label).coefficients[: bound + 1]
        assert form.level == conductor
