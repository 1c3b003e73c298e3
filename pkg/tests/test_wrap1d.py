from fractions import Fraction

import pytest

from errors import PreconditionError
from sheaves import constant_sheaf
from utils import Utils
from wrap1d import StopConfig, WrapLab, codirection_assignment, epsilon_stability_check, rotation_kernel, stratify


def test_stop_config_labels_and_validation():
    cfg = StopConfig("circle", (frozenset("+-"), frozenset()))
    assert cfg.label() == "circle +- . grid 3"
    assert cfg.points == 2
    assert not cfg.is_full and not cfg.is_empty
    assert cfg.refined(2).grid_steps == 6
    assert StopConfig.full("interval", 1).is_full
    with pytest.raises(PreconditionError):
        StopConfig("circle", ())
    with pytest.raises(PreconditionError):
        StopConfig("torus", (frozenset("+"),))
    with pytest.raises(PreconditionError):
        StopConfig("interval", (frozenset("x"),))
    with pytest.raises(PreconditionError, match="grid_steps"):
        StopConfig.full("interval", 1, grid_steps=2)


def test_stratify_counts():
    one = stratify(StopConfig.full("circle", 1))
    assert len(one.coarse) == 2
    assert len(one.fine) == 6
    assert one.marked == (0,)
    assert len(stratify(StopConfig.full("circle", 3)).coarse) == 6
    segment = stratify(StopConfig.full("interval", 1))
    assert len(segment.coarse) == 5
    assert len(segment.fine) == 13
    assert segment.marked == (3,)
    assert segment.epsilon == Fraction(1, 3)


def test_interval_endpoints_are_unconstrained():
    strata = stratify(StopConfig("interval", (frozenset("+"),)))
    assert strata.allowed(0) == frozenset("+-")
    assert strata.allowed(3) == frozenset("+")
    assert strata.allowed(1) == frozenset()
    assert codirection_assignment(strata, 0, "+") is None
    assert codirection_assignment(strata, 0, "-") is not None


def test_rotation_kernel_rejects_bad_epsilon(field):
    strata = stratify(StopConfig.full("circle", 1))
    with pytest.raises(PreconditionError):
        rotation_kernel(strata, field, 1, Fraction(1, 2))
    with pytest.raises(PreconditionError):
        rotation_kernel(strata, field, 1, Fraction(1, 5))
    with pytest.raises(PreconditionError):
        rotation_kernel(strata, field, 1, Fraction(0))
    with pytest.raises(PreconditionError):
        WrapLab(StopConfig.full("circle", 1), field).kernel("x")


def test_full_stop_generators_are_pullbacks(field):
    lab = WrapLab(StopConfig.full("interval", 1), field)
    gens = lab.generators()
    assert len(gens) == 5
    stalks = lab.strata.coarse_stalks(gens["1_0"])
    assert stalks[(0,)] == {0: 1}
    assert stalks[(0, 1)] == {0: 1}
    assert stalks[(1,)] == {}
    assert stalks[(1, 2)] == {}


def test_single_codirection_on_a_circle_is_refused(field):
    lab = WrapLab(StopConfig("circle", (frozenset("+"),)), field)
    with pytest.raises(PreconditionError):
        lab.localization


def test_sheaf_off_the_grid_is_refused(field, interval):
    lab = WrapLab(StopConfig.full("circle", 1), field)
    with pytest.raises(PreconditionError):
        lab.push_off(constant_sheaf(interval, field), 1)


def test_microstalk_table_shape(field):
    lab = WrapLab(StopConfig.full("interval", 1), field)
    table = lab.microstalk_table(constant_sheaf(lab.strata.fine, field))
    assert len(table) == 12
    assert list(table.columns) == ["vertex", "codirection", "in_stop", "cohomology"]
    assert set(table["cohomology"]) == {"0"}
    assert lab.microstalk_check(constant_sheaf(lab.strata.fine, field))["passed"]


def test_full_stop_serre_tables_on_a_circle(field):
    lab = WrapLab(StopConfig.full("circle", 1), field)
    gens = lab.generators()
    assert len(gens) == 2
    k = gens["1_0"]
    assert k.stalk_cohomology() == {s: {0: 1} for s in lab.strata.fine.elements}
    tables = lab.sabloff_serre_tables(k, k)
    assert tables["Hom(G,F)^∨"] == {-1: 1, 0: 1}
    assert all(dims == {-1: 1, 0: 1} for dims in tables.values())
    for F in gens.values():
        for G in gens.values():
            tables = lab.sabloff_serre_tables(F, G)
            expected = tables.pop("Hom(G,F)^∨")
            assert all(dims == expected for dims in tables.values())


def test_wrapping_is_invertible_and_stays_on_the_grid(field):
    lab = WrapLab(StopConfig.full("circle", 1), field)
    gens = lab.generators()
    for F in gens.values():
        assert lab.wrap_once(F, 1).base == lab.strata.fine
        assert lab.wrap_once(F, "-").base == lab.strata.fine
        records = lab.invertibility_check(F)
        assert len(records) == 4
        assert all(r["passed"] for r in records)
        for G in gens.values():
            assert lab.perturbation_check(F, G)["passed"]


def test_rotation_kernels_are_mutually_inverse(field):
    lab = WrapLab(StopConfig.full("circle", 1), field)
    records = lab.inverse_kernel_records()
    assert len(records) == 18
    assert all(r["passed"] for r in records)


def test_verdier_pairing_of_the_constant_sheaf(field):
    lab = WrapLab(StopConfig.full("circle", 1), field)
    k = lab.generators()["1_0"]
    record = lab.verdier_pairing_check(k, k)
    assert record["got"] == "1:1 2:1"
    assert record["passed"]


def test_wrap_orbit_of_the_constant_sheaf(field):
    lab = WrapLab(StopConfig.full("circle", 1), field)
    k = lab.generators()["1_0"]
    orbit = lab.wrap_orbit(k, 2)
    assert list(orbit.columns) == ["step", "stalks"]
    assert list(orbit["step"]) == [0, 1, 2]
    start = Utils.format_stalks(lab.strata.coarse, lab.strata.coarse_stalks(k))
    assert orbit["stalks"].iloc[0] == start
    assert set(orbit["stalks"]) == {start}


def test_wrapping_ignores_grid_refinement(field):
    records = epsilon_stability_check(StopConfig.full("circle", 1), field)
    assert len(records) == 4
    assert all(r["passed"] for r in records)
    assert records[0]["name"].startswith("ε-stability circle")
