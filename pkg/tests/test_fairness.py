import math
from datetime import date

import numpy as np
import pytest

from cloudgap import (
    AccessUnit,
    Datacenter,
    DatacenterCatalog,
    GeoPoint,
    cai,
    ci_timeline,
    concentration_curve,
    concentration_index,
    fill_cai,
    load_access_units,
    sigma_sweep,
)
from cloudgap.errors import IngestionError, NoAccessError
from cloudgap.geo import EARTH_RADIUS_KM

DEG_PER_KM = 180.0 / (math.pi * EARTH_RADIUS_KM)


def dc_at(dc_id, lat, lon, dc_class="region"):
    return Datacenter(dc_id, dc_id, dc_id, "X", "X", GeoPoint(lat, lon), dc_class,
                      date(2020, 1, 1))


def unit(uid, wealth, population, cai_value=None, lat=0.0, lon=0.0):
    return AccessUnit(uid, GeoPoint(lat, lon), population, wealth, cai_value)


class TestCai:
    def test_empty_catalog_gives_zero(self):
        assert cai(unit("u", 1, 10), DatacenterCatalog([]), sigma=70) == 0

    def test_colocated_datacenter(self):
        catalog = DatacenterCatalog([dc_at("a", 0, 0)])
        assert cai(unit("u", 1, 10), catalog, sigma=70) == 1

    def test_fifty_and_eighty_km(self):
        # Direct evaluation of the reachability rule by hand: the datacenter
        # 50 km north is within sigma=70, the one 80 km north is not.
        catalog = DatacenterCatalog(
            [dc_at("near", 50 * DEG_PER_KM, 0), dc_at("far", 80 * DEG_PER_KM, 0)]
        )
        assert cai(unit("u", 1, 10), catalog, sigma=70) == 1
        assert cai(unit("u", 1, 10), catalog, sigma=90) == 2
        assert cai(unit("u", 1, 10), catalog, sigma=40) == 0

    def test_sigma_must_be_positive(self):
        with pytest.raises(ValueError):
            cai(unit("u", 1, 10), DatacenterCatalog([]), sigma=0)

    def test_monotone_in_sigma_and_catalog(self):
        rng = np.random.default_rng(19)
        dcs = [dc_at(f"d{i}", rng.uniform(-5, 5), rng.uniform(-5, 5)) for i in range(8)]
        u = unit("u", 1, 10, lat=0.0, lon=0.0)
        sigmas = [50, 120, 300, 700, 1500]
        for k in range(1, len(dcs) + 1):
            catalog = DatacenterCatalog(dcs[:k])
            values = [cai(u, catalog, sigma=s) for s in sigmas]
            assert values == sorted(values)
            if k > 1:
                smaller = DatacenterCatalog(dcs[: k - 1])
                for s in sigmas:
                    assert cai(u, catalog, sigma=s) >= cai(u, smaller, sigma=s)


class TestConcentrationCurve:
    def test_identical_units_sit_on_equality_line(self):
        units = [unit(f"u{i}", wealth=i, population=10.0, cai_value=3) for i in range(5)]
        curve = concentration_curve(units)
        for x, y in curve.points:
            assert y == pytest.approx(x, abs=1e-15)
        assert curve.points[0] == (0.0, 0.0)
        assert curve.points[-1] == (1.0, 1.0)

    def test_only_richest_unit_has_access(self):
        units = [
            unit("poor1", 1, 30, 0),
            unit("poor2", 2, 30, 0),
            unit("rich", 3, 40, 2),
        ]
        curve = concentration_curve(units)
        # Flat at zero until x = 1 - f (f = 0.4), then straight to (1, 1).
        assert curve.points == [(0.0, 0.0), (0.3, 0.0), (0.6, 0.0), (1.0, 1.0)]

    def test_three_unit_hand_computed_table(self):
        # Hand cumulation: pops 10/30/60, masses 0/30/120 (cai*pop).
        units = [unit("a", 1, 10, 0), unit("b", 2, 30, 1), unit("c", 3, 60, 2)]
        curve = concentration_curve(units)
        assert curve.points == [(0.0, 0.0), (0.1, 0.0), (0.4, 0.2), (1.0, 1.0)]

    def test_zero_total_mass_raises(self):
        units = [unit("a", 1, 10, 0), unit("b", 2, 30, 0)]
        with pytest.raises(NoAccessError, match="no access anywhere"):
            concentration_curve(units)

    def test_unfilled_cai_raises(self):
        with pytest.raises(ValueError, match="not filled"):
            concentration_curve([unit("a", 1, 10, None)])

    def test_order_independent_cumulation(self):
        # Oracle: independent cumulative sums on a pre-sorted copy; input
        # order must not matter because the curve sorts internally.
        rng = np.random.default_rng(29)
        units = [
            unit(f"u{i}", float(rng.integers(0, 50)), float(rng.integers(1, 100)),
                 int(rng.integers(0, 4)))
            for i in range(40)
        ]
        ranked = sorted(units, key=lambda u: (u.wealth, u.id))
        pop_total = sum(u.population for u in ranked)
        mass_total = sum(u.cai * u.population for u in ranked)
        xs, ys = [], []
        cp = cm = 0.0
        for u in ranked:
            cp += u.population
            cm += u.cai * u.population
            xs.append(cp / pop_total)
            ys.append(cm / mass_total)
        expected = list(zip(xs, ys))

        shuffled = list(units)
        rng.shuffle(shuffled)
        curve = concentration_curve(shuffled)
        assert curve.points[0] == (0.0, 0.0)
        for (x, y), (ex, ey) in zip(curve.points[1:], expected):
            assert x == pytest.approx(ex, abs=1e-12)
            assert y == pytest.approx(ey, abs=1e-12)
        # And byte-identical across two different shuffles.
        rng.shuffle(shuffled)
        assert concentration_curve(shuffled).points == curve.points


class TestConcentrationIndex:
    def test_equality_line_gives_exact_zero(self):
        # Integer populations and a constant access count make the curve's
        # x and y bitwise equal, so the index must be exactly 0.
        rng = np.random.default_rng(37)
        for _ in range(25):
            n = int(rng.integers(1, 30))
            units = [
                unit(f"u{i}", float(rng.integers(0, 1000)), float(rng.integers(1, 10**6)), 3)
                for i in range(n)
            ]
            assert concentration_index(concentration_curve(units)) == 0.0

    def test_only_richest_is_one_minus_f(self):
        units = [unit("poor", 1, 60, 0), unit("rich", 2, 40, 5)]
        ci = concentration_index(concentration_curve(units))
        assert ci == pytest.approx(1 - 0.4, abs=1e-12)

    def test_three_unit_fixture_value(self):
        # Trapezoid hand-calculation on the curve above gives 0.22.
        units = [unit("a", 1, 10, 0), unit("b", 2, 30, 1), unit("c", 3, 60, 2)]
        ci = concentration_index(concentration_curve(units))
        assert ci == pytest.approx(0.22, abs=1e-12)

    def test_poorest_only_access_is_negative(self):
        units = [unit("poor", 1, 40, 5), unit("rich", 2, 60, 0)]
        ci = concentration_index(concentration_curve(units))
        assert ci == pytest.approx(-(1 - 0.4), abs=1e-12)

    def test_bounds_on_random_unit_sets(self):
        rng = np.random.default_rng(43)
        for _ in range(100):
            n = int(rng.integers(1, 40))
            units = [
                unit(f"u{i}", float(rng.uniform(0, 100)), float(rng.uniform(0.1, 1e4)),
                     int(rng.integers(0, 6)))
                for i in range(n)
            ]
            if sum(u.cai * u.population for u in units) == 0:
                continue
            ci = concentration_index(concentration_curve(units))
            assert -1.0 <= ci <= 1.0

    def test_affine_wealth_rescale_is_bit_identical(self):
        # Positive scale and shift chosen to stay exact in binary floating
        # point, so the ranking cannot collapse or flip.
        rng = np.random.default_rng(47)
        wealth = rng.choice(np.arange(1, 10**6), size=30, replace=False)
        units = [
            unit(f"u{i}", float(w), float(rng.integers(1, 1000)), int(rng.integers(0, 4)))
            for i, w in enumerate(wealth)
        ]
        scaled = [
            AccessUnit(u.id, u.rep_point, u.population, 2.5 * u.wealth + 10.25, u.cai)
            for u in units
        ]
        base_curve = concentration_curve(units)
        scaled_curve = concentration_curve(scaled)
        assert base_curve.points == scaled_curve.points
        assert concentration_index(base_curve) == concentration_index(scaled_curve)


class TestCiTimeline:
    def test_single_unit_is_zero_once_reachable(self):
        catalog = DatacenterCatalog(
            [
                dc_at("r1", 0, 0),
                Datacenter("lz1", "lz1", "lz1", "X", "X", GeoPoint(0.1, 0.1),
                           "local_zone", date(2021, 1, 1)),
            ]
        )
        units = [unit("only", 1, 100, lat=0.0, lon=0.0)]
        steps = ci_timeline(units, catalog, ["lz1"], sigma=70)
        assert [event for event, _ in steps] == ["regions", "lz1"]
        for _, result in steps:
            assert result.ci == 0.0

    def test_matches_direct_recomputation(self, toy_catalog):
        units = [
            unit("sf", 120, 900, lat=37.7, lon=-122.4),
            unit("la", 70, 1200, lat=34.05, lon=-118.24),
            unit("ny", 85, 1500, lat=40.71, lon=-74.0),
            unit("tx", 65, 800, lat=30.27, lon=-97.74),
        ]
        steps = ci_timeline(units, toy_catalog, ["lax", "aus"], sigma=70)
        active = toy_catalog.filter({"region"})
        for event, result in steps:
            if event != "regions":
                active.append(toy_catalog.get(event))
            filled = fill_cai(units, DatacenterCatalog(active), sigma=70)
            assert result.ci == concentration_index(concentration_curve(filled))

    def test_no_access_at_initial_state_propagates(self):
        catalog = DatacenterCatalog([dc_at("far", 80, 0)])
        units = [unit("u", 1, 10, lat=0.0, lon=0.0)]
        with pytest.raises(NoAccessError):
            ci_timeline(units, catalog, [], sigma=70)


class TestSigmaSweep:
    def two_tier_units(self):
        return [
            unit("poor1", 1, 500, lat=2.0, lon=0.0),
            unit("poor2", 2, 300, lat=2.5, lon=0.5),
            unit("rich1", 9, 400, lat=0.0, lon=0.0),
            unit("rich2", 8, 250, lat=0.2, lon=0.1),
        ]

    def catalog_near_rich(self):
        return DatacenterCatalog([dc_at("a", 0, 0), dc_at("b", 0.3, 0.2)])

    def test_sigma_covering_everything_gives_zero(self):
        results = sigma_sweep(self.two_tier_units(), self.catalog_near_rich(),
                              [10000.0])
        assert results[0].ci == 0.0

    def test_tiny_sigma_with_no_colocation_errors(self):
        units = [unit("u", 1, 10, lat=1.0, lon=1.0)]
        with pytest.raises(NoAccessError):
            sigma_sweep(units, self.catalog_near_rich(), [0.001])

    def test_two_tier_fixture_magnitude_weakly_decreases(self):
        # All datacenters sit near the rich units, so the index starts
        # positive and shrinks toward 0 as sigma grows.
        results = sigma_sweep(
            self.two_tier_units(), self.catalog_near_rich(), [70, 200, 400, 10000]
        )
        magnitudes = [abs(r.ci) for r in results]
        assert all(a >= b for a, b in zip(magnitudes, magnitudes[1:]))
        assert results[0].ci > 0
        assert results[-1].ci == 0.0

    def test_validation(self):
        units = self.two_tier_units()
        catalog = self.catalog_near_rich()
        with pytest.raises(ValueError):
            sigma_sweep(units, catalog, [])
        with pytest.raises(ValueError):
            sigma_sweep(units, catalog, [-5.0])
        with pytest.raises(ValueError):
            sigma_sweep(units, catalog, [100.0, 50.0])


class TestLoadAccessUnits:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "u.csv"
        path.write_text(
            "id,lat,lon,population,wealth\nu1,0.5,0.5,100,12.5\nu2,1.5,1.5,200,3.25\n"
        )
        units = load_access_units(path)
        assert [u.id for u in units] == ["u1", "u2"]
        assert units[0].wealth == 12.5

    def test_duplicate_id(self, tmp_path):
        path = tmp_path / "u.csv"
        path.write_text("id,lat,lon,population,wealth\nu1,0,0,1,1\nu1,1,1,1,1\n")
        with pytest.raises(IngestionError, match="duplicate"):
            load_access_units(path)

    def test_nonpositive_population(self, tmp_path):
        path = tmp_path / "u.csv"
        path.write_text("id,lat,lon,population,wealth\nu1,0,0,0,1\n")
        with pytest.raises(IngestionError, match="population"):
            load_access_units(path)
