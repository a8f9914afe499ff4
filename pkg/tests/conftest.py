from datetime import date
from pathlib import Path

import pytest

from cloudgap import Datacenter, DatacenterCatalog, GeoPoint

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


def _dc(dc_id, name, lat, lon, dc_class, launch):
    return Datacenter(
        id=dc_id,
        name=name,
        city=name,
        country="US",
        continent="NA",
        location=GeoPoint(lat, lon),
        dc_class=dc_class,
        launch_date=launch,
    )


@pytest.fixture
def toy_catalog() -> DatacenterCatalog:
    """SF/NYC regions, LA/Austin local zones, announced Jacksonville edge."""
    return DatacenterCatalog(
        [
            _dc("sfo", "San Francisco", 37.7749, -122.4194, "region", date(2010, 1, 15)),
            _dc("nyc", "New York City", 40.7128, -74.0060, "region", date(2011, 6, 1)),
            _dc("lax", "Los Angeles", 34.0522, -118.2437, "local_zone", date(2019, 12, 1)),
            _dc("aus", "Austin", 30.2672, -97.7431, "local_zone", date(2020, 9, 1)),
            _dc("jax", "Jacksonville", 30.3322, -81.6557, "edge_pop", None),
        ]
    )
