import pathlib

import pytest

from cfpp.params import ConverterParams

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent
BENCHMARK_CFG = REPO_ROOT / "benchmark.cfg"


def benchmark_params(**overrides) -> ConverterParams:
    """The shipped 48 V fixture with the corrected leakage value."""
    base = dict(
        vi=48.0, l=1109e-6, llk1=110.9e-6, llk2=110.9e-6,
        ci=4700e-6, co1=220e-6, co2=220e-6,
        n=8.0, d=0.67, fs=40e3, r1=4.5, r2=4.5,
    )
    base.update(overrides)
    return ConverterParams(**base)


@pytest.fixture(scope="session")
def fixture_params() -> ConverterParams:
    return benchmark_params()
