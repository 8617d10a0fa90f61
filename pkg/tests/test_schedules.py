import numpy as np
import pytest

from dnmodes.errors import ConfigError, ScheduleDomainError
from dnmodes.schedules import (
    Constant,
    LinearRamp,
    Polynomial,
    SampledTable,
    Smoothstep,
    as_schedule,
    schedule_from_dict,
)


def test_constant():
    s = Constant(5.0)
    assert s.value(3.2) == 5.0
    assert s.derivative(123.0) == 0.0


def test_linear_ramp():
    s = LinearRamp(t0=0.0, v0=1.0, t1=2.0, v1=3.0)
    assert s.value(1.0) == 2.0
    assert s.derivative(0.7) == 1.0


def test_smoothstep_midpoint_and_rate():
    s = Smoothstep(v0=0.0, v1=1.0, t0=0.0, t1=1.0)
    # quintic 10 s^3 - 15 s^4 + 6 s^5 at s = 1/2
    assert s.value(0.5) == pytest.approx(0.5, abs=1e-15)
    # 30 s^2 - 60 s^3 + 30 s^4 at s = 1/2
    assert s.derivative(0.5) == pytest.approx(1.875, abs=1e-15)


def test_smoothstep_flat_endpoints():
    s = Smoothstep(v0=-2.0, v1=7.0, t0=1.0, t1=4.0)
    assert s.derivative(1.0) == 0.0
    assert s.derivative(4.0) == 0.0
    assert s.value(0.0) == -2.0
    assert s.value(9.0) == 7.0


def test_polynomial():
    s = Polynomial((1.0, -2.0, 3.0))
    assert s.value(2.0) == 1.0 - 4.0 + 12.0
    assert s.derivative(2.0) == -2.0 + 12.0


@pytest.mark.parametrize("h", [1e-3, 1e-4])
def test_analytic_derivative_matches_central_difference(h):
    rng = np.random.default_rng(7)
    for _ in range(20):
        scheds = [
            LinearRamp(0.0, rng.uniform(-2, 2), 1.0 + rng.uniform(0.1, 2), rng.uniform(-2, 2)),
            Polynomial(tuple(rng.uniform(-1, 1, size=4))),
            Smoothstep(rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0, rng.uniform(0.5, 3)),
        ]
        t = rng.uniform(0.1, 0.4)
        for s in scheds:
            fd = (s.value(t + h) - s.value(t - h)) / (2 * h)
            assert abs(s.derivative(t) - fd) <= 50.0 * h * h


def test_table_cubic_derivative_consistency():
    ts = np.linspace(0.0, 2.0, 21)
    vs = np.sin(ts)
    s = SampledTable(ts, vs, interpolation="cubic")
    h = 1e-5
    for t in [0.3, 0.9, 1.5]:
        fd = (s.value(t + h) - s.value(t - h)) / (2 * h)
        assert s.derivative(t) == pytest.approx(fd, abs=1e-8)


def test_table_linear_and_domain_error():
    s = SampledTable([0.0, 1.0, 3.0], [0.0, 2.0, 2.0], interpolation="linear")
    assert s.value(0.5) == 1.0
    assert s.derivative(0.5) == 2.0
    assert s.derivative(2.0) == 0.0
    with pytest.raises(ScheduleDomainError):
        s.value(-0.1)
    with pytest.raises(ScheduleDomainError):
        s.derivative(3.1)


def test_table_requires_increasing_times():
    with pytest.raises(ConfigError):
        SampledTable([0.0, 0.0, 1.0], [1.0, 2.0, 3.0])


def test_from_dict_round_trip_and_rejection():
    s = schedule_from_dict({"kind": "smoothstep", "v0": 0.0, "v1": 1.0, "t0": 0.0, "t1": 2.0})
    assert isinstance(s, Smoothstep)
    assert as_schedule(4) == Constant(4.0)
    with pytest.raises(ConfigError):
        schedule_from_dict({"kind": "smoothstep", "v0": 0, "v1": 1, "t0": 0, "t1": 2, "oops": 1})
    with pytest.raises(ConfigError):
        schedule_from_dict({"kind": "nope"})
