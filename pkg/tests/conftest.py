from __future__ import annotations

import numpy as np
import pytest

from adsbfuel.trajectory import AircraftMeta, FlightTrack

META = AircraftMeta("A320", 8.0, 35.8)


def ramp_track(n: int = 20, dt: float = 10.0, meta: AircraftMeta | None = META) -> FlightTrack:
    t = np.arange(n) * dt
    return FlightTrack(
        t,
        30.0 + 1e-4 * t,
        120.0 + 1e-4 * t,
        np.minimum(10.0 * t, 9000.0),
        80.0 + 0.5 * t / dt,
        meta=meta,
        flight_id="ramp",
    )


@pytest.fixture
def track() -> FlightTrack:
    return ramp_track()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)


# ---------------------------------------------------------------------------
# acceptance summary: one pass/fail line per criterion at the end of the run
# ---------------------------------------------------------------------------

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    def record(number: int, passed: bool, detail: str) -> None:
        ACCEPTANCE[number] = (bool(passed), detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if passed else 'FAIL'}  {detail}")
