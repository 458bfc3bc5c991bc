import numpy as np
import pytest

from ngma import BeamformerSet, ChannelSpec, Scenario, generate_scenario


def random_scenario(seed, n_antennas, n_users, common_noise=False):
    rng = np.random.default_rng(seed)
    if common_noise:
        noise = np.full(n_users, rng.uniform(0.1, 2.0))
    else:
        noise = rng.uniform(0.1, 2.0, n_users)
    return generate_scenario(ChannelSpec(seed=seed), n_antennas, n_users,
                             noise, rng.uniform(0.5, 5.0))


def random_unit_rows(rng, rows, cols):
    z = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def random_beamformers(rng, s):
    share = rng.dirichlet(np.ones(s.n_users)) * rng.uniform(0.2, 1.0)
    return BeamformerSet(random_unit_rows(rng, s.n_users, s.n_antennas),
                         share * s.power_budget)


def random_partition(rng, n):
    """Random set partition of range(n) via random labels."""
    labels = rng.integers(0, n, size=n)
    blocks = {}
    for k, lab in enumerate(labels):
        blocks.setdefault(lab, []).append(k)
    return [blocks[key] for key in sorted(blocks)]


@pytest.fixture
def scalar_dl():
    """Two users sharing one direction, channel power gains 10 and 1."""
    return Scenario([[np.sqrt(10), 0], [1, 0]], [1, 1], 1.0)


@pytest.fixture
def scalar_ul():
    """Single-antenna uplink, SNRs 10 and 1 at unit power."""
    return Scenario([[np.sqrt(10)], [1]], [1, 1], 1.0)


# (number, passed, detail) lines filled in by the acceptance module
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(
            f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
