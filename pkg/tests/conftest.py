import numpy as np
import pytest

from dronefog.model import ChannelModel, CloudSpec, DroneNode, Scenario, TaskSpec


@pytest.fixture
def channel():
    return ChannelModel(bandwidth_hz=1e6, tx_power_w=1.258, rx_power_w=1.181,
                        noise_w=1e-13, path_loss_exp=3.0, max_radius_m=100.0)


@pytest.fixture
def cloud():
    return CloudSpec(position=(2000.0, 2000.0, 2000.0), cpu_freq_hz=1e9,
                     bandwidth_hz=2e6, fail_rate=1e-5, link_fail_rate=0.17)


@pytest.fixture
def task_1mb():
    return TaskSpec(data_size_bits=8e6, complexity=237.5,
                    latency_bound_s=0.8, reliability_bound=0.99)


def build_scenario(channel, p=2, f0=0.5e9, freqs=None, nu0=0.0, fails=None,
                   link_fails=None, fading=None, positions=None, cloud=None):
    """Fully explicit scenario for hand-checked tests."""
    freqs = freqs if freqs is not None else [0.9e9] * p
    fails = fails if fails is not None else [0.0] * p
    positions = positions if positions is not None else [(100.0, 0.0, 0.0)] * p
    nodes = tuple(
        DroneNode(id=f"dr{i + 1}", position=positions[i],
                  cpu_freq_hz=freqs[i], fail_rate=fails[i])
        for i in range(p))
    return Scenario(
        initiator=DroneNode(id="dr0", position=(0.0, 0.0, 0.0),
                            cpu_freq_hz=f0, fail_rate=nu0),
        fog_nodes=nodes, channel=channel,
        per_link_fading=np.ones(p) if fading is None else np.asarray(fading, float),
        per_link_fail=np.zeros(p) if link_fails is None else np.asarray(link_fails, float),
        cloud=cloud)


@pytest.fixture
def make_scenario(channel):
    def _make(**kwargs):
        ch = kwargs.pop("channel", channel)
        return build_scenario(ch, **kwargs)
    return _make
