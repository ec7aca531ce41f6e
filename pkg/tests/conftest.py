import numpy as np
import pytest

from dcim import ActivationModel, DirectedGraph


@pytest.fixture
def path3():
    """0 -> 1 -> 2 with p_1=[0.5], p_2=[0.5]; exact spread from {0} is 1.75."""
    g = DirectedGraph(3, [(0, 1), (1, 2)])
    model = ActivationModel.count_dc([[], [0.5], [0.5]])
    return g, model


@pytest.fixture
def diamond():
    """0 -> 2 <- 1 with p_2=[0.5, 0.25]; exact spread from {0,1} is 2.625."""
    g = DirectedGraph(3, [(0, 2), (1, 2)])
    model = ActivationModel.count_dc([[], [], [0.5, 0.25]])
    return g, model


def random_instance(rng, max_nodes=6, max_slots=10, lo=0.0, hi=1.0):
    """Small random graph + decreasing model + non-empty seed set."""
    from dcim.cascade import sample_count_dc_model
    from dcim.graph import generate_erdos_renyi

    n = int(rng.integers(3, max_nodes + 1))
    g = generate_erdos_renyi(n, float(rng.uniform(0.3, 0.7)), rng)
    edges = list(g.edges)
    if len(edges) > max_slots:
        keep = sorted(rng.choice(len(edges), size=max_slots, replace=False))
        edges = [edges[i] for i in keep]
        g = DirectedGraph(n, edges)
    model = sample_count_dc_model(g, lo, hi, rng)
    size = int(rng.integers(1, min(3, n) + 1))
    seeds = sorted(rng.choice(n, size=size, replace=False).tolist())
    return g, model, seeds


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
