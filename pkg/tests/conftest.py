import math

import pytest

from geams_sim.topology import FieldSpec, Position, Topology


def assert_energy_balanced(drawn: float, ledger_total: float) -> None:
    """Battery drawdown must equal the ledger.  The gateways start at 1e6 J,
    so initial-minus-residual cancels catastrophically: each debit can lose an
    ulp of 1e6 (about 1.2e-10 J), which bounds honest drift well under 1e-6 J
    over a run."""
    assert math.isclose(drawn, ledger_total, rel_tol=1e-9, abs_tol=1e-6), \
        (drawn, ledger_total)


@pytest.fixture
def topo_builder():
    """Factory for hand-placed topologies.  `positions` maps node id to
    Position; id 0 must be the sink and id 1 the source."""

    def build(positions: dict, width: float = 500.0, height: float = 200.0,
              radio_range: float = 80.0) -> Topology:
        f = FieldSpec(
            width=width,
            height=height,
            sink_position=positions[0],
            source_position=positions[1],
            radio_range=radio_range,
        )
        return Topology(nodes=tuple(sorted(positions.items())), field=f, seed=0)

    return build


def chain_positions(spacing: float = 60.0, n_hops: int = 8) -> dict:
    """Straight west-to-east chain: source at x=10, sink at the far end,
    sensors in between.  With spacing in (range/2, range], every node's only
    sink-ward in-range neighbor is the next chain node."""
    xs = [10.0 + spacing * i for i in range(n_hops + 1)]
    positions = {1: Position(xs[0], 90.0), 0: Position(xs[-1], 90.0)}
    for i, x in enumerate(xs[1:-1], start=2):
        positions[i] = Position(x, 90.0)
    return positions
