import math

import pytest
from hypothesis import given, strategies as st

from geams_sim.energy import EnergyModelParams
from geams_sim.geams import (
    EmptyNeighborSetError,
    SourceState,
    average_score_index,
    build_best_neighbor_set,
    detect_void,
    refresh_state,
    score,
    select_next_hop,
    walking_back_candidate,
)
from geams_sim.neighbors import NeighborRecord, NeighborTable
from geams_sim.topology import Position, distance

P = EnergyModelParams()
K_BITS = 1064


def record(node_id, pos, me, sink, energy, void=False, beacon_time=0.0):
    return NeighborRecord(
        id=node_id,
        position=pos,
        distance_to_me=distance(me, pos),
        distance_to_sink=distance(pos, sink),
        residual_energy=energy,
        link_rate=1.0,
        void_flagged=void,
        last_beacon_time=beacon_time,
    )


def table(me, sink, records):
    t = NeighborTable(my_position=me, sink_position=sink)
    for r in records:
        t.records[r.id] = r
    return t


def test_score_worked_example():
    me, sink = Position(0, 0), Position(500, 0)
    r = record(2, Position(50, 0), me, sink, energy=1.0)
    assert math.isclose(score(r, 1000, P), 0.9875, rel_tol=1e-15)


def test_score_zero_everything():
    me, sink = Position(0, 0), Position(500, 0)
    r = record(2, Position(0, 0), me, sink, energy=0.0)
    assert score(r, 0, P) == 0.0


def test_score_prefers_nearer_neighbor_at_equal_energy():
    me, sink = Position(0, 0), Position(500, 0)
    near = record(2, Position(10, 0), me, sink, energy=1.0)
    far = record(3, Position(70, 0), me, sink, energy=1.0)
    assert score(near, 1000, P) > score(far, 1000, P)


def test_best_neighbor_set_empty_when_all_farther():
    me, sink = Position(100, 90), Position(490, 90)
    t = table(me, sink, [
        record(2, Position(60, 90), me, sink, 1.0),
        record(3, Position(80, 120), me, sink, 1.0),
    ])
    assert build_best_neighbor_set(t, 0.0, 2.5, K_BITS, P) == []
    assert detect_void(t, 0.0, 2.5, K_BITS, P)


def test_best_neighbor_set_orders_by_score_then_id():
    me, sink = Position(100, 90), Position(490, 90)
    t = table(me, sink, [
        record(5, Position(160, 90), me, sink, 1.0),
        record(2, Position(160, 90), me, sink, 1.0),  # tie with 5: id wins
        record(3, Position(160, 90), me, sink, 2.0),  # more energy: top rank
    ])
    s = build_best_neighbor_set(t, 0.0, 2.5, K_BITS, P)
    assert [i for i, _ in s] == [3, 2, 5]
    assert s == build_best_neighbor_set(t, 0.0, 2.5, K_BITS, P)


def test_best_neighbor_set_skips_dead_expired_and_flagged():
    me, sink = Position(100, 90), Position(490, 90)
    t = table(me, sink, [
        record(2, Position(160, 90), me, sink, 1.0),
        record(3, Position(160, 100), me, sink, 0.0),               # dead
        record(4, Position(170, 90), me, sink, 1.0, beacon_time=-5.0),  # expired
        record(5, Position(160, 80), me, sink, 1.0, void=True),     # flagged
    ])
    s = build_best_neighbor_set(t, 0.0, 2.5, K_BITS, P)
    assert [i for i, _ in s] == [2]


def test_average_score_index_singleton():
    assert average_score_index([(2, 10.0)]) == 1


def test_average_score_index_equidistant_prefers_better():
    assert average_score_index([(2, 6.0), (3, 2.0)]) == 1


def test_average_score_index_middle():
    # mean 4.0; gaps 4, 1, 2, 3 so rank 2 is closest
    assert average_score_index([(2, 8.0), (3, 5.0), (4, 2.0), (5, 1.0)]) == 2


def test_average_score_index_empty():
    with pytest.raises(EmptyNeighborSetError):
        average_score_index([])


def test_refresh_state_keeps_matching_set():
    s = [(2, 8.0), (3, 5.0)]
    state = SourceState(ref_hop_count=4, balance_index=2, neighbor_ids=(2, 3))
    assert refresh_state(state, s) is state


def test_refresh_state_recomputes_on_change():
    s = [(2, 8.0), (3, 5.0), (4, 2.0), (5, 1.0)]
    state = SourceState(ref_hop_count=4, balance_index=1, neighbor_ids=(2, 3))
    new = refresh_state(state, s)
    assert new.ref_hop_count == 4
    assert new.balance_index == 2
    assert new.neighbor_ids == (2, 3, 4, 5)


FOUR = [(2, 9.0), (3, 7.0), (4, 5.0), (5, 3.0)]


def test_select_first_contact_takes_top_rank():
    choice, state = select_next_hop(None, FOUR, hop_count=6)
    assert choice == 2
    assert state.ref_hop_count == 6
    assert state.balance_index == average_score_index(FOUR)
    assert state.neighbor_ids == (2, 3, 4, 5)


def test_select_in_range_pick():
    state = SourceState(ref_hop_count=3, balance_index=2, neighbor_ids=(2, 3, 4, 5))
    choice, new = select_next_hop(state, FOUR, hop_count=3)
    assert choice == 3
    assert (new.ref_hop_count, new.balance_index) == (3, 2)


def test_select_clamps_low_to_best_rank():
    state = SourceState(ref_hop_count=3, balance_index=2, neighbor_ids=(2, 3, 4, 5))
    choice, new = select_next_hop(state, FOUR, hop_count=6)
    assert choice == 2
    assert (new.ref_hop_count, new.balance_index) == (5, 2)


def test_select_clamps_high_to_worst_rank():
    state = SourceState(ref_hop_count=3, balance_index=2, neighbor_ids=(2, 3, 4, 5))
    choice, new = select_next_hop(state, FOUR, hop_count=0)
    assert choice == 5
    assert (new.ref_hop_count, new.balance_index) == (2, 2)


def test_select_empty_set():
    with pytest.raises(EmptyNeighborSetError):
        select_next_hop(None, [], hop_count=0)


@given(
    ref=st.integers(0, 20),
    j=st.integers(1, 6),
    m=st.integers(1, 6),
    hop=st.integers(0, 20),
)
def test_select_always_stays_in_set(ref, j, m, hop):
    s = [(i + 2, float(10 * m - i)) for i in range(m)]
    state = SourceState(ref_hop_count=ref, balance_index=min(j, m),
                        neighbor_ids=tuple(i for i, _ in s))
    choice, new = select_next_hop(state, s, hop)
    assert choice in {i for i, _ in s}
    assert new.balance_index == min(j, m)


@given(
    halves=st.lists(st.integers(1, 100), min_size=2, max_size=6, unique=True),
    shift_halves=st.integers(0, 100),
)
def test_order_invariant_under_energy_shift(halves, shift_halves):
    me, sink = Position(100, 90), Position(490, 90)
    shift = 0.5 * shift_halves
    recs = [record(i + 2, Position(160, 90), me, sink, 0.5 * h)
            for i, h in enumerate(halves)]
    base = table(me, sink, recs)
    shifted = table(me, sink, [
        record(r.id, r.position, me, sink, r.residual_energy + shift) for r in recs
    ])
    order = [i for i, _ in build_best_neighbor_set(base, 0.0, 2.5, K_BITS, P)]
    order_shifted = [i for i, _ in build_best_neighbor_set(shifted, 0.0, 2.5, K_BITS, P)]
    assert order == order_shifted


def test_detect_void_false_with_closer_neighbor():
    me, sink = Position(100, 90), Position(490, 90)
    t = table(me, sink, [record(2, Position(160, 90), me, sink, 1.0)])
    assert not detect_void(t, 0.0, 2.5, K_BITS, P)


def test_detect_void_empty_table():
    t = NeighborTable(my_position=Position(100, 90), sink_position=Position(490, 90))
    assert detect_void(t, 0.0, 2.5, K_BITS, P)


def test_walking_back_picks_least_far():
    me, sink = Position(100, 90), Position(490, 90)
    t = table(me, sink, [
        record(2, Position(60, 90), me, sink, 1.0),    # 430 m from sink
        record(3, Position(80, 120), me, sink, 1.0),   # about 411 m from sink
    ])
    assert walking_back_candidate(t, set(), 0.0, 2.5) == 3


def test_walking_back_respects_exclusions_and_flags():
    me, sink = Position(100, 90), Position(490, 90)
    t = table(me, sink, [
        record(2, Position(60, 90), me, sink, 1.0),
        record(3, Position(80, 120), me, sink, 1.0, void=True),
    ])
    assert walking_back_candidate(t, set(), 0.0, 2.5) == 2
    assert walking_back_candidate(t, {2}, 0.0, 2.5) is None
