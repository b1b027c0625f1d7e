import math

import pytest

from duetto.melody import Melody, NoteEvent
from duetto.spatial import (
    Box,
    Cage,
    ListenerMode,
    ListenerState,
    MusicObject,
    compute_gain,
    loop_phase,
    mix_frame,
    point_on_path,
    ride_step,
)


def loop(length):
    return Melody((NoteEvent(60, 0.0, length, 80),), float(length))


def obj(box=None, path=None, base_gain=1.0, tempo=60.0, oid="o"):
    box = box or Box((0.0, 0.0, 0.0), (2.0, 2.0, 2.0))
    path = path or ((0.5, 1.0, 1.0), (1.5, 1.0, 1.0))
    return MusicObject(oid, box, "loop", path, base_gain, tempo)


class TestLoopPhase:
    def test_zero(self):
        assert loop_phase(0.0, loop(4.0), 60.0) == 0.0

    def test_direct_evaluation(self):
        # 5 s at 60 bpm = 5 beats; mod 4 = 1
        assert loop_phase(5.0, loop(4.0), 60.0) == 1.0

    def test_tempo_scales_beats(self):
        assert loop_phase(1.0, loop(4.0), 120.0) == 2.0

    def test_periodicity(self):
        m = loop(4.0)
        for t in [0.3, 1.7, 3.9]:
            assert loop_phase(t + 4.0, m, 60.0) == pytest.approx(
                loop_phase(t, m, 60.0), abs=1e-9
            )

    def test_lengths_three_and_four_realign_only_at_lcm(self):
        a, b = loop(3.0), loop(4.0)
        for beat in range(1, 12):
            pa = loop_phase(float(beat), a, 60.0)
            pb = loop_phase(float(beat), b, 60.0)
            assert not (pa == 0.0 and pb == 0.0)
        assert loop_phase(12.0, a, 60.0) == 0.0
        assert loop_phase(12.0, b, 60.0) == 0.0

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            loop_phase(-1.0, loop(4.0), 60.0)


class TestComputeGain:
    def test_inside_volume_base_gain(self):
        listener = ListenerState(position=(1.0, 1.0, 1.0))
        assert compute_gain(listener, obj(base_gain=0.8), r_ref=2.0) == 0.8

    def test_quarter_at_reference_distance(self):
        listener = ListenerState(position=(4.0, 1.0, 1.0))  # d = 2 from x-face
        assert compute_gain(listener, obj(), r_ref=2.0) == pytest.approx(0.25)

    def test_monotone_decrease_moving_away(self):
        prev = 1.0
        for k in range(1, 200):
            listener = ListenerState(position=(2.0 + 0.1 * k, 1.0, 1.0))
            g = compute_gain(listener, obj(), r_ref=2.0)
            assert g < prev
            prev = g
        assert prev < 0.02  # heading to zero

    def test_continuity_at_surface(self):
        o = obj()
        inside = ListenerState(position=(2.0, 1.0, 1.0))
        outside = ListenerState(position=(2.0 + 1e-12, 1.0, 1.0))
        jump = abs(compute_gain(inside, o, 2.0) - compute_gain(outside, o, 2.0))
        assert jump < 1e-9

    def test_corner_distance_is_euclidean(self):
        listener = ListenerState(position=(3.0, 3.0, 3.0))
        d = math.sqrt(3.0)
        expected = (2.0 / (2.0 + d)) ** 2
        assert compute_gain(listener, obj(), 2.0) == pytest.approx(expected)


class TestRide:
    def riding(self, o, param=0.0):
        return ListenerState(
            position=o.path[0],
            mode=ListenerMode.RIDING,
            ride_object=o.id,
            path_param=param,
        )

    def test_full_loop_exits_at_endpoint(self):
        o = obj()
        out = ride_step(self.riding(o), o, loop(4.0), dt=4.0, tempo_bpm=60.0)
        assert out.mode is ListenerMode.FREE_FLIGHT
        assert out.position == o.path[-1]

    def test_half_loop_reaches_arclength_midpoint(self):
        # L-shaped path, total length 4: midpoint sits at the corner
        path = ((0.0, 0.0, 0.0), (2.0, 0.0, 0.0), (2.0, 2.0, 0.0))
        box = Box((0.0, 0.0, 0.0), (2.0, 2.0, 2.0))
        o = obj(box=box, path=path)
        out = ride_step(self.riding(o), o, loop(4.0), dt=2.0, tempo_bpm=60.0)
        assert out.mode is ListenerMode.RIDING
        assert out.path_param == pytest.approx(0.5)
        assert out.position == pytest.approx((2.0, 0.0, 0.0))

    def test_double_tempo_halves_traversal(self):
        o = obj()
        out = ride_step(self.riding(o), o, loop(4.0), dt=2.0, tempo_bpm=120.0)
        assert out.mode is ListenerMode.FREE_FLIGHT  # 2 s at 120 bpm = 4 beats

    def test_endpoint_exact_after_loop_period(self):
        path = ((0.1, 0.2, 0.3), (1.7, 1.9, 0.4))
        o = obj(box=Box((0.0, 0.0, 0.0), (2.0, 2.0, 2.0)), path=path)
        listener = self.riding(o)
        for _ in range(4):  # 4 x 1 s at 60 bpm = one 4-beat loop
            listener = ride_step(listener, o, loop(4.0), dt=1.0, tempo_bpm=60.0)
        assert listener.mode is ListenerMode.FREE_FLIGHT
        assert listener.position == path[-1]

    def test_zero_length_path_exits_immediately(self):
        o = obj(path=((1.0, 1.0, 1.0),))
        out = ride_step(self.riding(o), o, loop(4.0), dt=0.01, tempo_bpm=60.0)
        assert out.mode is ListenerMode.FREE_FLIGHT
        assert out.position == (1.0, 1.0, 1.0)

    def test_not_riding_rejected(self):
        o = obj()
        with pytest.raises(ValueError):
            ride_step(ListenerState(position=(1.0, 1.0, 1.0)), o, loop(4.0), 0.1)

    def test_point_on_path_clamps(self):
        path = ((0.0, 0.0, 0.0), (1.0, 0.0, 0.0))
        assert point_on_path(path, -0.5) == path[0]
        assert point_on_path(path, 1.5) == path[-1]


class TestMixFrame:
    def make_cage(self):
        melodies = {
            "loop3": loop(3.0),
            "loop4": loop(4.0),
        }
        objects = (
            MusicObject(
                "left",
                Box((0.0, 0.0, 0.0), (2.0, 2.0, 2.0)),
                "loop3",
                ((1.0, 1.0, 1.0),),
                base_gain=1.0,
            ),
            MusicObject(
                "right",
                Box((8.0, 0.0, 0.0), (10.0, 2.0, 2.0)),
                "loop4",
                ((9.0, 1.0, 1.0),),
                base_gain=1.0,
            ),
        )
        cage = Cage(
            Box((0.0, 0.0, 0.0), (10.0, 10.0, 10.0)),
            objects,
            start_position=(5.0, 1.0, 1.0),
        )
        return cage, melodies

    def test_equidistant_equal_gains(self):
        cage, melodies = self.make_cage()
        listener = ListenerState(position=(5.0, 1.0, 1.0))
        frame = mix_frame(listener, cage, melodies, t=0.0)
        assert frame[0].gain == frame[1].gain

    def test_overhead_object_dominates(self, countryside):
        cage = countryside.cage
        first = cage.objects[0]
        cx = (first.box.min_corner[0] + first.box.max_corner[0]) / 2
        cz = (first.box.min_corner[2] + first.box.max_corner[2]) / 2
        listener = ListenerState(position=(cx, first.box.max_corner[1], cz))
        frame = mix_frame(listener, cage, countryside.melodies, t=1.0)
        gains = {e.object_id: e.gain for e in frame}
        for oid, g in gains.items():
            if oid != first.id:
                assert gains[first.id] > g

    def test_empty_object_list(self):
        cage = Cage(
            Box((0.0, 0.0, 0.0), (4.0, 4.0, 4.0)), (), start_position=(1.0, 1.0, 1.0)
        )
        assert mix_frame(ListenerState(position=(1.0, 1.0, 1.0)), cage, {}, 0.0) == ()

    def test_deterministic_order_and_offsets(self):
        cage, melodies = self.make_cage()
        listener = ListenerState(position=(3.0, 1.0, 1.0))
        frame = mix_frame(listener, cage, melodies, t=5.0)
        assert [e.object_id for e in frame] == ["left", "right"]
        assert frame[0].beat_offset == pytest.approx(2.0)  # 5 beats mod 3
        assert frame[1].beat_offset == pytest.approx(1.0)  # 5 beats mod 4


class TestValidation:
    def test_path_outside_volume_rejected(self):
        with pytest.raises(ValueError, match="outside"):
            MusicObject(
                "bad",
                Box((0.0, 0.0, 0.0), (1.0, 1.0, 1.0)),
                "loop",
                ((2.0, 0.5, 0.5),),
            )

    def test_object_outside_cage_rejected(self):
        good = obj()
        with pytest.raises(ValueError, match="cage"):
            Cage(Box((0.0, 0.0, 0.0), (1.0, 1.0, 1.0)), (good,), (0.5, 0.5, 0.5))

    def test_duplicate_ids_rejected(self):
        o = obj()
        with pytest.raises(ValueError, match="duplicate"):
            Cage(Box((0.0, 0.0, 0.0), (4.0, 4.0, 4.0)), (o, o), (3.0, 3.0, 3.0))

    def test_riding_needs_object(self):
        with pytest.raises(ValueError):
            ListenerState(position=(0.0, 0.0, 0.0), mode=ListenerMode.RIDING)
