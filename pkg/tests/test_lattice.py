import math
import random
from dataclasses import replace

import pytest

from duetto.affect import AffectVector, CharacterId, CharacterState
from duetto.lattice import (
    Cell,
    LatticeNetwork,
    MusicalAxis,
    SemanticAxis,
    cross_product_grid,
    emit_phrase,
    project_force,
    select_variant,
    update_lattice,
)


def make_net(
    s_count=5,
    m_count=3,
    s_dir=(1.0, 0.0),
    m_dir=(0.0, 1.0),
    s_grip=1.0,
    m_grip=1.0,
    margin=0.1,
    start=(0.0, 0.0),
):
    semantic = SemanticAxis(
        label="test",
        direction=s_dir,
        grip=s_grip,
        variants=tuple(f"texte {i}" for i in range(s_count)),
    )
    musical = MusicalAxis(
        label="test",
        direction=m_dir,
        grip=m_grip,
        variants=tuple(f"melodie_{j}" for j in range(m_count)),
    )
    return LatticeNetwork(
        semantic=semantic,
        musical=musical,
        cells=cross_product_grid(semantic, musical),
        hysteresis_margin=margin,
        start=start,
    )


def char(lattice_pos=(0.0, 0.0), lattice_index=(0, 0), intensity=1.0):
    return CharacterState(
        id=CharacterId.FEMME,
        position=(0.0, 0.0),
        affect=AffectVector.zero(),
        vocal_intensity=intensity,
        lattice_pos=lattice_pos,
        lattice_index=lattice_index,
    )


class TestProjectForce:
    def test_aligned_unit(self):
        axis = SemanticAxis("a", (1.0, 0.0), 1.0, ("x",))
        assert project_force((3.0, 0.0), axis) == 3.0

    def test_orthogonal_is_zero(self):
        axis = SemanticAxis("a", (1.0, 0.0), 1.0, ("x",))
        assert project_force((0.0, 5.0), axis) == 0.0

    def test_grip_scales(self):
        axis = SemanticAxis("a", (1.0, 0.0), 0.5, ("x",))
        assert project_force((2.0, 0.0), axis) == 1.0


class TestUpdateLattice:
    def test_lambda_zero_freezes_music_bitwise(self):
        net = make_net()
        c = char(lattice_pos=(1.0, 1.25))
        rng = random.Random(11)
        for _ in range(200):
            f = (rng.uniform(-50, 50), rng.uniform(-50, 50))
            c = update_lattice(c, f, 0.0, 0.1, 2.0, net)
            assert c.lattice_pos[1] == 1.25

    def test_lambda_one_freezes_text_bitwise(self):
        net = make_net()
        c = char(lattice_pos=(2.5, 0.5))
        rng = random.Random(12)
        for _ in range(200):
            f = (rng.uniform(-50, 50), rng.uniform(-50, 50))
            c = update_lattice(c, f, 1.0, 0.1, 2.0, net)
            assert c.lattice_pos[0] == 2.5

    def test_balanced_drift(self):
        # projections of (2, 2) on x/y axes are both 2; each coord advances
        # by 0.5 * 1 * 2 * 0.1 = 0.1
        net = make_net()
        c = char(lattice_pos=(1.0, 1.0))
        c = update_lattice(c, (2.0, 2.0), 0.5, 0.1, 1.0, net)
        assert c.lattice_pos == pytest.approx((1.1, 1.1), abs=1e-15)

    def test_zero_grip_freezes_coordinate(self):
        net = make_net(s_grip=0.0)
        c = char(lattice_pos=(1.5, 0.0))
        for _ in range(50):
            c = update_lattice(c, (10.0, 10.0), 0.3, 0.1, 5.0, net)
            assert c.lattice_pos[0] == 1.5

    def test_coords_stay_in_range(self):
        net = make_net(s_count=4, m_count=3)
        c = char()
        rng = random.Random(5)
        for _ in range(1000):
            f = (rng.uniform(-100, 100), rng.uniform(-100, 100))
            c = update_lattice(c, f, rng.random(), 0.1, 3.0, net)
            assert 0.0 <= c.lattice_pos[0] <= 3.0
            assert 0.0 <= c.lattice_pos[1] <= 2.0

    def test_lambda_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            update_lattice(char(), (0.0, 0.0), 1.5, 0.1, 1.0, make_net())


class TestSelectVariant:
    def test_origin(self):
        assert select_variant(char(), make_net()) == (0, 0)

    def test_hysteresis_holds_below_threshold(self):
        # midpoint 1.5 + margin 0.1: 1.49 stays on 1
        net = make_net()
        c = char(lattice_pos=(1.49, 0.0), lattice_index=(1, 0))
        assert select_variant(c, net) == (1, 0)

    def test_hysteresis_crossing_switches(self):
        net = make_net()
        c = char(lattice_pos=(1.62, 0.0), lattice_index=(1, 0))
        assert select_variant(c, net) == (2, 0)

    def test_boundary_exact_ties_stay(self):
        net = make_net()
        c = char(lattice_pos=(1.6, 0.0), lattice_index=(1, 0))
        assert select_variant(c, net) == (1, 0)

    def test_descending_hysteresis(self):
        net = make_net()
        c = char(lattice_pos=(1.41, 0.0), lattice_index=(2, 0))
        assert select_variant(c, net) == (2, 0)
        c = char(lattice_pos=(1.39, 0.0), lattice_index=(2, 0))
        assert select_variant(c, net) == (1, 0)

    def test_multi_cell_jump(self):
        net = make_net()
        c = char(lattice_pos=(3.7, 0.0), lattice_index=(0, 0))
        assert select_variant(c, net) == (4, 0)

    def test_oscillation_below_threshold_never_flips(self):
        # force integral keeps the coordinate within the hysteresis band
        net = make_net(margin=0.1)
        c = char(lattice_pos=(2.0, 1.0), lattice_index=(2, 1))
        dt = 1.0 / 60.0
        flips = 0
        for n in range(10000):
            f_mag = 3.0 * math.cos(2.0 * math.pi * n / 120.0)
            c = update_lattice(c, (f_mag, f_mag), 0.5, dt, 1.0, net)
            assert abs(c.lattice_pos[0] - 2.0) < 0.6
            idx = select_variant(c, net)
            if idx != c.lattice_index:
                flips += 1
            c = replace(c, lattice_index=idx)
        assert flips == 0


class TestEmitPhrase:
    def test_fresh_relaunch_emits_cell_at_full_gain(self):
        net = make_net()
        c = char(lattice_pos=(0.0, 0.0), intensity=1.0)
        phrase = emit_phrase(c, net)
        assert phrase.text == "texte 0"
        assert phrase.melody_ref == "melodie_0"
        assert phrase.gain == 1.0
        assert not phrase.crossfade and not phrase.silent

    def test_crossfade_on_index_change(self):
        net = make_net()
        c = char(lattice_index=(2, 1))
        phrase = emit_phrase(c, net, previous_index=(1, 1))
        assert phrase.crossfade

    def test_no_crossfade_without_change(self):
        net = make_net()
        c = char(lattice_index=(2, 1))
        assert not emit_phrase(c, net, previous_index=(2, 1)).crossfade

    def test_zero_intensity_silent_marker(self):
        net = make_net()
        phrase = emit_phrase(char(intensity=0.0), net)
        assert phrase.silent and phrase.text is None and phrase.gain == 0.0


class TestValidation:
    def test_non_orthogonal_axes_rejected(self):
        with pytest.raises(ValueError, match="orthogonal"):
            make_net(m_dir=(1.0, 0.0))

    def test_nearly_orthogonal_within_tolerance(self):
        make_net(s_dir=(1.0, 0.0), m_dir=(1e-10, 1.0))

    def test_margin_range(self):
        with pytest.raises(ValueError, match="margin"):
            make_net(margin=0.5)

    def test_grid_must_match_axis_counts(self):
        semantic = SemanticAxis("s", (1.0, 0.0), 1.0, ("a", "b"))
        musical = MusicalAxis("m", (0.0, 1.0), 1.0, ("x", "y"))
        bad = (
            (Cell("a", "x", 0), Cell("a", "y", 1)),
        )
        with pytest.raises(ValueError, match="rows"):
            LatticeNetwork(semantic, musical, bad)

    def test_passion_rank_must_increase(self):
        semantic = SemanticAxis("s", (1.0, 0.0), 1.0, ("a",))
        musical = MusicalAxis("m", (0.0, 1.0), 1.0, ("x", "y"))
        bad = ((Cell("a", "x", 1), Cell("a", "y", 0)),)
        with pytest.raises(ValueError, match="passion_rank"):
            LatticeNetwork(semantic, musical, bad)

    def test_unit_direction_required(self):
        with pytest.raises(ValueError, match="unit"):
            SemanticAxis("s", (2.0, 0.0), 1.0, ("a",))


def test_selected_index_constant_under_lambda_zero_argmax_level():
    # argmax-level invariance: whatever the force history, the melody index
    # never moves at lambda = 0 (and symmetrically for text at 1)
    net = make_net()
    rng = random.Random(99)
    c = char(lattice_pos=(2.0, 1.0), lattice_index=(2, 1))
    for _ in range(2000):
        f = (rng.uniform(-100, 100), rng.uniform(-100, 100))
        c = update_lattice(c, f, 0.0, 1 / 60, 4.0, net)
        c = replace(c, lattice_index=select_variant(c, net))
        assert c.lattice_index[1] == 1
