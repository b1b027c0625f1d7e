"""duetto: a deterministic interactive-opera engine.

Two sung characters move under inverse-square affective forces; the
forces also steer which text and melody variant each one sings, via a
2-D musico-textual lattice weighted by a global text/music slider.
Between tableaux, a listener flies through a cubic cage of looping
musical objects mixed by distance.  A director sequences scenes with
persistent session memory, and the whole thing runs as a fixed-timestep
loop that is steerable live over a line-delimited JSON socket and
bit-exactly replayable from recorded traces.
"""

from .affect import (
    AffectVector,
    Axis,
    AxisKind,
    CharacterId,
    CharacterState,
    Field,
    SimParams,
    StageRect,
    World,
    drag_character,
    field_force,
    net_external_force,
    pairwise_force,
    relaunch,
    step,
)
from .director import (
    DecorEdge,
    SceneGraph,
    SceneKind,
    SceneNode,
    SessionMemory,
    UnknownDecorError,
    advance,
    apply_memory_bias,
    maybe_insert_parcours,
)
from .lattice import (
    Cell,
    LatticeNetwork,
    MusicalAxis,
    PhraseEvent,
    SemanticAxis,
    emit_phrase,
    project_force,
    select_variant,
    update_lattice,
)
from .melody import (
    Melody,
    Motif,
    NoteEvent,
    PlaybackMeta,
    Variation,
    cover_motifs,
    generate_variation,
    motif_profile,
    transform_macro,
)
from .midi import MidiError, read_smf_type0
from .scenario import (
    Scenario,
    ScenarioError,
    load_fixture,
    load_scenario,
    parse_scenario,
    scenario_hash,
    validate_scenario,
)
from .session import (
    EventError,
    EventKind,
    ReplayReport,
    SchemaMismatchError,
    SessionEngine,
    Trace,
    TraceError,
    UserEvent,
    event_from_obj,
    event_to_obj,
    replay,
    run_session,
)
from .spatial import (
    Box,
    Cage,
    ListenerMode,
    ListenerState,
    MixEntry,
    MusicObject,
    compute_gain,
    loop_phase,
    mix_frame,
    ride_step,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
