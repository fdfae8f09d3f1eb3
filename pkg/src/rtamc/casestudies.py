"""Bundled case-study models and their reachability queries.

Two families:

* ``puri:<alpha>`` -- a two-clock, four-location automaton whose error
  location is unreachable under exact semantics but (for alpha=2) reachable
  once clocks may drift, however slightly.  The cycle between q1 and q2
  pins both clocks with exact guards, so the clock difference is invariant
  under exact semantics but creeps under drift.

* ``lipsync:<stream>:<start>`` -- a stream-synchronisation protocol: sound
  is presented exactly every 30 ms, video nominally every 40 ms, and a
  synchroniser keeps the skew between the streams within [-150 ms, +15 ms],
  postponing early video frames millisecond by millisecond.  Watchdogs raise
  late errors, the synchroniser raises skew errors.  Stream variants: ideal
  (exact 40 ms), anchored jitter (40k +- 5 ms, deviations do not accumulate)
  and non-anchored jitter (each gap in [35, 45] ms, deviations accumulate);
  each with both streams starting at time zero or after arbitrary delays.

Millisecond granularity throughout; "later than c" tests are encoded as
``>= c+1`` since all guards are non-strict.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import (
    Channel,
    ClockAtom,
    DataAtom,
    DiscreteState,
    Edge,
    Guard,
    IntVar,
    Location,
    Network,
    Process,
    Sync,
    Update,
    validate_network,
)
from .queries import And, Not, Or, ProcessAt, Query, EXISTS_EVENTUALLY
from .semantics import DriftStep


# ---------------------------------------------------------------------------
# drift example
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PuriConfig:
    alpha: int = 2


def build_puri(cfg: PuriConfig | int = 2) -> Network:
    """Two clocks x, y; cycle q1 -> q2 -> q1 with exact guards x==2 / y==2.

    The error edge q1 -> Err carries guard x <= 2-alpha and is omitted when
    that constant would be negative (clock constants are natural).
    """
    alpha = cfg.alpha if isinstance(cfg, PuriConfig) else int(cfg)
    ge = lambda c, b: ClockAtom(c, ">=", b)
    le = lambda c, b: ClockAtom(c, "<=", b)
    edges = [
        Edge("Init", "q1", Guard(clock_atoms=(ge("x", 1), le("x", 1))), resets=("y",)),
        Edge("q1", "q2", Guard(clock_atoms=(ge("x", 2), le("x", 2))), resets=("x",)),
        Edge("q2", "q1", Guard(clock_atoms=(ge("y", 2), le("y", 2))), resets=("y",)),
    ]
    if 2 - alpha >= 0:
        edges.append(Edge("q1", "Err", Guard(clock_atoms=(le("x", 2 - alpha),))))
    net = Network(
        processes=(
            Process(
                "P",
                locations=tuple(Location(n) for n in ("Init", "q1", "q2", "Err")),
                edges=tuple(edges),
                initial="Init",
            ),
        ),
        clocks=("x", "y"),
    )
    validate_network(net)
    return net


def puri_queries() -> list[Query]:
    return [Query(EXISTS_EVENTUALLY, ProcessAt("P", "Err"))]


def puri_drift_schedule(eps: Fraction, cycles: int) -> tuple[DiscreteState, tuple, list[DriftStep]]:
    """A drifted schedule from (q1; x=1, y=0) losing eps of clock difference per cycle.

    Each cycle delays to x==2 with y advancing eps further than x, fires the
    q1->q2 edge, then delays both clocks equally to y==2 and fires q2->q1.
    After ``cycles`` cycles with cycles == 1/eps the run lands on (q1; 0, 0).
    """
    eps = Fraction(eps)
    start = DiscreteState((1,), ())  # q1
    val = (Fraction(1), Fraction(0))
    steps: list[DriftStep] = []
    for k in range(cycles):
        t1 = 1 + k * eps  # x goes from beta=1-k*eps to exactly 2
        steps.append(
            DriftStep(advance=(t1, t1 + eps), nominal=t1, edge=("P", "q1", "q2"))
        )
        t2 = 1 - (k + 1) * eps  # y goes from 1+(k+1)*eps to exactly 2
        steps.append(
            DriftStep(advance=(t2, t2), nominal=t2, edge=("P", "q2", "q1"))
        )
    return start, val, steps


# ---------------------------------------------------------------------------
# lip synchronisation protocol
# ---------------------------------------------------------------------------

STREAMS = ("ideal", "anchored", "nonanchored")


@dataclass(frozen=True)
class LipSyncConfig:
    stream: str = "ideal"  # ideal | anchored | nonanchored
    free_start: bool = False

    def __post_init__(self):
        if self.stream not in STREAMS:
            raise ValueError(f"stream must be one of {STREAMS}")


def _video_mgr() -> Process:
    return Process(
        "VideoMgr",
        locations=(
            Location("vm1"),
            Location("vm2", committed=True),
            Location("vm3"),
            Location("vm4", committed=True),
        ),
        edges=(
            Edge("vm1", "vm2", sync=Sync("vavail", "?")),
            Edge("vm2", "vm3", sync=Sync("vready", "!")),
            Edge("vm3", "vm4", sync=Sync("vokk", "?")),
            Edge("vm4", "vm1"),  # internal: forward vpresent to the device
        ),
        initial="vm1",
    )


def _sound_mgr() -> Process:
    return Process(
        "SoundMgr",
        locations=(
            Location("sm1"),
            Location("sm2", committed=True),
            Location("sm3"),
            Location("sm4", committed=True),
        ),
        edges=(
            Edge("sm1", "sm2", sync=Sync("savail", "?")),
            Edge("sm2", "sm3", sync=Sync("sready", "!")),
            Edge("sm3", "sm4", sync=Sync("sokk", "?")),
            Edge("sm4", "sm1"),  # internal: forward spresent to the device
        ),
        initial="sm1",
    )


def _video_wdg() -> Process:
    """Watchdog for the 35..45 ms window between video presentations ("vlate")."""
    return Process(
        "VideoWdg",
        locations=(
            Location("vw1"),
            Location("vw2", committed=True),
            Location("vw3"),
            Location("vw4", committed=True),
            Location("vw5"),  # video-late error
        ),
        edges=(
            Edge("vw1", "vw2", sync=Sync("vok", "?")),
            Edge("vw2", "vw3", sync=Sync("vokk", "!"), resets=("t4",)),
            Edge("vw3", "vw5", Guard(clock_atoms=(ClockAtom("t4", ">=", 46),))),
            Edge(
                "vw3",
                "vw4",
                Guard(clock_atoms=(ClockAtom("t4", ">=", 35), ClockAtom("t4", "<=", 45))),
                sync=Sync("vok", "?"),
            ),
            Edge("vw4", "vw3", sync=Sync("vokk", "!"), resets=("t4",)),
        ),
        initial="vw1",
    )


def _sound_wdg() -> Process:
    """Watchdog for the exact 30 ms sound period ("slate").

    The repeat edge has no clock guard: it rides the urgent channel sok, so
    urgency plus the exact stream timing pins presentations to 30 ms.
    """
    return Process(
        "SoundWdg",
        locations=(
            Location("sw1"),
            Location("sw2", committed=True),
            Location("sw3"),
            Location("sw4", committed=True),
            Location("sw5"),  # sound-late error
        ),
        edges=(
            Edge("sw1", "sw2", sync=Sync("sok", "?")),
            Edge("sw2", "sw3", sync=Sync("sokk", "!"), resets=("t3",)),
            Edge("sw3", "sw5", Guard(clock_atoms=(ClockAtom("t3", ">=", 31),))),
            Edge("sw3", "sw4", sync=Sync("sok", "?")),
            Edge("sw4", "sw3", sync=Sync("sokk", "!"), resets=("t3",)),
        ),
        initial="sw1",
    )


def _synch() -> Process:
    """Initialisation chains; everything after the idle location is committed.

    The terminal location sy9 is left plain: a committed dead-end would
    freeze the whole network after initialisation.
    """
    c = lambda n: Location(n, committed=True)
    return Process(
        "Synch",
        locations=(
            Location("sy1"),
            c("sy2v"), c("sy3v"), c("sy4v"), c("sy5v"),
            c("sy2s"), c("sy3s"), c("sy4s"), c("sy5s"),
            Location("sy9"),
        ),
        edges=(
            # video packet first
            Edge("sy1", "sy2v", sync=Sync("vready", "?")),
            Edge("sy2v", "sy3v", sync=Sync("vok", "!")),
            Edge("sy3v", "sy4v", sync=Sync("std", "!")),
            Edge("sy4v", "sy5v", sync=Sync("sv1", "!")),
            Edge("sy5v", "sy9", sync=Sync("sv0", "!")),
            # sound packet first
            Edge("sy1", "sy2s", sync=Sync("sready", "?")),
            Edge("sy2s", "sy3s", sync=Sync("sok", "!")),
            Edge("sy3s", "sy4s", sync=Sync("sti", "!")),
            Edge("sy4s", "sy5s", sync=Sync("ss1", "!")),
            Edge("sy5s", "sy9", sync=Sync("ss0", "!")),
        ),
        initial="sy1",
    )


def _sound_clock() -> Process:
    """Millisecond ticker driving the skew variable vmins down by one per tick."""
    return Process(
        "SoundClock",
        locations=(
            Location("sc1"),
            Location("sc2"),
            Location("sc3", invariant=(ClockAtom("t5", "<=", 1),)),
        ),
        edges=(
            Edge("sc1", "sc3", sync=Sync("sti", "?"), resets=("t5",)),
            Edge("sc1", "sc2", sync=Sync("std", "?")),
            Edge("sc2", "sc3", sync=Sync("sclock", "?"), resets=("t5",)),
            Edge(
                "sc3",
                "sc3",
                Guard(clock_atoms=(ClockAtom("t5", ">=", 1),)),
                resets=("t5",),
                updates=(Update("vmins", const=-1, coeff=1, rhs_var="vmins"),),
            ),
        ),
        initial="sc1",
    )


def _sound_synch() -> Process:
    """First-sound admission: within 15 ms of the first video, else error s07.

    The check has teeth: waiting is bounded by the t2<=15 invariant and the
    timeout edge enters s07 by itself.  Without the timeout, runs where sound
    never starts would dodge s07 entirely and leak into the other error
    queries.  At exactly 15 ms the ok branch, the timeout and the late
    arrival are all enabled; the boundary nondeterminism is deliberate.
    """
    return Process(
        "SoundSynch",
        locations=(
            Location("s01"),
            Location("s02", invariant=(ClockAtom("t2", "<=", 15),)),
            Location("s03", committed=True),
            Location("s04", committed=True),
            Location("s05"),
            Location("s06", committed=True),
            Location("s07"),  # initial sound-synchronisation error
        ),
        edges=(
            Edge("s01", "s05", sync=Sync("ss1", "?")),
            Edge("s01", "s02", sync=Sync("sv0", "?"), resets=("t2",)),
            Edge("s02", "s03", Guard(clock_atoms=(ClockAtom("t2", "<=", 15),)), sync=Sync("sready", "?")),
            Edge("s02", "s07", Guard(clock_atoms=(ClockAtom("t2", ">=", 15),)), sync=Sync("sready", "?")),
            Edge("s02", "s07", Guard(clock_atoms=(ClockAtom("t2", ">=", 15),))),
            Edge("s03", "s04", sync=Sync("sclock", "!")),
            Edge("s04", "s05", sync=Sync("sok", "!")),
            Edge("s05", "s06", sync=Sync("sready", "?")),
            Edge("s06", "s05", sync=Sync("sok", "!")),
        ),
        initial="s01",
    )


def _video_synch() -> Process:
    """Skew checks on every video arrival.

    vmins < -150: video more than 150 ms behind sound -> v06 (first) / v07.
    vmins > 15: video more than 15 ms ahead -> wait a millisecond in v04 and
    re-check.  Otherwise confirm with vok! and add 40 to vmins.
    """
    lt = lambda v: DataAtom("vmins", "<", v)
    gt = lambda v: DataAtom("vmins", ">", v)
    ge = lambda v: DataAtom("vmins", ">=", v)
    le = lambda v: DataAtom("vmins", "<=", v)
    bump = (Update("vmins", const=40, coeff=1, rhs_var="vmins"),)
    return Process(
        "VideoSynch",
        locations=(
            Location("v01"),
            # waiting for the first video is bounded: past 150 ms the timeout
            # edge raises v06 by itself (see _sound_synch for the rationale)
            Location("v02", invariant=(ClockAtom("t1", "<=", 150),)),
            Location("v03", committed=True, invariant=(ClockAtom("t1", "<=", 0),)),
            Location("v04", invariant=(ClockAtom("t1", "<=", 1),)),
            Location("v05"),
            Location("v06"),  # initial video-synchronisation error
            Location("v07"),  # video-synchronisation error
            Location("v08", invariant=(ClockAtom("t1", "<=", 0),)),
        ),
        edges=(
            Edge("v01", "v05", sync=Sync("sv1", "?")),
            Edge("v01", "v02", sync=Sync("ss0", "?"), resets=("t1",)),
            Edge("v02", "v03", sync=Sync("vready", "?"), resets=("t1",)),
            Edge("v02", "v06", Guard(clock_atoms=(ClockAtom("t1", ">=", 150),))),
            Edge("v03", "v06", Guard(data_atoms=(lt(-150),))),
            Edge("v03", "v05", Guard(data_atoms=(ge(-150),)), sync=Sync("vok", "!"), updates=bump),
            Edge("v05", "v08", sync=Sync("vready", "?"), resets=("t1",)),
            Edge("v08", "v07", Guard(data_atoms=(lt(-150),))),
            Edge("v08", "v04", Guard(data_atoms=(gt(15),))),
            Edge("v08", "v05", Guard(data_atoms=(ge(-150), le(15))), sync=Sync("vok", "!"), updates=bump),
            Edge("v04", "v08", Guard(clock_atoms=(ClockAtom("t1", ">=", 1),)), resets=("t1",)),
        ),
        initial="v01",
    )


def _sound_str(free_start: bool) -> Process:
    """Exact 30 ms sound source; zero start forces the first packet at time 0."""
    first_inv = () if free_start else (ClockAtom("t6", "<=", 0),)
    return Process(
        "SoundStr",
        locations=(
            Location("st1", invariant=first_inv),
            Location("st2", invariant=(ClockAtom("t6", "<=", 30),)),
        ),
        edges=(
            Edge("st1", "st2", sync=Sync("savail", "!"), resets=("t6",)),
            Edge(
                "st2",
                "st2",
                Guard(clock_atoms=(ClockAtom("t6", ">=", 30),)),
                sync=Sync("savail", "!"),
                resets=("t6",),
            ),
        ),
        initial="st1",
    )


def _video_str(stream: str, free_start: bool) -> Process:
    le = lambda c, b: ClockAtom(c, "<=", b)
    ge = lambda c, b: ClockAtom(c, ">=", b)
    if stream == "ideal":
        first_inv = () if free_start else (le("t7", 0),)
        return Process(
            "VideoStr",
            locations=(
                Location("vt1", invariant=first_inv),
                Location("vt2", invariant=(le("t7", 40),)),
            ),
            edges=(
                Edge("vt1", "vt2", sync=Sync("vavail", "!"), resets=("t7",)),
                Edge("vt2", "vt2", Guard(clock_atoms=(ge("t7", 40),)), sync=Sync("vavail", "!"), resets=("t7",)),
            ),
            initial="vt1",
        )
    if stream == "nonanchored":
        # each inter-frame gap independently in [35,45]; the first frame uses
        # the same window after the (possibly delayed) start
        locations = [Location("vt2", invariant=(le("t7", 45),))]
        edges = [
            Edge(
                "vt2",
                "vt2",
                Guard(clock_atoms=(ge("t7", 35),)),
                sync=Sync("vavail", "!"),
                resets=("t7",),
            )
        ]
        if free_start:
            locations.insert(0, Location("vt1"))
            edges.insert(0, Edge("vt1", "vt2", resets=("t7",)))
            initial = "vt1"
        else:
            initial = "vt2"
        return Process("VideoStr", tuple(locations), tuple(edges), initial)
    # anchored: a metronome resets t7 exactly every 40 ms; frame k is emitted
    # within [40k-5, 40k+5], so deviations never accumulate
    locations = [
        Location("vtW", invariant=(le("t7", 40),)),  # frame pending, early window
        Location("vtD", invariant=(le("t7", 40),)),  # frame done, awaiting tick
        Location("vtL", invariant=(le("t7", 5),)),   # late window after the tick
    ]
    edges = [
        Edge("vtW", "vtD", Guard(clock_atoms=(ge("t7", 35),)), sync=Sync("vavail", "!")),
        Edge("vtW", "vtL", Guard(clock_atoms=(ge("t7", 40),)), resets=("t7",)),
        Edge("vtD", "vtW", Guard(clock_atoms=(ge("t7", 40),)), resets=("t7",)),
        Edge("vtL", "vtW", Guard(clock_atoms=(le("t7", 5),)), sync=Sync("vavail", "!")),
    ]
    if free_start:
        locations.insert(0, Location("vt0"))
        edges.insert(0, Edge("vt0", "vtL", resets=("t7",)))
        initial = "vt0"
    else:
        initial = "vtL"
    return Process("VideoStr", tuple(locations), tuple(edges), initial)


def build_lipsync(cfg: LipSyncConfig) -> Network:
    net = Network(
        processes=(
            _video_mgr(),
            _sound_mgr(),
            _video_wdg(),
            _sound_wdg(),
            _synch(),
            _video_synch(),
            _sound_synch(),
            _sound_clock(),
            _video_str(cfg.stream, cfg.free_start),
            _sound_str(cfg.free_start),
        ),
        clocks=("t1", "t2", "t3", "t4", "t5", "t6", "t7"),
        variables=(IntVar("vmins", -200, 60, 0),),
        channels=(
            Channel("savail"),
            Channel("vavail"),
            Channel("sready"),
            Channel("vready"),
            Channel("sok", urgent=True),
            Channel("vok"),
            Channel("sokk"),
            Channel("vokk"),
            Channel("std"),
            Channel("sti"),
            Channel("sclock"),
            Channel("ss0"),
            Channel("ss1"),
            Channel("sv0"),
            Channel("sv1"),
        ),
    )
    validate_network(net)
    return net


ERROR_LOCATIONS = (
    ("SoundSynch", "s07"),
    ("VideoSynch", "v06"),
    ("VideoSynch", "v07"),
    ("VideoWdg", "vw5"),
    ("SoundWdg", "sw5"),
)

QUERY_LABELS = ("s07", "v06", "v07", "vw5", "sw5")


def lipsync_queries() -> list[Query]:
    """The five error-reachability queries, excluding the other four errors."""
    out = []
    for k, (proc, loc) in enumerate(ERROR_LOCATIONS):
        others = [ProcessAt(p, l) for i, (p, l) in enumerate(ERROR_LOCATIONS) if i != k]
        disj = others[0]
        for o in others[1:]:
            disj = Or(disj, o)
        out.append(Query(EXISTS_EVENTUALLY, And(ProcessAt(proc, loc), Not(disj))))
    return out


def builtin_queries(cfg) -> list[Query]:
    if isinstance(cfg, PuriConfig):
        return puri_queries()
    return lipsync_queries()


# Expected T/F cells for the six lip-sync configurations.  Key: (stream,
# free_start, query label, mode) where mode is "standard" or "robust";
# value True means the error location is reachable (T).
_T1 = {  # streams with possible initial delay
    "standard": {
        "s07": (True, True, True),
        "v06": (True, True, True),
        "v07": (False, True, True),
        "vw5": (False, True, False),
        "sw5": (False, False, False),
    },
    "robust": {
        "s07": (True, True, True),
        "v06": (True, True, True),
        "v07": (True, True, True),
        "vw5": (False, True, False),
        "sw5": (False, False, False),
    },
}
_T2 = {  # streams starting together at time zero
    "standard": {
        "s07": (False, False, False),
        "v06": (False, False, False),
        "v07": (False, False, True),
        "vw5": (False, True, False),
        "sw5": (False, False, False),
    },
    "robust": {
        "s07": (False, False, False),
        "v06": (False, False, False),
        "v07": (True, True, True),
        "vw5": (False, True, False),
        "sw5": (False, False, False),
    },
}

EXPECTED_VERDICTS: dict[tuple[str, bool, str, str], bool] = {}
for _mode in ("standard", "robust"):
    for _label in QUERY_LABELS:
        for _col, _stream in enumerate(STREAMS):
            EXPECTED_VERDICTS[(_stream, True, _label, _mode)] = _T1[_mode][_label][_col]
            EXPECTED_VERDICTS[(_stream, False, _label, _mode)] = _T2[_mode][_label][_col]


def all_configs() -> list[LipSyncConfig]:
    return [LipSyncConfig(stream, free) for free in (True, False) for stream in STREAMS]
