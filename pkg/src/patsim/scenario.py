"""Synthetic contact scenarios and the end-to-end PAT delay pipeline.

A scenario is a set of LEO satellites, ground stations and deep-space nodes.
Visibility windows come from the idealized geometry in :mod:`patsim.orbits`;
a seeded slot scheduler turns them into a non-overlapping contact plan, and
each contact is evaluated with the pointing, acquisition and tracking models
while carrying every node's last boresight forward.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import orbits
from .acquisition import acquisition_delay, build_geometry
from .errors import CoincidentNodes, EmptyScenario, OverlappingContacts, ScenarioError, ValidationError
from .geometry import STANDARD_FRAME, LocalFrame, unit
from .pointing import PointingState, SlewRequirement, pointing_delay_one_side, slew_requirement
from .terminal import TerminalSpec
from .tracking import TrackingParams, acq_to_track_delay

logger = logging.getLogger(__name__)

MIN_DEEP_SPACE_RANGE = 1e9
# visibility is sampled on a dense grid; beyond this it would exhaust memory
MAX_TIME_SAMPLES = 2_000_000
LEO_ALTITUDE_RANGE_KM = (300.0, 2000.0)


class NodeClass(str, enum.Enum):
    LEO = "LEO"
    GROUND = "GROUND"
    DEEP_SPACE = "DEEP_SPACE"


class LinkTransitionClass(str, enum.Enum):
    IPN_TO_IPN = "IPN_TO_IPN"
    GROUND_OR_LEO_TO_IPN = "GROUND_OR_LEO_TO_IPN"
    LEO_TO_LEO = "LEO_TO_LEO"
    LEO_TO_GROUND = "LEO_TO_GROUND"
    FIRST_CONTACT = "FIRST_CONTACT"


# Contact-level label = the highest-ranked endpoint label; this keeps it
# recoverable from the two per-endpoint columns of the delay CSV.
CLASS_PRIORITY = (
    LinkTransitionClass.GROUND_OR_LEO_TO_IPN,
    LinkTransitionClass.LEO_TO_LEO,
    LinkTransitionClass.LEO_TO_GROUND,
    LinkTransitionClass.IPN_TO_IPN,
    LinkTransitionClass.FIRST_CONTACT,
)

LEO_ACQ = "LEO Acq"
IPN_ACQ = "IPN Acq"
_IPN_SIDE = {LinkTransitionClass.IPN_TO_IPN, LinkTransitionClass.GROUND_OR_LEO_TO_IPN}
_LEO_SIDE = {LinkTransitionClass.LEO_TO_LEO, LinkTransitionClass.LEO_TO_GROUND}


@dataclass(frozen=True)
class LeoOrbit:
    altitude_km: float
    inclination_deg: float
    raan_deg: float
    true_anomaly_deg: float


@dataclass(frozen=True)
class GroundSite:
    latitude_deg: float
    longitude_deg: float


@dataclass(frozen=True)
class DeepSpaceDirection:
    unit: tuple[float, float, float]
    range_m: float


@dataclass(frozen=True)
class Node:
    id: str
    node_class: NodeClass
    spec: TerminalSpec
    terminal_id: str = ""
    orbit: LeoOrbit | None = None
    site: GroundSite | None = None
    direction: DeepSpaceDirection | None = None

    def validate(self) -> None:
        populated = {
            NodeClass.LEO: self.orbit,
            NodeClass.GROUND: self.site,
            NodeClass.DEEP_SPACE: self.direction,
        }
        if sum(v is not None for v in populated.values()) != 1 or populated[self.node_class] is None:
            raise ValidationError(
                f"node {self.id!r}: exactly one of orbit/site/direction must be set, "
                f"matching class {self.node_class.value}"
            )
        if self.orbit is not None:
            lo, hi = LEO_ALTITUDE_RANGE_KM
            if not lo <= self.orbit.altitude_km <= hi:
                logger.warning("node %s: LEO altitude %.1f km outside [%g, %g] km",
                               self.id, self.orbit.altitude_km, lo, hi)
        if self.site is not None and not -90 <= self.site.latitude_deg <= 90:
            raise ValidationError(f"node {self.id!r}: latitude outside [-90, 90]")
        if self.direction is not None:
            if self.direction.range_m < MIN_DEEP_SPACE_RANGE:
                raise ValidationError(f"node {self.id!r}: deep-space range must be >= 1e9 m")
            if abs(float(np.linalg.norm(self.direction.unit)) - 1.0) > 1e-6:
                raise ValidationError(f"node {self.id!r}: direction must be a unit vector")


def propagate(node: Node, t) -> np.ndarray:
    """ECI position (m) of ``node`` at time(s) ``t`` seconds after epoch."""
    if node.node_class is NodeClass.LEO:
        return orbits.leo_position(node.orbit, t)
    if node.node_class is NodeClass.GROUND:
        return orbits.ground_position(node.site, t)
    return orbits.deep_space_position(node.direction, t)


def local_frame(node: Node, t: float) -> LocalFrame:
    if node.node_class is NodeClass.LEO:
        return orbits.leo_frame(node.orbit, t)
    if node.node_class is NodeClass.GROUND:
        return orbits.ground_frame(node.site, t)
    return orbits.deep_space_frame(node.direction)


line_of_sight = orbits.line_of_sight


@dataclass(frozen=True)
class ModelOptions:
    sequential_axes: bool = False
    geometric_d_mode: bool = False
    expected_fraction: float = 1.0
    allow_negative_counter: bool = True


DEFAULT_LINKS = (
    (NodeClass.LEO, NodeClass.LEO),
    (NodeClass.LEO, NodeClass.GROUND),
    (NodeClass.LEO, NodeClass.DEEP_SPACE),
    (NodeClass.GROUND, NodeClass.DEEP_SPACE),
)


@dataclass
class Scenario:
    nodes: list[Node]
    horizon_s: float = 86400.0
    time_step_s: float = 10.0
    seed: int = 42
    elevation_mask_deg: float = 10.0
    slot_s: float = 300.0
    max_contact_s: float = 1800.0
    # per node-class-pair overrides of max_contact_s
    max_contact_by_link: dict[frozenset, float] = field(default_factory=dict)
    ground_first: bool = True
    alternate_classes: bool = True
    links: tuple[tuple[NodeClass, NodeClass], ...] = DEFAULT_LINKS
    # "all" or "in_plane": restrict LEO-LEO links to satellites sharing an orbital plane
    crosslinks: str = "all"
    options: ModelOptions = field(default_factory=ModelOptions)

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    @property
    def node_map(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    def link_allowed(self, a: NodeClass, b: NodeClass) -> bool:
        return any({a, b} == {x, y} for x, y in self.links)

    def contact_cap(self, a: NodeClass, b: NodeClass) -> float:
        return self.max_contact_by_link.get(frozenset((a, b)), self.max_contact_s)

    def pairs(self) -> list[tuple[Node, Node]]:
        out = []
        for i, a in enumerate(self.nodes):
            for b in self.nodes[i + 1:]:
                if not self.link_allowed(a.node_class, b.node_class):
                    continue
                if self.crosslinks == "in_plane" and a.orbit and b.orbit and (
                    a.orbit.raan_deg != b.orbit.raan_deg
                    or a.orbit.inclination_deg != b.orbit.inclination_deg
                ):
                    continue
                out.append((a, b))
        return out


@dataclass(frozen=True)
class Contact:
    node_a: str
    node_b: str
    start: float
    end: float

    def __post_init__(self) -> None:
        if not self.start < self.end:
            raise ValidationError(f"contact {self.node_a}-{self.node_b}: start must precede end")
        if self.node_a == self.node_b:
            raise ValidationError(f"contact endpoints must differ ({self.node_a})")


@dataclass(frozen=True)
class PatDelayBreakdown:
    t_pointing: float
    t_seek: float
    t_dwell_total: float
    t_acq: float
    t_acq_to_track: float
    t_total: float
    transition_class: LinkTransitionClass


@dataclass(frozen=True)
class ContactRecord:
    """One evaluated contact plus what the sweeps need to re-evaluate it."""

    contact: Contact
    breakdown: PatDelayBreakdown
    class_a: LinkTransitionClass
    class_b: LinkTransitionClass
    slew_a: SlewRequirement
    slew_b: SlewRequirement
    seeker: str
    acq_class: str
    range_m: float


@dataclass
class SimulationResult:
    scenario: Scenario
    records: list[ContactRecord]


# --------------------------------------------------------------------------
# visibility and contact generation


def time_grid(horizon_s: float, time_step_s: float) -> np.ndarray:
    n = int(math.floor(horizon_s / time_step_s + 1e-9))
    return np.arange(n + 1) * time_step_s


def _visibility(a: Node, b: Node, pos_a, pos_b, mask_rad: float) -> np.ndarray:
    surface = NodeClass.GROUND in (a.node_class, b.node_class)
    radius = orbits.EARTH_RADIUS if surface else orbits.EARTH_RADIUS + orbits.ATMOSPHERE_MARGIN
    visible = ~orbits.segment_occluded(pos_a, pos_b, radius)
    diff = pos_b - pos_a
    rng = np.linalg.norm(diff, axis=-1)
    for node, origin, sign in ((a, pos_a, 1.0), (b, pos_b, -1.0)):
        if node.node_class is NodeClass.GROUND:
            up = origin / np.linalg.norm(origin, axis=-1, keepdims=True)
            sin_el = sign * np.einsum("...i,...i->...", diff, up) / rng
            visible &= sin_el >= math.sin(mask_rad)
    return visible


@dataclass(frozen=True)
class VisibilityWindow:
    node_a: str
    node_b: str
    start: float
    end: float


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    padded = np.concatenate([[False], mask, [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    return [(int(s), int(e) - 1) for s, e in zip(edges[::2], edges[1::2])]


class _Geometry:
    """Per-node position tracks on the sampling grid, computed once."""

    def __init__(self, scenario: Scenario, times: np.ndarray):
        self.times = times
        self.pos = {n.id: propagate(n, times) for n in scenario.nodes}
        for n in scenario.nodes:
            if self.pos[n.id].shape != (len(times), 3):
                self.pos[n.id] = np.broadcast_to(self.pos[n.id], (len(times), 3))
        mask = math.radians(scenario.elevation_mask_deg)
        self.visible: dict[tuple[str, str], np.ndarray] = {}
        for a, b in scenario.pairs():
            pa, pb = self.pos[a.id], self.pos[b.id]
            if np.any(np.all(pa == pb, axis=-1)):
                raise CoincidentNodes(f"nodes {a.id} and {b.id} coincide")
            self.visible[(a.id, b.id)] = _visibility(a, b, pa, pb, mask)


def _check_scenario(scenario: Scenario, horizon_s: float, time_step_s: float) -> None:
    if not scenario.nodes:
        raise EmptyScenario("scenario has no nodes")
    if not (horizon_s > 0 and time_step_s > 0):
        raise ScenarioError("horizon and time_step must be positive")
    if horizon_s / time_step_s > MAX_TIME_SAMPLES:
        raise ScenarioError(
            f"horizon_s / time_step_s = {horizon_s / time_step_s:.3g} samples exceeds "
            f"the limit of {MAX_TIME_SAMPLES}"
        )
    for n in scenario.nodes:
        n.validate()


def generate_contacts(
    scenario: Scenario, horizon: float | None = None, time_step: float | None = None
) -> list[VisibilityWindow]:
    """Maximal line-of-sight intervals for every configured node pair.

    Intervals are sampled on a ``time_step`` grid; ground endpoints also need
    the partner above the elevation mask. Sorted by start, then node ids.
    """
    horizon = scenario.horizon_s if horizon is None else horizon
    time_step = scenario.time_step_s if time_step is None else time_step
    _check_scenario(scenario, horizon, time_step)
    times = time_grid(horizon, time_step)
    geo = _Geometry(scenario, times)
    out = []
    for (a, b), vis in geo.visible.items():
        for i, j in _runs(vis):
            if j > i:
                out.append(VisibilityWindow(a, b, float(times[i]), float(times[j])))
    out.sort(key=lambda w: (w.start, w.node_a, w.node_b))
    return out


def _preempt(a, b, busy, active, classes, t0, done) -> bool:
    """Free a LEO held in a LEO-LEO crosslink so a ground or deep-space node
    can take it. Only one side of the new pair may be busy."""
    if classes[a] is NodeClass.LEO and classes[b] is NodeClass.LEO:
        return False
    held = [n for n in (a, b) if n in busy]
    if len(held) != 1 or classes[held[0]] is not NodeClass.LEO:
        return False
    leo = held[0]
    pair = next((p for p in active if leo in p), None)
    if pair is None or active[pair][0] >= t0:
        return False
    if not all(classes[n] is NodeClass.LEO for n in pair):
        return False
    start = active.pop(pair)[0]
    done.append((*pair, start, t0))
    busy.difference_update(pair)
    return True


def schedule_contacts(scenario: Scenario, seed: int | None = None) -> list[Contact]:
    """Pick a non-overlapping contact plan from the visibility windows.

    Time is cut into ``slot_s`` slots and only pairs visible for a whole slot
    are candidates. A running contact is kept while its pair stays visible and
    it is shorter than ``max_contact_s``; after that the pair may not
    reconnect in the very next slot. Free nodes are then matched greedily in a
    seeded random order, preferring (1) a partner of a different node class
    than the previous one, (2) any new partner, and, with ``ground_first``,
    pairs involving a ground or deep-space node ahead of LEO-LEO pairs; such
    pairs may also cut a running LEO-LEO crosslink short.
    """
    _check_scenario(scenario, scenario.horizon_s, scenario.time_step_s)
    step = scenario.time_step_s
    per_slot = scenario.slot_s / step
    if not per_slot >= 1 - 1e-9 or abs(per_slot - round(per_slot)) > 1e-9:
        raise ScenarioError("slot_s must be a positive multiple of time_step_s")
    per_slot = int(round(per_slot))
    times = time_grid(scenario.horizon_s, step)
    geo = _Geometry(scenario, times)
    rng = np.random.default_rng(scenario.seed if seed is None else seed)

    keys = list(geo.visible)
    cums = {k: np.concatenate([[0], np.cumsum(geo.visible[k], dtype=np.int64)]) for k in keys}
    classes = {n.id: n.node_class for n in scenario.nodes}
    last_partner: dict[str, str] = {}
    active: dict[tuple[str, str], list[float]] = {}  # pair -> [start, end]
    done: list[tuple[str, str, float, float]] = []

    def tier(pair: tuple[str, str]) -> tuple[int, int]:
        a, b = pair
        if last_partner.get(a) == b or last_partner.get(b) == a:
            rank = 2
        elif scenario.alternate_classes and any(
            n in last_partner and classes[last_partner[n]] is not classes[m]
            for n, m in ((a, b), (b, a))
        ):
            rank = 0
        else:
            rank = 1
        leo_only = classes[a] is NodeClass.LEO and classes[b] is NodeClass.LEO
        return rank, int(leo_only and scenario.ground_first)

    for i0 in range(0, len(times) - per_slot, per_slot):
        i1 = i0 + per_slot
        t0, t1 = float(times[i0]), float(times[i1])
        eligible = {k for k in keys if cums[k][i1 + 1] - cums[k][i0] == per_slot + 1}
        busy: set[str] = set()
        blocked: set[tuple[str, str]] = set()
        for pair, span in list(active.items()):
            cap = scenario.contact_cap(classes[pair[0]], classes[pair[1]])
            if pair in eligible and t1 - span[0] <= cap + 1e-9:
                span[1] = t1
                busy.update(pair)
            else:
                done.append((*pair, span[0], span[1]))
                del active[pair]
                blocked.add(pair)
        candidates = [k for k in sorted(eligible) if k not in blocked and k not in active]
        order = rng.permutation(len(candidates))
        for a, b in sorted((candidates[j] for j in order), key=tier):
            if a in busy or b in busy:
                if not (scenario.ground_first and _preempt(a, b, busy, active, classes, t0, done)):
                    continue
            busy.update((a, b))
            last_partner[a] = b
            last_partner[b] = a
            active[(a, b)] = [t0, t1]
    done.extend((*pair, span[0], span[1]) for pair, span in active.items())
    contacts = [Contact(a, b, s, e) for a, b, s, e in done]
    contacts.sort(key=lambda c: (c.start, c.node_a, c.node_b))
    return contacts


# --------------------------------------------------------------------------
# transition classes


def _is_ipn_link(a: NodeClass, b: NodeClass | None) -> bool:
    return NodeClass.DEEP_SPACE in (a, b)


def classify_transition(
    node_class: NodeClass,
    previous_partner_class: NodeClass | None,
    next_partner_class: NodeClass,
) -> LinkTransitionClass:
    if previous_partner_class is None:
        return LinkTransitionClass.FIRST_CONTACT
    if _is_ipn_link(node_class, next_partner_class):
        if _is_ipn_link(node_class, previous_partner_class):
            return LinkTransitionClass.IPN_TO_IPN
        return LinkTransitionClass.GROUND_OR_LEO_TO_IPN
    if next_partner_class is NodeClass.LEO:
        if node_class is NodeClass.LEO or previous_partner_class is NodeClass.LEO:
            return LinkTransitionClass.LEO_TO_LEO
        return LinkTransitionClass.LEO_TO_GROUND
    return LinkTransitionClass.LEO_TO_GROUND


def contact_class(a: LinkTransitionClass, b: LinkTransitionClass) -> LinkTransitionClass:
    return min(a, b, key=CLASS_PRIORITY.index)


def acquisition_class(a: LinkTransitionClass, b: LinkTransitionClass) -> str | None:
    """'IPN Acq' / 'LEO Acq' from endpoint labels; None when both are first contacts."""
    for c in (a, b):
        if c in _IPN_SIDE:
            return IPN_ACQ
        if c in _LEO_SIDE:
            return LEO_ACQ
    return None


# --------------------------------------------------------------------------
# evaluation


@dataclass
class NodeState:
    """Last boresight of a node, in its own local (east, north, up) axes."""

    local_boresight: np.ndarray
    partner_class: NodeClass


def select_seeker(a: Node, b: Node) -> tuple[Node, Node]:
    """(seeker, starer): the larger FOU searches; ties go to the first endpoint."""
    if b.spec.fou > a.spec.fou:
        return b, a
    return a, b


def _local_los(node: Node, t: float, direction: np.ndarray) -> np.ndarray:
    return unit(local_frame(node, t).to_local(direction))


def evaluate_contact(
    contact: Contact,
    prev_states: dict[str, NodeState],
    scenario: Scenario,
    seeker: str | None = None,
) -> ContactRecord:
    """Evaluate one contact and advance ``prev_states`` for its endpoints."""
    nodes = scenario.node_map
    a, b = nodes[contact.node_a], nodes[contact.node_b]
    opts = scenario.options

    direction, rng, _ = line_of_sight(propagate(a, contact.start), propagate(b, contact.start))
    link_a = _local_los(a, contact.start, direction)
    link_b = _local_los(b, contact.start, -direction)

    def side(node: Node, partner: Node, v_link: np.ndarray):
        prev = prev_states.get(node.id)
        cls = classify_transition(
            node.node_class, prev.partner_class if prev else None, partner.node_class
        )
        v_init = prev.local_boresight if prev else v_link
        req = slew_requirement(PointingState(v_init, v_link, STANDARD_FRAME))
        return cls, req, pointing_delay_one_side(req, node.spec, opts.sequential_axes)

    class_a, slew_a, tp_a = side(a, b, link_a)
    class_b, slew_b, tp_b = side(b, a, link_b)
    t_pointing = max(tp_a, tp_b)

    if seeker is None:
        seek_node, stare_node = select_seeker(a, b)
    else:
        seek_node = nodes[seeker]
        stare_node = b if seek_node is a else a
    geom = build_geometry(rng, seek_node.spec, stare_node.spec, opts.geometric_d_mode)
    acq = acquisition_delay(geom, seek_node.spec, opts.expected_fraction)
    t_track = max(
        acq_to_track_delay(TrackingParams.from_terminal(a.spec)),
        acq_to_track_delay(TrackingParams.from_terminal(b.spec)),
    )
    breakdown = PatDelayBreakdown(
        t_pointing=t_pointing,
        t_seek=acq.t_seek,
        t_dwell_total=acq.dwell_total,
        t_acq=acq.t_acq,
        t_acq_to_track=t_track,
        t_total=t_pointing + acq.t_acq + t_track,
        transition_class=contact_class(class_a, class_b),
    )

    # both heads track their partner until the contact ends
    end_dir, _, _ = line_of_sight(propagate(a, contact.end), propagate(b, contact.end))
    prev_states[a.id] = NodeState(_local_los(a, contact.end, end_dir), b.node_class)
    prev_states[b.id] = NodeState(_local_los(b, contact.end, -end_dir), a.node_class)

    acq_class = IPN_ACQ if _is_ipn_link(a.node_class, b.node_class) else LEO_ACQ
    return ContactRecord(
        contact, breakdown, class_a, class_b, slew_a, slew_b, seek_node.id, acq_class, rng
    )


def check_no_overlap(contacts: Sequence[Contact]) -> None:
    busy_until: dict[str, float] = {}
    for c in sorted(contacts, key=lambda c: (c.start, c.node_a, c.node_b)):
        for n in (c.node_a, c.node_b):
            if busy_until.get(n, -math.inf) > c.start:
                raise OverlappingContacts(
                    f"node {n} has overlapping contacts (next starts at {c.start:g} s)"
                )
            busy_until[n] = c.end


def evaluate_contacts(
    scenario: Scenario, contacts: Iterable[Contact]
) -> list[ContactRecord]:
    contacts = sorted(contacts, key=lambda c: (c.start, c.node_a, c.node_b))
    check_no_overlap(contacts)
    states: dict[str, NodeState] = {}
    return [evaluate_contact(c, states, scenario) for c in contacts]


def simulate(scenario: Scenario, seed: int | None = None) -> SimulationResult:
    contacts = schedule_contacts(scenario, seed)
    return SimulationResult(scenario, evaluate_contacts(scenario, contacts))
