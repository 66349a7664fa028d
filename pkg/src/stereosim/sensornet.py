"""Deterministic lock-step simulator of a stereo camera sensor field.

Camera pairs capture frames, match them locally into disparity maps, detect
depth-change events, and forward payloads hop by hop to a mains-powered sink
while every battery-powered node pays radio and processing energy. Steps are
numbered from 1 and pairs run in ascending (left, right) node-id order, so a
scenario always produces a bit-identical report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .imaging import GrayImage, parse_pgm, pgm_num_bytes
from .stereo import (
    DisparityMap,
    MatchParams,
    compute_disparity,
    rle_encode_disparity,
    sidecar_num_bytes,
)
from .synthetic import shifted_sequence

__all__ = [
    "ROLES",
    "POLICIES",
    "EnergyModel",
    "SensorNode",
    "StereoPair",
    "Scenario",
    "ScenarioError",
    "RoutingError",
    "DeadNodeError",
    "EventRecord",
    "TransmissionRecord",
    "DropRecord",
    "NodeReport",
    "PairReport",
    "SimReport",
    "route_to_sink",
    "detect_event",
    "transmission_bytes",
    "charge_processing",
    "charge_transmission",
    "run_simulation",
    "network_lifetime",
    "validate_scenario",
    "scenario_from_dict",
    "load_scenario",
    "report_to_dict",
    "save_report",
]

ROLES = ("camera", "relay", "sink")
POLICIES = ("disparity_on_event", "disparity_always", "raw_always")

_BYTES_PER_64KB = 65536.0


class ScenarioError(ValueError):
    """Scenario construction or validation failed; carries every finding."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class RoutingError(ValueError):
    """A node has no path to the sink."""


class DeadNodeError(RuntimeError):
    """A depleted node was asked to transmit."""

    def __init__(self, node_id: int):
        self.node_id = node_id
        super().__init__(f"node {node_id} is depleted and cannot transmit")


@dataclass(frozen=True)
class EnergyModel:
    """Radio and CPU energy rates in microjoules per 64 KiB, scaled linearly by byte count."""

    tx_energy_per_64kb: float = 377.0
    cpu_energy_per_64kb_processed: float = 0.00195

    def __post_init__(self):
        if not self.tx_energy_per_64kb > 0:
            raise ValueError(f"tx_energy_per_64kb must be positive, got {self.tx_energy_per_64kb}")
        if not self.cpu_energy_per_64kb_processed > 0:
            raise ValueError(
                f"cpu_energy_per_64kb_processed must be positive, got {self.cpu_energy_per_64kb_processed}"
            )

    def tx_cost(self, nbytes: int) -> float:
        return nbytes * (self.tx_energy_per_64kb / _BYTES_PER_64KB)

    def cpu_cost(self, nbytes: int) -> float:
        return nbytes * (self.cpu_energy_per_64kb_processed / _BYTES_PER_64KB)


@dataclass
class SensorNode:
    """Battery-powered field node, or the mains-powered sink."""

    id: int
    role: str
    battery: float = 0.0
    position: tuple[float, float] = (0.0, 0.0)

    @property
    def alive(self) -> bool:
        return self.battery > 0.0


@dataclass
class StereoPair:
    """Two camera nodes observing one scene plus their frame schedule.

    The left node runs the matcher and originates sink-bound traffic; the
    right node forwards its frame to the left over an assumed one-hop
    intra-pair link every step.
    """

    left_node: int
    right_node: int
    match_params: MatchParams
    frames: list[tuple[GrayImage, GrayImage]]
    baseline: float = 0.1
    focal_length: float = 100.0


@dataclass
class Scenario:
    """Complete simulation input; run_simulation never mutates it."""

    nodes: list[SensorNode]
    pairs: list[StereoPair]
    links: list[tuple[int, int]]
    policy: str = "disparity_on_event"
    event_threshold: float = 1.0
    seed: int = 0
    energy: EnergyModel = field(default_factory=EnergyModel)


@dataclass(frozen=True)
class EventRecord:
    step: int
    pair: tuple[int, int]
    change: float


@dataclass(frozen=True)
class TransmissionRecord:
    step: int
    pair: tuple[int, int]
    payload: str  # raw_frame | disparity_rle | raw_pair
    bytes: int
    path: tuple[int, ...]


@dataclass(frozen=True)
class DropRecord:
    step: int
    pair: tuple[int, int]
    reason: str  # camera-dead | origin-dead | relay-dead
    node: int
    payload: str | None
    bytes: int


@dataclass
class NodeReport:
    id: int
    role: str
    initial_battery_uj: float
    final_battery_uj: float
    processing_uj: float = 0.0
    transmission_uj: float = 0.0
    bytes_transmitted: int = 0
    deficit_uj: float = 0.0
    died_at_step: int | None = None


@dataclass
class PairReport:
    left: int
    right: int
    width: int
    height: int
    max_disparity: int
    elementary_ops: int
    sidecar_bytes: int
    raw_pair_bytes: int
    rle_bytes_min: int | None
    rle_bytes_max: int | None


@dataclass
class SimReport:
    """Outcome of one simulation run; field names are the stable interface."""

    policy: str
    steps: int
    event_threshold: float
    seed: int
    nodes: list[NodeReport]
    pairs: list[PairReport]
    events: list[EventRecord]
    transmissions: list[TransmissionRecord]
    drops: list[DropRecord]
    total_elementary_ops: int
    lifetime: int | None  # None means every camera and relay survived


def route_to_sink(scenario: Scenario, from_id: int) -> list[int]:
    """Minimum-hop path from a node to the sink over the scenario links.

    Among equal-length paths the walk always takes the smallest next node
    id, so the route is deterministic. Raises RoutingError when the node is
    disconnected from the sink.
    """
    nodes = {n.id for n in scenario.nodes}
    if from_id not in nodes:
        raise RoutingError(f"unknown node {from_id}")
    sink = next(n.id for n in scenario.nodes if n.role == "sink")
    if from_id == sink:
        return [sink]
    adjacency: dict[int, set[int]] = {i: set() for i in nodes}
    for a, b in scenario.links:
        if a in nodes and b in nodes:
            adjacency[a].add(b)
            adjacency[b].add(a)
    # hop counts to the sink, then a greedy smallest-id descent
    dist = {sink: 0}
    frontier = [sink]
    while frontier:
        nxt = []
        for u in frontier:
            for v in sorted(adjacency[u]):
                if v not in dist:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    if from_id not in dist:
        raise RoutingError(f"node {from_id} has no route to sink {sink}")
    path = [from_id]
    cur = from_id
    while cur != sink:
        cur = min(v for v in adjacency[cur] if dist.get(v) == dist[cur] - 1)
        path.append(cur)
    return path


def detect_event(
    prev: DisparityMap | None, curr: DisparityMap, threshold: float
) -> tuple[bool, float]:
    """Depth-change trigger between consecutive disparity maps.

    The change is the mean absolute disparity difference over pixels valid
    in both maps (0 when none are). Triggers when change > threshold; the
    first frame of a sequence, prev None, always triggers with change 0.
    """
    if prev is None:
        return True, 0.0
    if (prev.width, prev.height) != (curr.width, curr.height):
        raise ValueError(
            f"map dimensions differ: {prev.width}x{prev.height} vs {curr.width}x{curr.height}"
        )
    if prev.max_disparity != curr.max_disparity:
        raise ValueError(
            f"max_disparity differs: {prev.max_disparity} vs {curr.max_disparity}"
        )
    both = prev.valid & curr.valid
    count = int(both.sum())
    if count == 0:
        change = 0.0
    else:
        diff = np.abs(
            prev.disparities.astype(np.int64) - curr.disparities.astype(np.int64)
        )
        change = int(diff[both].sum()) / count
    return change > threshold, change


def transmission_bytes(payload) -> int:
    """Byte count of a canonical payload.

    A DisparityMap costs its exact sidecar, 16 header bytes plus 3 per
    pixel; a (left, right) frame pair costs both canonical PGM encodings.
    """
    if isinstance(payload, DisparityMap):
        return sidecar_num_bytes(payload.width, payload.height)
    if (
        isinstance(payload, (tuple, list))
        and len(payload) == 2
        and all(isinstance(p, GrayImage) for p in payload)
    ):
        return pgm_num_bytes(payload[0]) + pgm_num_bytes(payload[1])
    raise TypeError("payload must be a DisparityMap or a (left, right) GrayImage pair")


def charge_processing(node: SensorNode, nbytes: int, model: EnergyModel) -> float:
    """Draw CPU energy for nbytes of data handled; returns the energy drawn.

    The battery floors at zero: a node may finish its fatal workload, paying
    only what it has left, and is dead afterwards.
    """
    cost = model.cpu_cost(nbytes)
    drawn = cost if node.battery >= cost else node.battery
    node.battery -= drawn
    return drawn


def charge_transmission(
    path: list[SensorNode], nbytes: int, model: EnergyModel
) -> list[tuple[SensorNode, float]]:
    """Charge radio energy along a path; every node but the last transmits.

    Returns (node, energy drawn) per transmitter. A node dying mid-path
    still forwards the in-flight payload, but a transmitter that is already
    dead raises DeadNodeError before anything is charged.
    """
    for node in path[:-1]:
        if not node.alive:
            raise DeadNodeError(node.id)
    charged = []
    for node in path[:-1]:
        cost = model.tx_cost(nbytes)
        drawn = cost if node.battery >= cost else node.battery
        node.battery -= drawn
        charged.append((node, drawn))
    return charged


def validate_scenario(scenario: Scenario) -> list[str]:
    """Every validation finding, each prefixed with the offending location."""
    errors: list[str] = []
    ids: dict[int, SensorNode] = {}
    for i, node in enumerate(scenario.nodes):
        where = f"nodes[{i}]"
        if node.role not in ROLES:
            errors.append(f"{where}.role: must be one of {ROLES}, got {node.role!r}")
        if not node.battery >= 0:  # also rejects NaN
            errors.append(f"{where}.battery: must be >= 0, got {node.battery}")
        if node.id in ids:
            errors.append(f"{where}.id: duplicate node id {node.id}")
        else:
            ids[node.id] = node
    sinks = [n for n in scenario.nodes if n.role == "sink"]
    if len(sinks) != 1:
        errors.append(f"nodes: exactly one sink required, found {len(sinks)}")
    for i, (a, b) in enumerate(scenario.links):
        if a not in ids or b not in ids:
            errors.append(f"links[{i}]: references unknown node in ({a}, {b})")
        elif a == b:
            errors.append(f"links[{i}]: self-link on node {a}")
    if scenario.policy not in POLICIES:
        errors.append(f"policy: must be one of {POLICIES}, got {scenario.policy!r}")
    if not scenario.event_threshold >= 0:
        errors.append(f"event_threshold: must be >= 0, got {scenario.event_threshold}")

    seen_pairs = set()
    for i, pair in enumerate(scenario.pairs):
        where = f"pairs[{i}]"
        ok_nodes = True
        for side, nid in (("left", pair.left_node), ("right", pair.right_node)):
            if nid not in ids:
                errors.append(f"{where}.{side}: unknown node {nid}")
                ok_nodes = False
            elif ids[nid].role != "camera":
                errors.append(f"{where}.{side}: node {nid} has role {ids[nid].role!r}, not camera")
        if pair.left_node == pair.right_node:
            errors.append(f"{where}: left and right must differ, both are {pair.left_node}")
        key = (pair.left_node, pair.right_node)
        if key in seen_pairs:
            errors.append(f"{where}: duplicate pair {key}")
        seen_pairs.add(key)
        if not pair.baseline > 0:
            errors.append(f"{where}.baseline: must be positive, got {pair.baseline}")
        if not pair.focal_length > 0:
            errors.append(f"{where}.focal_length: must be positive, got {pair.focal_length}")
        if not pair.frames:
            errors.append(f"{where}.frames: at least one step is required")
            continue
        w, h = pair.frames[0][0].width, pair.frames[0][0].height
        for t, (lf, rf) in enumerate(pair.frames):
            if (lf.width, lf.height) != (rf.width, rf.height):
                errors.append(
                    f"{where}.frames[{t}]: left is {lf.width}x{lf.height} "
                    f"but right is {rf.width}x{rf.height}"
                )
            if (lf.width, lf.height) != (w, h):
                errors.append(
                    f"{where}.frames[{t}]: {lf.width}x{lf.height} differs from step 0 ({w}x{h})"
                )
        if pair.match_params.window_side > min(w, h):
            errors.append(
                f"{where}.match: window side {pair.match_params.window_side} "
                f"exceeds frame extent {w}x{h}"
            )
        if pair.match_params.max_disparity >= w:
            errors.append(
                f"{where}.match: max_disparity {pair.match_params.max_disparity} "
                f"must be smaller than frame width {w}"
            )
        if ok_nodes and len(sinks) == 1:
            try:
                route_to_sink(scenario, pair.left_node)
            except RoutingError as exc:
                errors.append(f"{where}: {exc}")
    return errors


def run_simulation(scenario: Scenario) -> SimReport:
    """Run the lock-step rounds and return the full energy and event ledger.

    Each step, each pair in ascending (left, right) id order: the right
    camera forwards its frame to the left over one hop, the left pays CPU
    energy for both frames plus one output map and runs the matcher, the
    event detector compares against the previous map, and the active policy
    decides whether the RLE-encoded map or the raw frame pair travels the
    minimum-hop route to the sink. Dead nodes neither process nor transmit;
    payloads blocked by a dead origin or relay are recorded as drops.
    """
    errors = validate_scenario(scenario)
    if errors:
        raise ScenarioError(errors)
    model = scenario.energy

    nodes = {n.id: replace(n) for n in scenario.nodes}
    reports = {
        n.id: NodeReport(
            id=n.id,
            role=n.role,
            initial_battery_uj=n.battery,
            final_battery_uj=n.battery,
        )
        for n in scenario.nodes
    }
    pair_order = sorted(scenario.pairs, key=lambda p: (p.left_node, p.right_node))
    pair_reports = {}
    for pair in pair_order:
        w, h = pair.frames[0][0].width, pair.frames[0][0].height
        pair_reports[(pair.left_node, pair.right_node)] = PairReport(
            left=pair.left_node,
            right=pair.right_node,
            width=w,
            height=h,
            max_disparity=pair.match_params.max_disparity,
            elementary_ops=0,
            sidecar_bytes=sidecar_num_bytes(w, h),
            raw_pair_bytes=transmission_bytes(pair.frames[0]),
            rle_bytes_min=None,
            rle_bytes_max=None,
        )

    events: list[EventRecord] = []
    transmissions: list[TransmissionRecord] = []
    drops: list[DropRecord] = []
    last_maps: dict[tuple[int, int], DisparityMap] = {}
    total_ops = 0
    steps = max((len(p.frames) for p in scenario.pairs), default=0)

    def mark_death(node: SensorNode, step: int):
        rep = reports[node.id]
        if not node.alive and rep.died_at_step is None:
            rep.died_at_step = step

    def transmit(step, key, path_ids, nbytes, kind):
        path_nodes = [nodes[i] for i in path_ids]
        dead = next((n.id for n in path_nodes[:-1] if not n.alive), None)
        if dead is not None:
            reason = "origin-dead" if dead == path_ids[0] else "relay-dead"
            drops.append(DropRecord(step, key, reason, dead, kind, nbytes))
            return
        # relays forward payloads verbatim; an in-transit transform of the
        # map at each hop would slot in here if one were ever defined
        for node, drawn in charge_transmission(path_nodes, nbytes, model):
            rep = reports[node.id]
            rep.transmission_uj += drawn
            rep.deficit_uj += model.tx_cost(nbytes) - drawn
            rep.bytes_transmitted += nbytes
            mark_death(node, step)
        transmissions.append(TransmissionRecord(step, key, kind, nbytes, tuple(path_ids)))

    for step in range(1, steps + 1):
        for pair in pair_order:
            if step > len(pair.frames):
                continue
            key = (pair.left_node, pair.right_node)
            left = nodes[pair.left_node]
            right = nodes[pair.right_node]
            if not left.alive or not right.alive:
                dead = left.id if not left.alive else right.id
                drops.append(DropRecord(step, key, "camera-dead", dead, None, 0))
                continue
            lf, rf = pair.frames[step - 1]

            # partner frame crosses the intra-pair link so the left node can match
            transmit(step, key, [right.id, left.id], pgm_num_bytes(rf), "raw_frame")

            workload = pgm_num_bytes(lf) + pgm_num_bytes(rf) + sidecar_num_bytes(lf.width, lf.height)
            drawn = charge_processing(left, workload, model)
            rep = reports[left.id]
            rep.processing_uj += drawn
            rep.deficit_uj += model.cpu_cost(workload) - drawn
            mark_death(left, step)

            dmap, stats = compute_disparity(lf, rf, pair.match_params)
            total_ops += stats.elementary_ops
            pr = pair_reports[key]
            pr.elementary_ops += stats.elementary_ops
            rle_nbytes = len(rle_encode_disparity(dmap))
            pr.rle_bytes_min = rle_nbytes if pr.rle_bytes_min is None else min(pr.rle_bytes_min, rle_nbytes)
            pr.rle_bytes_max = rle_nbytes if pr.rle_bytes_max is None else max(pr.rle_bytes_max, rle_nbytes)

            triggered, change = detect_event(last_maps.get(key), dmap, scenario.event_threshold)
            if triggered:
                events.append(EventRecord(step, key, change))
            last_maps[key] = dmap

            if scenario.policy == "raw_always":
                send, kind, nbytes = True, "raw_pair", transmission_bytes((lf, rf))
            elif scenario.policy == "disparity_always":
                send, kind, nbytes = True, "disparity_rle", rle_nbytes
            else:
                send, kind, nbytes = triggered, "disparity_rle", rle_nbytes
            if send:
                transmit(step, key, route_to_sink(scenario, left.id), nbytes, kind)

    for nid, node in nodes.items():
        reports[nid].final_battery_uj = node.battery

    node_reports = [reports[nid] for nid in sorted(reports)]
    deaths = [
        r.died_at_step
        for r in node_reports
        if r.role in ("camera", "relay") and r.died_at_step is not None
    ]
    return SimReport(
        policy=scenario.policy,
        steps=steps,
        event_threshold=scenario.event_threshold,
        seed=scenario.seed,
        nodes=node_reports,
        pairs=[pair_reports[(p.left_node, p.right_node)] for p in pair_order],
        events=events,
        transmissions=transmissions,
        drops=drops,
        total_elementary_ops=total_ops,
        lifetime=min(deaths) if deaths else None,
    )


def network_lifetime(report: SimReport) -> int | None:
    """First step at which any camera or relay battery reached zero.

    The sink is mains-powered and excluded. Returns None when every
    battery-powered node survived the whole run.
    """
    deaths = [
        r.died_at_step
        for r in report.nodes
        if r.role in ("camera", "relay") and r.died_at_step is not None
    ]
    return min(deaths) if deaths else None


# ---------------------------------------------------------------------------
# scenario file format


def _type_name(value) -> str:
    return type(value).__name__


class _Loader:
    """Builds a Scenario from a JSON-shaped dict, collecting every error."""

    def __init__(self, base_dir: Path | None):
        self.base_dir = base_dir
        self.errors: list[str] = []

    def fail(self, where: str, message: str):
        self.errors.append(f"{where}: {message}")

    def expect_keys(self, where: str, obj: dict, allowed: set[str]):
        for k in sorted(set(obj) - allowed):
            self.fail(f"{where}.{k}", "unknown key")

    def get_int(self, where: str, obj: dict, key: str, default=None, minimum=None):
        if key not in obj:
            if default is not None:
                return default
            self.fail(f"{where}.{key}", "required")
            return None
        v = obj[key]
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(f"{where}.{key}", f"must be an integer, got {_type_name(v)}")
            return None
        if minimum is not None and v < minimum:
            self.fail(f"{where}.{key}", f"must be >= {minimum}, got {v}")
            return None
        return v

    def get_number(self, where: str, obj: dict, key: str, default=None):
        if key not in obj:
            if default is not None:
                return default
            self.fail(f"{where}.{key}", "required")
            return None
        v = obj[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(f"{where}.{key}", f"must be a number, got {_type_name(v)}")
            return None
        return float(v)

    def load_node(self, where: str, obj) -> SensorNode | None:
        if not isinstance(obj, dict):
            self.fail(where, f"must be an object, got {_type_name(obj)}")
            return None
        self.expect_keys(where, obj, {"id", "role", "battery", "position"})
        nid = self.get_int(where, obj, "id")
        role = obj.get("role")
        if not isinstance(role, str):
            self.fail(f"{where}.role", "required string")
            role = None
        battery = self.get_number(where, obj, "battery", default=0.0)
        position = (0.0, 0.0)
        if "position" in obj:
            p = obj["position"]
            if (
                isinstance(p, list)
                and len(p) == 2
                and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in p)
            ):
                position = (float(p[0]), float(p[1]))
            else:
                self.fail(f"{where}.position", "must be a [x, y] number pair")
        if nid is None or role is None or battery is None:
            return None
        return SensorNode(id=nid, role=role, battery=battery, position=position)

    def load_match(self, where: str, obj) -> MatchParams | None:
        if obj is None:
            obj = {}
        if not isinstance(obj, dict):
            self.fail(where, f"must be an object, got {_type_name(obj)}")
            return None
        self.expect_keys(where, obj, {"window_radius", "max_disparity", "method"})
        radius = self.get_int(where, obj, "window_radius", default=3, minimum=0)
        maxd = self.get_int(where, obj, "max_disparity", default=64, minimum=0)
        method = obj.get("method", "sad")
        try:
            return MatchParams(window_radius=radius, max_disparity=maxd, method=method)
        except (TypeError, ValueError) as exc:
            self.fail(where, str(exc))
            return None

    def load_frames(self, where: str, obj, scenario_seed: int):
        if not isinstance(obj, dict):
            self.fail(where, f"must be an object, got {_type_name(obj)}")
            return None
        self.expect_keys(where, obj, {"files", "synthetic"})
        if ("files" in obj) == ("synthetic" in obj):
            self.fail(where, "exactly one of 'files' or 'synthetic' is required")
            return None
        if "files" in obj:
            return self.load_frame_files(f"{where}.files", obj["files"])
        return self.load_synthetic(f"{where}.synthetic", obj["synthetic"], scenario_seed)

    def load_frame_files(self, where: str, entries):
        if not isinstance(entries, list) or not entries:
            self.fail(where, "must be a non-empty list of [left, right] path pairs")
            return None
        frames = []
        for t, entry in enumerate(entries):
            if not (
                isinstance(entry, list)
                and len(entry) == 2
                and all(isinstance(p, str) for p in entry)
            ):
                self.fail(f"{where}[{t}]", "must be a [left, right] path pair")
                return None
            sides = []
            for s, rel in enumerate(entry):
                path = Path(rel)
                if self.base_dir is not None and not path.is_absolute():
                    path = self.base_dir / path
                try:
                    sides.append(parse_pgm(path.read_bytes()))
                except OSError as exc:
                    self.fail(f"{where}[{t}][{s}]", f"cannot read {path}: {exc}")
                except ValueError as exc:
                    self.fail(f"{where}[{t}][{s}]", f"{path}: {exc}")
            if len(sides) == 2:
                frames.append((sides[0], sides[1]))
            else:
                return None
        return frames

    def load_synthetic(self, where: str, obj, scenario_seed: int):
        if not isinstance(obj, dict):
            self.fail(where, f"must be an object, got {_type_name(obj)}")
            return None
        self.expect_keys(where, obj, {"width", "height", "steps", "shift_per_step", "seed"})
        width = self.get_int(where, obj, "width", minimum=1)
        height = self.get_int(where, obj, "height", minimum=1)
        seed = self.get_int(where, obj, "seed", default=scenario_seed)
        raw = obj.get("shift_per_step", 0)
        if isinstance(raw, list):
            if not raw or not all(isinstance(s, int) and not isinstance(s, bool) for s in raw):
                self.fail(f"{where}.shift_per_step", "must be a non-empty list of integers")
                return None
            shifts = raw
            steps = self.get_int(where, obj, "steps", default=len(shifts), minimum=1)
            if steps is not None and steps != len(shifts):
                self.fail(
                    f"{where}.steps",
                    f"disagrees with shift_per_step length ({steps} vs {len(shifts)})",
                )
                return None
        elif isinstance(raw, int) and not isinstance(raw, bool):
            steps = self.get_int(where, obj, "steps", minimum=1)
            shifts = None if steps is None else [raw] * steps
        else:
            self.fail(f"{where}.shift_per_step", "must be an integer or a list of integers")
            return None
        if width is None or height is None or seed is None or shifts is None:
            return None
        try:
            return shifted_sequence(width, height, shifts, seed)
        except ValueError as exc:
            self.fail(where, str(exc))
            return None

    def load_pair(self, where: str, obj, scenario_seed: int) -> StereoPair | None:
        if not isinstance(obj, dict):
            self.fail(where, f"must be an object, got {_type_name(obj)}")
            return None
        self.expect_keys(
            where, obj, {"left", "right", "baseline", "focal_length", "match", "frames"}
        )
        left = self.get_int(where, obj, "left")
        right = self.get_int(where, obj, "right")
        baseline = self.get_number(where, obj, "baseline", default=0.1)
        focal = self.get_number(where, obj, "focal_length", default=100.0)
        match = self.load_match(f"{where}.match", obj.get("match"))
        if "frames" not in obj:
            self.fail(f"{where}.frames", "required")
            return None
        frames = self.load_frames(f"{where}.frames", obj["frames"], scenario_seed)
        if None in (left, right, baseline, focal, match) or frames is None:
            return None
        return StereoPair(
            left_node=left,
            right_node=right,
            match_params=match,
            frames=frames,
            baseline=baseline,
            focal_length=focal,
        )

    def load_energy(self, where: str, obj) -> EnergyModel:
        if obj is None:
            return EnergyModel()
        if not isinstance(obj, dict):
            self.fail(where, f"must be an object, got {_type_name(obj)}")
            return EnergyModel()
        self.expect_keys(where, obj, {"tx_energy_per_64kb", "cpu_energy_per_64kb_processed"})
        tx = self.get_number(where, obj, "tx_energy_per_64kb", default=377.0)
        cpu = self.get_number(where, obj, "cpu_energy_per_64kb_processed", default=0.00195)
        try:
            return EnergyModel(
                tx_energy_per_64kb=tx if tx is not None else 377.0,
                cpu_energy_per_64kb_processed=cpu if cpu is not None else 0.00195,
            )
        except ValueError as exc:
            self.fail(where, str(exc))
            return EnergyModel()


def scenario_from_dict(data: dict, base_dir: Path | str | None = None) -> Scenario:
    """Build a Scenario from the documented JSON structure.

    Frame file paths resolve relative to base_dir. Raises ScenarioError
    listing every structural problem with its JSON path.
    """
    loader = _Loader(Path(base_dir) if base_dir is not None else None)
    if not isinstance(data, dict):
        raise ScenarioError([f"$: must be an object, got {_type_name(data)}"])
    loader.expect_keys(
        "$",
        data,
        {"nodes", "pairs", "links", "policy", "event_threshold", "seed", "energy"},
    )
    seed = loader.get_int("$", data, "seed", default=0)
    if seed is None:
        seed = 0
    policy = data.get("policy", "disparity_on_event")
    if not isinstance(policy, str) or policy not in POLICIES:
        loader.fail("$.policy", f"must be one of {POLICIES}, got {policy!r}")
        policy = "disparity_on_event"
    threshold = loader.get_number("$", data, "event_threshold", default=1.0)
    if threshold is None:
        threshold = 1.0
    energy = loader.load_energy("$.energy", data.get("energy"))

    nodes = []
    raw_nodes = data.get("nodes")
    if not isinstance(raw_nodes, list) or not raw_nodes:
        loader.fail("$.nodes", "must be a non-empty list")
    else:
        for i, obj in enumerate(raw_nodes):
            node = loader.load_node(f"nodes[{i}]", obj)
            if node is not None:
                nodes.append(node)

    links = []
    raw_links = data.get("links", [])
    if not isinstance(raw_links, list):
        loader.fail("$.links", f"must be a list, got {_type_name(raw_links)}")
    else:
        for i, obj in enumerate(raw_links):
            if (
                isinstance(obj, list)
                and len(obj) == 2
                and all(isinstance(v, int) and not isinstance(v, bool) for v in obj)
            ):
                links.append((obj[0], obj[1]))
            else:
                loader.fail(f"links[{i}]", "must be an [a, b] node id pair")

    pairs = []
    raw_pairs = data.get("pairs")
    if not isinstance(raw_pairs, list):
        loader.fail("$.pairs", "must be a list")
    else:
        for i, obj in enumerate(raw_pairs):
            pair = loader.load_pair(f"pairs[{i}]", obj, seed)
            if pair is not None:
                pairs.append(pair)

    if loader.errors:
        raise ScenarioError(loader.errors)
    return Scenario(
        nodes=nodes,
        pairs=pairs,
        links=links,
        policy=policy,
        event_threshold=threshold,
        seed=seed,
        energy=energy,
    )


def load_scenario(path: Path | str) -> Scenario:
    """Read and build a scenario file; frame paths resolve beside it."""
    path = Path(path)
    data = json.loads(path.read_text())
    return scenario_from_dict(data, base_dir=path.parent)


def report_to_dict(report: SimReport) -> dict:
    """JSON-ready form of a report; key names are the stable interface."""
    return {
        "schema": "stereosim-report-v1",
        "policy": report.policy,
        "steps": report.steps,
        "event_threshold": report.event_threshold,
        "seed": report.seed,
        "lifetime": "survived" if report.lifetime is None else report.lifetime,
        "totals": {
            "processing_uj": sum(n.processing_uj for n in report.nodes),
            "transmission_uj": sum(n.transmission_uj for n in report.nodes),
            "bytes_transmitted": sum(n.bytes_transmitted for n in report.nodes),
            "elementary_ops": report.total_elementary_ops,
            "events": len(report.events),
            "transmissions": len(report.transmissions),
            "drops": len(report.drops),
        },
        "nodes": [
            {
                "id": n.id,
                "role": n.role,
                "initial_battery_uj": n.initial_battery_uj,
                "final_battery_uj": n.final_battery_uj,
                "processing_uj": n.processing_uj,
                "transmission_uj": n.transmission_uj,
                "bytes_transmitted": n.bytes_transmitted,
                "deficit_uj": n.deficit_uj,
                "died_at_step": n.died_at_step,
            }
            for n in report.nodes
        ],
        "pairs": [
            {
                "left": p.left,
                "right": p.right,
                "width": p.width,
                "height": p.height,
                "max_disparity": p.max_disparity,
                "elementary_ops": p.elementary_ops,
                "sidecar_bytes": p.sidecar_bytes,
                "raw_pair_bytes": p.raw_pair_bytes,
                "rle_bytes_min": p.rle_bytes_min,
                "rle_bytes_max": p.rle_bytes_max,
            }
            for p in report.pairs
        ],
        "events": [
            {"step": e.step, "pair": list(e.pair), "change": e.change} for e in report.events
        ],
        "transmissions": [
            {
                "step": t.step,
                "pair": list(t.pair),
                "payload": t.payload,
                "bytes": t.bytes,
                "path": list(t.path),
            }
            for t in report.transmissions
        ],
        "drops": [
            {
                "step": d.step,
                "pair": list(d.pair),
                "reason": d.reason,
                "node": d.node,
                "payload": d.payload,
                "bytes": d.bytes,
            }
            for d in report.drops
        ],
    }


def save_report(report: SimReport, path: Path | str):
    """Write the report JSON byte-deterministically."""
    text = json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text)
