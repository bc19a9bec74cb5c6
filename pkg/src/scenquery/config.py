"""Runtime configuration: geometry constants, the behavior map, budgets.

The behavior map ties together the three vocabularies the engine juggles:
action labels appearing in trace files, atomic behavior names appearing in
scenario programs, and agent classes with their per-type action alphabets.
A config file (env var SQ_CONFIG or --config) can extend all of them.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

# Action alphabet (labels as they appear in trace files).
FOLLOW_LANE = "FOLLOW_LANE"
TURN_LEFT = "TURN_LEFT"
TURN_RIGHT = "TURN_RIGHT"
BRAKE = "BRAKE"
ACCELERATE = "ACCELERATE"
LANE_CHANGE = "LANE_CHANGE"
CROSS_ROAD = "CROSS_ROAD"
WAIT = "WAIT"

BASE_ALPHABET = (
    FOLLOW_LANE,
    TURN_LEFT,
    TURN_RIGHT,
    BRAKE,
    ACCELERATE,
    LANE_CHANGE,
    CROSS_ROAD,
    WAIT,
)

# Tokens emitted by encoding pipelines around the useful part of a behavior
# trace; the loader strips them to absent actions.
MARKER_TOKENS = ("(init)", "(end)")

# Emitted when a machine terminates; never a valid trace label.
END_ACTION = "(END)"

DEFAULT_ATOMIC_BEHAVIORS = {
    "FollowLaneBehavior": FOLLOW_LANE,
    "TurnLeftBehavior": TURN_LEFT,
    "TurnRightBehavior": TURN_RIGHT,
    "BrakingBehavior": BRAKE,
    "BrakeBehavior": BRAKE,
    "Brake": BRAKE,
    "AccelerateForwardBehavior": ACCELERATE,
    "LaneChangeBehavior": LANE_CHANGE,
    "CrossRoadBehavior": CROSS_ROAD,
    "WaitBehavior": WAIT,
}

DEFAULT_AGENT_CLASSES = {
    # program class -> (label class prefixes, per-type action alphabet)
    "Car": (
        ("vehicle.", "ego"),
        (FOLLOW_LANE, TURN_LEFT, TURN_RIGHT, BRAKE, ACCELERATE, LANE_CHANGE),
    ),
    "Truck": (
        ("vehicle.truck", "vehicle.trailer"),
        (FOLLOW_LANE, TURN_LEFT, TURN_RIGHT, BRAKE, ACCELERATE, LANE_CHANGE),
    ),
    "Pedestrian": (
        ("human.pedestrian",),
        (CROSS_ROAD, WAIT),
    ),
    "Bicycle": (
        ("vehicle.bicycle", "cycle."),
        (FOLLOW_LANE, TURN_LEFT, TURN_RIGHT, BRAKE, ACCELERATE, LANE_CHANGE),
    ),
}


@dataclass(frozen=True)
class BehaviorMap:
    """Maps behavior names to actions and agent classes to label classes."""

    alphabet: tuple = BASE_ALPHABET
    atomic_actions: dict = field(default_factory=lambda: dict(DEFAULT_ATOMIC_BEHAVIORS))
    agent_classes: dict = field(default_factory=lambda: dict(DEFAULT_AGENT_CLASSES))

    def is_action(self, label: str) -> bool:
        return label in self.alphabet

    def action_for(self, behavior_name: str):
        return self.atomic_actions.get(behavior_name)

    def is_atomic(self, behavior_name: str) -> bool:
        return behavior_name in self.atomic_actions

    def class_compatible(self, agent_class: str, label_class: str) -> bool:
        entry = self.agent_classes.get(agent_class)
        if entry is None:
            return False
        prefixes, _ = entry
        return any(label_class == p or label_class.startswith(p) for p in prefixes)

    def type_alphabet(self, agent_class: str):
        entry = self.agent_classes.get(agent_class)
        if entry is None:
            return frozenset(self.alphabet)
        return frozenset(entry[1])


@dataclass(frozen=True)
class GeometryConfig:
    view_angle: float = math.pi / 2
    visible_distance: float = 50.0
    lane_width: float = 3.7
    facing_tolerance: float = math.pi / 6
    # position tolerance for `at (x, y)` initial specifiers, meters
    at_tolerance: float = 2.0

    def __post_init__(self):
        for name in ("view_angle", "visible_distance", "lane_width", "facing_tolerance"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.view_angle > 2 * math.pi:
            raise ValueError("view_angle must be at most 2*pi")


@dataclass(frozen=True)
class Budgets:
    config_cap: int = 100_000
    oracle_max_t: int = 16
    oracle_max_bits: int = 20
    timeout_s: float | None = None


@dataclass(frozen=True)
class EngineConfig:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    behavior_map: BehaviorMap = field(default_factory=BehaviorMap)
    budgets: Budgets = field(default_factory=Budgets)
    # handler priority: True = last declared handler wins (default)
    reverse_handler_priority: bool = True
    # predicate evaluation: "existential" (default) or "three_valued"
    predicate_mode: str = "existential"


def _parse_scalar(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text.strip("\"'")


def parse_config_text(text: str) -> EngineConfig:
    """Parse a flat TOML-style config with [geometry]/[budgets]/[engine]
    sections plus [alphabet], [atoms] and [classes] behavior-map extensions."""
    section = ""
    geo: dict = {}
    bud: dict = {}
    eng: dict = {}
    extra_actions: list = []
    atoms: dict = {}
    classes: dict = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if section == "geometry":
            geo[key] = float(_parse_scalar(value))
        elif section == "budgets":
            bud[key] = _parse_scalar(value)
        elif section == "engine":
            eng[key] = _parse_scalar(value)
        elif section == "alphabet":
            extra_actions.extend(v.strip() for v in value.split(",") if v.strip())
        elif section == "atoms":
            atoms[key] = _parse_scalar(value)
        elif section == "classes":
            # Car = vehicle.,ego : FOLLOW_LANE,BRAKE
            prefix_part, _, action_part = value.partition(":")
            prefixes = tuple(p.strip() for p in prefix_part.split(",") if p.strip())
            actions = tuple(a.strip() for a in action_part.split(",") if a.strip())
            classes[key] = (prefixes, actions)
        else:
            raise ValueError(f"config line outside a known section: {raw!r}")

    bm = BehaviorMap()
    if extra_actions or atoms or classes:
        alphabet = tuple(dict.fromkeys(list(bm.alphabet) + extra_actions))
        atomic = dict(bm.atomic_actions)
        atomic.update(atoms)
        agent_classes = dict(bm.agent_classes)
        for name, (prefixes, actions) in classes.items():
            agent_classes[name] = (prefixes, actions or bm.type_alphabet(name))
        bm = BehaviorMap(alphabet=alphabet, atomic_actions=atomic, agent_classes=agent_classes)

    cfg = EngineConfig(
        geometry=GeometryConfig(**geo) if geo else GeometryConfig(),
        behavior_map=bm,
        budgets=Budgets(**bud) if bud else Budgets(),
    )
    if "reverse_handler_priority" in eng:
        cfg = replace(cfg, reverse_handler_priority=bool(eng["reverse_handler_priority"]))
    if "predicate_mode" in eng:
        cfg = replace(cfg, predicate_mode=str(eng["predicate_mode"]))
    return cfg


def load_config(path: str | None = None) -> EngineConfig:
    """Load config from `path`, else from $SQ_CONFIG, else defaults."""
    path = path or os.environ.get("SQ_CONFIG")
    if not path:
        return EngineConfig()
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())
