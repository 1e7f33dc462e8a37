"""Object gridworld.

An N x N grid holding objects, each defined by an ordered list of via-point
cells. An object's internal state counts how many of its via-points have been
activated in order: ``ACT`` on cell ``p^{k+1}`` moves the state from ``k`` to
``k+1``. Two actors share the dynamics (the learner and Bob); each object says
which of them can change it.

Coordinates: ``x`` is the column (RIGHT increments it), ``y`` is the row (UP
decrements it). Moves that would leave the grid leave the position unchanged.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

Cell = tuple[int, int]

STICKY_PROB = 0.25
GRID_SIZE = 11


class Action(enum.IntEnum):
    RIGHT = 0
    LEFT = 1
    UP = 2
    DOWN = 3
    ACT = 4


N_ACTIONS = len(Action)

MOVES: dict[int, Cell] = {
    Action.RIGHT: (1, 0),
    Action.LEFT: (-1, 0),
    Action.UP: (0, -1),
    Action.DOWN: (0, 1),
}


class Actor(enum.Enum):
    AGENT = "agent"
    BOB = "bob"


@dataclass(frozen=True)
class ObjectSpec:
    id: int
    positions: tuple[Cell, ...]
    controllable_by_agent: bool = True
    controllable_by_bob: bool = True

    def __post_init__(self):
        if not self.positions:
            raise ValueError(f"object {self.id} has no positions")
        object.__setattr__(self, "positions", tuple(tuple(map(int, p)) for p in self.positions))

    @property
    def length(self) -> int:
        return len(self.positions)

    def controllable_by(self, actor: Actor) -> bool:
        return self.controllable_by_agent if actor is Actor.AGENT else self.controllable_by_bob


@dataclass(frozen=True)
class EnvSpec:
    grid_size: int
    objects: tuple[ObjectSpec, ...]
    sticky_prob: float = STICKY_PROB
    name: str = "custom"

    def __post_init__(self):
        if self.grid_size < 1:
            raise ValueError("grid_size must be >= 1")
        if not 0.0 <= self.sticky_prob <= 1.0:
            raise ValueError("sticky_prob must lie in [0, 1]")
        object.__setattr__(self, "objects", tuple(self.objects))
        for obj in self.objects:
            for x, y in obj.positions:
                if not (0 <= x < self.grid_size and 0 <= y < self.grid_size):
                    raise ValueError(f"object {obj.id}: cell {(x, y)} outside the grid")

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(o.length for o in self.objects)

    @property
    def center(self) -> Cell:
        c = (self.grid_size - 1) // 2
        return (c, c)

    @property
    def controllable_mask(self) -> tuple[bool, ...]:
        return tuple(o.controllable_by_agent for o in self.objects)

    def obj(self, i: int) -> ObjectSpec:
        """Object by 1-based index."""
        if not 1 <= i <= self.n_objects:
            raise IndexError(f"object index {i} out of range 1..{self.n_objects}")
        return self.objects[i - 1]

    def replace(self, **changes) -> "EnvSpec":
        fields = dict(grid_size=self.grid_size, objects=self.objects,
                      sticky_prob=self.sticky_prob, name=self.name)
        fields.update(changes)
        return EnvSpec(**fields)

    # -- structured-text config -------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "grid_size": self.grid_size,
            "sticky_prob": self.sticky_prob,
            "objects": [
                {
                    "positions": [list(p) for p in o.positions],
                    "controllable_by_agent": o.controllable_by_agent,
                    "controllable_by_bob": o.controllable_by_bob,
                }
                for o in self.objects
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnvSpec":
        objects = tuple(
            ObjectSpec(
                id=i + 1,
                positions=tuple(tuple(p) for p in o["positions"]),
                controllable_by_agent=bool(o.get("controllable_by_agent", True)),
                controllable_by_bob=bool(o.get("controllable_by_bob", True)),
            )
            for i, o in enumerate(d["objects"])
        )
        return cls(
            grid_size=int(d["grid_size"]),
            objects=objects,
            sticky_prob=float(d.get("sticky_prob", STICKY_PROB)),
            name=str(d.get("name", "custom")),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path: str | Path) -> "EnvSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class EnvState:
    agent_pos: Cell
    objects: tuple[int, ...] = field(default=())

    def as_row(self) -> tuple[int, ...]:
        return (self.agent_pos[0], self.agent_pos[1], *self.objects)


def reset(spec: EnvSpec) -> EnvState:
    return EnvState(spec.center, (0,) * spec.n_objects)


def object_state(state: EnvState, i: int) -> int:
    """Internal state of object ``i`` (1-based)."""
    if not 1 <= i <= len(state.objects):
        raise IndexError(f"object index {i} out of range 1..{len(state.objects)}")
    return state.objects[i - 1]


def step(spec: EnvSpec, state: EnvState, action: int, actor: Actor = Actor.AGENT) -> EnvState:
    """Deterministic transition. Stickiness is applied by the caller."""
    x, y = state.agent_pos
    if action == Action.ACT:
        cell = (x, y)
        objects = list(state.objects)
        changed = False
        for k, obj in enumerate(spec.objects):
            o = objects[k]
            if o < obj.length and obj.positions[o] == cell and obj.controllable_by(actor):
                objects[k] = o + 1
                changed = True
        if not changed:
            return state
        return EnvState(state.agent_pos, tuple(objects))
    dx, dy = MOVES[action]
    nx, ny = x + dx, y + dy
    n = spec.grid_size
    if not (0 <= nx < n and 0 <= ny < n):
        return state
    return EnvState((nx, ny), state.objects)


def apply_sticky(intended: int, last: int | None, sticky_prob: float,
                 rng: np.random.Generator) -> int:
    """Repeat ``last`` with probability ``sticky_prob``; no draw when there is no last action."""
    if last is None or sticky_prob <= 0.0:
        return intended
    if rng.random() < sticky_prob:
        return last
    return intended


# -- presets ----------------------------------------------------------------------

# Six disjoint 3-stage objects, one per region around the center (5, 5).
E6_LAYOUT: tuple[tuple[Cell, ...], ...] = (
    ((5, 3), (5, 1), (4, 1)),   # north
    ((7, 4), (8, 3), (9, 4)),   # north-east
    ((7, 6), (8, 7), (9, 6)),   # south-east
    ((5, 7), (5, 9), (6, 9)),   # south
    ((3, 6), (2, 7), (1, 6)),   # south-west
    ((3, 4), (2, 3), (1, 4)),   # north-west
)

# One path; object i uses its first i cells.
EH_PATH: tuple[Cell, ...] = ((5, 3), (7, 3), (7, 5), (7, 7), (5, 7), (3, 7))

PRESETS = ("E6", "E3", "E1", "Eh")


def _objects(layout: Sequence[Sequence[Cell]], n_controllable: int) -> tuple[ObjectSpec, ...]:
    return tuple(
        ObjectSpec(id=i + 1, positions=tuple(cells), controllable_by_agent=i < n_controllable)
        for i, cells in enumerate(layout)
    )


def build_environment(name: str, sticky_prob: float = STICKY_PROB) -> EnvSpec:
    """One of the four 11x11 presets: ``E6``, ``E3``, ``E1`` or ``Eh`` (case-insensitive)."""
    key = name.strip().lower()
    if key == "e6":
        objects = _objects(E6_LAYOUT, 6)
    elif key == "e3":
        objects = _objects(E6_LAYOUT, 3)
    elif key == "e1":
        objects = _objects(E6_LAYOUT, 1)
    elif key == "eh":
        objects = _objects([EH_PATH[: i + 1] for i in range(len(EH_PATH))], 6)
    else:
        raise ValueError(f"unknown environment preset {name!r}; expected one of {PRESETS}")
    canonical = PRESETS[[p.lower() for p in PRESETS].index(key)]
    return EnvSpec(GRID_SIZE, objects, sticky_prob, canonical)
