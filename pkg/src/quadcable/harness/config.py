"""Scenario configuration: JSON schema, validation and construction of the model objects.

Angles in files are degrees; everything else is SI.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ..cable import CableParams, CableState
from ..ctrl import (CommGraph, ControlGains, FormationSpec, GraphError, NavigationGains, PIDGains, SMCGains,
                    build_graph)
from ..geo3 import euler_to_rot
from ..plant import BodyParams, PlantState, QuadParams, SystemParams

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid scenario file; the message names the offending field."""

    def __init__(self, field_name: str, msg: str):
        super().__init__(f"{field_name}: {msg}")
        self.field = field_name


@dataclass(frozen=True)
class DisturbanceEvent:
    time: float
    duration: float
    target: int | str   # 0-based quadrotor index, or "load"
    force: np.ndarray   # N, world frame

    def __post_init__(self):
        if not self.time >= 0:
            raise ValueError("disturbance time must be nonnegative")
        if not self.duration > 0:
            raise ValueError("disturbance duration must be positive")
        object.__setattr__(self, "force", np.asarray(self.force, dtype=float).reshape(3))

    def active(self, t: float) -> bool:
        return self.time <= t < self.time + self.duration


@dataclass
class ScenarioConfig:
    name: str
    params: SystemParams
    graph: CommGraph
    formation: FormationSpec
    gains: ControlGains
    initial: PlantState
    desired_pos: np.ndarray
    desired_vel: np.ndarray
    duration: float
    dt: float
    control_period: float
    disturbances: list[DisturbanceEvent] = field(default_factory=list)
    settle_threshold: float = 0.1
    max_tilt: float = np.deg2rad(35.0)
    thrust_mass: float | str | None = None  # mass turning acceleration commands into thrust

    @property
    def substeps(self) -> int:
        return int(round(self.control_period / self.dt))

    def command_mass(self) -> np.ndarray:
        """Per-quadrotor mass for thrust extraction.

        ``None``: equal share ``M_T / n``; ``"static_share"``: own mass plus
        cable plus the static load share; a number: that mass for all.
        """
        p = self.params
        if self.thrust_mass is None:
            return np.full(p.n, p.M_T / p.n)
        if self.thrust_mass == "static_share":
            return p.M_q + static_weights(p.body.attachments) * p.body.mass
        return np.full(p.n, float(self.thrust_mass))


def _get(d, key, path):
    if key not in d:
        raise ConfigError(f"{path}{key}", "missing")
    return d[key]


def _num(d, key, path, positive=False, nonneg=False):
    v = _get(d, key, path)
    try:
        v = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}{key}", f"expected a number, got {v!r}") from None
    if not np.isfinite(v):
        raise ConfigError(f"{path}{key}", "must be finite")
    if positive and not v > 0:
        raise ConfigError(f"{path}{key}", f"must be positive, got {v}")
    if nonneg and not v >= 0:
        raise ConfigError(f"{path}{key}", f"must be nonnegative, got {v}")
    return v


def _arr(d, key, path, shape=None):
    v = _get(d, key, path)
    try:
        a = np.asarray(v, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}{key}", "expected a numeric array") from None
    if shape is not None and a.shape != shape:
        raise ConfigError(f"{path}{key}", f"expected shape {shape}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ConfigError(f"{path}{key}", "must be finite")
    return a


def _mat3(d, key, path):
    a = _arr(d, key, path)
    if a.shape == (3,):
        a = np.diag(a)
    if a.shape != (3, 3):
        raise ConfigError(f"{path}{key}", "expected 3 diagonal entries or a 3x3 matrix")
    return a


def _layer(ctl) -> float | np.ndarray:
    v = _get(ctl, "boundary_layer", "control.")
    if isinstance(v, list):
        a = _arr(ctl, "boundary_layer", "control.", (3,))
        if np.any(a < 0):
            raise ConfigError("control.boundary_layer", "must be nonnegative")
        return a
    return _num(ctl, "boundary_layer", "control.", nonneg=True)


def _thrust_mass(ctl):
    if "thrust_mass" not in ctl or ctl["thrust_mass"] is None:
        return None
    if ctl["thrust_mass"] in ("static_share", "equal_share"):
        return None if ctl["thrust_mass"] == "equal_share" else "static_share"
    return _num(ctl, "thrust_mass", "control.", positive=True)


def static_weights(attachments: np.ndarray) -> np.ndarray:
    """Share of the load weight per cable for a level load hanging on vertical cables.

    Minimum-norm solution of force and moment balance; uniform when that
    solution is not strictly positive.
    """
    d = np.asarray(attachments, dtype=float)
    n = len(d)
    A = np.vstack([np.ones(n), d[:, 0], d[:, 1]])
    w = np.linalg.lstsq(A, np.array([1.0, 0.0, 0.0]), rcond=None)[0]
    if np.any(w <= 0) or np.max(np.abs(A @ w - [1, 0, 0])) > 1e-9:
        return np.full(n, 1.0 / n)
    return w


def hover_state(params: SystemParams, load_euler_deg=(0.0, 0.0, 0.0), load_pos=(0.0, 0.0, 0.0)) -> PlantState:
    """Load at rest with vertical cables stretched by their static tension."""
    w = static_weights(params.body.attachments)
    cables = []
    for wi, cp in zip(w, params.cables):
        m = cp.mass
        # tension in segment j carries the load share and masses j .. n
        T = params.g * (wi * params.body.mass + np.cumsum(m[::-1])[::-1])
        cables.append(CableState.straight([0, 0, 1], cp.rest_length + T / cp.stiffness))
    R = euler_to_rot(*np.deg2rad(load_euler_deg))
    n = params.n
    return PlantState(np.asarray(load_pos, dtype=float), np.zeros(3), R, np.zeros(3), cables,
                      [np.eye(3) for _ in range(n)], [np.zeros(3) for _ in range(n)])


def hover_thrusts(params: SystemParams) -> np.ndarray:
    return params.g * (params.M_q + static_weights(params.body.attachments) * params.body.mass)


def parse_scenario(doc: dict, name: str = "scenario") -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "expected a JSON object")
    version = _get(doc, "schema_version", "")
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {version!r} (expected {SCHEMA_VERSION})")
    load = _get(doc, "load", "")
    m_l = _num(load, "m_l", "load.", positive=True)
    J_l = _mat3(load, "J_l", "load.")
    d = _arr(load, "attachments", "load.")
    if d.ndim != 2 or d.shape[1] != 3:
        raise ConfigError("load.attachments", "expected a list of [x, y, z] points")
    n = d.shape[0]
    try:
        body = BodyParams(m_l, J_l, d)
    except ValueError as exc:
        raise ConfigError("load.J_l", str(exc)) from None

    quad = _get(doc, "quadrotor", "")
    m_i = _num(quad, "m_i", "quadrotor.", positive=True)
    try:
        quads = [QuadParams(m_i, _mat3(quad, "J_i", "quadrotor.")) for _ in range(n)]
    except ValueError as exc:
        raise ConfigError("quadrotor.J_i", str(exc)) from None

    cab = _get(doc, "cable", "")
    segs = _get(cab, "segments", "cable.")
    if not isinstance(segs, int) or segs < 1:
        raise ConfigError("cable.segments", "must be a positive integer")
    cp = {k: _num(cab, k, "cable.", positive=(k != "b_ij"), nonneg=True) for k in ("m_ij", "K_ij", "b_ij", "L_ij")}
    cables = [CableParams.uniform(segs, cp["m_ij"], cp["K_ij"], cp["b_ij"], cp["L_ij"]) for _ in range(n)]
    g = _num(doc, "g", "", positive=True) if "g" in doc else 9.81
    params = SystemParams(body, quads, cables, g)

    gr = _get(doc, "graph", "")
    try:
        edges = [tuple(int(v) - 1 for v in e) for e in _get(gr, "edges", "graph.")]
        graph = build_graph(n, edges, _arr(gr, "leader_links", "graph.", (n,)))
    except GraphError as exc:
        raise ConfigError("graph", str(exc)) from None

    form = _get(doc, "formation", "")
    H = _arr(form, "leader_offsets", "formation.")
    if H.shape == (n, 2):
        H = np.column_stack([H, np.zeros(n)])
    if H.shape != (n, 3):
        raise ConfigError("formation.leader_offsets", f"expected {n} offsets")
    pairs = {}
    for i, p in enumerate(form.get("pair_offsets", [])):
        try:
            a, b = int(p["i"]) - 1, int(p["j"]) - 1
            h = np.asarray(p["offset"], dtype=float)
        except (KeyError, TypeError, ValueError):
            raise ConfigError(f"formation.pair_offsets[{i}]", "expected {i, j, offset}") from None
        pairs[(a, b)] = np.append(h, 0.0) if h.shape == (2,) else h
    try:
        formation = FormationSpec(H, pairs) if pairs else FormationSpec.from_leader_offsets(H, graph)
    except ValueError as exc:
        raise ConfigError("formation.pair_offsets", str(exc)) from None

    ctl = _get(doc, "control", "")
    try:
        limit = _num(ctl, "integral_limit", "control.", positive=True) if "integral_limit" in ctl else np.inf
        nav = NavigationGains(_arr(ctl, "K_p", "control.", (3,)), _arr(ctl, "K_i", "control.", (3,)),
                              _arr(ctl, "K_v", "control.", (3,)), _num(ctl, "L_t", "control."), limit)
    except ValueError as exc:
        raise ConfigError("control.K_p/K_i/K_v", str(exc)) from None
    layer = _layer(ctl)
    try:
        smc = SMCGains(_arr(ctl, "Lambda", "control.", (3,)), _arr(ctl, "M", "control.", (3,)),
                       _arr(ctl, "K", "control.", (3,)), layer)
    except ValueError as exc:
        raise ConfigError("control.Lambda/M/K", str(exc)) from None
    pid = PIDGains(_num(ctl, "k_p", "control.", nonneg=True), _num(ctl, "k_d", "control.", nonneg=True),
                   _num(ctl, "k_i", "control.", nonneg=True))
    gains = ControlGains(nav, smc, pid)

    init = _get(doc, "initial", "")
    initial = hover_state(params, _arr(init, "load_euler_deg", "initial.", (3,)),
                          _arr(init, "r_l", "initial.", (3,)))
    initial.v_l = _arr(init, "v_l", "initial.", (3,)) if "v_l" in init else np.zeros(3)
    initial.Omega_l = _arr(init, "Omega_l", "initial.", (3,)) if "Omega_l" in init else np.zeros(3)

    sim = _get(doc, "simulation", "")
    dt = _num(sim, "dt", "simulation.", positive=True)
    period = _num(sim, "control_period", "simulation.", positive=True)
    ratio = period / dt
    if abs(ratio - round(ratio)) > 1e-9 * ratio or round(ratio) < 1:
        raise ConfigError("simulation.control_period", "must be an integer multiple of dt")

    events = []
    for i, e in enumerate(doc.get("disturbances", [])):
        path = f"disturbances[{i}]."
        tgt = _get(e, "target", path)
        if tgt != "load":
            try:
                tgt = int(tgt) - 1
            except (TypeError, ValueError):
                raise ConfigError(f"{path}target", "expected a quadrotor number or 'load'") from None
            if not 0 <= tgt < n:
                raise ConfigError(f"{path}target", f"quadrotor {tgt + 1} does not exist")
        events.append(DisturbanceEvent(_num(e, "time", path, nonneg=True), _num(e, "duration", path, positive=True),
                                       tgt, _arr(e, "force", path, (3,))))

    return ScenarioConfig(
        name=str(doc.get("name", name)), params=params, graph=graph, formation=formation, gains=gains,
        initial=initial, desired_pos=_arr(doc, "r_desired", "", (3,)),
        desired_vel=_arr(doc, "v_desired", "", (3,)) if "v_desired" in doc else np.zeros(3),
        duration=_num(sim, "duration", "simulation.", positive=True), dt=dt, control_period=period,
        disturbances=events,
        settle_threshold=(_num(sim, "settle_threshold", "simulation.", positive=True)
                          if "settle_threshold" in sim else 0.1),
        max_tilt=np.deg2rad(_num(ctl, "max_tilt_deg", "control.", positive=True) if "max_tilt_deg" in ctl else 35.0),
        thrust_mass=_thrust_mass(ctl),
    )


def bundled_scenarios() -> list[str]:
    root = resources.files("quadcable.harness") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def read_document(path_or_name) -> tuple[dict, str]:
    """Read a scenario file, or a bundled scenario by name."""
    p = Path(str(path_or_name))
    if p.suffix != ".json" and not p.exists():
        res = resources.files("quadcable.harness") / "scenarios" / f"{p.name}.json"
        if not res.is_file():
            raise FileNotFoundError(f"no scenario file or bundled scenario named {path_or_name!r}")
        text, name = res.read_text(), p.name
    else:
        text, name = p.read_text(), p.stem
    try:
        return json.loads(text), name
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None


def load_scenario(path_or_name) -> ScenarioConfig:
    doc, name = read_document(path_or_name)
    return parse_scenario(doc, name)
