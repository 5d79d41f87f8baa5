import dataclasses
import json

import numpy as np
import pytest

from quadcable.geo3 import rot_to_euler
from quadcable.harness import (ConfigError, DisturbanceEvent, Metrics, SimTrace, bundled_scenarios, compute_metrics,
                               hover_state, hover_thrusts, inject_disturbance, load_scenario, parse_scenario,
                               read_document, read_trace, recovery_time, run_simulation, settling_time,
                               static_weights, trace_columns, write_trace)
from quadcable.harness.disturbance import active_events
from quadcable.plant import DisturbanceSet, NumericalFailure


@pytest.fixture(scope="module")
def cuboid_doc():
    return read_document("homogeneous_cuboid")[0]


@pytest.fixture(scope="module")
def cuboid():
    return load_scenario("homogeneous_cuboid")


def edited(doc, path, value):
    doc = json.loads(json.dumps(doc))
    node = doc
    for key in path[:-1]:
        node = node[key]
    if value is None:
        del node[path[-1]]
    else:
        node[path[-1]] = value
    return doc


def test_bundled_scenarios():
    names = bundled_scenarios()
    for name in ("homogeneous_cuboid", "nonhomogeneous_cone", "homogeneous_cuboid_disturbed",
                 "nonhomogeneous_cone_disturbed", "homogeneous_cuboid_reference_gains",
                 "nonhomogeneous_cone_alt_layout"):
        assert name in names
        assert load_scenario(name).name == name


def test_cuboid_parameters(cuboid):
    p = cuboid.params
    assert p.n == 4 and p.g == 9.81
    assert p.body.mass == 2.0
    assert np.array_equal(p.body.inertia, np.diag([1.45, 2.57, 4.0]))
    assert np.array_equal(p.body.attachments, [[1.2, -1.6, -0.2], [1.2, 1.6, -0.2], [-1.2, -1.6, -0.2],
                                               [-1.2, 1.6, -0.2]])
    for q, c in zip(p.quads, p.cables):
        assert q.mass == 0.755
        assert np.array_equal(q.inertia, np.diag([0.00577, 0.00577, 0.0105]))
        assert c.segment_count == 5
        assert np.all(c.mass == 0.01) and np.all(c.stiffness == 2e4)
        assert np.all(c.damping == 20.0) and np.all(c.rest_length == 0.5)
    assert np.allclose(np.rad2deg(rot_to_euler(cuboid.initial.R_l)), [30, 20, -30])
    assert np.array_equal(cuboid.desired_pos, [10, 10, -10])
    assert np.array_equal(cuboid.graph.A, [[0, 1, 1, 0], [1, 0, 0, 1], [1, 0, 0, 1], [0, 1, 1, 0]])
    assert np.array_equal(cuboid.graph.B, np.ones(4))
    assert np.array_equal(cuboid.formation.leader[:, :2], p.body.attachments[:, :2])
    nav = cuboid.gains.nav
    assert np.array_equal(np.diag(nav.k_r), [0.7, 0.7, 1.0])
    assert np.array_equal(np.diag(nav.k_i), [0.07, 0.07, 0.1])
    assert np.array_equal(np.diag(nav.k_v), [0.7, 0.7, 1.0])
    assert cuboid.substeps == 25


def test_reference_gain_scenario():
    cfg = load_scenario("homogeneous_cuboid_reference_gains")
    smc, pid = cfg.gains.smc, cfg.gains.pid
    assert np.array_equal(smc.Lambda, [0.05, 0.05, 0.0005])
    assert np.array_equal(smc.M, [12, 12, 0.12])
    assert np.array_equal(smc.K, [10, 10, 0.05])
    assert np.all(pid.kp == 0.2) and np.all(pid.kd == 2.08) and np.all(pid.ki == 0.1)


def test_cone_parameters():
    cfg = load_scenario("nonhomogeneous_cone")
    p = cfg.params
    assert p.body.mass == 2.0
    assert np.array_equal(p.body.inertia, np.diag([0.6, 2.1, 2.1]))
    assert np.array_equal(p.body.attachments, [[2.25, 0, 0], [0, -0.75, 0], [0, 0.75, 0], [-0.75, 0, 0]])
    alt = load_scenario("nonhomogeneous_cone_alt_layout")
    assert np.array_equal(alt.params.body.attachments[3], [2.25, 0.75, 0])


def test_negative_load_mass_names_field(cuboid_doc):
    with pytest.raises(ConfigError, match="m_l") as err:
        parse_scenario(edited(cuboid_doc, ["load", "m_l"], -1))
    assert err.value.field == "load.m_l"


@pytest.mark.parametrize("path,value,field", [
    (["load", "J_l"], None, "load.J_l"),
    (["schema_version"], 2, "schema_version"),
    (["simulation", "control_period"], 0.0105, "simulation.control_period"),
    (["graph", "leader_links"], [0, 0, 0, 0], "graph"),
    (["graph", "edges"], [[1, 5]], "graph"),
    (["cable", "segments"], 0, "cable.segments"),
    (["control", "K_p"], [1, 1], "control.K_p"),
    (["control", "boundary_layer"], -1, "control.boundary_layer"),
    (["simulation", "dt"], "fast", "simulation.dt"),
    (["r_desired"], [1, 2, float("nan")], "r_desired"),
])
def test_invalid_fields_rejected(cuboid_doc, path, value, field):
    with pytest.raises(ConfigError) as err:
        parse_scenario(edited(cuboid_doc, path, value))
    assert err.value.field.startswith(field)


def test_disturbance_schedule_parsing(cuboid_doc):
    doc = edited(cuboid_doc, ["disturbances"], [{"time": 1, "duration": 0.5, "target": 2, "force": [0, 1, 0]},
                                                {"time": 2, "duration": 0.5, "target": "load", "force": [1, 0, 0]}])
    cfg = parse_scenario(doc)
    assert cfg.disturbances[0].target == 1
    assert cfg.disturbances[1].target == "load"
    with pytest.raises(ConfigError, match="does not exist"):
        parse_scenario(edited(doc, ["disturbances", 0, "target"], 5))


def test_optional_fields(cuboid_doc):
    doc = edited(cuboid_doc, ["control", "boundary_layer"], [0.5, 0.5, 1.0])
    doc = edited(doc, ["control", "thrust_mass"], "equal_share")
    doc = edited(doc, ["control", "integral_limit"], None)
    cfg = parse_scenario(doc)
    assert np.array_equal(cfg.gains.smc.layer(1), [0.5, 0.5, 1.0])
    assert cfg.gains.nav.integral_limit == np.inf
    assert np.allclose(cfg.command_mass(), cfg.params.M_T / 4)
    assert np.allclose(parse_scenario(edited(doc, ["control", "thrust_mass"], 1.5)).command_mass(), 1.5)


def test_scenario_from_file(tmp_path, cuboid_doc):
    path = tmp_path / "mine.json"
    path.write_text(json.dumps(cuboid_doc))
    assert load_scenario(path).params.n == 4
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_scenario(bad)
    with pytest.raises(FileNotFoundError):
        load_scenario("no_such_scenario")


def test_static_weights():
    d = np.array([[1.2, -1.6, -0.2], [1.2, 1.6, -0.2], [-1.2, -1.6, -0.2], [-1.2, 1.6, -0.2]])
    assert np.allclose(static_weights(d), 0.25)
    cone = np.array([[2.25, 0, 0], [0, -0.75, 0], [0, 0.75, 0], [-0.75, 0, 0]])
    w = static_weights(cone)
    assert np.all(w > 0) and w.sum() == pytest.approx(1.0)
    assert np.allclose(w @ cone[:, :2], 0.0, atol=1e-12)
    # attachments all on one side cannot balance a level load with positive tensions
    assert np.allclose(static_weights(np.array([[1.0, 0, 0], [2.0, 0, 0]])), 0.5)


def test_static_share_mass_and_hover(cuboid):
    p = cuboid.params
    assert np.allclose(cuboid.command_mass(), p.M_T / 4)
    assert np.allclose(hover_thrusts(p), p.M_T * p.g / 4)
    s = hover_state(p)
    for c, cp in zip(s.cables, p.cables):
        dl = np.array([seg.l for seg in c.segments]) - cp.rest_length
        assert np.all(dl > 0) and np.all(np.diff(dl) < 0)


def test_disturbance_examples():
    base = DisturbanceSet(quad_force=np.zeros((4, 3)))
    schedule = [DisturbanceEvent(12.5, 0.2, 0, [5, 0, 0]), DisturbanceEvent(12.5, 0.2, 2, [5, 0, 0])]
    out = inject_disturbance(schedule, 1.0, base)
    assert out is not base and np.array_equal(out.quad_force, base.quad_force)
    one = inject_disturbance([DisturbanceEvent(0.0, 1.0, 0, [5, 0, 0])], 0.5, base)
    assert np.array_equal(one.quad_force[0], [5, 0, 0])
    assert np.array_equal(base.quad_force, np.zeros((4, 3)))
    both = inject_disturbance(schedule, 12.6, base)
    assert np.array_equal(both.quad_force[[0, 2]], [[5, 0, 0], [5, 0, 0]])
    assert np.array_equal(both.quad_force[[1, 3]], np.zeros((2, 3)))
    assert active_events(schedule, 12.5) == (0, 1)
    assert active_events(schedule, 12.7) == ()
    load = inject_disturbance([DisturbanceEvent(0.0, 1.0, "load", [0, 0, -3])], 0.1, base)
    assert np.array_equal(load.F_r, [0, 0, -3])


def test_disturbance_event_validation():
    with pytest.raises(ValueError):
        DisturbanceEvent(-1.0, 1.0, 0, [1, 0, 0])
    with pytest.raises(ValueError):
        DisturbanceEvent(1.0, 0.0, 0, [1, 0, 0])


def test_trace_columns():
    cols = trace_columns(4, 5)
    assert cols[0] == "t_s"
    assert len(cols) == len(set(cols))
    assert len(cols) == 1 + 12 + 4 * 6 + 4 * 5 * 2 + 5 + 4 + 5
    assert "cable3_seg5_wnorm_radps" in cols and "quad4_psi_rad" in cols


def test_trace_file_round_trip(tmp_path):
    cols = ["t_s", "E_inf_m"]
    trace = SimTrace(cols, [[0.0, 1.0 / 3.0], [0.01, 2.0]])
    path = tmp_path / "trace.csv"
    write_trace(trace, path)
    assert len(path.read_text().splitlines()) == 3
    back = read_trace(path)
    assert back.columns == cols and np.array_equal(back.data, trace.data)


def test_trace_time_must_increase():
    with pytest.raises(ValueError):
        SimTrace(["t_s"], [[0.0], [0.0]])


def test_settling_time_examples():
    cols = ["t_s", "E_inf_m"]
    t = np.arange(6.0)
    assert settling_time(SimTrace(cols, np.column_stack([t, [3, 2, 1, 0.05, 0.01, 0.2]])), 0.1) == np.inf
    assert settling_time(SimTrace(cols, np.column_stack([t, [3, 2, 0.05, 0.5, 0.01, 0.01]])), 0.1) == 4.0
    assert settling_time(SimTrace(cols, np.column_stack([t, np.zeros(6)])), 0.1) == 0.0


def test_recovery_time_examples():
    cols = ["t_s", "E_inf_m"]
    t = np.arange(10.0)
    x = np.array([0.05, 0.05, 0.15, 0.05, 0.5, 0.9, 0.3, 0.12, 0.14, 0.1])
    tr = SimTrace(cols, np.column_stack([t, x]))
    # band = max(0.1, max over [2, 4) = 0.15)
    assert recovery_time(tr, 4.0, 0.1, window=2.0) == pytest.approx(3.0)
    assert recovery_time(tr, 4.0, 1.0) == 0.0
    # no samples in the window: band = threshold, last excursion ends at t = 9
    assert recovery_time(tr, 4.0, 0.1, window=0.5) == pytest.approx(5.0)
    assert recovery_time(tr, 4.0, 0.05, window=0.5) == np.inf


def test_unsettled_metrics_use_sentinel():
    m = Metrics(np.inf, 0.5, 0.0, 0.01)
    assert json.loads(m.to_json())["settling_time_s"] is None
    with pytest.raises(ValueError):
        Metrics(1.0, -0.1, 0.0, 0.0)


@pytest.fixture(scope="module")
def short_run(cuboid):
    cfg = dataclasses.replace(cuboid, duration=0.5)
    return cfg, run_simulation(cfg)


def test_short_run_schema(short_run):
    cfg, (trace, metrics) = short_run
    assert trace.columns == trace_columns(4, 5)
    assert len(trace) == 51
    assert np.allclose(trace.t, np.arange(51) * 0.01)
    assert np.all(np.isfinite(trace.data))
    assert metrics.settling_time_s == np.inf
    assert metrics.steady_state_error_m == pytest.approx(np.max(np.abs(trace.load_position()[-1] - [10, 10, -10])))
    assert np.max(trace["q_norm_residual"]) < 1e-9 and np.max(trace["q_omega_residual"]) < 1e-9
    assert np.max(trace["drift_pre_step"]) < 1e-6
    assert np.all(trace.matching("thrust") > 0)
    assert trace.matching("cable", "_dl_m").shape == (51, 20)


def test_simulation_is_deterministic(short_run):
    cfg, (trace, metrics) = short_run
    again, m2 = run_simulation(cfg)
    assert np.array_equal(trace.data, again.data)
    assert m2 == metrics


def test_hover_hold_with_zero_gain_controller(cuboid):
    p = cuboid.params
    cfg = dataclasses.replace(cuboid, initial=hover_state(p, load_pos=(1.0, 2.0, -3.0)), duration=2.0)
    trace, _ = run_simulation(cfg, controller="hover")
    drift = np.max(np.abs(trace.load_position() - [1.0, 2.0, -3.0]))
    assert drift < 1e-8
    assert np.max(np.abs(trace.matching("load_w"))) < 1e-8


def test_disturbance_deviation_against_nominal(cuboid):
    events = [DisturbanceEvent(0.1, 0.2, 0, [5, 0, 0]), DisturbanceEvent(0.1, 0.2, 2, [5, 0, 0])]
    cfg = dataclasses.replace(cuboid, duration=0.6, disturbances=events)
    trace, metrics = run_simulation(cfg)
    nominal, _ = run_simulation(dataclasses.replace(cfg, disturbances=[]))
    assert metrics.max_post_disturbance_deviation_m > 1e-4
    assert compute_metrics(trace, cfg, nominal) == metrics
    _, skipped = run_simulation(cfg, nominal=False)
    assert skipped.max_post_disturbance_deviation_m == 0.0
    # before the event the runs coincide
    early = trace.t < 0.1
    assert np.array_equal(trace.load_position()[early], nominal.load_position()[early])


def test_unstable_step_reports_numerical_failure(cuboid):
    cfg = dataclasses.replace(cuboid, dt=0.01, duration=2.0)
    with pytest.raises(NumericalFailure) as err:
        run_simulation(cfg)
    assert err.value.time is not None and 0.0 < err.value.time <= 2.0


def test_control_period_decimation(cuboid):
    """The controller may run every plant step or every ten; both settle."""
    results = []
    for period in (cuboid.dt, 10 * cuboid.dt):
        cfg = dataclasses.replace(cuboid, control_period=period, duration=12.0)
        assert cfg.substeps == round(period / cuboid.dt)
        trace, metrics = run_simulation(cfg)
        assert len(trace) == round(12.0 / period) + 1
        results.append(metrics)
    for m in results:
        assert np.isfinite(m.settling_time_s) and m.settling_time_s < 12.0
    assert results[0] != results[1]
