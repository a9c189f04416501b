import json

import numpy as np
import pytest

from schmidtsphere import ConfigError, ControlSchedule, LocalControl
from schmidtsphere.config import (
    _Errors,
    encode_matrix,
    load_config,
    parse_h0,
    parse_matrix,
    parse_point,
    parse_schedule,
    parse_state,
    read_json,
    save_config,
    schedule_to_dict,
)
from schmidtsphere.sampling import haar_unitary, random_coupling, random_state

XY = {"kind": "distinguishable", "factors": [{"E": [[0, 1], [1, 0]], "F": {"re": [[0, 0], [0, 0]], "im": [[0, -1], [1, 0]]}}]}


def test_matrix_formats():
    errs = _Errors()
    ref = np.array([[1, 2j], [-2j, 3]])
    assert np.array_equal(parse_matrix(encode_matrix(ref), "m", errs), ref)
    assert np.array_equal(parse_matrix([[[1, 0], [0, 2]], [[0, -2], [3, 0]]], "m", errs), ref)
    assert np.array_equal(parse_matrix([[1, 0], [0, 3]], "m", errs), np.diag([1, 3]))
    assert errs == []
    assert parse_matrix([1, 2], "m", errs) is None
    assert parse_matrix("x", "m2", errs) is None
    assert parse_matrix({"re": [[1]], "im": [[1, 2]]}, "m3", errs) is None
    assert len(errs) == 3 and errs[0].startswith("m:")


def test_parse_h0():
    H0 = parse_h0(XY)
    assert H0.d1 == H0.d2 == 2 and H0.kind.value == "distinguishable"


def test_h0_errors_are_collected():
    bad = {"kind": "distinguishable", "factors": [
        {"E": [[0, 1], [0, 0]], "F": [[1, 0], [0, 1]]},
        {"E": [[1, 0], [0, 1]]},
        {"E": [[1, 0], [0, 1]], "F": [[0, 0.0003], [0, 0]]},
    ]}
    with pytest.raises(ConfigError) as err:
        parse_h0(bad)
    msgs = err.value.errors
    assert len(msgs) == 3
    assert any(m.startswith("factors[0].E not Hermitian") for m in msgs)
    assert any("factors[1]" in m and "'F'" in m for m in msgs)
    assert "factors[2].F not Hermitian: defect 3e-04" in msgs
    with pytest.raises(ConfigError) as err:
        parse_h0({"factors": []})
    assert "missing field 'kind'" in err.value.errors
    with pytest.raises(ConfigError):
        parse_h0({"kind": "anyonic", "factors": XY["factors"]})


def test_parse_state():
    s = parse_state({"kind": "bosonic", "re": [[1, 0], [0, 0]]})
    assert s.kind.value == "bosonic"
    with pytest.raises(ConfigError):
        parse_state({"kind": "bosonic", "re": [[1, 1], [0, 0]]})
    with pytest.raises(ConfigError):
        parse_state({"kind": "distinguishable", "re": [[1, 0], [0, 1]]})
    assert parse_state({"kind": "distinguishable", "re": [[1, 0], [0, 1]]}, renormalize=True).coeffs[0, 0] == pytest.approx(2**-0.5)
    with pytest.raises(ConfigError):
        parse_state({"kind": "distinguishable", "d1": 3, "re": [[1, 0], [0, 0]]})


def test_schedule_round_trip(rng):
    sched = ControlSchedule([0, 0.5, 1], [LocalControl(haar_unitary(2, rng), haar_unitary(3, rng)),
                                          LocalControl.from_generator(np.diag([1.0, 2]), np.eye(3))])
    back = parse_schedule(json.loads(json.dumps(schedule_to_dict(sched))), 2, 3)
    assert np.array_equal(back.breakpoints, sched.breakpoints)
    for a, b in zip(back.segments, sched.segments):
        assert np.allclose(a.V, b.V) and np.allclose(a.W, b.W)
    assert back.segments[1].generator is not None


def test_schedule_errors():
    with pytest.raises(ConfigError) as err:
        parse_schedule({"breakpoints": [0, 1], "segments": [{"V": [[2, 0], [0, 1]]}]}, 2, 2)
    assert err.value.errors[0].startswith("segments[0]")
    with pytest.raises(ConfigError):
        parse_schedule({"breakpoints": [0, 1, 1], "segments": [{"identity": True}] * 2}, 2, 2)
    with pytest.raises(ConfigError):
        parse_schedule({"segments": [{"identity": True}]}, 2, 2)
    assert parse_schedule({"segments": [{"identity": True}]}, 2, 2, T=2.0).T == 2.0
    with pytest.raises(ConfigError, match="needs 'V'"):
        parse_schedule({"breakpoints": [0, 1], "segments": [{"foo": 1}]}, 2, 2)
    with pytest.raises(ConfigError, match="expected 2x2"):
        parse_schedule({"breakpoints": [0, 1], "segments": [{"V": np.eye(3).tolist()}]}, 2, 2)


def test_parse_point():
    assert np.allclose(parse_point("0.8,0.6"), [0.8, 0.6])
    assert np.allclose(parse_point([0.6, 0.8], 2), [0.6, 0.8])
    for bad in ("1,1", "a,b"):
        with pytest.raises(ConfigError):
            parse_point(bad)
    with pytest.raises(ConfigError):
        parse_point("1,0", 3)


def test_read_json_errors(tmp_path):
    with pytest.raises(ConfigError, match="file not found"):
        read_json(tmp_path / "missing.json")
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        read_json(p)


def test_config_round_trip(tmp_path, rng):
    H0 = random_coupling("fermionic", 4, 4, rng)
    st = random_state("fermionic", 4, 4, rng)
    sched = ControlSchedule.constant(LocalControl(haar_unitary(4, rng)), 1.5)
    path = tmp_path / "cfg.json"
    save_config(path, h0=H0, state=st, schedule=sched, sigma0=[0.6, 0.8], T=1.5, dt=0.01, seed=7)
    cfg = load_config(path)
    assert np.allclose(cfg["h0"].matrix(), H0.matrix())
    assert np.allclose(cfg["state"].coeffs, st.coeffs)
    assert np.allclose(cfg["schedule"].segments[0].V, sched.segments[0].V)
    assert cfg["T"] == 1.5 and cfg["dt"] == 0.01 and cfg["seed"] == 7
    assert np.allclose(cfg["sigma0"], [0.6, 0.8])


def test_load_config_collects_all_sections(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"dt": -1, "h0": {"factors": []}, "state": {"kind": "bosonic", "re": [[0, 1], [0, 0]]}}))
    with pytest.raises(ConfigError) as err:
        load_config(path)
    msgs = err.value.errors
    assert any(m.startswith("dt") for m in msgs)
    assert any(m.startswith("h0") for m in msgs)
    assert any(m.startswith("state") for m in msgs)
