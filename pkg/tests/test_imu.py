import io
import math
import warnings

import numpy as np
import pytest

from synergid.errors import DegenerateTrial, EmptyFile, EmptySeries, FormatError, SiteMissing
from synergid.imu import (LOG_HEADER, PostureSeries, ReachTrial, Site, extract_outcome,
                          joint_angles_from_trial, parse_trial_log, synergy_elbow_trajectory,
                          trial_from_postures, trial_log_text, write_trial_log)

FIXTURES = __file__.rsplit("/", 1)[0] + "/fixtures"
DT = 0.02


def posture_series(n=76, lean=0.12, prot=0.05, rate=50.0):
    t = np.arange(n) / rate
    s = np.sin(np.pi * t / t[-1]) ** 2
    return PostureSeries(t, lean * s, prot * s, 0.8 + 0.7 * t / t[-1], 0.4 * (1 - t / t[-1]))


def test_elbow_unity_synergy():
    rate = np.full(51, 0.5)  # 0.5 rad/s for 1 s
    traj = synergy_elbow_trajectory(1.0, rate, 0.2, DT)
    assert traj.angles[-1] - traj.angles[0] == pytest.approx(0.5, abs=1e-12)
    assert traj.clamped == 0


def test_elbow_ramp_doubles():
    # Shoulder ramps 0.3 rad at constant speed over 1.5 s.
    rate = np.full(76, 0.3 / 1.5)
    traj = synergy_elbow_trajectory(2.0, rate, 0.1, DT)
    assert traj.angles[-1] - 0.1 == pytest.approx(0.6, abs=1e-12)


def test_elbow_zero_motion():
    traj = synergy_elbow_trajectory(1.7, np.zeros(20), 0.9, DT)
    assert np.all(traj.angles == 0.9)


def test_elbow_linear_in_theta():
    rate = np.sin(np.linspace(0, 2, 60)) * 0.4
    a = synergy_elbow_trajectory(1.0, rate, 0.5, DT).angles
    b = synergy_elbow_trajectory(2.0, rate, 0.5, DT).angles
    np.testing.assert_allclose(b - 0.5, 2 * (a - 0.5), atol=1e-12)


def test_elbow_clamp_reported():
    traj = synergy_elbow_trajectory(2.5, np.full(50, -2.0), 0.5, DT)
    assert traj.angles.min() == 0.0 and traj.clamped > 0


def test_elbow_empty_and_warning():
    with pytest.raises(EmptySeries):
        synergy_elbow_trajectory(1.0, [], 0.0, DT)
    with pytest.warns(UserWarning):
        synergy_elbow_trajectory(3.5, np.zeros(3), 0.0, DT)


def test_constant_orientation_gives_zero(body):
    ps = PostureSeries(np.arange(20) * DT, np.full(20, 0.0), np.zeros(20), np.full(20, 1.2),
                       np.full(20, 0.3))
    trial = trial_from_postures(body, ps, 0, 1.5, mounting={Site.C7: 0.2, Site.SA: -0.1})
    out = joint_angles_from_trial(trial, body)
    assert np.allclose(out.trunk_pitch, 0) and np.allclose(out.shoulder_protraction, 0)
    o = extract_outcome(trial, body)
    assert (o.trunk_disp, o.shoulder_disp) == pytest.approx((0.0, 0.0), abs=1e-15)


def test_c7_step(body):
    t = np.arange(20) * DT
    trunk = np.where(t > 0.15, 0.1, 0.0)
    trial = trial_from_postures(body, PostureSeries(t, trunk, np.zeros(20), np.ones(20), np.zeros(20)), 0, 1.5)
    assert joint_angles_from_trial(trial, body).trunk_pitch[-1] == pytest.approx(0.1)


@pytest.mark.parametrize("seed", range(5))
def test_round_trip(body, seed):
    rng = np.random.default_rng(seed)
    ps = posture_series(lean=rng.uniform(0, 0.4), prot=rng.uniform(0, 0.15))
    mounting = {s: rng.uniform(-0.3, 0.3) for s in (Site.C7, Site.SA)}
    trial = trial_from_postures(body, ps, 0, 1.5, mounting=mounting)
    got = joint_angles_from_trial(trial, body)
    assert np.max(np.abs(got.trunk_pitch - ps.trunk_pitch)) < 1e-3
    # protraction error expressed as an angle about C7
    ang = np.arcsin(got.shoulder_protraction / body.c7_to_acromion)
    assert np.max(np.abs(ang - np.arcsin(ps.shoulder_protraction / body.c7_to_acromion))) < 1e-3
    assert np.max(np.abs(got.shoulder_flexion - ps.shoulder_flexion)) < 1e-3
    assert np.max(np.abs(got.elbow_flexion - ps.elbow_flexion)) < 1e-3


def test_round_trip_from_irregular_sampling(body):
    ps = posture_series(n=301, rate=200.0)
    trial = trial_from_postures(body, ps, 0, 1.5)
    got = joint_angles_from_trial(trial, body)
    want = np.interp(got.time, ps.time, ps.trunk_pitch)
    assert np.max(np.abs(got.trunk_pitch - want)) < 1e-12
    assert np.max(np.abs(got.trunk_pitch - 0.12 * np.sin(np.pi * got.time / 1.5) ** 2)) < 1e-3


def test_peak_trunk(body):
    t = np.arange(30) * DT
    lean = 0.1 * np.sin(np.pi * t / t[-1])
    lean[15] = 0.1
    trial = trial_from_postures(body, PostureSeries(t, lean, np.zeros(30), np.ones(30), np.zeros(30)), 0, 1.5)
    assert extract_outcome(trial, body).trunk_disp == pytest.approx(0.5 * math.sin(0.1), abs=1e-12)


def test_peak_not_endpoint(body):
    t = np.arange(41) * DT
    lean = 0.2 * (1 - np.abs(t - 0.4) / 0.4)  # triangular, back to 0 at the end
    trial = trial_from_postures(body, PostureSeries(t, lean, np.zeros(41), np.ones(41), np.zeros(41)), 0, 1.5)
    out = extract_outcome(trial, body)
    assert out.trunk_disp == pytest.approx(0.5 * math.sin(0.2), abs=1e-12)
    assert out.trunk_disp > 0.5 * math.sin(lean[-1]) + 0.05


def test_outcome_time_shift_and_rate_invariance(body):
    base = extract_outcome(trial_from_postures(body, posture_series(), 0, 1.5), body)
    shifted = extract_outcome(trial_from_postures(body, posture_series(), 0, 1.5, time_offset=123.4), body)
    double = extract_outcome(trial_from_postures(body, posture_series(n=151, rate=100.0), 0, 1.5), body)
    for o in (shifted, double):
        assert abs(o.trunk_disp - base.trunk_disp) < 1e-4
        assert abs(o.shoulder_disp - base.shoulder_disp) < 1e-4


def test_site_missing_and_degenerate(body):
    trial = trial_from_postures(body, posture_series(), 0, 1.5)
    del trial.sites[Site.SA]
    with pytest.raises(SiteMissing):
        extract_outcome(trial, body)
    short = trial_from_postures(body, posture_series(n=4), 0, 1.5)
    with pytest.raises(DegenerateTrial):
        extract_outcome(short, body)


def test_parse_fixture():
    trials = parse_trial_log(f"{FIXTURES}/two_trials.csv")
    assert [t.iteration_index for t in trials] == [0, 1]
    assert [t.synergy_value for t in trials] == [1.5, 1.55]
    for t in trials:
        assert set(t.sites) == {Site.C7, Site.SA, Site.UA}
        assert all(len(s) == 6 for s in t.sites.values())
    assert trials[1].sites[Site.UA].pitch[-1] == pytest.approx(1.3)


def test_parse_empty():
    with pytest.raises(EmptyFile):
        parse_trial_log(io.StringIO(""))
    with pytest.raises(EmptyFile):
        parse_trial_log(io.StringIO(",".join(LOG_HEADER) + "\n"))


def _log(*rows):
    return io.StringIO("\n".join([",".join(LOG_HEADER), *rows]) + "\n")


@pytest.mark.parametrize("rows,line", [
    (["0,0.0,C7,0,0,0,1.5", "0,0.0,C7,0.1,0,0,1.5"], 3),  # repeated timestamp
    (["0,0.1,C7,0,0,0,1.5", "0,0.05,C7,0.1,0,0,1.5"], 3),  # going backwards
    (["0,0.0,C7,0,0,0"], 2),
    (["0,0.0,XX,0,0,0,1.5"], 2),
    (["0,0.0,C7,nan,0,0,1.5"], 2),
    (["0,0.0,C7,4.0,0,0,1.5"], 2),
    (["0,0.0,C7,0,0,0,1.5", "0,0.1,SA,0,0,0,1.6"], 3),
])
def test_parse_errors(rows, line):
    with pytest.raises(FormatError) as info:
        parse_trial_log(_log(*rows))
    assert info.value.line == line


def test_bad_header():
    with pytest.raises(FormatError):
        parse_trial_log(io.StringIO("a,b,c\n1,2,3\n"))


def test_log_round_trip_lossless(body, tmp_path):
    trials = [trial_from_postures(body, posture_series(), i, 1.5 + 0.1 * i, time_offset=4.0 * i)
              for i in range(3)]
    path = tmp_path / "log.csv"
    write_trial_log(trials, path)
    back = parse_trial_log(path)
    for a, b in zip(trials, back):
        assert a.synergy_value == b.synergy_value
        for site in a.sites:
            np.testing.assert_array_equal(a.sites[site].pitch, b.sites[site].pitch)
            np.testing.assert_array_equal(a.sites[site].time, b.sites[site].time)
    assert trial_log_text(back) == path.read_text()


def test_session_reference(body):
    trial = trial_from_postures(body, posture_series(), 0, 1.5, mounting={Site.C7: 0.05})
    ref = {Site.C7: 0.0, Site.SA: 0.0}
    per_trial = extract_outcome(trial, body)
    session = extract_outcome(trial, body, reference=ref)
    # With the mounting offset left in, the session-referenced trunk peak is biased upward.
    assert session.trunk_disp > per_trial.trunk_disp + 0.02
