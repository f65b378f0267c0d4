"""Acceptance suite. Run with ``pytest tests/test_acceptance.py -v -s`` to see the
one-line PASS/FAIL summary printed for each criterion."""

from __future__ import annotations

import contextlib
import math
import time

import numpy as np
import pytest

from vtpsim.imaging import (
    BinaryFrame,
    GrayFrame,
    Kernel,
    PixelFrame,
    binarize,
    channel_conv,
    erode,
)
from vtpsim.ips import IpsConfig, IpsOutput, VtpTrackerState, detect_marker, process_frame, stages
from vtpsim.mission import MissionInputs, MissionState, Phase, step_mission
from vtpsim.planner import PlannerConfig, Waypoint, plan_step, predicted_speed
from vtpsim.sim import SimConfig, run, sweep_alpha
from vtpsim.world import load_track, parse_track, path_distance

from oracles import (
    disk_offsets,
    erode_bruteforce,
    polyline_dense_distance,
    random_track_text,
    ring_centroid_bruteforce,
    square_offsets,
)

H, W = 120, 160
CFG = IpsConfig()
RED = (255, 0, 0)
GREEN = (70, 150, 70)


@contextlib.contextmanager
def criterion(label):
    try:
        yield
    except BaseException:
        print(f"\nFAIL  {label}")
        raise
    print(f"\nPASS  {label}")


def paint(mask):
    px = np.empty((H, W, 3), dtype=np.uint8)
    px[...] = GREEN
    px[mask] = RED
    return PixelFrame(px)


def ray_stripe(angle, width):
    r, c = np.mgrid[0:H, 0:W]
    along = (r - 60) * math.cos(angle) + (c - 80) * math.sin(angle)
    across = -(r - 60) * math.sin(angle) + (c - 80) * math.cos(angle)
    return (np.abs(across) <= width / 2) & (along >= 0)


def line_stripe(rng, width):
    """Infinite stripe through a random point at a random angle."""
    angle = rng.uniform(0, math.pi)
    r0, c0 = rng.uniform(0, H), rng.uniform(0, W)
    r, c = np.mgrid[0:H, 0:W]
    across = -(r - r0) * math.sin(angle) + (c - c0) * math.cos(angle)
    return np.abs(across) < width / 2


def test_1_erosion_matches_bruteforce():
    with criterion("1 erosion equals brute-force on 200 random frames in < 1 s"):
        rng = np.random.default_rng(101)
        kernels = [Kernel.square(3), Kernel.disk(2), Kernel.disk(3), Kernel.disk(4)]
        cases = []
        for i in range(200):
            h, w = rng.integers(1, 33, size=2)
            bits = rng.random((h, w)) < rng.uniform(0.3, 0.95)
            cases.append((bits, kernels[i % 4]))
        start = time.perf_counter()
        got = [erode(BinaryFrame(b), k).bits for b, k in cases]
        elapsed = time.perf_counter() - start
        for (bits, k), out in zip(cases, got):
            offs = square_offsets(k.size) if k.shape == "square" else disk_offsets(k.size)
            assert out.astype(int).tolist() == erode_bruteforce(bits.astype(int).tolist(), offs)
        assert elapsed < 1.0, elapsed


def test_2_channel_conversion_examples():
    with criterion("2 red-emphasis conversion and threshold examples"):
        px = PixelFrame(np.array([[[255, 0, 0], [255, 255, 255], [0, 255, 0]]], dtype=np.uint8))
        assert channel_conv(px, 2, 2).values.tolist() == [[255.0, 0.0, -127.5]]
        g = GrayFrame(np.array([[150.0, 149.5, 255.0, -127.5]]))
        assert binarize(g, 150).bits.tolist() == [[True, False, True, False]]
        assert binarize(channel_conv(px, 2, 2), 150).bits.tolist() == [[True, False, False]]
        assert (CFG.gg, CFG.gb, CFG.k_t) == (2, 2, 150)


def test_3_vtp_geometry():
    with criterion("3 VTP on 100 ring-crossing stripes lies in [25, 29] px and equals oracle"):
        rng = np.random.default_rng(303)
        frames = [paint(ray_stripe(a, 5)) for a in rng.uniform(-math.pi, math.pi, 100)]
        start = time.perf_counter()
        outs = [process_frame(f, VtpTrackerState(), CFG) for f in frames]
        elapsed = time.perf_counter() - start
        for f, out in zip(frames, outs):
            assert out.flag_vtp
            assert 25 <= math.hypot(out.e_x, out.e_y) <= 29
            eroded = stages(f, VtpTrackerState(), CFG).eroded.bits
            x, y = ring_centroid_bruteforce(eroded.tolist(), (60, 80), None,
                                            CFG.r_min, CFG.r_max, CFG.fov_theta)
            assert (out.e_x, out.e_y) == (x - 60, y - 80)
        assert elapsed < 5.0, elapsed


def _marker_flag(mask):
    bits = binarize(channel_conv(paint(mask), CFG.gg, CFG.gb), CFG.k_t)
    return detect_marker(erode(bits, CFG.path_kernel), CFG)


def test_4_marker_discrimination():
    with criterion("4 stripes <= 5 px never flag the marker, disks >= 6 px always do"):
        rng = np.random.default_rng(404)
        r, c = np.mgrid[0:H, 0:W]
        errors = 0
        for _ in range(50):
            mask = line_stripe(rng, rng.uniform(1, 5))
            errors += bool(_marker_flag(mask))
        for _ in range(50):
            radius = int(rng.integers(6, 16))
            cr = rng.integers(radius, H - radius)
            cc = rng.integers(radius, W - radius)
            errors += not _marker_flag((r - cr) ** 2 + (c - cc) ** 2 <= radius ** 2)
        assert errors == 0


ORDER = [Phase.TAKE_OFF, Phase.FOLLOWING, Phase.END_MARKER, Phase.LANDING, Phase.DONE]


def test_5_state_machine():
    with criterion("5 canonical mission trace and 1000 random sequences never regress"):
        seq = ([MissionInputs(hovering=False)] * 3
               + [MissionInputs(hovering=True, flag_vtp=True)]
               + [MissionInputs(hovering=True, flag_vtp=True)] * 10
               + [MissionInputs(flag_marker=True)]
               + [MissionInputs(flag_marker=True, centered=False)] * 6
               + [MissionInputs(flag_marker=True, centered=True)]
               + [MissionInputs(landed=True)])
        s, trace = MissionState(), [Phase.TAKE_OFF]
        for i, inp in enumerate(seq):
            s = step_mission(s, MissionInputs(**{**inp.__dict__, "now": i * 0.2}))
            if s.value is not trace[-1]:
                trace.append(s.value)
        assert trace == ORDER

        rng = np.random.default_rng(505)
        for _ in range(1000):
            s = MissionState()
            for i in range(int(rng.integers(1, 80))):
                if s.value.terminal:
                    break
                flags = rng.random(5) < 0.5
                nxt = step_mission(s, MissionInputs(*map(bool, flags), now=i * 0.2))
                if nxt.value is not Phase.FAILED:
                    assert ORDER.index(nxt.value) >= ORDER.index(s.value)
                s = nxt


def test_6_kinematic_speed_law():
    with criterion("6 waypoint speed equals (alpha / t_pp) * 27 within 0.1 %"):
        for alpha in (0.001, 0.002, 0.005):
            cfg = PlannerConfig(alpha=alpha, apply_per="pp_tick")
            ips = IpsOutput(27 * math.cos(0.4), 27 * math.sin(0.4), True, False)
            wp = Waypoint(0.0, 0.0, cfg.z_h)
            ticks = 200
            for _ in range(ticks):
                wp = plan_step(wp, ips, cfg)
            speed = math.hypot(wp.x_w, wp.y_w) / (ticks * cfg.t_pp)
            expected = alpha / cfg.t_pp * 27
            assert abs(speed - expected) <= 1e-3 * expected
            assert predicted_speed(cfg, CFG) == pytest.approx(expected)


def test_7_scurve_alpha_trade_off():
    with criterion("7 S-curve: mission time falls and path error rises with alpha, < 60 s"):
        cfg = SimConfig(track=load_track("scurve"))
        start = time.perf_counter()
        entries = sweep_alpha(cfg, [0.003, 0.0045, 0.006], jobs=3)
        elapsed = time.perf_counter() - start
        ms = [e.metrics for e in entries]
        assert all(m is not None and m.outcome == "Done" for m in ms)
        times = [m.mission_time for m in ms]
        errs = [m.mean_path_error for m in ms]
        print(f"\n    T_s={times} mean_err={errs} elapsed={elapsed:.1f}s")
        assert times[0] > times[1] > times[2]
        assert errs[0] < errs[1] < errs[2]
        assert elapsed < 60.0


def test_8_constant_following_speed():
    with criterion("8 straight 5 m: speed CV < 0.3 over the steady Following interval"):
        log, m = run(SimConfig(track=load_track("straight5")))
        assert m.outcome == "Done"
        idx = np.nonzero(log.column("state") == "Following")[0]
        cut = int(0.15 * len(idx))
        v = log.column("v_d")[idx[cut:len(idx) - cut]]
        cv = v.std() / v.mean()
        print(f"\n    cv={cv:.4f} mean_speed={v.mean():.3f} m/s")
        assert cv < 0.3


@pytest.mark.parametrize("name", ["straight", "lshape"])
def test_9_end_to_end_landing(name):
    with criterion(f"9 {name}: Done, landing within marker radius, bit-identical logs"):
        cfg = SimConfig(track=load_track(name))
        log, m = run(cfg)
        assert m.outcome == "Done"
        assert m.landing_offset <= cfg.track.marker_radius
        log2, m2 = run(cfg)
        assert log.to_csv(m).encode() == log2.to_csv(m2).encode()


def test_10_path_distance_oracle():
    with criterion("10 path distance within 1 mm of dense sampling on 20 random tracks"):
        rng = np.random.default_rng(1010)
        worst = 0.0
        for _ in range(20):
            text, samples = random_track_text(rng, int(rng.integers(2, 7)))
            track = parse_track(text)
            pts = np.array(samples)
            lo, hi = pts.min(axis=0) - 0.5, pts.max(axis=0) + 0.5
            for p in rng.uniform(lo, hi, (25, 2)):
                worst = max(worst, abs(path_distance(track, p) - polyline_dense_distance(samples, p)))
        assert worst <= 1e-3, worst
