"""Demo dataset: a braking-for-jaywalker scene with one ego vehicle and 15
candidate pedestrians, one of which triggers the interrupt.

The scene reproduces a 2 Hz, 20 s drive (T=40, dt=0.5).  The ego approaches
a near-stationary pedestrian, brakes while inside the safety distance, then
accelerates away; its action labels carry (init)/(end) padding tokens that
the loader strips.  The triggering pedestrian's kinematics deliberately keep
the transcription quirks of real annotation dumps: 13 position rows but only
12 yaw entries and 14 quaternion entries, so the safety-distance predicate
stream comes out True x10, False x2, then absent.
"""
from __future__ import annotations

import json
import math
import os

DEMO_PROGRAM = """behavior EgoBehavior():
  try:
    do FollowLaneBehavior()
  interrupt when (distance from self to ped) < Range(1,10):
    do BrakeBehavior()

ego = new Car with behavior EgoBehavior()
ped = new Pedestrian
"""

T = 40
DT = 0.5

MATCHING_PED = "human.pedestrian.adult_12"
SNIPPET_TIMESTEP = 10  # first step outside the safety distance
SNIPPET_DISTANCE = 27.696

PED_XS = [
    2274.997, 2275.048, 2275.062, 2275.076, 2275.089, 2275.117, 2275.131,
    2275.189, 2275.18, 2275.09, 2275.001, 2274.911, 2274.822,
]
PED_YS = [
    849.647, 849.646, 849.648, 849.65, 849.652, 849.655, 849.657,
    849.656, 849.657, 849.658, 849.659, 849.66, 849.661,
]
PED_YAW = -0.7020000097690631
PED_QUAT = [0.999981235472795, 0.0, 0.0, -0.006126067441877257]

EGO_YAW = 2.95

EGO_ACTIONS = (
    ["(init)", "(init)"]
    + ["BRAKE"] * 8
    + ["FOLLOW_LANE"] * 3
    + ["ACCELERATE"] * 5
    + ["FOLLOW_LANE"] * 20
    + ["(end)", "(end)"]
)

# pedestrian ids present in the candidate pool (15 adults)
CANDIDATE_IDS = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 11, 12, 15, 16, 17]


def _quat_from_yaw(yaw: float):
    return [math.cos(yaw / 2), 0.0, 0.0, math.sin(yaw / 2)]


def _pad(values, total=T):
    return list(values) + [None] * (total - len(values))


def _ego_positions():
    xs, ys = [], []
    for t in range(T):
        if t <= 9:
            xs.append(2271.5)
            ys.append(843.0 + 0.8 * t)
        elif t == 10:
            # 27.696 m from the pedestrian at this step
            xs.append(PED_XS[10] - 3.12)
            ys.append(PED_YS[10] + 27.52)
        else:
            xs.append(2271.9 + 0.05 * (t - 11))
            ys.append(880.0 + 2.0 * (t - 11))
    return xs, ys


def _track(tid, cls, desc, xs, ys, poses, yaws, actions):
    return {
        "id": tid,
        "type": cls,
        "desc": desc,
        "xs": xs,
        "ys": ys,
        "ts": [round(t * DT, 6) for t in range(T)],
        "poses": poses,
        "angles": yaws,
        "actions": actions,
    }


def build_demo_scene() -> dict:
    ego_xs, ego_ys = _ego_positions()
    ego = _track(
        "ego_0", "vehicle.car", "Ego vehicle.",
        ego_xs, ego_ys,
        [_quat_from_yaw(EGO_YAW)] * T,
        [EGO_YAW] * T,
        list(EGO_ACTIONS),
    )

    tracks = [ego]
    for i in CANDIDATE_IDS:
        tid = f"human.pedestrian.adult_{i}"
        if i == 12:
            # the triggering pedestrian: 13 position rows, 12 yaw entries,
            # 14 quaternion entries
            tracks.append(_track(
                tid, "human.pedestrian.adult", "Adult subcategory.",
                _pad(PED_XS), _pad(PED_YS),
                _pad([PED_QUAT] * 14),
                _pad([PED_YAW] * 12),
                _pad(["CROSS_ROAD"] * 10 + ["WAIT"] * 3),
            ))
        elif i == 0:
            # long-lived distant pedestrian; candidate ordering tries it first
            n = 20
            tracks.append(_track(
                tid, "human.pedestrian.adult", "Adult subcategory.",
                _pad([2400.0 + 0.1 * t for t in range(n)]),
                _pad([900.0] * n),
                _pad([[1.0, 0.0, 0.0, 0.0]] * n),
                _pad([0.0] * n),
                _pad(["CROSS_ROAD"] * n),
            ))
        else:
            n = 12
            tracks.append(_track(
                tid, "human.pedestrian.adult", "Adult subcategory.",
                _pad([2320.0 + 5.0 * i] * n),
                _pad([820.0] * n),
                _pad([[1.0, 0.0, 0.0, 0.0]] * n),
                _pad([0.0] * n),
                _pad(["WAIT"] * n),
            ))

    return {
        "id": "scene-0103",
        "dt": DT,
        "T": T,
        "ego_id": "ego_0",
        "tracks": tracks,
    }


def write_demo_dataset(directory: str) -> str:
    """Write the demo scene and program into `directory`; returns the
    program path."""
    os.makedirs(directory, exist_ok=True)
    trace_path = os.path.join(directory, "scene-0103.trace.json")
    with open(trace_path, "w", encoding="utf-8") as fh:
        json.dump(build_demo_scene(), fh, indent=1)
        fh.write("\n")
    program_path = os.path.join(directory, "braking_for_jaywalker.scenic")
    with open(program_path, "w", encoding="utf-8") as fh:
        fh.write(DEMO_PROGRAM)
    return program_path
