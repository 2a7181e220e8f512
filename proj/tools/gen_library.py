#!/usr/bin/env python3
"""Regenerates the shipped pose library under library/.

Poses are hand-authored in rough metric units (x forward, y to the animal's
left, z up, ground at z = 0) and then normalized: centered on the bounding-box
center and scaled so every keypoint lies within radius 0.9 of the origin.

    python3 tools/gen_library.py [--out library]
"""

import argparse
import json
import math
import pathlib
import re

SIDES = {"left": 1.0, "right": -1.0}


def add(a, b):
    return [a[0] + b[0], a[1] + b[1], a[2] + b[2]]


def head(kp, neck_end, nose, eye_back, eye_side, eye_up):
    kp["nose"] = nose
    kp["left_eye"] = add(nose, [-eye_back, eye_side, eye_up])
    kp["right_eye"] = add(nose, [-eye_back, -eye_side, eye_up])
    kp["neck_end"] = neck_end


def limb(kp, end, side, thigh, knee, paw):
    """thigh/knee/paw are given for the left side; the right side mirrors y."""
    s = SIDES[side]
    kp[f"thigh_{end}_{side}"] = [thigh[0], s * thigh[1], thigh[2]]
    kp[f"knee_{end}_{side}"] = [knee[0], s * knee[1], knee[2]]
    kp[f"paw_{end}_{side}"] = [paw[0], s * paw[1], paw[2]]


def pair(kp, end, thigh, knee, paw):
    for side in SIDES:
        limb(kp, end, side, thigh, knee, paw)


def quadruped(length, shoulder_h, hip_h, half_width, thigh_drop, front_knee_dx,
              back_knee_dx, nose_rel, eye, tail_rel, splay=0.0, knee_frac=0.5):
    """Standing four-legged animal with the paws on the ground."""
    kp = {}
    neck_end = [length / 2, 0.0, shoulder_h]
    back_end = [-length / 2, 0.0, hip_h]
    head(kp, neck_end, add(neck_end, nose_rel), *eye)
    kp["back_end"] = back_end
    for end, anchor, dx in (("front", neck_end, front_knee_dx),
                            ("back", back_end, back_knee_dx)):
        thigh = [anchor[0], half_width, anchor[2] - thigh_drop]
        paw = [anchor[0], half_width + 2 * splay, 0.0]
        knee = [anchor[0] + dx, half_width + splay,
                thigh[2] * (1 - knee_frac)]
        pair(kp, end, thigh, knee, paw)
    kp["tail_end"] = add(back_end, tail_rel)
    return kp


def giraffe():
    return quadruped(1.0, 2.0, 1.7, 0.18, 0.12, 0.04, -0.08,
                     [0.55, 0.0, 1.55], (0.12, 0.06, 0.06), [-0.15, 0.0, -0.7])


def elephant():
    return quadruped(1.3, 1.75, 1.65, 0.34, 0.15, 0.02, -0.04,
                     [0.7, 0.0, -0.9], (0.45, 0.2, 0.55), [-0.1, 0.0, -0.75])


def german_shepherd():
    return quadruped(0.8, 0.62, 0.56, 0.12, 0.08, 0.05, -0.1,
                     [0.38, 0.0, 0.28], (0.14, 0.05, 0.07), [-0.45, 0.0, -0.12])


def raccoon_four_legs():
    return quadruped(0.5, 0.3, 0.34, 0.1, 0.05, 0.04, -0.06,
                     [0.22, 0.0, 0.06], (0.09, 0.04, 0.04), [-0.38, 0.0, -0.06])


def otter():
    return quadruped(0.75, 0.2, 0.22, 0.11, 0.06, 0.03, -0.06,
                     [0.24, 0.0, 0.06], (0.08, 0.04, 0.04), [-0.55, 0.0, -0.15],
                     splay=0.03)


def crocodile():
    return quadruped(1.3, 0.3, 0.3, 0.2, 0.05, 0.06, -0.06,
                     [0.85, 0.0, -0.08], (0.62, 0.07, 0.07), [-1.7, 0.0, -0.25],
                     splay=0.15, knee_frac=0.4)


def lizard():
    return quadruped(0.5, 0.1, 0.1, 0.08, 0.02, 0.04, -0.04,
                     [0.22, 0.0, 0.0], (0.1, 0.03, 0.03), [-0.75, 0.0, -0.08],
                     splay=0.08, knee_frac=0.3)


def tortoise():
    return quadruped(0.5, 0.22, 0.2, 0.16, 0.04, 0.04, -0.03,
                     [0.22, 0.0, 0.04], (0.06, 0.03, 0.03), [-0.12, 0.0, -0.1],
                     splay=0.05)


def eagle_sitting():
    kp = {}
    neck_end = [0.08, 0.0, 0.5]
    head(kp, neck_end, add(neck_end, [0.16, 0.0, 0.06]), 0.06, 0.03, 0.03)
    kp["back_end"] = [-0.1, 0.0, 0.16]
    pair(kp, "front", [0.06, 0.09, 0.46], [-0.06, 0.13, 0.32],
         [-0.24, 0.1, 0.08])
    pair(kp, "back", [-0.04, 0.06, 0.14], [0.0, 0.06, 0.07],
         [0.05, 0.06, 0.0])
    kp["tail_end"] = [-0.3, 0.0, -0.0]
    return kp


def eagle_flying():
    kp = {}
    neck_end = [0.2, 0.0, 1.0]
    head(kp, neck_end, add(neck_end, [0.2, 0.0, 0.03]), 0.07, 0.03, 0.03)
    kp["back_end"] = [-0.2, 0.0, 1.0]
    pair(kp, "front", [0.16, 0.1, 1.02], [0.1, 0.6, 1.1], [-0.02, 1.15, 1.05])
    pair(kp, "back", [-0.14, 0.06, 0.97], [-0.24, 0.06, 0.93],
         [-0.34, 0.05, 0.92])
    kp["tail_end"] = [-0.52, 0.0, 1.0]
    return kp


def spoonbill_sitting():
    kp = {}
    neck_end = [0.12, 0.0, 0.32]
    head(kp, neck_end, add(neck_end, [0.32, 0.0, 0.1]), 0.22, 0.025, 0.03)
    kp["back_end"] = [-0.14, 0.0, 0.2]
    pair(kp, "front", [0.1, 0.08, 0.3], [-0.02, 0.11, 0.26], [-0.2, 0.08, 0.2])
    pair(kp, "back", [-0.06, 0.05, 0.12], [0.04, 0.06, 0.05],
         [-0.08, 0.06, 0.0])
    kp["tail_end"] = [-0.28, 0.0, 0.18]
    return kp


def spoonbill_flying():
    kp = {}
    neck_end = [0.22, 0.0, 1.0]
    head(kp, neck_end, add(neck_end, [0.55, 0.0, 0.0]), 0.25, 0.025, 0.03)
    kp["back_end"] = [-0.18, 0.0, 1.0]
    pair(kp, "front", [0.18, 0.08, 1.02], [0.12, 0.5, 1.12], [0.02, 0.95, 1.08])
    pair(kp, "back", [-0.14, 0.05, 0.98], [-0.35, 0.05, 0.96],
         [-0.6, 0.05, 0.95])
    kp["tail_end"] = [-0.32, 0.0, 1.0]
    return kp


def tree_frog():
    kp = {}
    neck_end = [0.08, 0.0, 0.16]
    head(kp, neck_end, add(neck_end, [0.09, 0.0, 0.03]), 0.04, 0.035, 0.035)
    kp["back_end"] = [-0.08, 0.0, 0.1]
    pair(kp, "front", [0.07, 0.05, 0.12], [0.1, 0.08, 0.06], [0.12, 0.07, 0.0])
    pair(kp, "back", [-0.08, 0.05, 0.08], [0.02, 0.12, 0.07],
         [-0.06, 0.1, 0.0])
    kp["tail_end"] = [-0.1, 0.0, 0.09]
    return kp


def raccoon_two_legs():
    kp = {}
    neck_end = [0.03, 0.0, 0.62]
    head(kp, neck_end, add(neck_end, [0.14, 0.0, 0.08]), 0.08, 0.04, 0.04)
    kp["back_end"] = [0.0, 0.0, 0.26]
    pair(kp, "front", [0.04, 0.1, 0.58], [0.12, 0.12, 0.47], [0.16, 0.1, 0.38])
    pair(kp, "back", [0.0, 0.08, 0.22], [0.08, 0.09, 0.12], [0.06, 0.09, 0.0])
    kp["tail_end"] = [-0.3, 0.0, 0.03]
    return kp


def t_rex():
    kp = {}
    neck_end = [0.45, 0.0, 1.6]
    head(kp, neck_end, add(neck_end, [0.6, 0.0, 0.2]), 0.35, 0.12, 0.12)
    kp["back_end"] = [-0.35, 0.0, 1.5]
    pair(kp, "front", [0.42, 0.16, 1.45], [0.5, 0.19, 1.34], [0.58, 0.16, 1.3])
    pair(kp, "back", [-0.22, 0.26, 1.3], [0.0, 0.29, 0.78], [-0.12, 0.28, 0.0])
    kp["tail_end"] = [-1.9, 0.0, 1.35]
    return kp


def bat():
    kp = {}
    neck_end = [0.05, 0.0, 0.6]
    head(kp, neck_end, add(neck_end, [0.06, 0.0, 0.01]), 0.025, 0.015, 0.015)
    kp["back_end"] = [-0.06, 0.0, 0.6]
    pair(kp, "front", [0.04, 0.03, 0.61], [0.02, 0.14, 0.65], [-0.03, 0.3, 0.6])
    pair(kp, "back", [-0.05, 0.03, 0.59], [-0.09, 0.05, 0.58],
         [-0.12, 0.06, 0.57])
    kp["tail_end"] = [-0.11, 0.0, 0.59]
    return kp


# Library order. Pose labels are shown only for animals with several entries.
ENTRIES = [
    ("Giraffe", "standing", giraffe),
    ("Elephant", "standing", elephant),
    ("German Shepherd", "standing", german_shepherd),
    ("Eagle", "sitting", eagle_sitting),
    ("Eagle", "flying", eagle_flying),
    ("American Crocodile", "standing", crocodile),
    ("Tree Frog", "sitting", tree_frog),
    ("Roseate Spoonbill", "sitting", spoonbill_sitting),
    ("Roseate Spoonbill", "flying", spoonbill_flying),
    ("Raccoon", "standing on four legs", raccoon_four_legs),
    ("Raccoon", "standing on two legs", raccoon_two_legs),
    ("T-Rex", "standing", t_rex),
    ("Lizard", "standing", lizard),
    ("Tortoise", "standing", tortoise),
    ("Bat", "flying", bat),
    ("Otter", "standing", otter),
]

KEYPOINTS = [
    "left_eye", "right_eye", "nose", "neck_end",
    "thigh_front_left", "thigh_front_right", "thigh_back_left", "thigh_back_right",
    "knee_front_left", "knee_front_right", "knee_back_left", "knee_back_right",
    "paw_front_left", "paw_front_right", "paw_back_left", "paw_back_right",
    "back_end", "tail_end",
]

BONES = [
    ["nose", "left_eye"], ["nose", "right_eye"], ["neck_end", "nose"],
    ["neck_end", "back_end"],
    ["neck_end", "thigh_front_left"], ["neck_end", "thigh_front_right"],
    ["back_end", "thigh_back_left"], ["back_end", "thigh_back_right"],
    ["back_end", "tail_end"],
] + [[f"thigh_{e}_{s}", f"knee_{e}_{s}"] for e in ("front", "back") for s in SIDES] \
  + [[f"knee_{e}_{s}", f"paw_{e}_{s}"] for e in ("front", "back") for s in SIDES]


def normalize(kp):
    lo = [min(p[i] for p in kp.values()) for i in range(3)]
    hi = [max(p[i] for p in kp.values()) for i in range(3)]
    center = [(a + b) / 2 for a, b in zip(lo, hi)]
    radius = max(math.dist(p, center) for p in kp.values())
    scale = 0.9 / radius
    return {k: [round((p[i] - center[i]) * scale, 4) + 0.0 for i in range(3)]
            for k, p in kp.items()}


def slug(text):
    return re.sub(r"[^a-z0-9]+", "_", text.lower()).strip("_")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parents[1] / "library"))
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    index = []
    for animal, pose, build in ENTRIES:
        kp = normalize(build())
        assert sorted(kp) == sorted(KEYPOINTS), animal
        doc = {
            "name": animal,
            "pose_description": pose,
            "keypoints": [{"name": k, "xyz": kp[k]} for k in KEYPOINTS],
            "bones": BONES,
        }
        filename = f"{slug(animal)}__{slug(pose)}.json"
        (out / filename).write_text(json.dumps(doc, indent=2) + "\n")
        index.append(filename)
    (out / "index.json").write_text(json.dumps(index, indent=2) + "\n")


if __name__ == "__main__":
    main()
