import io
import math

import numpy as np
import pytest
from PIL import Image

import zoopose

NAMES = [
    "Giraffe", "Elephant", "German Shepherd", "Eagle - sitting", "Eagle - flying",
    "American Crocodile", "Tree Frog", "Roseate Spoonbill - sitting", "Roseate Spoonbill - flying",
    "Raccoon - 4legs", "Raccoon - 2legs", "T-Rex", "Lizard", "Tortoise", "Bat", "Otter",
]


def pinhole(camera, point):
    th, ph = math.radians(camera["polar_deg"]), math.radians(camera["azimuth_deg"])
    look = np.array(camera["look_at"])
    eye = look + camera["radius"] * np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)])
    fwd = (look - eye) / np.linalg.norm(look - eye)
    right = np.array([fwd[1], -fwd[0], 0.0])
    right /= np.linalg.norm(right)
    up = np.cross(right, fwd)
    w, h = camera["image"]
    f = (h / 2) / math.tan(math.radians(camera["fov_deg"]) / 2)
    d = np.asarray(point) - eye
    return w / 2 + f * d @ right / (d @ fwd), h / 2 - f * d @ up / (d @ fwd)


def test_library():
    assert zoopose.library_names() == NAMES
    for name in NAMES:
        s = zoopose.library_skeleton(name)
        assert len(s["keypoints"]) == 18
        assert zoopose.validate_skeleton(s)["ok"]


def test_errors_carry_codes():
    with pytest.raises(zoopose.Error) as info:
        zoopose.library_skeleton("Unicorn")
    assert info.value.code == "NotFound"
    with pytest.raises(zoopose.Error) as info:
        zoopose.add_appendage(zoopose.library_skeleton("Otter"), "extra_tail", "paw_front_left")
    assert info.value.code == "IncompatibleAnchor"


def test_appendage_grows_the_skeleton():
    dog = zoopose.library_skeleton("German Shepherd")
    out = zoopose.add_appendage(dog, "extra_head", "neck_end")
    assert len(out["keypoints"]) == 21
    assert len(out["bones"]) == len(dog["bones"]) + 3
    assert zoopose.validate_skeleton(out)["ok"]


def test_schedules():
    assert zoopose.control_scale(0) == 1.0
    assert zoopose.control_scale(10000) == 0.2
    assert zoopose.guidance_scale(0) == 50.0
    assert zoopose.guidance_scale(10000) == 100.0
    assert zoopose.anneal_timestep(0) == 0.98
    assert zoopose.anneal_timestep(10000) == 0.4
    assert abs(zoopose.control_scale(5000) - (math.cos(math.pi / 4) * 0.8 + 0.2)) <= 1e-12
    rows = zoopose.schedule_preview(3)
    assert [r["step"] for r in rows] == [0, 5000, 10000]


def test_projection_matches_pinhole():
    s = zoopose.library_skeleton("Giraffe")
    for seed in range(5):
        cam = zoopose.sample_camera(seed)
        got = zoopose.project_keypoints(s, cam)
        for kp in s["keypoints"]:
            x, y, _, _ = got[kp["name"]]
            wx, wy = pinhole(cam, kp["xyz"])
            assert abs(x - wx) < 1e-9 and abs(y - wy) < 1e-9


def test_mesh_is_closed():
    v, f, labels = zoopose.mesh_arrays(zoopose.library_skeleton("Tortoise"))
    assert v.shape[1] == 3 and f.shape[1] == 3 and len(labels) == len(f)
    assert f.max() < len(v)
    edges = {}
    for a, b, c in f:
        for e in ((a, b), (b, c), (c, a)):
            edges[e] = edges.get(e, 0) + 1
    assert all(n == 1 for n in edges.values())
    assert all((b, a) in edges for a, b in edges)
    obj = zoopose.mesh_obj(zoopose.library_skeleton("Tortoise"))
    assert sum(line.startswith("f ") for line in obj.splitlines()) == len(f)


def test_images_and_pngs_agree():
    s = zoopose.library_skeleton("Bat")
    cam = {"radius": 1.5, "azimuth_deg": 40, "image": [48, 32]}
    img = zoopose.pose_image(s, cam)
    assert img.shape == (32, 48, 3) and img.dtype == np.uint8 and img.any()
    decoded = np.asarray(Image.open(io.BytesIO(zoopose.pose_png(s, cam))).convert("RGB"))
    assert np.array_equal(decoded, img)

    depth = zoopose.depth_map(s, cam)
    assert depth.shape == (32, 48)
    assert depth.min() >= 0.0 and depth.max() <= 1.0 and depth.max() > 0.0
    png = Image.open(io.BytesIO(zoopose.depth_png(zoopose.mesh_obj(s), cam)))
    assert png.size == (48, 32)
    assert np.array_equal(np.asarray(png, dtype=np.int64), np.rint(depth * 65535).astype(np.int64))


def test_sds_demo_converges():
    out = zoopose.sds_demo(size=8, iters=400, seed=3)
    assert np.abs(out["eta"] - out["target"]).max() < 0.01
    assert len(out["trace_csv"].splitlines()) == 401


def test_adapt_with_scripted_backend():
    record = zoopose.adapt("Tiger", "standing")
    assert record["finder"]["chosen"] == "German Shepherd"
    assert zoopose.adapt("Tiger", "standing") == record
