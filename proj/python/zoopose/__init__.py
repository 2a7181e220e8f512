import json

from . import _core
from ._core import (
    Error,
    anneal_timestep,
    control_scale,
    guidance_scale,
    library_names,
)

__all__ = [
    "Error",
    "adapt",
    "add_appendage",
    "anneal_timestep",
    "control_scale",
    "depth_map",
    "depth_png",
    "guidance_scale",
    "library_names",
    "library_skeleton",
    "mesh_arrays",
    "mesh_obj",
    "pose_image",
    "pose_png",
    "project_keypoints",
    "sample_camera",
    "schedule_preview",
    "sds_demo",
    "validate_skeleton",
]


def _text(value):
    return value if isinstance(value, str) else json.dumps(value)


def _camera(camera):
    return "" if camera is None else _text(camera)


def library_skeleton(name):
    return json.loads(_core.library_skeleton(name))


def validate_skeleton(skeleton):
    return json.loads(_core.validate_skeleton(_text(skeleton)))


def add_appendage(skeleton, kind, anchor):
    return json.loads(_core.add_appendage(_text(skeleton), kind, anchor))


def mesh_obj(skeleton, params=None):
    return _core.mesh_obj(_text(skeleton), "" if params is None else _text(params))


def mesh_arrays(skeleton, params=None):
    """(vertices float64 (N, 3), triangles uint32 (M, 3), per-triangle part labels)."""
    return _core.mesh_arrays(_text(skeleton), "" if params is None else _text(params))


def project_keypoints(skeleton, camera=None):
    """Keypoint name -> (x, y, depth, in_frustum)."""
    return _core.project_keypoints(_text(skeleton), _camera(camera))


def pose_image(skeleton, camera=None):
    return _core.pose_image(_text(skeleton), _camera(camera))


def pose_png(skeleton, camera=None):
    return _core.pose_png(_text(skeleton), _camera(camera))


def sample_camera(seed):
    return json.loads(_core.sample_camera(seed))


def depth_map(mesh, camera=None):
    """Depth from OBJ text, or from a skeleton (dict or JSON text) meshed first."""
    return _core.depth_map(mesh if isinstance(mesh, str) else json.dumps(mesh), _camera(camera))


def depth_png(mesh, camera=None):
    return _core.depth_png(mesh if isinstance(mesh, str) else json.dumps(mesh), _camera(camera))


def schedule_preview(samples=11):
    return json.loads(_core.schedule_preview(samples))


def sds_demo(size=16, iters=2000, seed=0, step_size=0.1, lambda_rgb=0.01):
    eta, target, trace = _core.sds_demo(size, iters, seed, step_size, lambda_rgb)
    return {"eta": eta, "target": target, "trace_csv": trace}


def adapt(animal, pose):
    return json.loads(_core.adapt(animal, pose))
