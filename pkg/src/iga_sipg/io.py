"""YAML study configurations and geometry files."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import yaml

from .domains import build_domain, uniform_spaces
from .exceptions import ConfigurationError
from .geometry import GeometryMap
from .solver import SolverSettings
from .splines import SplineSpace1D, TensorSplineSpace
from .study import StudyConfig
from .topology import Interface, MultiPatchDomain

CONFIG_KEYS = {"domain", "geometry", "degrees", "levels", "alphas", "penalty", "quadrature",
               "mode", "solution", "solver", "output", "timings"}
ORIENTATIONS = ("same", "reversed")


def _read_yaml(path) -> dict:
    try:
        with Path(path).open() as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path} is not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path} must contain a mapping at the top level")
    return data


def _section(data: dict, key: str, allowed: set) -> dict:
    sec = data.get(key) or {}
    if not isinstance(sec, dict):
        raise ConfigurationError(f"section {key!r} must be a mapping")
    unknown = set(sec) - allowed
    if unknown:
        raise ConfigurationError(f"unknown keys in {key!r}: {sorted(unknown)}")
    return sec


def _levels(value) -> tuple[int, ...]:
    if isinstance(value, dict):
        if set(value) != {"from", "to"}:
            raise ConfigurationError("levels range needs exactly the keys 'from' and 'to'")
        return tuple(range(int(value["from"]), int(value["to"]) + 1))
    if isinstance(value, int):
        return (value,)
    return tuple(int(v) for v in value)


def config_from_dict(data: dict, base_dir: Path | None = None) -> StudyConfig:
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigurationError(f"unknown configuration keys: {sorted(unknown)}")
    pen = _section(data, "penalty", {"sigma0", "sigma", "local_h"})
    quad = _section(data, "quadrature", {"element_extra", "interface_extra"})
    slv = _section(data, "solver", {"method", "tol", "max_iter", "preconditioner"})
    kwargs: dict = {}
    if "domain" in data:
        kwargs["domain"] = str(data["domain"])
    if data.get("geometry") is not None:
        geo = Path(data["geometry"])
        if base_dir is not None and not geo.is_absolute():
            geo = base_dir / geo
        kwargs["geometry"] = str(geo)
    if "degrees" in data:
        deg = data["degrees"]
        kwargs["degrees"] = tuple(int(p) for p in (deg if isinstance(deg, list) else [deg]))
    if "levels" in data:
        kwargs["levels"] = _levels(data["levels"])
    if data.get("alphas") is not None:
        a = data["alphas"]
        kwargs["alphas"] = tuple(float(v) for v in (a if isinstance(a, list) else [a]))
    for key in ("sigma0", "sigma"):
        if pen.get(key) is not None:
            kwargs[key] = float(pen[key])
    if "local_h" in pen:
        kwargs["local_h"] = bool(pen["local_h"])
    for key in ("element_extra", "interface_extra"):
        if key in quad:
            kwargs[key] = int(quad[key])
    for key in ("mode", "solution"):
        if key in data:
            kwargs[key] = str(data[key])
    if slv:
        kwargs["solver"] = SolverSettings(
            method=str(slv.get("method", "direct")), tol=float(slv.get("tol", 1e-12)),
            max_iter=None if slv.get("max_iter") is None else int(slv["max_iter"]),
            preconditioner=str(slv.get("preconditioner", "diagonal")))
    if data.get("output") is not None:
        out = Path(data["output"])
        if base_dir is not None and not out.is_absolute():
            out = base_dir / out
        kwargs["output"] = str(out)
    if "timings" in data:
        kwargs["timings"] = bool(data["timings"])
    try:
        return StudyConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(str(exc)) from exc


def load_config(path) -> StudyConfig:
    """Read a study configuration; relative paths resolve against its folder."""
    path = Path(path)
    return config_from_dict(_read_yaml(path), path.parent)


def _pair(value, what: str) -> tuple[int, int]:
    v = [int(value)] * 2 if np.ndim(value) == 0 else [int(x) for x in value]
    if len(v) != 2:
        raise ConfigurationError(f"{what} needs one or two integers")
    return v[0], v[1]


def geometry_from_dict(data: dict) -> tuple[list[GeometryMap], list[float], list[Interface] | None]:
    patches = data.get("patches")
    if not patches:
        raise ConfigurationError("geometry file needs a non-empty 'patches' list")
    maps, alphas = [], []
    for k, pd in enumerate(patches):
        unknown = set(pd) - {"degree", "intervals", "control_points", "alpha"}
        if unknown:
            raise ConfigurationError(f"patch {k}: unknown keys {sorted(unknown)}")
        px, py = _pair(pd.get("degree", 1), "degree")
        nx, ny = _pair(pd.get("intervals", 1), "intervals")
        space = TensorSplineSpace(SplineSpace1D(px, nx), SplineSpace1D(py, ny))
        cp = np.asarray(pd["control_points"], dtype=float)
        if cp.shape != (space.dim, 2):
            raise ConfigurationError(
                f"patch {k}: expected {space.dim} control points (x y pairs), got shape {cp.shape}")
        maps.append(GeometryMap(space, cp))
        alphas.append(float(pd.get("alpha", 1.0)))
    ifaces = None
    if data.get("interfaces") is not None:
        ifaces = []
        for entry in data["interfaces"]:
            orient = entry.get("orientation", "same")
            if orient not in ORIENTATIONS:
                raise ConfigurationError(f"orientation must be one of {ORIENTATIONS}")
            ifaces.append(Interface(int(entry["k"]), int(entry["l"]), str(entry["edge_k"]),
                                    str(entry["edge_l"]), orient == "reversed"))
    return maps, alphas, ifaces


def load_geometry(path, degree=2, level: int = 0) -> MultiPatchDomain:
    """Domain from a geometry file with uniform discretization spaces.

    Every patch gets degree ``degree`` (or one per patch) and
    ``2 * 2**level`` intervals per direction.
    """
    maps, alphas, ifaces = geometry_from_dict(_read_yaml(path))
    return build_domain(maps, uniform_spaces(len(maps), degree, level), alphas, ifaces)


def geometry_to_dict(domain: MultiPatchDomain, interfaces: bool = True) -> dict:
    out = {"patches": []}
    for p in domain.patches:
        s = p.geometry.space
        out["patches"].append({
            "degree": [s.space_x.degree, s.space_y.degree],
            "intervals": [s.space_x.num_intervals, s.space_y.num_intervals],
            "control_points": p.geometry.control_points.tolist(),
            "alpha": float(p.alpha),
        })
    if interfaces:
        out["interfaces"] = [{"k": i.k, "edge_k": i.edge_k, "l": i.l, "edge_l": i.edge_l,
                              "orientation": i.orientation} for i in domain.interfaces]
    return out


def save_geometry(domain: MultiPatchDomain, path, interfaces: bool = True) -> None:
    with Path(path).open("w") as fh:
        yaml.safe_dump(geometry_to_dict(domain, interfaces), fh, sort_keys=False)
