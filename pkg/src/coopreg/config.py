"""Human-editable scenario and gain files (YAML).

A scenario file describes one experiment end to end: plant, exosystem,
graph, delays, synthesis parameters, optional per-agent disturbance
maps and uncertainties, and the simulation settings.  Gains produced by
synthesis are written to a separate file together with their stability
certificate, so a simulation run can be reproduced without re-running
synthesis.

Both readers validate shapes eagerly and report failures with the
dotted path of the offending field (``plant.a``, ``graph.edges[2]``,
...).  Serialization is deterministic — the same objects always produce
byte-identical files — and numeric values round-trip at full float
precision.
"""

import numpy as np
import yaml

from .errors import ConfigurationError
from .internal_model import Exosystem, build_internal_model
from .graphs import Digraph
from .simulation import FollowerUncertainty, Scenario
from .synthesis import DelaySpec, GainSet, NominalPlant

__all__ = [
    "SynthesisSettings",
    "ExperimentConfig",
    "load_config",
    "save_config",
    "config_to_dict",
    "save_gains",
    "load_gains",
]


class SynthesisSettings:
    """Parameters of the gain synthesis stage of a scenario file."""

    def __init__(
        self,
        gamma=None,
        nu=None,
        gamma_l=None,
        nu_l=None,
        observer_r=0,
        beta_override=None,
    ):
        self.gamma = None if gamma is None else float(gamma)
        self.nu = None if nu is None else float(nu)
        self.gamma_l = None if gamma_l is None else float(gamma_l)
        self.nu_l = None if nu_l is None else float(nu_l)
        self.observer_r = int(observer_r)
        self.beta_override = beta_override


class ExperimentConfig:
    """A parsed scenario file: the scenario plus synthesis settings."""

    def __init__(self, scenario, synthesis):
        self.scenario = scenario
        self.synthesis = synthesis


def _require(d, key, path, kind=dict):
    if key not in d:
        raise ConfigurationError(f"{path}.{key}: missing required field")
    val = d[key]
    if kind is not None and not isinstance(val, kind):
        raise ConfigurationError(
            f"{path}.{key}: expected {kind.__name__}, got {type(val).__name__}"
        )
    return val


def _matrix(d, key, path, required=True):
    if key not in d or d[key] is None:
        if required:
            raise ConfigurationError(f"{path}.{key}: missing required matrix")
        return None
    rows = d[key]
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ConfigurationError(f"{path}.{key}: expected a list of rows")
    width = len(rows[0])
    for idx, row in enumerate(rows):
        if len(row) != width:
            raise ConfigurationError(
                f"{path}.{key}: row {idx} has {len(row)} entries, expected {width}"
            )
        for val in row:
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise ConfigurationError(
                    f"{path}.{key}: row {idx} contains a non-numeric entry {val!r}"
                )
    return np.array(rows, dtype=float)


def _vector(d, key, path, required=True):
    if key not in d or d[key] is None:
        if required:
            raise ConfigurationError(f"{path}.{key}: missing required vector")
        return None
    vals = d[key]
    if not isinstance(vals, list) or any(
        not isinstance(v, (int, float)) or isinstance(v, bool) for v in vals
    ):
        raise ConfigurationError(f"{path}.{key}: expected a flat list of numbers")
    return np.array(vals, dtype=float)


def _scalar(d, key, path, default=None, required=False):
    if key not in d or d[key] is None:
        if required:
            raise ConfigurationError(f"{path}.{key}: missing required value")
        return default
    val = d[key]
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        raise ConfigurationError(f"{path}.{key}: expected a number, got {val!r}")
    return float(val)


def _int(d, key, path, default=None, required=False):
    if key not in d or d[key] is None:
        if required:
            raise ConfigurationError(f"{path}.{key}: missing required value")
        return default
    val = d[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigurationError(f"{path}.{key}: expected an integer, got {val!r}")
    return int(val)


def load_config(path):
    """Parse and validate a scenario file.

    Returns
    -------
    ExperimentConfig
        With ``scenario`` fully assembled (internal model built,
        shapes cross-checked) and ``synthesis`` settings attached.
    """
    with open(path) as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as ex:
            raise ConfigurationError(f"{path}: not valid YAML ({ex})")
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be a mapping")
    return config_from_dict(data)


def config_from_dict(data):
    """Build an :class:`ExperimentConfig` from a parsed mapping."""
    mode = data.get("mode", "state")
    if mode not in ("state", "output"):
        raise ConfigurationError(f"mode: must be 'state' or 'output', got {mode!r}")

    pd = _require(data, "plant", "")
    plant = NominalPlant(
        a=_matrix(pd, "a", "plant"),
        b=_matrix(pd, "b", "plant"),
        c=_matrix(pd, "c", "plant"),
        e=_matrix(pd, "e", "plant", required=False),
    )

    ed = _require(data, "exosystem", "")
    exo = Exosystem(
        s=_matrix(ed, "s", "exosystem"),
        f=_matrix(ed, "f", "exosystem"),
        v0=_vector(ed, "v0", "exosystem", required=False),
    )

    gd = _require(data, "graph", "")
    n_followers = _int(gd, "n_followers", "graph", required=True)
    edges_raw = gd.get("edges", [])
    if not isinstance(edges_raw, list):
        raise ConfigurationError("graph.edges: expected a list of [source, target, weight]")
    edges = []
    for k, item in enumerate(edges_raw):
        if not isinstance(item, list) or len(item) != 3:
            raise ConfigurationError(
                f"graph.edges[{k}]: expected [source, target, weight], got {item!r}"
            )
        edges.append(tuple(item))
    graph = Digraph(n_followers=n_followers, edges=tuple(edges))

    dd = data.get("delays", {})
    if not isinstance(dd, dict):
        raise ConfigurationError("delays: expected a mapping with r_con / r_com")
    delays = DelaySpec(
        r_con=_int(dd, "r_con", "delays", default=0),
        r_com=_int(dd, "r_com", "delays", default=0),
    )

    sd = data.get("synthesis", {})
    if not isinstance(sd, dict):
        raise ConfigurationError("synthesis: expected a mapping")
    beta_override = None
    if "beta_override" in sd and sd["beta_override"] is not None:
        bo = sd["beta_override"]
        if not isinstance(bo, dict):
            raise ConfigurationError("synthesis.beta_override: expected a mapping with beta and sigma")
        beta_override = (
            _matrix(bo, "beta", "synthesis.beta_override"),
            _matrix(bo, "sigma", "synthesis.beta_override"),
        )
    settings = SynthesisSettings(
        gamma=_scalar(sd, "gamma", "synthesis"),
        nu=_scalar(sd, "nu", "synthesis"),
        gamma_l=_scalar(sd, "gamma_l", "synthesis"),
        nu_l=_scalar(sd, "nu_l", "synthesis"),
        observer_r=_int(sd, "observer_r", "synthesis", default=0),
        beta_override=beta_override,
    )
    for pname in ("gamma", "gamma_l"):
        val = getattr(settings, pname)
        if val is not None and not (0.0 < val < 1.0):
            raise ConfigurationError(f"synthesis.{pname}: must lie in (0, 1), got {val}")

    im = build_internal_model(exo, beta_override=beta_override)

    per_agent_e = None
    if "per_agent_e" in data and data["per_agent_e"] is not None:
        pe = data["per_agent_e"]
        if not isinstance(pe, list):
            raise ConfigurationError("per_agent_e: expected a list of matrices")
        per_agent_e = tuple(
            _matrix({"e": entry}, "e", f"per_agent_e[{k}]") for k, entry in enumerate(pe)
        )

    uncertainties = None
    if "uncertainties" in data and data["uncertainties"] is not None:
        ud = data["uncertainties"]
        if not isinstance(ud, list):
            raise ConfigurationError("uncertainties: expected a list of mappings")
        ulist = []
        for k, entry in enumerate(ud):
            if entry is None:
                ulist.append(FollowerUncertainty.zero())
                continue
            if not isinstance(entry, dict):
                raise ConfigurationError(f"uncertainties[{k}]: expected a mapping")
            unknown = set(entry) - {"d_a", "d_b", "d_e", "d_c"}
            if unknown:
                raise ConfigurationError(
                    f"uncertainties[{k}]: unknown fields {sorted(unknown)}"
                )
            ulist.append(
                FollowerUncertainty(
                    d_a=_matrix(entry, "d_a", f"uncertainties[{k}]", required=False),
                    d_b=_matrix(entry, "d_b", f"uncertainties[{k}]", required=False),
                    d_e=_matrix(entry, "d_e", f"uncertainties[{k}]", required=False),
                    d_c=_matrix(entry, "d_c", f"uncertainties[{k}]", required=False),
                )
            )
        uncertainties = tuple(ulist)

    simd = data.get("simulation", {})
    if not isinstance(simd, dict):
        raise ConfigurationError("simulation: expected a mapping")
    init_states = None
    if "init_states" in simd and simd["init_states"] is not None:
        isd = simd["init_states"]
        if not isinstance(isd, dict):
            raise ConfigurationError("simulation.init_states: expected a mapping")
        init_states = {
            key: _matrix(isd, key, "simulation.init_states")
            for key in isd
        }

    scenario = Scenario(
        plant=plant,
        exo=exo,
        graph=graph,
        delays=delays,
        im=im,
        mode=mode,
        per_agent_e=per_agent_e,
        uncertainties=uncertainties,
        horizon=_int(simd, "horizon", "simulation", default=100),
        seed=_int(simd, "seed", "simulation", default=0),
        init_low=_scalar(simd, "init_low", "simulation", default=-1.0),
        init_high=_scalar(simd, "init_high", "simulation", default=1.0),
        init_states=init_states,
    )
    return ExperimentConfig(scenario=scenario, synthesis=settings)


def _mat_list(arr):
    return [[float(v) for v in row] for row in np.atleast_2d(arr)]


def config_to_dict(cfg):
    """Serialize an :class:`ExperimentConfig` back to a plain mapping."""
    sc, st = cfg.scenario, cfg.synthesis
    out = {"mode": sc.mode}
    plant = {
        "a": _mat_list(sc.plant.a),
        "b": _mat_list(sc.plant.b),
        "c": _mat_list(sc.plant.c),
    }
    if sc.plant.e is not None:
        plant["e"] = _mat_list(sc.plant.e)
    out["plant"] = plant
    out["exosystem"] = {
        "s": _mat_list(sc.exo.s),
        "f": _mat_list(sc.exo.f),
        "v0": [float(v) for v in sc.exo.v0],
    }
    out["graph"] = {
        "n_followers": sc.graph.n_followers,
        "edges": [[src, dst, float(w)] for src, dst, w in sc.graph.edges],
    }
    out["delays"] = {"r_con": sc.delays.r_con, "r_com": sc.delays.r_com}
    synth = {}
    for key in ("gamma", "nu", "gamma_l", "nu_l"):
        val = getattr(st, key)
        if val is not None:
            synth[key] = float(val)
    if st.observer_r:
        synth["observer_r"] = st.observer_r
    if st.beta_override is not None:
        synth["beta_override"] = {
            "beta": _mat_list(st.beta_override[0]),
            "sigma": _mat_list(st.beta_override[1]),
        }
    if synth:
        out["synthesis"] = synth
    if sc.per_agent_e is not None:
        out["per_agent_e"] = [_mat_list(e) for e in sc.per_agent_e]
    if sc.uncertainties is not None:
        ulist = []
        for u in sc.uncertainties:
            entry = {}
            for key in ("d_a", "d_b", "d_e", "d_c"):
                val = getattr(u, key)
                if val is not None:
                    entry[key] = _mat_list(val)
            ulist.append(entry)
        out["uncertainties"] = ulist
    sim = {
        "horizon": sc.horizon,
        "seed": sc.seed,
        "init_low": float(sc.init_low),
        "init_high": float(sc.init_high),
    }
    if sc.init_states:
        sim["init_states"] = {k: _mat_list(v) for k, v in sc.init_states.items()}
    out["simulation"] = sim
    return out


def save_config(cfg, path):
    """Write a scenario file; deterministic layout, full precision."""
    with open(path, "w") as fh:
        yaml.safe_dump(config_to_dict(cfg), fh, sort_keys=False)


def save_gains(gains, path, certificate=None):
    """Write a gain file, optionally with its stability certificate.

    ``certificate`` is a mapping such as
    ``{"mode": "state", "stable": True, "spectral_radius": 0.95, "delay": 2}``.
    """
    gd = {
        "k_x": _mat_list(gains.k_x),
        "k_z": _mat_list(gains.k_z),
        "gamma": float(gains.gamma),
        "nu": float(gains.nu),
    }
    if gains.l_obs is not None:
        gd["l_obs"] = _mat_list(gains.l_obs)
        gd["gamma_l"] = float(gains.gamma_l)
        gd["nu_l"] = float(gains.nu_l)
        gd["observer_r"] = int(gains.observer_r)
    data = {"gains": gd}
    if certificate is not None:
        cert = dict(certificate)
        if "spectral_radius" in cert:
            cert["spectral_radius"] = float(cert["spectral_radius"])
        if "stable" in cert:
            cert["stable"] = bool(cert["stable"])
        data["certificate"] = cert
    with open(path, "w") as fh:
        yaml.safe_dump(data, fh, sort_keys=False)


def load_gains(path):
    """Read a gain file; returns ``(GainSet, certificate_or_None)``."""
    with open(path) as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as ex:
            raise ConfigurationError(f"{path}: not valid YAML ({ex})")
    if not isinstance(data, dict) or "gains" not in data:
        raise ConfigurationError(f"{path}: missing top-level 'gains' section")
    gd = data["gains"]
    if not isinstance(gd, dict):
        raise ConfigurationError("gains: expected a mapping")
    l_obs = _matrix(gd, "l_obs", "gains", required=False)
    gains = GainSet(
        k_x=_matrix(gd, "k_x", "gains"),
        k_z=_matrix(gd, "k_z", "gains"),
        gamma=_scalar(gd, "gamma", "gains", required=True),
        nu=_scalar(gd, "nu", "gains", required=True),
        l_obs=l_obs,
        gamma_l=_scalar(gd, "gamma_l", "gains") if l_obs is not None else None,
        nu_l=_scalar(gd, "nu_l", "gains") if l_obs is not None else None,
        observer_r=_int(gd, "observer_r", "gains", default=0),
    )
    return gains, data.get("certificate")
