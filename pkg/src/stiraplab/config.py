"""Flat INI-style run configuration: `key = value` lines under [sections],
`#` comments.  Unknown sections or keys are rejected, every run echoes its
fully resolved configuration, and parsing that echo reproduces the resolved
values exactly.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from importlib import resources

from .errors import ConfigError

# (type, default) per key; types: float, int, bool, str, floatlist, strlist.
# Units at the CLI boundary: time in units of T, frequencies in units of
# omega0, CPB energies in charging units.
SCHEMA = {
    "pulses": {
        "omega0T": ("float", 20.0),
        "tau_over_T": ("float", 0.6),
        "kappa_p": ("float", 1.0),
        "kappa_s": ("float", 1.0),
    },
    "detunings": {
        "delta": ("float", 0.0),
        "delta_p": ("float", 0.0),
    },
    "device": {
        "j": ("float", 1.0),
        "q_g": ("float", 0.48),
        "n_max": ("int", 10),
        "charging_ghz": ("float", 13.75),
        "rabi_mhz": ("float", 600.0),
        "energy_scale": ("float", 0.0),   # direct override (units of omega0); 0 = derive
    },
    "noise": {
        "sigma_x": ("float", 0.004),
        "method": ("str", "gauss-hermite"),
        "order": ("int", 21),
        "samples": ("int", 1000),
        "seed": ("int", 12345),
        "fluctuate.detunings_linear": ("bool", True),
        "fluctuate.detunings_quadratic": ("bool", False),
        "fluctuate.rabi_linear": ("bool", False),
        "fluctuate.rabi_quadratic": ("bool", False),
    },
    "markov": {
        "gamma_10": ("float", 0.0),
        "gamma_tilde_01": ("float", 0.0),
        "gamma_tilde_02": ("float", 0.0),
        "gamma_tilde_12": ("float", 0.0),
        "gamma_20": ("float", 0.0),
        "gamma_21": ("float", 0.0),
    },
    "simulate": {
        "grid_points": ("int", 2000),
        "tol": ("float", 1e-9),
        "use_noise": ("bool", False),
    },
    "sweep": {
        "delta_min": ("float", -1.0),
        "delta_max": ("float", 1.0),
        "delta_steps": ("int", 81),
        "delta_p_min": ("float", -1.0),
        "delta_p_max": ("float", 1.0),
        "delta_p_steps": ("int", 81),
        "levels": ("floatlist", (0.9,)),
        "checkpoint_every": ("int", 512),
        "tol": ("float", 1e-8),
    },
    "cpbtable": {
        "qg_min": ("float", 0.40),
        "qg_max": ("float", 0.50),
        "qg_steps": ("int", 11),
    },
    "fom": {
        "j_min": ("float", 0.5),
        "j_max": ("float", 2.0),
        "j_steps": ("int", 16),
        "qg_min": ("float", 0.40),
        "qg_max": ("float", 0.49),
        "qg_steps": ("int", 19),
    },
    "cpbscan": {
        "qg_min": ("float", 0.45),
        "qg_max": ("float", 0.495),
        "qg_steps": ("int", 10),
        "qg_ref": ("float", 0.48),
        "tiers": ("strlist", ("detunings-linear", "detunings-quadratic",
                              "rabi-linear", "rabi-quadratic")),
        "t1_over_T_list": ("floatlist", ()),
        "tol": ("float", 1e-8),
    },
    "dephasing": {
        "omega0T_list": ("floatlist", (1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 30.0, 40.0)),
        "t2_over_T": ("float", 1.5),
        "a1": ("float", 1.0),
        "tau_over_T": ("float", 1.0),
        "order": ("int", 21),
        "tol": ("float", 1e-8),
    },
    "linewidth": {
        "slope": ("float", 0.0),
        "level": ("float", 0.5),
        "tol": ("float", 1e-8),
    },
    "output": {
        "directory": ("str", "out"),
        "precision": ("int", 12),
    },
}

_BOOL = {"true": True, "yes": True, "on": True, "1": True,
         "false": False, "no": False, "off": False, "0": False}


def _convert(kind, raw, where):
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "bool":
            val = _BOOL.get(raw.strip().lower())
            if val is None:
                raise ValueError(raw)
            return val
        if kind == "str":
            return raw.strip()
        if kind == "floatlist":
            return tuple(float(p) for p in raw.split(",") if p.strip())
        if kind == "strlist":
            return tuple(p.strip() for p in raw.split(",") if p.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value for {where}: {raw!r}") from exc
    raise AssertionError(kind)


@dataclass
class RunConfig:
    """Resolved configuration: every schema key bound to a concrete value."""

    sections: dict

    def __getitem__(self, section):
        return self.sections[section]


def default_config() -> RunConfig:
    return RunConfig(sections={
        sec: {key: default for key, (_, default) in keys.items()}
        for sec, keys in SCHEMA.items()})


def parse_config(text: str) -> RunConfig:
    """Parse configuration text against the schema; unknown keys are fatal."""
    parser = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#",),
                                       inline_comment_prefixes=("#",), strict=True)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    cfg = default_config()
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            kind = SCHEMA[section][key][0]
            cfg.sections[section][key] = _convert(kind, raw, f"[{section}] {key}")
    return cfg


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _render_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)           # shortest exact round-trip form
    if isinstance(value, tuple):
        return ",".join(_render_value(v) for v in value)
    return str(value)


def render_config(cfg: RunConfig) -> str:
    """Canonical text form; parsing it reproduces the resolved config exactly."""
    lines = []
    for section, keys in SCHEMA.items():
        lines.append(f"[{section}]")
        for key in keys:
            lines.append(f"{key} = {_render_value(cfg.sections[section][key])}")
        lines.append("")
    return "\n".join(lines)


def packaged_config(name: str) -> str:
    """Text of a config shipped with the package (e.g. 'ideal.cfg')."""
    return resources.files("stiraplab").joinpath("configs", name).read_text()
