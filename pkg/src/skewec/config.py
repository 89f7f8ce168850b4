"""Flat key/value parameter files for bivariate (d = 2) modulated densities.

A file holds either one parameter set (no section header; named after the
file) or several ``[name]`` sections::

    # comments start with '#' or ';'
    [demo_a]
    rho = 0.5
    g0 = cauchy
    a1 = 1
    ...

Keys: rho, a1, a2, b1, b2, c1, c2, c3, g0, generator, dof, standardized,
h_kind, alpha. ``h_kind`` is one of rational, constant, linear, alpha_abs,
cosine; ``alpha`` is the scale of the non-rational kinds (the constant value
for ``constant``).
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Optional

from .elliptical import Normal, StudentT, standard_bivariate
from .errors import ParameterError
from .modulation import (
    AlphaAbs,
    Constant,
    CosineInverted,
    Linear,
    RationalModulation,
    SecDensity,
    SymmetricCdf,
)

H_KINDS = ("rational", "constant", "linear", "alpha_abs", "cosine")
KEYS = ("rho", "a1", "a2", "b1", "b2", "c1", "c2", "c3", "g0", "generator", "dof",
        "standardized", "h_kind", "alpha")
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass(frozen=True)
class ParamSet:
    name: str = "params"
    rho: float = 0.0
    a1: float = 0.0
    a2: float = 0.0
    b1: float = 0.0
    b2: float = 0.0
    c1: float = 1.0
    c2: float = 0.0
    c3: float = 0.0
    g0: str = "normal"
    generator: str = "normal"
    dof: Optional[float] = None
    standardized: bool = True
    h_kind: str = "rational"
    alpha: float = 1.0

    def to_density(self) -> SecDensity:
        """Build the density, raising ParameterError naming the violated condition."""
        if not -1.0 < self.rho < 1.0:
            raise ParameterError(f"[{self.name}] |rho| < 1 required (scale matrix must be nonsingular), got {self.rho}")
        gen_key = self.generator.strip().lower()
        if gen_key in ("normal", "gaussian"):
            gen = Normal()
        elif gen_key in ("student_t", "t", "studentt"):
            if self.dof is None:
                raise ParameterError(f"[{self.name}] generator student_t needs dof")
            gen = StudentT(self.dof)
        else:
            raise ParameterError(f"[{self.name}] unknown generator {self.generator!r}")
        g0 = SymmetricCdf.parse(self.g0)
        rm = RationalModulation(self.a1, self.a2, self.b1, self.b2, self.c1, self.c2, self.c3,
                                self.standardized)
        h = {
            "rational": lambda: rm.h,
            "constant": lambda: Constant(self.alpha),
            "linear": lambda: Linear(self.alpha),
            "alpha_abs": lambda: AlphaAbs(self.alpha),
            "cosine": lambda: CosineInverted(rho=self.rho),
        }[self.h_kind]()
        return SecDensity(standard_bivariate(self.rho, gen), g0, h, rm.odd, self.standardized, self.name)

    def to_text(self) -> str:
        lines = [f"[{self.name}]"]
        for key in KEYS:
            value = getattr(self, key)
            if value is None:
                continue
            if isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"

    def describe(self) -> str:
        return " ".join(f"{k}={getattr(self, k)}" for k in KEYS if getattr(self, k) is not None)


def _coerce(name: str, key: str, raw: str):
    raw = raw.strip()
    if key in ("g0", "generator", "h_kind"):
        value = raw.lower()
        if key == "h_kind" and value not in H_KINDS:
            raise ParameterError(f"[{name}] h_kind must be one of {', '.join(H_KINDS)}; got {raw!r}")
        return value
    if key == "standardized":
        if raw.lower() in _TRUE:
            return True
        if raw.lower() in _FALSE:
            return False
        raise ParameterError(f"[{name}] standardized must be true or false; got {raw!r}")
    try:
        value = float(raw)
    except ValueError:
        raise ParameterError(f"[{name}] {key} must be a number; got {raw!r}") from None
    if not math.isfinite(value):
        raise ParameterError(f"[{name}] {key} must be finite")
    return value


def from_mapping(name: str, mapping) -> ParamSet:
    unknown = set(mapping) - set(KEYS)
    if unknown:
        raise ParameterError(f"[{name}] unknown keys: {', '.join(sorted(unknown))}")
    values = {k: _coerce(name, k, v) if isinstance(v, str) else v for k, v in mapping.items()}
    ps = ParamSet(name=name, **values)
    ps.to_density()
    return ps


def parse_text(text: str, default_name: str = "params") -> list[ParamSet]:
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#", ";"))
    parser.optionxform = str.lower
    has_section = any(line.strip().startswith("[") for line in text.splitlines())
    if not has_section:
        text = f"[{default_name}]\n{text}"
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ParameterError(f"malformed parameter file: {exc}") from None
    sets = [from_mapping(sec, dict(parser.items(sec))) for sec in parser.sections()]
    if not sets:
        raise ParameterError("parameter file holds no parameter sets")
    return sets


def load(path, section: Optional[str] = None) -> list[ParamSet]:
    path = Path(path)
    sets = parse_text(path.read_text(), default_name=path.stem)
    if section is not None:
        sets = [s for s in sets if s.name == section]
        if not sets:
            raise ParameterError(f"no section [{section}] in {path}")
    return sets


def bundled(filename: str) -> list[ParamSet]:
    text = resources.files("skewec").joinpath("params", filename).read_text()
    return parse_text(text, default_name=Path(filename).stem)


def demo_sets() -> list[ParamSet]:
    """The six contour-style demonstration sets."""
    return bundled("demo.ini")


def closed_form_sets() -> list[ParamSet]:
    """Bivariate normal / Phi sets with a closed-form E[Y]."""
    return bundled("closed_form.ini")


def demo(name: str) -> ParamSet:
    for ps in demo_sets() + closed_form_sets():
        if ps.name == name:
            return ps
    raise KeyError(name)
