"""Initial-data presets and seeded test families.

Every preset is a closed formula on ``[0, 2*pi*P)``:

``gauss(a, kappa, x0=pi*P)``
    ``a * exp(-kappa * (x - x0)**2)``; periodic to machine precision when
    ``kappa * (pi*P)**2 > 37``.
``periodic_gauss(a, kappa, x0=pi*P)``
    ``a * exp(-kappa * dist**2)`` with the chordal distance
    ``dist = 2P sin((x - x0) / (2P))``; smooth and periodic for any kappa.
``sine(a=1, k=1)``, ``cosine(a=1, k=1)``
    ``a * sin(k x / P)``, ``a * cos(k x / P)``.
``two_mode(a1, k1, a2, k2)``
    ``a1 * cos(k1 x / P) + a2 * sin(k2 x / P)``.
``random(kmax=8, amplitude=0.3, decay=1)``
    one member of :func:`band_limited_family` drawn from the run seed,
    rescaled to ``max|u| = amplitude``.
``modes``
    explicit list of ``[k, re, im]`` coefficients of ``exp(i k x / P)``
    (the conjugate mode is implied).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

PRESET_PARAMS = {
    "gauss": {"a": None, "kappa": None, "x0": "pi*P"},
    "periodic_gauss": {"a": None, "kappa": None, "x0": "pi*P"},
    "sine": {"a": 1.0, "k": 1},
    "cosine": {"a": 1.0, "k": 1},
    "two_mode": {"a1": None, "k1": None, "a2": None, "k2": None},
    "random": {"kmax": 8, "amplitude": 0.3, "decay": 1.0},
}

_ALIASES = {"κ": "kappa", "k0": "k"}

# Reference problems used by the acceptance suite and the CLI examples.
SMOOTH_PRESET = {"preset": "gauss", "a": 0.3, "kappa": 4.0}
BREAKING_PRESET = {"preset": "gauss", "a": 1.0, "kappa": 4.0}


def parse_preset_string(text: str) -> dict:
    """``"gauss(a=0.3,kappa=4)"`` -> ``{"preset": "gauss", "a": 0.3, "kappa": 4.0}``."""
    m = re.fullmatch(r"\s*([A-Za-z_]\w*)\s*(?:\((.*)\))?\s*", text)
    if not m:
        raise ValueError(f"cannot parse initial-data expression {text!r}")
    out = {"preset": m.group(1)}
    args = (m.group(2) or "").strip()
    if args:
        for item in args.split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"expected key=value in {text!r}, got {item!r}")
            key = _ALIASES.get(key.strip(), key.strip())
            out[key] = float(value)
    return out


def fill_preset(spec: dict) -> dict:
    """Validate a preset dict and fill its defaults."""
    spec = {_ALIASES.get(k, k): v for k, v in spec.items()}
    if "modes" in spec:
        extra = set(spec) - {"modes"}
        if extra:
            raise ValueError(f"unexpected keys next to 'modes': {sorted(extra)}")
        modes = []
        for entry in spec["modes"]:
            if len(entry) != 3:
                raise ValueError("each mode must be [k, re, im]")
            modes.append([int(entry[0]), float(entry[1]), float(entry[2])])
        return {"modes": modes}
    name = spec.get("preset")
    if name not in PRESET_PARAMS:
        raise ValueError(
            f"unknown preset {name!r}; choose from {', '.join(PRESET_PARAMS)}")
    allowed = PRESET_PARAMS[name]
    unknown = set(spec) - set(allowed) - {"preset"}
    if unknown:
        raise ValueError(f"unknown parameters for {name}: {sorted(unknown)}")
    out = {"preset": name}
    for key, default in allowed.items():
        if key in spec:
            value = spec[key]
            out[key] = value if key == "x0" and value == "pi*P" else float(value)
        elif default is None:
            raise ValueError(f"preset {name} needs parameter {key!r}")
        else:
            out[key] = default
    return out


def _x0(value, P):
    return np.pi * P if value == "pi*P" else float(value)


def sample_initial(spec: dict, grid, seed: int = 0) -> np.ndarray:
    spec = fill_preset(spec)
    x, P = grid.x, grid.P
    if "modes" in spec:
        u = np.zeros(grid.N)
        for k, re_, im in spec["modes"]:
            c = complex(re_, im)
            if k == 0:
                u += c.real
            else:
                u += 2.0 * (c * np.exp(1j * k * x / P)).real
        return u
    name = spec["preset"]
    if name == "gauss":
        return spec["a"] * np.exp(-spec["kappa"] * (x - _x0(spec["x0"], P)) ** 2)
    if name == "periodic_gauss":
        dist = 2.0 * P * np.sin((x - _x0(spec["x0"], P)) / (2.0 * P))
        return spec["a"] * np.exp(-spec["kappa"] * dist ** 2)
    if name == "sine":
        return spec["a"] * np.sin(spec["k"] * x / P)
    if name == "cosine":
        return spec["a"] * np.cos(spec["k"] * x / P)
    if name == "two_mode":
        return (spec["a1"] * np.cos(spec["k1"] * x / P)
                + spec["a2"] * np.sin(spec["k2"] * x / P))
    if name == "random":
        fam = band_limited_family(1, int(spec["kmax"]), seed, decay=spec["decay"],
                                  amplitude=(spec["amplitude"], spec["amplitude"]))
        return fam.members[0](x, P)
    raise AssertionError(name)


@dataclass(frozen=True)
class TrigPolynomial:
    """Real trigonometric polynomial ``sum_k 2 Re(c_k exp(i k x / P))``.

    Callable on any sample array, so one member can be resampled on
    refined grids unchanged.
    """

    k: np.ndarray
    c: np.ndarray
    scale: float = 1.0

    def __call__(self, x, P: int = 1):
        phase = np.exp(1j * np.outer(x, self.k) / P)
        return self.scale * 2.0 * (phase @ self.c).real

    def scaled(self, factor: float) -> "TrigPolynomial":
        return TrigPolynomial(self.k, self.c, self.scale * factor)


@dataclass(frozen=True)
class Family:
    family_id: str
    members: tuple

    def __len__(self):
        return len(self.members)


def band_limited_family(n_members: int, kmax: int, seed: int, decay: float = 1.0,
                        amplitude=(0.5, 2.0), family_id: str | None = None) -> Family:
    """Seeded random fields with modes ``1 <= |k| <= kmax``.

    Coefficients are complex normals times ``(1 + k^2)^(-decay/2)``; each
    member is rescaled so that ``max|g|`` on a 4096-point grid equals an
    amplitude drawn uniformly from ``amplitude``.
    """
    rng = np.random.default_rng(seed)
    k = np.arange(1, kmax + 1)
    xs = np.arange(4096) * (2.0 * np.pi / 4096)
    members = []
    for _ in range(n_members):
        c = (rng.standard_normal(kmax) + 1j * rng.standard_normal(kmax))
        c *= (1.0 + k * k) ** (-decay / 2.0)
        target = rng.uniform(*amplitude)
        base = TrigPolynomial(k, c)
        members.append(base.scaled(target / np.max(np.abs(base(xs)))))
    fid = family_id or f"band_limited(n={n_members},kmax={kmax},seed={seed},decay={decay:g})"
    return Family(fid, tuple(members))


def sine_family(kmax: int = 8) -> Family:
    members = tuple(TrigPolynomial(np.array([k]), np.array([-0.5j])) for k in range(1, kmax + 1))
    return Family(f"sin(kx),k=1..{kmax}", members)
