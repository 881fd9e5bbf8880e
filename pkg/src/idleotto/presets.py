"""Built-in, versioned sweep configurations (``fig*`` presets).

Fields are ``h_i = 3``, ``h_f = 4`` throughout. Presets whose temperature
window is a judgement call rather than a fixed requirement are marked
``approximate``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cycle import EngineParams
from .scan import Axis, ScanSpec

PRESETS_VERSION = "1"
FIELDS = {"h_i": 3.0, "h_f": 4.0}


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    series: tuple  # ScanSpec per curve / panel
    labels: tuple
    approximate: bool = False

    @property
    def is_grid(self):
        return self.series[0].axis2 is not None

    def as_dict(self):
        return {
            "name": self.name,
            "description": self.description,
            "approximate": self.approximate,
            "series": [
                {
                    "label": label,
                    "fixed": dict(spec.fixed),
                    "axes": [vars(ax).copy() for ax in spec.axes],
                    "quantities": list(spec.quantities),
                }
                for label, spec in zip(self.labels, self.series)
            ],
        }


def _tgrid(lo, hi, points=101):
    return Axis("T_c", lo, hi, points), Axis("T_h", lo, hi, points)


def _grid(name, description, J, quantities, lo=0.01, hi=20.0):
    a1, a2 = _tgrid(lo, hi)
    spec = ScanSpec(fixed={"J": J, **FIELDS}, axis1=a1, axis2=a2, quantities=quantities)
    return Preset(name, description, (spec,), (f"J={J:g}",), approximate=True)


def _lines(name, description, axis, fixed_list, quantities, approximate=False):
    series = tuple(ScanSpec(fixed={**FIELDS, **fx}, axis1=axis, quantities=quantities)
                   for fx in fixed_list)
    labels = tuple(" ".join(f"{k}={v:g}" for k, v in fx.items()) for fx in fixed_list)
    return Preset(name, description, series, labels, approximate)


_W_MAP = ("mean_W", "regime", "engine")
_SIGMA_MAP = ("sigma_W", "var_W", "regime", "engine")
_REL_MAP = ("rel_fluct_W", "log10_rel_fluct_W", "mean_W", "regime", "engine")
_ETA_MAP = ("eta_th", "eta_engine", "eta_0", "eta_C", "mean_W", "regime", "engine")
_SIGMA_PROD = ("mean_Sigma", "mean_W", "regime", "engine")

_J_WEAK = Axis("J", 0.0, 2.999, 300)
_TC_LOG = Axis("T_c", 1e-2, 1e2, 400, "log")


def _build():
    presets = []
    for panel, J in zip("abcd", (0.0, 2.0, 5.0, 10.0)):
        presets.append(_grid(f"fig1{panel}", "mean work over (T_c, T_h)", J, _W_MAP))
    presets.append(Preset(
        "fig2", "mean work over (J, T_h) at T_c = 0.1, weak coupling",
        (ScanSpec(fixed={"T_c": 0.1, **FIELDS}, axis1=Axis("J", 0.0, 2.99, 100),
                  axis2=Axis("T_h", 0.01, 10.0, 100), quantities=_W_MAP),),
        ("T_c=0.1",), approximate=True))
    presets.append(_lines(
        "fig3", "mean work versus J, weak coupling", _J_WEAK,
        [{"T_h": 100.0, "T_c": 0.5}, {"T_h": 5.0, "T_c": 1.0},
         {"T_h": 5.0, "T_c": 0.1}, {"T_h": 5.0, "T_c": 0.01}],
        ("mean_W", "regime", "engine")))
    presets.append(_lines(
        "fig4", "mean work versus T_c, strong coupling (upper and lower islands)", _TC_LOG,
        [{"J": J, "T_h": th} for th in (100.0, 1e-4) for J in (4.01, 4.5, 6.0)],
        ("mean_W", "regime", "engine"), approximate=True))
    for panel, J in zip("abcd", (0.0, 2.0, 5.0, 10.0)):
        presets.append(_grid(f"fig5{panel}", "work fluctuation sigma_W", J, _SIGMA_MAP, hi=5.0))
    for panel, J in zip("abcd", (0.0, 2.0, 5.0, 10.0)):
        presets.append(_grid(f"fig6{panel}", "relative work fluctuation", J, _REL_MAP))
    presets.append(_lines(
        "fig7", "relative work fluctuation versus J, weak coupling", _J_WEAK,
        [{"T_h": 100.0, "T_c": 1e-3}, {"T_h": 100.0, "T_c": 0.5}, {"T_h": 5.0, "T_c": 1.0},
         {"T_h": 5.0, "T_c": 0.1}, {"T_h": 5.0, "T_c": 0.01}],
        ("rel_fluct_W", "mean_W", "var_W", "regime", "engine")))
    for panel, J in zip("abcd", (1.5, 2.0, 5.0, 10.0)):
        presets.append(_grid(f"fig8{panel}", "thermodynamic efficiency", J, _ETA_MAP))
    presets.append(_lines(
        "fig10", "TUR: relative work variance against f(<Sigma>) versus T_c at T_h = 20",
        Axis("T_c", 1e-3, 14.0, 200, "log"),
        [{"J": J, "T_h": 20.0} for J in (2.0, 1.0, 0.0)],
        ("tur_observed", "tur_bound", "tur_slack", "tur_satisfied", "mean_Sigma", "mean_W", "engine"),
        approximate=True))
    for panel, J in zip("ab", (2.0, 5.0)):
        presets.append(_grid(f"fig11{panel}", "entropy production", J, _SIGMA_PROD))
    return {p.name: p for p in presets}


PRESETS = _build()

# single parameter points for the efficiency distributions
DISTRIBUTION_PRESETS = {
    "fig9-top": EngineParams(J=1.5, h_i=3.0, h_f=4.0, T_c=1.0, T_h=20.0),
    "fig9-bottom": EngineParams(J=1.5, h_i=3.0, h_f=4.0, T_c=5.0, T_h=20.0),
}


def get_preset(name) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None
