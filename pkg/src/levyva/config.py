"""Sectioned key=value run configuration.

The on-disk format is deliberately plain: ``[section]`` headers, ``key =
value`` pairs, ``#`` comments, scientific notation allowed.  A hand-rolled
parser (rather than configparser) is used so that every diagnostic carries
the offending line number and unknown keys are rejected instead of being
silently ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .actuarial import MortalityParams, SurrenderParams
from .curves import ForwardCurve
from .integrate import McSettings, QuadSettings
from .market import ContractSpec, HybridMarketModel, LevyDriver
from .nig import MomentBudget, NigParams


class ConfigError(ValueError):
    """Configuration problem, annotated with a line number when available."""


_REQUIRED = object()

# section -> key -> (type, default).  ``_REQUIRED`` means the key must appear.
_SCHEMA: dict[str, dict[str, tuple[type, object]]] = {
    "contract": {
        "maturity": (float, _REQUIRED),
        "guarantee_rate": (float, 0.01),
        "notional": (float, 100.0),
        "surrender_step": (float, 1.0),
        "mortality_step": (float, 0.5),
        "dampening_r": (float, 1.5),
        "penalty_floor": (float, 0.95),
    },
    "market": {
        "reversion_a": (float, _REQUIRED),
        "sigma2": (float, _REQUIRED),
        "b_loading": (float, _REQUIRED),
        "curve": (str, "zero"),
        "nodes_per_year": (int, 64),
        "l1_alpha": (float, _REQUIRED),
        "l1_beta": (float, _REQUIRED),
        "l1_delta": (float, _REQUIRED),
        "l1_mu": (float, 0.0),
        "l1_m_bound": (float, _REQUIRED),
        "l1_epsilon": (float, 0.1),
        "l2_alpha": (float, _REQUIRED),
        "l2_beta": (float, _REQUIRED),
        "l2_delta": (float, _REQUIRED),
        "l2_mu": (float, 0.0),
        "l2_m_bound": (float, _REQUIRED),
        "l2_epsilon": (float, 0.1),
    },
    "mortality": {
        "gm_b": (float, _REQUIRED),
        "gm_z": (float, _REQUIRED),
        "ou_kappa": (float, _REQUIRED),
        "ou_lambda": (float, _REQUIRED),
        "ou_sigma": (float, _REQUIRED),
        "age_x": (float, 40.0),
    },
    "surrender": {
        "beta_s": (float, _REQUIRED),
        "c_base": (float, _REQUIRED),
        "trunc_L": (float, 10.0),
        "eps_tail": (float, 1e-4),
    },
    "integration": {
        "method": (str, "mc"),
        "samples_per_batch": (int, 100_000),
        "batches": (int, 10),
        "seed": (int, 0),
        "quad_tolerance": (float, 1e-6),
        "quad_max_subdivisions": (int, 2),
        "oracle_paths": (int, 100_000),
        "oracle_step": (float, 1.0 / 256.0),
        "oracle_batches": (int, 10),
        "death_method": (str, "exact"),
    },
    "sweep": {
        "parameter": (str, _REQUIRED),
        "values": (str, _REQUIRED),
        "second_parameter": (str, ""),
        "second_values": (str, ""),
    },
}

_OPTIONAL_SECTIONS = {"sweep"}

SWEEP_PARAMETERS = ("beta_s", "c_base", "guarantee_rate", "b_loading", "sigma2")


@dataclass
class RunConfig:
    """Parsed and validated configuration, one dict per section."""

    sections: dict[str, dict[str, object]]
    lines: dict[tuple[str, str], int] = field(default_factory=dict)

    def __getitem__(self, section: str) -> dict[str, object]:
        return self.sections[section]

    @property
    def has_sweep(self) -> bool:
        return "sweep" in self.sections

    # ----- domain object builders ------------------------------------------

    def contract(self) -> ContractSpec:
        c = self.sections["contract"]
        try:
            return ContractSpec.standard(
                c["maturity"],
                guarantee_rate=c["guarantee_rate"],
                notional=c["notional"],
                surrender_step=c["surrender_step"],
                mortality_step=c["mortality_step"],
                dampening_r=c["dampening_r"],
                penalty_floor=c["penalty_floor"],
            )
        except ValueError as exc:
            raise self._err("contract", "maturity", str(exc)) from exc

    def curve(self) -> ForwardCurve:
        spec = str(self.sections["market"]["curve"])
        try:
            if spec == "zero":
                return ForwardCurve.zero()
            if spec.startswith("flat:"):
                return ForwardCurve.flat(float(spec[5:]))
            if spec.startswith("csv:"):
                return ForwardCurve.from_csv(spec[4:])
        except (ValueError, OSError) as exc:
            raise self._err("market", "curve", str(exc)) from exc
        raise self._err("market", "curve", f"unknown curve spec {spec!r}")

    def model(self, *, horizon: float | None = None) -> HybridMarketModel:
        m = self.sections["market"]
        if horizon is None:
            horizon = float(self.sections["contract"]["maturity"])
        try:
            d1 = LevyDriver(
                NigParams(m["l1_alpha"], m["l1_beta"], m["l1_delta"], m["l1_mu"]),
                MomentBudget(m["l1_m_bound"], m["l1_epsilon"]),
            )
            d2 = LevyDriver(
                NigParams(m["l2_alpha"], m["l2_beta"], m["l2_delta"], m["l2_mu"]),
                MomentBudget(m["l2_m_bound"], m["l2_epsilon"]),
            )
            return HybridMarketModel(
                curve=self.curve(),
                reversion_a=m["reversion_a"],
                sigma2=m["sigma2"],
                b_loading=m["b_loading"],
                driver1=d1,
                driver2=d2,
                horizon=horizon,
                nodes_per_year=m["nodes_per_year"],
            )
        except ValueError as exc:
            raise self._err("market", "reversion_a", str(exc)) from exc

    def mortality(self) -> MortalityParams:
        mo = self.sections["mortality"]
        return MortalityParams(
            gm_b=mo["gm_b"],
            gm_z=mo["gm_z"],
            ou_kappa=mo["ou_kappa"],
            ou_lambda=mo["ou_lambda"],
            ou_sigma=mo["ou_sigma"],
            age_x=mo["age_x"],
        )

    def surrender(self) -> SurrenderParams:
        s = self.sections["surrender"]
        return SurrenderParams(
            beta_s=s["beta_s"],
            c_base=s["c_base"],
            trunc_L=s["trunc_L"],
            eps_tail=s["eps_tail"],
        )

    def mc_settings(self) -> McSettings:
        it = self.sections["integration"]
        return McSettings(
            samples_per_batch=it["samples_per_batch"],
            batches=it["batches"],
            seed=it["seed"],
        )

    def quad_settings(self) -> QuadSettings:
        it = self.sections["integration"]
        return QuadSettings(
            tolerance=it["quad_tolerance"],
            max_subdivisions=it["quad_max_subdivisions"],
        )

    def sweep_grid(self) -> list[dict[str, float]]:
        """Expand the sweep section into a list of parameter overrides."""
        if not self.has_sweep:
            raise ConfigError("no [sweep] section present")
        sw = self.sections["sweep"]
        name = str(sw["parameter"])
        if name not in SWEEP_PARAMETERS:
            raise self._err(
                "sweep", "parameter",
                f"unsupported sweep parameter {name!r}; choose from {SWEEP_PARAMETERS}",
            )
        values = _parse_value_list(str(sw["values"]))
        if not values:
            raise self._err("sweep", "values", "sweep grid is empty")
        second = str(sw["second_parameter"])
        if second:
            if second not in SWEEP_PARAMETERS:
                raise self._err(
                    "sweep", "second_parameter",
                    f"unsupported sweep parameter {second!r}",
                )
            second_values = _parse_value_list(str(sw["second_values"]))
            if not second_values:
                raise self._err("sweep", "second_values", "sweep grid is empty")
            return [
                {name: v1, second: v2} for v1 in values for v2 in second_values
            ]
        return [{name: v} for v in values]

    def with_overrides(self, overrides: dict[str, float]) -> "RunConfig":
        """A copy with sweep parameters substituted into their sections."""
        placement = {
            "beta_s": "surrender",
            "c_base": "surrender",
            "guarantee_rate": "contract",
            "b_loading": "market",
            "sigma2": "market",
        }
        sections = {k: dict(v) for k, v in self.sections.items()}
        for key, value in overrides.items():
            sections[placement[key]][key] = value
        return RunConfig(sections=sections, lines=dict(self.lines))

    def validate(self) -> None:
        """Cross-field checks beyond simple typing."""
        it = self.sections["integration"]
        for key in ("samples_per_batch", "batches", "oracle_paths", "oracle_batches"):
            if int(it[key]) <= 0:
                raise self._err("integration", key, f"{key} must be positive")
        if it["method"] not in ("mc", "quadrature"):
            raise self._err("integration", "method", f"unknown method {it['method']!r}")
        if it["death_method"] not in ("exact", "approx"):
            raise self._err(
                "integration", "death_method", f"unknown death_method {it['death_method']!r}"
            )
        if float(it["oracle_step"]) <= 0.0:
            raise self._err("integration", "oracle_step", "oracle_step must be positive")
        # Build the domain objects once: their constructors re-validate every
        # module-level invariant (grids, strips, moment budgets, loadings).
        self.contract()
        self.model()
        self.mortality()
        self.surrender()
        self.mc_settings()
        self.quad_settings()
        if self.has_sweep:
            self.sweep_grid()

    def _err(self, section: str, key: str, message: str) -> ConfigError:
        line = self.lines.get((section, key))
        where = f" (line {line})" if line is not None else ""
        return ConfigError(f"[{section}] {key}{where}: {message}")


def _parse_value_list(text: str) -> list[float]:
    items = [part.strip() for part in text.split(",") if part.strip()]
    return [float(p) for p in items]


def _coerce(raw: str, target: type, where: str) -> object:
    if target is str:
        return raw
    try:
        if target is int:
            as_float = float(raw)
            if not as_float.is_integer():
                raise ValueError("expected an integer")
            return int(as_float)
        value = float(raw)
        if not math.isfinite(value):
            raise ValueError("expected a finite number")
        return value
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {raw!r} ({exc})") from exc


def parse_config(text: str) -> RunConfig:
    """Parse and validate configuration text.  Raises :class:`ConfigError`
    with a line number on any problem."""
    sections: dict[str, dict[str, object]] = {}
    lines_index: dict[tuple[str, str], int] = {}
    current: str | None = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{name}]")
            if name in sections:
                raise ConfigError(f"line {lineno}: duplicate section [{name}]")
            sections[name] = {}
            current = name
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        if current is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, _, raw_value = line.partition("=")
        key, raw_value = key.strip(), raw_value.strip()
        if key not in _SCHEMA[current]:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{current}]")
        if key in sections[current]:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} in [{current}]")
        target, _ = _SCHEMA[current][key]
        sections[current][key] = _coerce(raw_value, target, f"line {lineno}: {key}")
        lines_index[(current, key)] = lineno

    for name, schema in _SCHEMA.items():
        if name not in sections:
            if name in _OPTIONAL_SECTIONS:
                continue
            raise ConfigError(f"missing required section [{name}]")
        for key, (_, default) in schema.items():
            if key not in sections[name]:
                if default is _REQUIRED:
                    raise ConfigError(f"[{name}]: missing required key {key!r}")
                sections[name][key] = default

    config = RunConfig(sections=sections, lines=lines_index)
    config.validate()
    return config


def load_config(path: str) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def serialize_config(config: RunConfig) -> str:
    """Canonical text form; parse(serialize(parse(text))) == parse(text)."""
    out = []
    for name in _SCHEMA:
        if name not in config.sections:
            continue
        out.append(f"[{name}]")
        for key in _SCHEMA[name]:
            value = config.sections[name][key]
            if isinstance(value, float):
                rendered = format(value, ".17g")
            else:
                rendered = str(value)
            out.append(f"{key} = {rendered}")
        out.append("")
    return "\n".join(out)
