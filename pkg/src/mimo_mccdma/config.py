"""``key = value`` config files for :class:`~mimo_mccdma.link.LinkConfig`.

Grammar: one assignment per line, ``#`` starts a comment, blank lines are
ignored.  Unknown keys are rejected.  Missing keys take the defaults of the
selected ``profile`` (``desk``: 64 subcarriers / CP 12, ``paper``: 6400 / 1280).
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Any, Callable

from .link import PROFILES, LinkConfig

__all__ = ["ConfigError", "parse_config", "serialize_config", "load_config", "CONFIG_KEYS"]


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.key = key
        self.line = line


def _int(text: str) -> int:
    try:
        return int(text.replace("_", ""), 10)
    except ValueError:
        value = float(text)  # allow 1e7
        if not value.is_integer():
            raise ValueError(f"{text!r} is not an integer") from None
        return int(value)


def _octal(text: str) -> int:
    return int(text, 8)


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("on", "true", "yes", "1"):
        return True
    if low in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"{text!r} is not on/off")


def _generators(text: str) -> tuple[int, int]:
    parts = [p for p in text.replace(" ", ",").split(",") if p]
    if len(parts) != 2:
        raise ValueError("expected two octal generators such as 15,17")
    return int(parts[0], 8), int(parts[1], 8)


def _fmt_float(x: float) -> str:
    return repr(float(x)).removesuffix(".0") if float(x).is_integer() else repr(float(x))


@dataclass(frozen=True)
class _Key:
    field: str
    parse: Callable[[str], Any]
    show: Callable[[Any], str]


_KEYS: dict[str, _Key] = {
    "modulation": _Key("modulation", str, str),
    "profile": _Key("profile", str, str),
    "subcarriers": _Key("subcarriers", _int, str),
    "cp_len": _Key("cp_len", _int, str),
    "conv_generators": _Key("generators", _generators, lambda g: f"{g[0]:o},{g[1]:o}"),
    "coding": _Key("coding", _bool, lambda b: "on" if b else "off"),
    "pn_taps": _Key("pn_taps", _octal, lambda t: f"{t:o}"),
    "pn_seed": _Key("pn_seed", _int, str),
    "spreading_factor": _Key("spreading_factor", _int, str),
    "spreading": _Key("spreading", _bool, lambda b: "on" if b else "off"),
    "users": _Key("users", _int, str),
    "co_user_backoff_db": _Key("co_user_backoff_db", float, _fmt_float),
    "tx_antennas": _Key("tx_antennas", _int, str),
    "rx_antennas": _Key("rx_antennas", _int, str),
    "channel": _Key("channel", str, str),
    "fading": _Key("fading", str, str),
    "snr_start_db": _Key("snr_start_db", float, _fmt_float),
    "snr_stop_db": _Key("snr_stop_db", float, _fmt_float),
    "snr_step_db": _Key("snr_step_db", float, _fmt_float),
    "frame_bits": _Key("frame_bits", _int, str),
    "max_bits": _Key("max_bits", _int, str),
    "target_errors": _Key("target_errors", _int, str),
    "min_trials": _Key("min_trials", _int, str),
    "seed": _Key("seed", _int, str),
}
CONFIG_KEYS = tuple(_KEYS)
assert {k.field for k in _KEYS.values()} == {f.name for f in fields(LinkConfig)}

# which config key a LinkConfig validation message is about
_MESSAGE_KEYS = {
    "cp_len": "cp_len",
    "subcarriers": "subcarriers",
    "generator": "conv_generators",
    "seed": "pn_seed",
    "polynomial": "pn_taps",
    "chips_per_bit": "spreading_factor",
    "co_user_backoff_db": "co_user_backoff_db",
}


def parse_config(text: str, overrides: dict[str, Any] | None = None) -> LinkConfig:
    """Parse config text into a validated :class:`LinkConfig`.

    ``overrides`` are applied on top of the file, keyed by config key, with
    values already in their parsed Python types.
    """
    values: dict[str, Any] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in _KEYS:
            raise ConfigError("unknown key", key=key, line=lineno)
        if key in values:
            raise ConfigError("duplicate key", key=key, line=lineno)
        try:
            values[key] = _KEYS[key].parse(value)
        except ValueError as exc:
            raise ConfigError(f"cannot parse {value!r}: {exc}", key=key, line=lineno) from None
        lines[key] = lineno
    for key, value in (overrides or {}).items():
        if key not in _KEYS:
            raise ConfigError("unknown key", key=key)
        values[key] = value
        lines.pop(key, None)

    profile = values.get("profile", "desk")
    if profile not in PROFILES:
        raise ConfigError(f"profile must be one of {sorted(PROFILES)}", key="profile", line=lines.get("profile"))
    n_sc, cp = PROFILES[profile]
    values.setdefault("subcarriers", n_sc)
    values.setdefault("cp_len", cp)

    kwargs = {_KEYS[k].field: v for k, v in values.items()}
    try:
        return LinkConfig(**kwargs)
    except ValueError as exc:
        message = str(exc)
        key = next((k for frag, k in _MESSAGE_KEYS.items() if frag in message), None)
        if key is None:
            key = next((k for k in _KEYS if message.startswith(_KEYS[k].field) or k in message), None)
        raise ConfigError(message, key=key, line=lines.get(key)) from None


def serialize_config(cfg: LinkConfig) -> str:
    """Canonical form: every key, in a fixed order, one per line."""
    out = []
    for key, spec in _KEYS.items():
        out.append(f"{key} = {spec.show(getattr(cfg, spec.field))}")
    return "\n".join(out) + "\n"


def load_config(path, overrides: dict[str, Any] | None = None) -> LinkConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), overrides)
