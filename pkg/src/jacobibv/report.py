"""Check results and their text / JSON rendering."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any


class InvalidStructureWarning(UserWarning):
    """An operation was applied to a structure that fails its defining identities."""


@dataclass
class Check:
    name: str
    passed: bool
    residuals: dict[str, Any] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None
    trial: int | None = None

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def residual_pretty(self) -> str:
        from .parse import format_value

        parts = []
        for key, val in self.residuals.items():
            if isinstance(val, str):
                text = val
            else:
                try:
                    text = format_value(val)
                except (TypeError, AttributeError):
                    text = str(val)
            parts.append(f"{key}: {text}")
        return "; ".join(parts)

    def record(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "residual_pretty": self.residual_pretty(),
            "seed": self.seed,
            "trial": self.trial,
        }

    def line(self) -> str:
        """One ``key=value`` record; residuals only printed on failure."""
        out = f"check={self.name} status={self.status}"
        if self.seed is not None:
            out += f" seed={self.seed}"
        if self.trial is not None:
            out += f" trial={self.trial}"
        for k, v in self.details.items():
            out += f" {k}={_fmt(v)}"
        if not self.passed and self.residuals:
            out += f" residual={self.residual_pretty()!r}"
        return out


def _fmt(v) -> str:
    """Values with whitespace are quoted so a line splits unambiguously on spaces."""
    from .parse import format_value

    if isinstance(v, (str, int, bool)) or v is None:
        text = str(v)
    else:
        try:
            text = format_value(v)
        except Exception:
            text = str(v)
    return repr(text) if any(ch.isspace() for ch in text) else text


def render(checks: list[Check], as_json: bool = False) -> str:
    if as_json:
        return "\n".join(json.dumps(c.record(), sort_keys=True) for c in checks)
    return "\n".join(c.line() for c in checks)
