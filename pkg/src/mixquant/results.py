"""Result record shared by the closed-form, Lloyd and oracle paths."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class QuantResult:
    codepoints: tuple
    error: object
    provenance: str  # "closed-form" | "lloyd" | "oracle"
    measure_id: str | None = None

    def __post_init__(self):
        cps = tuple(self.codepoints)
        if list(cps) != sorted(cps) or len(set(cps)) != len(cps):
            raise ValueError("codepoints must be strictly increasing")
        if self.error < 0:
            if isinstance(self.error, float) and self.error > -1e-12:
                object.__setattr__(self, "error", 0.0)  # float round-off
            else:
                raise ValueError("error must be non-negative")
        object.__setattr__(self, "codepoints", cps)

    @property
    def n(self) -> int:
        return len(self.codepoints)
