"""Truncation bounds shared by every module."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace


@dataclass(frozen=True)
class TruncationWindow:
    """Order bounds for a computation.

    M     largest power of T (first eta index)
    K     largest x-derivative / z-power (second eta index)
    N     largest time index t_k available
    P     largest jet order p_j available
    depth pseudo-differential tail depth: orders down to -depth are kept
    """

    M: int = 2
    K: int = 3
    N: int = 6
    P: int = 8
    depth: int = 6

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not isinstance(value, int) or value < 0:
                raise ValueError(f"window bound {name} must be a nonnegative int, got {value!r}")

    def widened(self, **changes) -> "TruncationWindow":
        return replace(self, **changes)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data) -> "TruncationWindow":
        return cls(**data)
