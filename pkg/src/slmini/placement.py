"""Placement addresses: (location, size) pairs packed into one integer.

Encoding: addr = first_core * 65536 + size, size in [1, 65535].  The two
smallest values are reserved specials: 0 inherits the creator's placement
(including any local restriction), 1 pins to the creating thread's core with
size 1.  An explicit (0, 1) address collides with special 1 under the plain
encoding, so sl_placement() returns a tagged integer that resolution
recognizes as explicit; the tag survives channel transport but is lost in
arithmetic, as documented in the language reference.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import E_BAD_PLACEMENT, MachineError

SIZE_BITS = 16
SIZE_MASK = (1 << SIZE_BITS) - 1


@dataclass(frozen=True)
class ResolvedPlacement:
    first_core: int
    size: int
    local_restricted: bool


class PlacementValue(int):
    """An explicit placement address built by sl_placement(L, S)."""

    __slots__ = ()

    def __new__(cls, first_core: int, size: int):
        if first_core < 0 or not 1 <= size <= SIZE_MASK:
            raise MachineError(
                E_BAD_PLACEMENT,
                f"sl_placement({first_core}, {size}): location must be >= 0 and size in [1, {SIZE_MASK}]",
            )
        return int.__new__(cls, first_core * (SIZE_MASK + 1) + size)


def encode(first_core: int, size: int) -> int:
    return first_core * (SIZE_MASK + 1) + size


def decode(addr: int) -> tuple[int, int]:
    return addr >> SIZE_BITS, addr & SIZE_MASK


def resolve(addr, creator: ResolvedPlacement, creator_core: int, num_cores: int) -> ResolvedPlacement:
    """Resolve a placement address against the creating thread's family."""
    if isinstance(addr, PlacementValue):
        first, size = decode(int(addr))
    elif addr == 0:
        return creator
    elif addr == 1:
        return ResolvedPlacement(creator_core, 1, True)
    else:
        if not isinstance(addr, int) or isinstance(addr, bool) or addr < 0:
            raise MachineError(E_BAD_PLACEMENT, f"malformed placement address {addr!r}")
        first, size = decode(addr)
    if size == 0:
        raise MachineError(E_BAD_PLACEMENT, f"placement address {int(addr)} has size 0")
    if first >= num_cores:
        raise MachineError(
            E_BAD_PLACEMENT,
            f"placement address names core {first} on a {num_cores}-core machine",
        )
    return ResolvedPlacement(first, min(size, num_cores - first), False)
