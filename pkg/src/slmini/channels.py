"""Dataflow channels: single-producer broadcast (global) and daisy chains
(shared), built from single-assignment cells.

A shared chain over N threads holds N+1 cells: cell 0 is the creator's
source, cell k+1 is the output of the thread at chain position k, and the
last cell is the endpoint read by sl_geta after synchronization.  With N=0
the source cell is the final cell.  Reads of a thread's incoming cell are
stable: writing the outgoing link never changes what sl_getp returns.
"""

from __future__ import annotations

from .errors import E_DOUBLE_WRITE, MachineError
from .values import coerce_channel


class Cell:
    __slots__ = ("full", "value", "waiters", "forward")

    def __init__(self):
        self.full = False
        self.value = None
        self.waiters: list = []
        self.forward = False  # copy the predecessor's value when it arrives


class GlobalChannel:
    __slots__ = ("value_class", "cell")

    def __init__(self, value_class: str):
        self.value_class = value_class
        self.cell = Cell()

    def put(self, value) -> list:
        """Fill the broadcast cell; returns the threads to wake."""
        return _fill(self.cell, coerce_channel(self.value_class, value))

    def try_read(self, k: int):
        return (True, self.cell.value) if self.cell.full else (False, None)

    def reader_cell(self, k: int) -> Cell:
        return self.cell

    def final_value(self):
        return self.cell.value

    def final_full(self) -> bool:
        return self.cell.full


class SharedChain:
    __slots__ = ("value_class", "cells")

    def __init__(self, value_class: str, n_threads: int):
        self.value_class = value_class
        self.cells = [Cell() for _ in range(n_threads + 1)]

    def put(self, value) -> list:
        return self._fill_chain(0, coerce_channel(self.value_class, value))

    def try_read(self, k: int):
        cell = self.cells[k]
        return (True, cell.value) if cell.full else (False, None)

    def reader_cell(self, k: int) -> Cell:
        return self.cells[k]

    def write(self, k: int, value) -> list:
        return self._fill_chain(k + 1, coerce_channel(self.value_class, value))

    def wrote(self, k: int) -> bool:
        return self.cells[k + 1].full

    def mark_forward(self, k: int) -> list:
        """Thread k ended without writing: forward its incoming value."""
        incoming = self.cells[k]
        outgoing = self.cells[k + 1]
        if incoming.full:
            return self._fill_chain(k + 1, incoming.value)
        outgoing.forward = True
        return []

    def _fill_chain(self, i: int, value) -> list:
        woken = _fill(self.cells[i], value)
        j = i + 1
        while j < len(self.cells) and self.cells[j].forward and not self.cells[j].full:
            woken += _fill(self.cells[j], value)
            j += 1
        return woken

    def final_value(self):
        return self.cells[-1].value

    def final_full(self) -> bool:
        return self.cells[-1].full

    def propagate_source_to_final(self) -> list:
        """Used when thread bodies are skipped (distribution preview runs)."""
        first = self.cells[0]
        last = self.cells[-1]
        if first is last or not first.full or last.full:
            return []
        return _fill(last, first.value)


def _fill(cell: Cell, value) -> list:
    if cell.full:
        raise MachineError(E_DOUBLE_WRITE, "single-assignment channel cell written twice")
    cell.full = True
    cell.value = value
    woken = cell.waiters
    cell.waiters = []
    return woken


def wire(signature: list[tuple[str, str]], n_threads: int) -> list:
    """One channel object per signature entry, in channel-index order."""
    channels = []
    for direction, value_class in signature:
        if direction == "shared":
            channels.append(SharedChain(value_class, n_threads))
        else:
            channels.append(GlobalChannel(value_class))
    return channels
