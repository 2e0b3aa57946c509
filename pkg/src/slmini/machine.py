"""The simulated many-core machine.

Cores have finitely many hardware thread slots and family entries, plus one
exclusive context each.  Bulk-created families materialize logical threads
lazily, per core and in increasing index order, capped by the family's
window size and the core's free slots.  A seeded scheduler picks one
runnable thread per step and executes one instruction, so a given
(program, config, seed) triple replays to an identical trace.

Allocation failure modes: the default serializes the family inside the
creating thread (guaranteeing progress), sl__forcewait blocks in a per-core
FIFO, sl__forceseq always serializes, and exclusive creations queue FIFO on
the target core's single exclusive context.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .errors import (
    E_BAD_STEP,
    E_BAD_WS,
    E_SERIAL_BLOCK,
    E_TYPE,
    E_UNWRITTEN_SHARED,
    MachineError,
)
from .channels import GlobalChannel, SharedChain, wire
from .ir import IrFunction, IrProgram
from .placement import PlacementValue, ResolvedPlacement, encode, resolve
from .trace import TraceEvent
from .values import ArrayValue, binop, coerce_channel, fmt_value, truthy, unop, wrap_int

STATUS_OK = "ok"
STATUS_DATAFLOW = "dataflow-error"
STATUS_DEADLOCK = "deadlock"
STATUS_STEP_LIMIT = "step-limit"


@dataclass
class MachineConfig:
    num_cores: int = 4
    hw_threads_per_core: int = 16
    family_entries_per_core: int = 8
    scheduler_seed: int = 1
    max_steps: int = 10_000_000
    serialize_all: bool = False
    forward_unwritten: bool = False

    def __post_init__(self):
        for name in ("num_cores", "hw_threads_per_core", "family_entries_per_core", "max_steps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.scheduler_seed < (1 << 64):
            raise ValueError("scheduler_seed must be an unsigned 64-bit value")


@dataclass
class RunResult:
    status: str
    output: str
    trace: list[TraceEvent]
    steps: int
    error: Optional[MachineError] = None
    deadlock_report: Optional[str] = None
    dist_tables: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return {STATUS_OK: 0, STATUS_DATAFLOW: 2, STATUS_DEADLOCK: 3, STATUS_STEP_LIMIT: 4}[self.status]


class FamilyRecord:
    __slots__ = (
        "fid",
        "kind",  # "regular" | "exclusive" | "serialized"
        "placement",
        "target",
        "range",
        "n_threads",
        "window",
        "signature",
        "channels",
        "terminator",
        "state",  # allocated -> configured -> running -> done -> released
        "holds_entry",
        "holds_exclusive",
        "core_plan",  # core id -> [next_k, end_k]
        "live_per_core",
        "done_threads",
        "sync_waiter",
        "creator_core",
    )

    def __init__(self, fid: int, kind: str, placement: ResolvedPlacement, creator_core: int):
        self.fid = fid
        self.kind = kind
        self.placement = placement
        self.creator_core = creator_core
        self.target = None
        self.range = (0, 1, 1)
        self.n_threads = 0
        self.window = 0
        self.signature = []
        self.channels = []
        self.terminator = "sync"
        self.state = "requested"
        self.holds_entry = None
        self.holds_exclusive = None
        self.core_plan = {}
        self.live_per_core = {}
        self.done_threads = 0
        self.sync_waiter = None

    def logical_index(self, k: int) -> int:
        start, _limit, step = self.range
        return start + k * step

    @property
    def has_shared(self) -> bool:
        return any(d == "shared" for d, _ in self.signature)

    @property
    def done(self) -> bool:
        return self.state in ("done", "released")


class Frame:
    __slots__ = ("func", "pc", "regs", "fam_slots", "ret_dst", "family", "logical_index", "k", "serial")

    def __init__(self, func: IrFunction, family: FamilyRecord, logical_index: int, k: int,
                 ret_dst: Optional[str] = None, serial: bool = False):
        self.func = func
        self.pc = 0
        self.regs: dict = {}
        self.fam_slots: dict = {}
        self.ret_dst = ret_dst
        self.family = family
        self.logical_index = logical_index
        self.k = k
        self.serial = serial


class Thread:
    __slots__ = ("tid", "family", "k", "logical_index", "core", "frames", "blocked", "done")

    def __init__(self, tid: int, family: FamilyRecord, k: int, logical_index: int, core: int):
        self.tid = tid
        self.family = family
        self.k = k
        self.logical_index = logical_index
        self.core = core
        self.frames: list[Frame] = []
        self.blocked = None  # ("read", fam, ch) | ("allocate", core, kind, fam) | ("sync", fam)
        self.done = False


class Core:
    __slots__ = ("cid", "occupancy", "entries_free", "exclusive_busy", "entry_queue", "exclusive_queue", "fam_queue")

    def __init__(self, cid: int, entries: int):
        self.cid = cid
        self.occupancy = 0
        self.entries_free = entries
        self.exclusive_busy: Optional[FamilyRecord] = None
        self.entry_queue: deque = deque()
        self.exclusive_queue: deque = deque()
        self.fam_queue: list[FamilyRecord] = []


def thread_count(start: int, limit: int, step: int) -> int:
    if step <= 0:
        raise MachineError(E_BAD_STEP, f"family step must be positive, got {step}")
    if limit <= start:
        return 0
    return -(-(limit - start) // step)


def distribute(n_threads: int, placement_size: int, has_shared: bool) -> list[tuple[int, int]]:
    """Per-core [k_start, k_end) chain-position ranges, in core order.

    Dependent families (any shared channel) run entirely on the first core;
    independent families get contiguous blocks, the first n mod P cores
    taking one extra thread.
    """
    if has_shared:
        return [(0, n_threads)] + [(n_threads, n_threads)] * (placement_size - 1)
    q, r = divmod(n_threads, placement_size)
    plan = []
    k = 0
    for c in range(placement_size):
        take = q + (1 if c < r else 0)
        plan.append((k, k + take))
        k += take
    return plan


class Machine:
    """One run per instance; create a fresh Machine for every run."""

    def __init__(self, program: IrProgram, config: MachineConfig, dist_family: Optional[str] = None):
        self.program = program
        self.config = config
        self.dist_family = dist_family
        self.rng = random.Random(config.scheduler_seed)
        self.cores = [Core(i, config.family_entries_per_core) for i in range(config.num_cores)]
        self.threads: list[Thread] = []
        self.runnable: list[Thread] = []
        self.trace: list[TraceEvent] = []
        self.out: list[str] = []
        self.step = 0
        self.next_fid = 0
        self.next_tid = 0
        self.next_aid = 0
        self.need_materialize = False
        self.dist_tables: list[tuple[int, dict[int, tuple[int, int, int]]]] = []

        boot = self._new_family("regular", ResolvedPlacement(0, config.num_cores, False), 0)
        boot.target = program.entry
        boot.state = "running"
        boot.terminator = "detach"
        boot.n_threads = 1
        self.cores[0].entries_free -= 1
        boot.holds_entry = 0
        self.boot = boot
        main = program.functions[program.entry]
        t = Thread(self._tid(), boot, 0, 0, 0)
        t.frames.append(Frame(main, boot, 0, 0))
        self.cores[0].occupancy += 1
        boot.live_per_core[0] = 1
        self.threads.append(t)
        self.runnable.append(t)
        self._event("thread-start", 0, boot.fid, 0)

    # -- small helpers -------------------------------------------------------

    def _tid(self) -> int:
        self.next_tid += 1
        return self.next_tid - 1

    def _new_family(self, kind: str, placement: ResolvedPlacement, creator_core: int) -> FamilyRecord:
        rec = FamilyRecord(self.next_fid, kind, placement, creator_core)
        self.next_fid += 1
        return rec

    def _event(self, event: str, core: int, family: int, thread: Optional[int], detail: str = "") -> None:
        self.trace.append(TraceEvent(self.step, event, core, family, thread, detail))

    def _wake(self, threads) -> None:
        for t in threads:
            t.blocked = None
            self.runnable.append(t)

    def new_array(self, value_class: str, size: int) -> ArrayValue:
        self.next_aid += 1
        return ArrayValue(self.next_aid - 1, value_class, size)

    # -- main loop ------------------------------------------------------------

    def run(self) -> RunResult:
        status = STATUS_OK
        error: Optional[MachineError] = None
        report: Optional[str] = None
        try:
            while True:
                if self.need_materialize:
                    self.need_materialize = False
                    self._materialize()
                if not self.runnable:
                    if self._all_done():
                        break
                    report = self._deadlock_report()
                    self._event("deadlock", -1, -1, None, "no runnable threads")
                    status = STATUS_DEADLOCK
                    break
                if self.step >= self.config.max_steps:
                    status = STATUS_STEP_LIMIT
                    break
                # Random-burst scheduling: run the picked thread for a seeded
                # burst of ops (or until it blocks) so that cross-thread
                # orderings vary widely between seeds.
                idx = self.rng.randrange(len(self.runnable))
                thread = self.runnable.pop(idx)
                burst = self.rng.randrange(1, 33)
                keep = True
                while burst > 0 and keep and self.step < self.config.max_steps:
                    self.step += 1
                    keep = self._exec(thread)
                    burst -= 1
                if keep:
                    self.runnable.append(thread)
        except MachineError as e:
            status = STATUS_DATAFLOW
            error = e
        return RunResult(
            status, "".join(self.out), self.trace, self.step, error, report, self.dist_tables
        )

    def _all_done(self) -> bool:
        return all(t.done for t in self.threads) and not self._pending_work()

    def _pending_work(self) -> bool:
        for core in self.cores:
            for rec in core.fam_queue:
                plan = rec.core_plan.get(core.cid)
                if plan and plan[0] < plan[1]:
                    return True
            if core.entry_queue or core.exclusive_queue:
                return True
        return False

    def _deadlock_report(self) -> str:
        lines = ["deadlock: no runnable threads"]
        for t in self.threads:
            if t.done or t.blocked is None:
                continue
            who = f"family {t.family.fid} thread {t.logical_index} (core {t.core})"
            kind = t.blocked[0]
            if kind == "read":
                _, rec, ch = t.blocked
                lines.append(f"  {who}: blocked reading channel {ch} of family {rec.fid}")
            elif kind == "allocate":
                _, cid, ctx_kind, rec = t.blocked
                lines.append(
                    f"  {who}: blocked allocating a {ctx_kind} context on core {cid}"
                    f" (family {rec.fid})"
                )
            elif kind == "sync":
                _, rec = t.blocked
                lines.append(f"  {who}: blocked on sync of family {rec.fid}")
        for core in self.cores:
            for rec in core.fam_queue:
                plan = rec.core_plan.get(core.cid)
                if plan and plan[0] < plan[1]:
                    lines.append(
                        f"  family {rec.fid}: {plan[1] - plan[0]} thread(s) not yet started"
                        f" on core {core.cid} (no hardware slot)"
                    )
        return "\n".join(lines)

    # -- thread materialization -------------------------------------------------

    def _materialize(self) -> None:
        for core in self.cores:
            progress = True
            while progress and core.occupancy < self.config.hw_threads_per_core:
                progress = False
                for rec in core.fam_queue:
                    plan = rec.core_plan.get(core.cid)
                    if plan is None or plan[0] >= plan[1]:
                        continue
                    cap = rec.window if rec.window > 0 else self.config.hw_threads_per_core
                    if rec.live_per_core.get(core.cid, 0) >= cap:
                        continue
                    self._spawn(rec, core, plan[0])
                    plan[0] += 1
                    progress = True
                    if core.occupancy >= self.config.hw_threads_per_core:
                        break

    def _spawn(self, rec: FamilyRecord, core: Core, k: int) -> None:
        index = rec.logical_index(k)
        t = Thread(self._tid(), rec, k, index, core.cid)
        t.frames.append(Frame(self.program.functions[rec.target], rec, index, k))
        core.occupancy += 1
        rec.live_per_core[core.cid] = rec.live_per_core.get(core.cid, 0) + 1
        self.threads.append(t)
        self.runnable.append(t)
        self._event("thread-start", core.cid, rec.fid, index)

    # -- completion and context bookkeeping --------------------------------------

    def _thread_end(self, thread: Thread) -> None:
        rec = thread.family
        self._finish_logical_thread(rec, thread.k, thread.core)
        thread.done = True
        core = self.cores[thread.core]
        core.occupancy -= 1
        rec.live_per_core[thread.core] -= 1
        rec.done_threads += 1
        self.need_materialize = True
        if rec is self.boot:
            if rec.holds_entry is not None:
                self._free_entry(rec)
            rec.state = "done"
            return
        if rec.done_threads == rec.n_threads:
            self._family_done(rec)

    def _finish_logical_thread(self, rec: FamilyRecord, k: int, core: int) -> None:
        """Shared-output bookkeeping plus the thread-end trace event."""
        for ch in rec.channels:
            if isinstance(ch, SharedChain) and not ch.wrote(k):
                if self.config.forward_unwritten:
                    self._wake(ch.mark_forward(k))
                else:
                    raise MachineError(
                        E_UNWRITTEN_SHARED,
                        f"thread {rec.logical_index(k)} of family {rec.fid} ended without"
                        " writing its shared output",
                    )
        self._event("thread-end", core, rec.fid, rec.logical_index(k))

    def _family_done(self, rec: FamilyRecord) -> None:
        rec.state = "done"
        if rec.sync_waiter is not None:
            waiter = rec.sync_waiter
            rec.sync_waiter = None
            self._wake([waiter])
        if rec.terminator == "detach":
            self._release(rec, by_runtime=True)

    def _release(self, rec: FamilyRecord, by_runtime: bool = False) -> None:
        had_context = rec.holds_entry is not None or rec.holds_exclusive is not None
        if rec.holds_entry is not None:
            self._free_entry(rec)
        if rec.holds_exclusive is not None:
            self._free_exclusive(rec)
        rec.state = "released"
        if had_context:
            detail = "by-runtime" if by_runtime else ""
            self._event("release", rec.creator_core, rec.fid, None, detail)

    def _free_entry(self, rec: FamilyRecord) -> None:
        core = self.cores[rec.holds_entry]
        rec.holds_entry = None
        core.entries_free += 1
        if core.entry_queue:
            thread, waiting = core.entry_queue.popleft()
            self._grant(core, thread, waiting, exclusive=False)

    def _free_exclusive(self, rec: FamilyRecord) -> None:
        core = self.cores[rec.holds_exclusive]
        rec.holds_exclusive = None
        core.exclusive_busy = None
        if core.exclusive_queue:
            thread, waiting = core.exclusive_queue.popleft()
            self._grant(core, thread, waiting, exclusive=True)

    def _grant(self, core: Core, thread: Thread, rec: FamilyRecord, exclusive: bool) -> None:
        if exclusive:
            core.exclusive_busy = rec
            rec.holds_exclusive = core.cid
        else:
            core.entries_free -= 1
            rec.holds_entry = core.cid
        rec.state = "allocated"
        self._event(
            "allocate",
            core.cid,
            rec.fid,
            thread.logical_index,
            f"kind={rec.kind} mode=wait cores=[{rec.placement.first_core},"
            f"{rec.placement.first_core + rec.placement.size})",
        )
        thread.frames[-1].pc += 1
        self._wake([thread])

    # -- instruction execution ----------------------------------------------------

    def _exec(self, thread: Thread) -> bool:
        """Execute one op; returns True if the thread stays runnable."""
        frame = thread.frames[-1]
        op = frame.func.ops[frame.pc]
        name = op[0]
        regs = frame.regs

        if name == "const":
            regs[op[1]] = op[2]
        elif name == "mov":
            regs[op[1]] = regs[op[2]]
        elif name == "bin":
            regs[op[2]] = binop(op[1], regs[op[3]], regs[op[4]])
        elif name == "un":
            regs[op[2]] = unop(op[1], regs[op[3]])
        elif name == "jmp":
            frame.pc = op[1]
            return True
        elif name == "jz":
            if not truthy(regs[op[1]]):
                frame.pc = op[2]
                return True
        elif name == "aload":
            arr = regs[op[2]]
            if not isinstance(arr, ArrayValue):
                raise MachineError(E_TYPE, f"{op[2]} is not an array handle")
            regs[op[1]] = arr.load(regs[op[3]])
        elif name == "astore":
            arr = regs[op[1]]
            if not isinstance(arr, ArrayValue):
                raise MachineError(E_TYPE, f"{op[1]} is not an array handle")
            arr.store(regs[op[2]], regs[op[3]])
        elif name == "arr":
            regs[op[1]] = self.new_array(op[2], op[3])
        elif name == "read":
            return self._op_read(thread, frame, op)
        elif name == "write":
            return self._op_write(thread, frame, op)
        elif name == "index":
            regs[op[1]] = frame.logical_index
        elif name == "print":
            val = regs[op[2]]
            if op[1] == "float":
                if isinstance(val, int) and not isinstance(val, bool):
                    val = float(val)
                if not isinstance(val, float):
                    raise MachineError(E_TYPE, "print_float needs a float")
                text = f"{val:.6f}"
            else:
                if not isinstance(val, int) or isinstance(val, bool):
                    raise MachineError(E_TYPE, "print_int needs an integer")
                text = str(val)
            self.out.append(text)
            self._event("print", thread.core, frame.family.fid, frame.logical_index, text)
        elif name == "prints":
            text = self.program.constants[op[1]]
            self.out.append(text)
            self._event("print", thread.core, frame.family.fid, frame.logical_index, text)
        elif name == "call":
            callee = self.program.functions[op[2]]
            new = Frame(callee, frame.family, frame.logical_index, frame.k, ret_dst=op[1])
            for pname, src in zip(callee.param_names, op[3]):
                new.regs[pname] = regs[src]
            frame.pc += 1
            thread.frames.append(new)
            return True
        elif name == "ret":
            return self._op_ret(thread, frame, op)
        elif name == "allocate":
            return self._op_allocate(thread, frame, op)
        elif name == "configure":
            self._op_configure(thread, frame, op)
        elif name == "put":
            rec = frame.fam_slots[op[1]]
            value = regs[op[3]]
            self._wake(rec.channels[op[2]].put(value))
            self._event("put", thread.core, rec.fid, frame.logical_index, f"ch={op[2]} val={fmt_value(value)}")
        elif name == "create":
            return self._op_create(thread, frame, op)
        elif name == "sync":
            rec = frame.fam_slots[op[1]]
            if not rec.done:
                thread.blocked = ("sync", rec)
                rec.sync_waiter = thread
                return False
            self._event("sync", thread.core, rec.fid, frame.logical_index)
        elif name == "get":
            rec = frame.fam_slots[op[2]]
            assert rec.done, "sl_geta before family completion"
            ch = rec.channels[op[3]]
            assert ch.final_full(), "sl_geta on an unfed endpoint"
            regs[op[1]] = ch.final_value()
            self._event("get", thread.core, rec.fid, frame.logical_index, f"ch={op[3]} val={fmt_value(regs[op[1]])}")
        elif name == "release":
            rec = frame.fam_slots[op[1]]
            self._release(rec)
        elif name == "defplace":
            p = frame.family.placement
            regs[op[1]] = encode(p.first_core, p.size)
        elif name == "placesize":
            resolved = self._resolve_addr(regs[op[2]], thread, frame)
            regs[op[1]] = resolved.size
        elif name == "firstproc":
            resolved = self._resolve_addr(regs[op[2]], thread, frame)
            regs[op[1]] = resolved.first_core
        elif name == "localproc":
            regs[op[1]] = thread.core
        elif name == "makeplace":
            l_val = regs[op[2]]
            s_val = regs[op[3]]
            if not isinstance(l_val, int) or not isinstance(s_val, int):
                raise MachineError(E_TYPE, "sl_placement needs integer operands")
            regs[op[1]] = PlacementValue(l_val, s_val)
        else:
            raise AssertionError(f"unknown opcode {name!r}")
        frame.pc += 1
        return True

    def _resolve_addr(self, addr, thread: Thread, frame: Frame) -> ResolvedPlacement:
        return resolve(addr, frame.family.placement, thread.core, self.config.num_cores)

    # -- channel ops ---------------------------------------------------------------

    def _op_read(self, thread: Thread, frame: Frame, op) -> bool:
        rec = frame.family
        ch = rec.channels[op[2]]
        ready, value = ch.try_read(frame.k)
        if not ready:
            if frame.serial:
                raise MachineError(
                    E_SERIAL_BLOCK,
                    f"serialized thread {frame.logical_index} of family {rec.fid} reads"
                    f" channel {op[2]}, which can never be written under serialization",
                )
            thread.blocked = ("read", rec, op[2])
            ch.reader_cell(frame.k).waiters.append(thread)
            return False
        frame.regs[op[1]] = value
        self._event("read", thread.core, rec.fid, frame.logical_index, f"ch={op[2]} val={fmt_value(value)}")
        frame.pc += 1
        return True

    def _op_write(self, thread: Thread, frame: Frame, op) -> bool:
        rec = frame.family
        ch = rec.channels[op[1]]
        value = frame.regs[op[2]]
        self._wake(ch.write(frame.k, value))
        self._event("write", thread.core, rec.fid, frame.logical_index, f"ch={op[1]} val={fmt_value(value)}")
        frame.pc += 1
        return True

    # -- function return / thread & serial-thread end --------------------------------

    def _op_ret(self, thread: Thread, frame: Frame, op) -> bool:
        value = frame.regs[op[1]] if op[1] is not None else 0
        thread.frames.pop()
        if frame.serial:
            rec = frame.family
            self._finish_logical_thread(rec, frame.k, thread.core)
            rec.done_threads += 1
            if rec.done_threads < rec.n_threads:
                k = rec.done_threads
                nxt = Frame(self.program.functions[rec.target], rec, rec.logical_index(k), k, serial=True)
                thread.frames.append(nxt)
                self._event("thread-start", thread.core, rec.fid, rec.logical_index(k))
                return True
            self._family_done(rec)
            thread.frames[-1].pc += 1  # past the create op that drove the serial run
            return True
        if not thread.frames:
            self._thread_end(thread)
            return False
        parent = thread.frames[-1]
        if frame.ret_dst is not None:
            parent.regs[frame.ret_dst] = value
        return True

    # -- family construction ------------------------------------------------------------

    def _op_allocate(self, thread: Thread, frame: Frame, op) -> bool:
        _, slot, placement_operand, kind, mode = op
        addr = placement_operand[1] if placement_operand[0] == "const" else frame.regs[placement_operand[1]]
        resolved = self._resolve_addr(addr, thread, frame)
        first = self.cores[resolved.first_core]

        if self.config.serialize_all:
            rec = self._new_family("serialized", resolved, thread.core)
            frame.fam_slots[slot] = rec
            rec.state = "allocated"
            self._event(
                "serialize-fallback", thread.core, rec.fid, frame.logical_index, "reason=serialize-all"
            )
            frame.pc += 1
            return True

        if kind == "exclusive":
            rec = self._new_family("exclusive", ResolvedPlacement(first.cid, 1, resolved.local_restricted), thread.core)
            frame.fam_slots[slot] = rec
            if first.exclusive_busy is None:
                first.exclusive_busy = rec
                rec.holds_exclusive = first.cid
                rec.state = "allocated"
                self._event(
                    "allocate", first.cid, rec.fid, frame.logical_index,
                    f"kind=exclusive mode=wait cores=[{first.cid},{first.cid + 1})",
                )
                frame.pc += 1
                return True
            thread.blocked = ("allocate", first.cid, "exclusive", rec)
            first.exclusive_queue.append((thread, rec))
            self._event("allocate-wait", first.cid, rec.fid, frame.logical_index, "kind=exclusive")
            return False

        if mode == "forceseq":
            rec = self._new_family("serialized", resolved, thread.core)
            frame.fam_slots[slot] = rec
            rec.state = "allocated"
            self._event(
                "serialize-fallback", thread.core, rec.fid, frame.logical_index, "reason=forceseq"
            )
            frame.pc += 1
            return True

        if first.entries_free > 0:
            rec = self._new_family("regular", resolved, thread.core)
            frame.fam_slots[slot] = rec
            first.entries_free -= 1
            rec.holds_entry = first.cid
            rec.state = "allocated"
            self._event(
                "allocate", first.cid, rec.fid, frame.logical_index,
                f"kind=regular mode={mode} cores=[{resolved.first_core},"
                f"{resolved.first_core + resolved.size})",
            )
            frame.pc += 1
            return True

        if mode == "wait":
            rec = self._new_family("regular", resolved, thread.core)
            frame.fam_slots[slot] = rec
            thread.blocked = ("allocate", first.cid, "regular", rec)
            first.entry_queue.append((thread, rec))
            self._event("allocate-wait", first.cid, rec.fid, frame.logical_index, "kind=regular")
            return False

        rec = self._new_family("serialized", resolved, thread.core)
        frame.fam_slots[slot] = rec
        rec.state = "allocated"
        self._event(
            "serialize-fallback", thread.core, rec.fid, frame.logical_index,
            f"reason=no-free-context core={first.cid}",
        )
        frame.pc += 1
        return True

    def _op_configure(self, thread: Thread, frame: Frame, op) -> None:
        _, slot, target, start_op, limit_op, step_op, ws_op, terminator = op

        def value(operand, what):
            v = operand[1] if operand[0] == "const" else frame.regs[operand[1]]
            if not isinstance(v, int) or isinstance(v, bool):
                raise MachineError(E_TYPE, f"family {what} must be an integer")
            return v

        rec = frame.fam_slots[slot]
        assert rec.state == "allocated", "configure on a non-allocated context"
        start = value(start_op, "start")
        limit = value(limit_op, "limit")
        step = value(step_op, "step")
        ws = value(ws_op, "window size")
        if ws < 0:
            raise MachineError(E_BAD_WS, f"window size must be non-negative, got {ws}")
        n = thread_count(start, limit, step)
        rec.range = (start, limit, step)
        rec.n_threads = n
        rec.window = ws
        rec.target = target
        rec.terminator = terminator
        rec.signature = list(self.program.functions[target].signature)
        rec.channels = wire(rec.signature, n)
        plan = distribute(n, 1 if rec.kind == "exclusive" else rec.placement.size, rec.has_shared)
        for offset, (lo, hi) in enumerate(plan):
            if lo < hi:
                rec.core_plan[rec.placement.first_core + offset] = [lo, hi]
        rec.state = "configured"
        self._event(
            "configure", thread.core, rec.fid, frame.logical_index,
            f"range=({start},{limit},{step}) ws={ws} n={n}",
        )

    def _op_create(self, thread: Thread, frame: Frame, op) -> bool:
        rec = frame.fam_slots[op[1]]
        assert rec.state == "configured", "create on a non-configured context"
        rec.state = "running"
        self._event(
            "create", thread.core, rec.fid, frame.logical_index,
            f"target={rec.target} n={rec.n_threads}",
        )

        if self.dist_family is not None and rec.target == self.dist_family:
            table = {}
            for cid, (lo, hi) in sorted(rec.core_plan.items()):
                start, _limit, step = rec.range
                table[cid] = (start + lo * step, start + hi * step, step)
            self.dist_tables.append((rec.fid, table))
            for ch in rec.channels:
                if isinstance(ch, SharedChain):
                    self._wake(ch.propagate_source_to_final())
            rec.done_threads = rec.n_threads
            self._family_done(rec)
            frame.pc += 1
            return True

        if rec.kind == "serialized":
            if rec.n_threads == 0:
                self._family_done(rec)
                frame.pc += 1
                return True
            first = Frame(self.program.functions[rec.target], rec, rec.logical_index(0), 0, serial=True)
            thread.frames.append(first)
            self._event("thread-start", thread.core, rec.fid, rec.logical_index(0))
            return True

        if rec.n_threads == 0:
            self._family_done(rec)
            frame.pc += 1
            return True

        for cid in rec.core_plan:
            self.cores[cid].fam_queue.append(rec)
        self.need_materialize = True
        frame.pc += 1
        return True
