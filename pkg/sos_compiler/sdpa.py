"""
SDPA sparse format (.dat-s) writer and parser for SdpProblem

Layout: m, nBlocks, blockStruct, rhs vector, then `matno blkno i j value` lines with
1-based upper-triangle indices; matno 0 is F0 (the objective). Free scalars are split
as c = c+ - c- in a trailing diagonal block of size 2*n_free. Labels and zero-size
blocks ride along in a `* labels` comment line.
"""
import json
from typing import Dict, List, Tuple

from .models import EqualityConstraint, FreeEntry, GramEntry, LinearFunctional, SdpProblem


class SdpaParseError(ValueError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


def _number(value: float) -> str:
    return repr(float(value))


def to_sdpa(problem: SdpProblem) -> str:
    """Serialize to SDPA sparse text; floats use repr so parsing back is bit-exact."""
    nonempty = [b for b, size in enumerate(problem.blocks) if size > 0]
    block_number = {b: k + 1 for k, b in enumerate(nonempty)}
    structure = [str(problem.blocks[b]) for b in nonempty]
    free_block = None
    if problem.n_free:
        free_block = len(nonempty) + 1
        structure.append(str(-2 * problem.n_free))

    meta = {
        "blocks": problem.blocks,
        "block_labels": problem.block_labels,
        "free_labels": problem.free_labels,
        "constraint_labels": [c.label for c in problem.constraints],
        "objective": problem.objective is not None,
    }
    lines = [
        '"SOS program exported in SDPA sparse format"',
        "* labels " + json.dumps(meta, separators=(",", ":")),
        str(len(problem.constraints)),
        str(len(structure)),
        " ".join(structure),
        " ".join(_number(c.rhs) for c in problem.constraints),
    ]

    def entries(matno: int, gram: List[GramEntry], free: List[FreeEntry]):
        for e in gram:
            lines.append(f"{matno} {block_number[e.block]} {e.row + 1} {e.col + 1} {_number(e.value)}")
        for e in free:
            lines.append(f"{matno} {free_block} {2 * e.index + 1} {2 * e.index + 1} {_number(e.value)}")
            lines.append(f"{matno} {free_block} {2 * e.index + 2} {2 * e.index + 2} {_number(-e.value)}")

    if problem.objective is not None:
        entries(0, problem.objective.gram, problem.objective.free)
    for k, constraint in enumerate(problem.constraints, start=1):
        entries(k, constraint.gram, constraint.free)
    return "\n".join(lines) + "\n"


def from_sdpa(text: str) -> SdpProblem:
    """Parse SDPA sparse text written by `to_sdpa` (or any header-compatible file)."""
    meta = None
    data: List[Tuple[int, str]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("* labels "):
            try:
                meta = json.loads(line[len("* labels "):])
            except json.JSONDecodeError as e:
                raise SdpaParseError(f"malformed labels comment ({e.msg})", number)
            continue
        if line.startswith("*") or line.startswith('"'):
            continue
        data.append((number, line.replace(",", " ").replace("{", " ").replace("}", " ")
                     .replace("(", " ").replace(")", " ")))

    def header_int(index: int, what: str) -> int:
        if index >= len(data):
            raise SdpaParseError(f"missing {what}", data[-1][0] if data else 1)
        number, line = data[index]
        try:
            return int(line.split()[0])
        except (ValueError, IndexError):
            raise SdpaParseError(f"expected integer {what}, got {line!r}", number)

    m = header_int(0, "constraint count")
    n_blocks = header_int(1, "block count")
    structure: List[int] = []
    cursor = 2
    if n_blocks:
        number, line = data[cursor] if cursor < len(data) else (data[-1][0], "")
        try:
            structure = [int(v) for v in line.split()]
        except ValueError:
            raise SdpaParseError(f"malformed block structure {line!r}", number)
        if len(structure) != n_blocks:
            raise SdpaParseError(f"expected {n_blocks} block sizes, got {len(structure)}", number)
        cursor += 1
    rhs: List[float] = []
    if m:
        number, line = data[cursor] if cursor < len(data) else (data[-1][0], "")
        try:
            rhs = [float(v) for v in line.split()]
        except ValueError:
            raise SdpaParseError(f"malformed rhs vector {line!r}", number)
        if len(rhs) != m:
            raise SdpaParseError(f"expected {m} rhs values, got {len(rhs)}", number)
        cursor += 1

    free_block = n_blocks if structure and structure[-1] < 0 else None
    meta = meta or {}
    blocks = meta.get("blocks") or [abs(s) for s in structure if s > 0]
    nonempty = [b for b, size in enumerate(blocks) if size > 0]
    n_free = -structure[-1] // 2 if free_block else 0

    gram: Dict[int, List[GramEntry]] = {}
    free: Dict[int, List[FreeEntry]] = {}
    for number, line in data[cursor:]:
        parts = line.split()
        if len(parts) != 5:
            raise SdpaParseError(f"expected 5 fields, got {len(parts)}", number)
        try:
            matno, blkno, i, j = (int(p) for p in parts[:4])
            value = float(parts[4])
        except ValueError:
            raise SdpaParseError(f"malformed entry {line!r}", number)
        if not 0 <= matno <= m:
            raise SdpaParseError(f"matrix number {matno} out of range", number)
        if not 1 <= blkno <= n_blocks:
            raise SdpaParseError(f"block number {blkno} out of range", number)
        size = abs(structure[blkno - 1])
        if not (1 <= i <= size and 1 <= j <= size):
            raise SdpaParseError(f"index ({i}, {j}) outside block {blkno}", number)
        if blkno == free_block:
            if i != j:
                raise SdpaParseError("off-diagonal entry in a diagonal block", number)
            if i % 2 == 1:
                free.setdefault(matno, []).append(FreeEntry(index=(i - 1) // 2, value=value))
            continue
        if i > j:
            i, j = j, i
        if blkno - 1 >= len(nonempty):
            raise SdpaParseError(f"block {blkno} has no matching Gram block", number)
        gram.setdefault(matno, []).append(GramEntry(block=nonempty[blkno - 1], row=i - 1, col=j - 1, value=value))

    labels = meta.get("constraint_labels") or [""] * m
    constraints = [
        EqualityConstraint(label=labels[k - 1], gram=gram.get(k, []), free=free.get(k, []), rhs=rhs[k - 1])
        for k in range(1, m + 1)
    ]
    objective = None
    if meta.get("objective") or 0 in gram or 0 in free:
        objective = LinearFunctional(gram=gram.get(0, []), free=free.get(0, []))
    return SdpProblem(
        blocks=blocks,
        block_labels=meta.get("block_labels") or [f"block{b + 1}" for b in range(len(blocks))],
        n_free=n_free,
        free_labels=meta.get("free_labels") or [f"c{k + 1}" for k in range(n_free)],
        constraints=constraints,
        objective=objective,
    )
