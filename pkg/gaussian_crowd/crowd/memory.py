"""
Byte-exact memory accounting for naive and shared-attribute instancing.

Naive storage keeps a full copy of every per-Gaussian channel for each character.
Shared storage keeps one resident copy per (template, level) and only posed means per
character. A resident used by a single character is stored unshared: sharing starts
with the second character, so shared never costs more than naive.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from gaussian_crowd.constants import (
    BENCH_CHARACTER_COUNTS,
    CHANNEL_BYTES,
    MIB,
    REFERENCE_LOD_COUNTS,
    POSED_MEAN_BYTES,
)
from gaussian_crowd.crowd.builder import Crowd
from gaussian_crowd.errors import InvalidInputError
from gaussian_crowd.types import (
    ChannelBytes,
    MemoryFit,
    MemoryGrid,
    MemoryGridRow,
    MemoryMode,
    MemoryReport,
    bytes_to_mib,
)

POSED_CHANNEL = "posed_mean"

# GPU MiB per (gaussian count, mode) and character count, measured on an RTX 4090;
# cells that did not fit in memory are absent
REFERENCE_MEMORY_TABLE_MIB: Dict[Tuple[int, MemoryMode], Dict[int, float]] = {
    (202738, MemoryMode.NAIVE): {1: 651.0, 100: 7929.0},
    (202738, MemoryMode.SHARED): {1: 651.0, 100: 7075.0},
    (12661, MemoryMode.NAIVE): {1: 567.0, 100: 1005.0, 400: 2335.0, 1000: 5127.0, 5000: 21340.0},
    (12661, MemoryMode.SHARED): {1: 567.0, 100: 953.0, 400: 2121.0, 1000: 4593.0, 5000: 19625.0},
    (3176, MemoryMode.NAIVE): {1: 557.0, 100: 675.0, 400: 993.0, 1000: 1695.0, 5000: 5995.0},
    (3176, MemoryMode.SHARED): {1: 557.0, 100: 639.0, 400: 937.0, 1000: 1541.0, 5000: 5329.0},
}


@dataclass(frozen=True)
class MemoryLayoutModel:
    channel_bytes: Mapping[str, int] = field(default_factory=lambda: dict(CHANNEL_BYTES))
    posed_mean_bytes: int = POSED_MEAN_BYTES
    fixed_overhead_bytes: int = 0

    def __post_init__(self):
        if not self.channel_bytes or any(v <= 0 for v in self.channel_bytes.values()):
            raise InvalidInputError("every channel size must be positive")
        if self.posed_mean_bytes <= 0:
            raise InvalidInputError("posed mean size must be positive")
        if self.fixed_overhead_bytes < 0:
            raise InvalidInputError("fixed overhead must be >= 0")
        object.__setattr__(self, "channel_bytes", dict(self.channel_bytes))

    @property
    def resident_bytes_per_gaussian(self) -> int:
        return sum(self.channel_bytes.values())

    @classmethod
    def with_overhead_mib(cls, overhead_mib: float) -> "MemoryLayoutModel":
        return cls(fixed_overhead_bytes=int(round(overhead_mib * MIB)))


@dataclass(frozen=True)
class CrowdCensus:
    """Instance counts per (template, level) resident, with that level's size"""

    residents: Mapping[Tuple[str, int], Tuple[int, int]]  # -> (gaussian_count, instances)

    @property
    def instance_count(self) -> int:
        return sum(n for _, n in self.residents.values())

    @classmethod
    def from_crowd(cls, crowd: Crowd) -> "CrowdCensus":
        """Census of the crowd's active levels (level 0 for never-updated instances)"""
        residents: Dict[Tuple[str, int], Tuple[int, int]] = {}
        for instance in crowd.instances:
            template = crowd.template_of(instance)
            level = instance.active_lod or 0
            key = (instance.template_id, level)
            count = template.levels[level].gaussian_count
            _, seen = residents.get(key, (count, 0))
            residents[key] = (count, seen + 1)
        return cls(residents)

    @classmethod
    def uniform(
        cls, gaussian_count: int, instances: int, template_count: int = 1
    ) -> "CrowdCensus":
        """``instances`` spread round-robin over ``template_count`` one-level templates"""
        if gaussian_count < 1 or instances < 0 or template_count < 1:
            raise InvalidInputError("census sizes must be positive")
        residents = {}
        for t in range(template_count):
            share = instances // template_count + (1 if t < instances % template_count else 0)
            if share:
                residents[(f"template_{t:02d}", 0)] = (gaussian_count, share)
        return cls(residents)


def _charges(census: CrowdCensus, model: MemoryLayoutModel):
    naive = {name: 0 for name in model.channel_bytes}
    shared = {name: 0 for name in model.channel_bytes}
    naive[POSED_CHANNEL] = 0
    shared[POSED_CHANNEL] = 0
    redundant = 0
    for gaussians, instances in census.residents.values():
        if instances <= 0:
            continue
        for name, size in model.channel_bytes.items():
            naive[name] += instances * size * gaussians
            shared[name] += size * gaussians
        if instances == 1:
            redundant += model.posed_mean_bytes * gaussians
        else:
            shared[POSED_CHANNEL] += instances * model.posed_mean_bytes * gaussians
    return naive, shared, redundant


def memory_report(
    crowd: Union[Crowd, CrowdCensus],
    model: Optional[MemoryLayoutModel] = None,
    mode: MemoryMode = MemoryMode.BOTH,
) -> MemoryReport:
    model = model or MemoryLayoutModel()
    census = crowd if isinstance(crowd, CrowdCensus) else CrowdCensus.from_crowd(crowd)
    naive, shared, redundant = _charges(census, model)

    overhead = model.fixed_overhead_bytes
    naive_bytes = overhead + sum(naive.values())
    shared_bytes = overhead + sum(shared.values())
    instances = census.instance_count
    weighted_gaussians = sum(g * n for g, n in census.residents.values())
    mean_gaussians = weighted_gaussians / instances if instances else 0.0

    return MemoryReport(
        mode=MemoryMode(mode),
        instance_count=instances,
        naive_bytes=naive_bytes,
        shared_bytes=shared_bytes,
        savings_fraction=1.0 - shared_bytes / naive_bytes if naive_bytes else 0.0,
        naive_marginal_bytes=int(round(model.resident_bytes_per_gaussian * mean_gaussians)),
        shared_marginal_bytes=int(round(model.posed_mean_bytes * mean_gaussians)),
        redundant_canonical_bytes=redundant,
        fixed_overhead_bytes=overhead,
        breakdown={
            name: ChannelBytes(naive=naive[name], shared=shared[name]) for name in naive
        },
    )


def _grid_modes(mode: MemoryMode) -> List[MemoryMode]:
    if mode == MemoryMode.BOTH:
        return [MemoryMode.NAIVE, MemoryMode.SHARED]
    return [MemoryMode(mode)]


def memory_grid(
    gaussian_counts: Sequence[int] = REFERENCE_LOD_COUNTS,
    character_counts: Sequence[int] = BENCH_CHARACTER_COUNTS,
    model: Optional[MemoryLayoutModel] = None,
    mode: MemoryMode = MemoryMode.BOTH,
    template_count: int = 1,
) -> MemoryGrid:
    """Table-shaped MiB grid: one row per (gaussian count, mode), one column per crowd size"""
    model = model or MemoryLayoutModel()
    rows = []
    for gaussians in gaussian_counts:
        reports = {
            n: memory_report(CrowdCensus.uniform(gaussians, n, template_count), model)
            for n in character_counts
        }
        for row_mode in _grid_modes(MemoryMode(mode)):
            rows.append(
                MemoryGridRow(
                    gaussian_count=gaussians,
                    mode=row_mode,
                    label=f"{gaussians:,}",
                    mib_by_characters={
                        n: bytes_to_mib(
                            r.naive_bytes if row_mode == MemoryMode.NAIVE else r.shared_bytes
                        )
                        for n, r in reports.items()
                    },
                )
            )
    return MemoryGrid(character_counts=list(character_counts), rows=rows)


def fit_memory_row(
    character_counts: Iterable[int],
    mib_values: Iterable[float],
    gaussian_count: int = 0,
    mode: MemoryMode = MemoryMode.SHARED,
    method: str = "endpoints",
    model: Optional[MemoryLayoutModel] = None,
) -> MemoryFit:
    """Fit total = overhead + marginal * characters to a measured row.

    ``method`` is "endpoints" (line through the first and last cell) or
    "least_squares". The fit also records the per-character MiB the byte layout
    predicts for this gaussian count, for comparison with the measured slope.
    """
    xs = np.asarray(list(character_counts), dtype=np.float64)
    ys = np.asarray(list(mib_values), dtype=np.float64)
    if len(xs) < 2 or len(xs) != len(ys):
        raise InvalidInputError("a memory fit needs at least two (characters, MiB) pairs")
    if method == "endpoints":
        marginal = (ys[-1] - ys[0]) / (xs[-1] - xs[0])
        overhead = ys[0] - marginal * xs[0]
    elif method == "least_squares":
        marginal, overhead = np.polyfit(xs, ys, 1)
    else:
        raise InvalidInputError(f"unknown fit method '{method}'")

    model = model or MemoryLayoutModel()
    mode = MemoryMode(mode)
    per_gaussian = (
        model.resident_bytes_per_gaussian if mode == MemoryMode.NAIVE else model.posed_mean_bytes
    )
    return MemoryFit(
        gaussian_count=gaussian_count,
        mode=mode,
        overhead_mib=float(overhead),
        marginal_mib=float(marginal),
        layout_marginal_mib=bytes_to_mib(per_gaussian * gaussian_count),
    )


def fit_reference_row(
    gaussian_count: int, mode: MemoryMode, method: str = "endpoints"
) -> MemoryFit:
    row = REFERENCE_MEMORY_TABLE_MIB[(gaussian_count, MemoryMode(mode))]
    counts = sorted(row)
    return fit_memory_row(
        counts, [row[n] for n in counts], gaussian_count, mode, method
    )
