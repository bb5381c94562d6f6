"""Analytical cost model for synchronous data-parallel distributed training.

Each of p workers holds the full model and computes gradients for its share
of the batch; gradient aggregation then costs, in seconds:

    parameter server:  grad_bytes * p / BW
    reduction tree:    grad_bytes * b * ceil(log_b p) / BW   (0 when p == 1)

Gradients are the same size as the weights, so grad_bytes is the report's
parameter total. The model is pure bandwidth (no latency term), with no
communication/computation overlap: iteration time = comm + compute. Times
are exact Fractions so ratio properties hold exactly; convert at the edges.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction

from .accounting import AccountingReport, TRAIN_FLOPS_FACTOR

__all__ = [
    "Topology", "ClusterSpec", "TrainPlan", "CostEstimate",
    "comm_time", "compute_time", "iteration_time", "scaling_curve",
    "best_worker_count", "total_training_ops", "per_epoch_comm_time",
    "scaling_curve_csv", "DEFAULT_EFFICIENCY",
]

# Fraction of peak throughput a tuned implementation typically sustains.
DEFAULT_EFFICIENCY = Fraction(1, 5)


class Topology(str, Enum):
    PARAMETER_SERVER = "parameter-server"
    REDUCTION_TREE = "reduction-tree"


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


@dataclass(frozen=True)
class ClusterSpec:
    """Worker count, per-node bandwidth, aggregation topology, and compute."""

    workers: int
    bandwidth_bytes_per_s: Fraction
    topology: Topology = Topology.REDUCTION_TREE
    branching: int = 2
    peak_flops_per_s: Fraction = Fraction(3_500_000_000_000)
    efficiency: Fraction = DEFAULT_EFFICIENCY

    def __post_init__(self) -> None:
        object.__setattr__(self, "topology", Topology(self.topology))
        object.__setattr__(self, "bandwidth_bytes_per_s", _as_fraction(self.bandwidth_bytes_per_s))
        object.__setattr__(self, "peak_flops_per_s", _as_fraction(self.peak_flops_per_s))
        object.__setattr__(self, "efficiency", _as_fraction(self.efficiency))
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.bandwidth_bytes_per_s <= 0:
            raise ValueError("bandwidth must be positive")
        if self.branching < 2:
            raise ValueError("reduction-tree branching factor must be >= 2")
        if self.peak_flops_per_s <= 0:
            raise ValueError("throughput must be positive")
        if not 0 < self.efficiency <= 1:
            raise ValueError("efficiency must be in (0, 1]")

    @property
    def sustained_flops_per_s(self) -> Fraction:
        return self.peak_flops_per_s * self.efficiency

    def with_workers(self, p: int) -> "ClusterSpec":
        return replace(self, workers=p)


@dataclass(frozen=True)
class TrainPlan:
    dataset_frames: int
    epochs: int
    batch: int

    def __post_init__(self) -> None:
        if self.dataset_frames < 1 or self.epochs < 1 or self.batch < 1:
            raise ValueError("dataset_frames, epochs, and batch must be >= 1")

    @property
    def iterations_per_epoch(self) -> int:
        return -(-self.dataset_frames // self.batch)

    @property
    def total_iterations(self) -> int:
        return self.iterations_per_epoch * self.epochs


def tree_depth(p: int, branching: int) -> int:
    """ceil(log_b p): levels of a b-ary reduction over p workers (0 if p == 1)."""
    depth = 0
    reach = 1
    while reach < p:
        reach *= branching
        depth += 1
    return depth


def comm_time(grad_bytes: int, cluster: ClusterSpec) -> Fraction:
    """Seconds to aggregate one gradient update across the cluster."""
    if grad_bytes < 0:
        raise ValueError("grad_bytes must be >= 0")
    if cluster.topology is Topology.PARAMETER_SERVER:
        volume = grad_bytes * cluster.workers
    else:
        volume = grad_bytes * cluster.branching * tree_depth(cluster.workers, cluster.branching)
    return Fraction(volume) / cluster.bandwidth_bytes_per_s


def compute_time(report: AccountingReport, cluster: ClusterSpec) -> Fraction:
    """Seconds of forward+backward compute per iteration, batch split across workers."""
    train_flops = TRAIN_FLOPS_FACTOR * report.forward_flops
    return Fraction(train_flops) / (cluster.workers * cluster.sustained_flops_per_s)


@dataclass(frozen=True)
class CostEstimate:
    workers: int
    comm_time_per_iter: Fraction
    compute_time_per_iter: Fraction
    total_time: Fraction  # per iteration unless a TrainPlan scaled it
    speedup_vs_1: Fraction
    comp_comm_ratio: Fraction | None  # None when comm time is zero
    iterations: int = 1
    batch_smaller_than_workers: bool = False

    @property
    def iteration_time(self) -> Fraction:
        return self.comm_time_per_iter + self.compute_time_per_iter


def iteration_time(report: AccountingReport, cluster: ClusterSpec,
                   plan: TrainPlan | None = None) -> CostEstimate:
    """Cost of one iteration (or a whole TrainPlan) on the given cluster.

    Per-iteration compute assumes the report's batch is split evenly across
    workers; a batch smaller than the worker count leaves workers idle and is
    flagged. Total time is (comm + compute) * iterations: no overlap.
    """
    grad_bytes = report.param_bytes
    comm = comm_time(grad_bytes, cluster)
    comp = compute_time(report, cluster)
    iterations = plan.total_iterations if plan is not None else 1

    single = cluster.with_workers(1)
    single_iter = comm_time(grad_bytes, single) + compute_time(report, single)
    this_iter = comm + comp
    return CostEstimate(
        workers=cluster.workers,
        comm_time_per_iter=comm,
        compute_time_per_iter=comp,
        total_time=this_iter * iterations,
        speedup_vs_1=single_iter / this_iter,
        comp_comm_ratio=(comp / comm) if comm else None,
        iterations=iterations,
        batch_smaller_than_workers=report.batch < cluster.workers,
    )


def per_epoch_comm_time(report: AccountingReport, cluster: ClusterSpec,
                        plan: TrainPlan) -> Fraction:
    """Communication seconds per epoch: one aggregation per iteration."""
    return comm_time(report.param_bytes, cluster) * plan.iterations_per_epoch


def scaling_curve(report: AccountingReport, base: ClusterSpec,
                  worker_counts: list[int], plan: TrainPlan | None = None) -> list[CostEstimate]:
    return [iteration_time(report, base.with_workers(p), plan) for p in worker_counts]


def best_worker_count(curve: list[CostEstimate]) -> int:
    """Worker count maximizing estimated speedup over one worker."""
    if not curve:
        raise ValueError("empty scaling curve")
    return max(curve, key=lambda e: (e.speedup_vs_1, -e.workers)).workers


def total_training_ops(report: AccountingReport, plan: TrainPlan) -> int:
    """Arithmetic ops for the whole run: 3 * forward-per-frame * frames * epochs."""
    return TRAIN_FLOPS_FACTOR * report.forward_flops_per_frame * plan.dataset_frames * plan.epochs


def scaling_curve_csv(curve: list[CostEstimate]) -> str:
    lines = ["p,comm_s,compute_s,total_s,speedup,ratio"]
    for e in curve:
        ratio = "" if e.comp_comm_ratio is None else f"{float(e.comp_comm_ratio):.6g}"
        lines.append(
            f"{e.workers},{float(e.comm_time_per_iter):.6g},{float(e.compute_time_per_iter):.6g},"
            f"{float(e.total_time):.6g},{float(e.speedup_vs_1):.6g},{ratio}"
        )
    return "\n".join(lines) + "\n"


def parse_bandwidth(text: str) -> Fraction:
    """'1GB/s', '125MB/s', or a plain number of bytes/second."""
    t = text.strip().upper().removesuffix("/S")
    for suffix, scale in (("GB", 10**9), ("MB", 10**6), ("KB", 10**3), ("B", 1)):
        if t.endswith(suffix):
            return _as_fraction(t.removesuffix(suffix)) * scale
    return _as_fraction(t)


def parse_flops(text: str) -> Fraction:
    """'3.5TF/s', '10.6TF', or a plain number of FLOP/s."""
    t = text.strip().upper().removesuffix("/S")
    for suffix, scale in (("TF", 10**12), ("GF", 10**9), ("MF", 10**6), ("F", 1)):
        if t.endswith(suffix):
            return _as_fraction(t.removesuffix(suffix)) * scale
    return _as_fraction(t)


