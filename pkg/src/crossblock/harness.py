"""Experiment protocols: full-sample analysis and subsampling studies.

The subsampling studies draw row subsets without replacement from a large
"population" dataset, re-run the analyses on every subset, and aggregate by
sample size:

* detectability: the fraction of subsamples in which an LV's permutation
  p-value falls at or below alpha. This is a descriptive rate over
  resamplings of one population, not statistical power.
* reproducibility by sample size: the average train/test and split-half z
  per LV across subsamples.
* false-positive sweep: detectability on a freshly generated null
  population, plus the any-LV rejection fraction. The any-LV decision is
  the family-wise max-statistic permutation test, which coincides with the
  leading LV's positional test because the observed leading singular value
  is the family maximum; it holds the any-LV false-positive rate at alpha
  where a union of the positional tests would inflate it several-fold.

CCA is refused outright (cells marked not-run, never zero) whenever a
subsample cannot support the within-block adjustment: the sample size must
exceed the X variable count and the within-block correlation matrix must be
full rank. Split-based assessments additionally need each half to clear the
same bar.

Every cell derives its randomness from (seed, purpose, sample size,
iteration index), so reports are a pure function of (population data,
config) for any thread count. Both methods see identical subsamples and
identical permutation streams, which keeps their comparison paired.
"""

from dataclasses import dataclass, field

import numpy as np

from .blocks import (
    DataBlock,
    correlation_bundle,
    effective_rank,
    _within_correlation,
    _zscore_values,
)
from .datagen import generate_null
from .decomposition import CCA, PLS, check_method, fit_cca
from .errors import ConstantColumn, MissingOmega, RankDeficient
from .inference import (
    BartlettResult,
    BootstrapResult,
    PermutationResult,
    bartlett_test,
    bootstrap_ci,
    permutation_test,
)
from .parallel import parallel_map
from .pca import PcaModel, align_to_reference, component_scores, fit_pca
from .reproducibility import (
    SplitHalfReport,
    TrainTestReport,
    split_half,
    train_test,
)
from .rng import derive_seed, substream

NOT_RUN = "not-run"
OK = "ok"


@dataclass(frozen=True)
class ExperimentConfig:
    """Knobs shared by the experiment protocols.

    ``pca_pre`` switches on pre-analysis reduction of the X block: an int
    fixes the retained component count, a float in (0, 1) sets the
    explained-variance target, None disables it. Resampling depths default
    to the full-scale protocol (1000 permutations, 1000 bootstrap draws,
    500 splits, 500 subsamples per size); scale them down for desk runs.
    """

    sample_sizes: tuple[int, ...] = (500, 250, 100, 50, 20)
    n_iterations: int = 500
    n_perm: int = 1000
    n_boot: int = 1000
    n_split: int = 500
    methods: tuple[str, ...] = (PLS, CCA)
    pca_pre: int | float | None = None
    alpha: float = 0.05
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sample_sizes", tuple(int(s) for s in self.sample_sizes))
        object.__setattr__(self, "methods", tuple(check_method(m) for m in self.methods))
        if any(s < 2 for s in self.sample_sizes):
            raise ValueError("sample sizes must be at least 2")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must be in (0, 1)")
        for name in ("n_iterations", "n_perm", "n_boot", "n_split"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not self.methods:
            raise ValueError("at least one method is required")
        if isinstance(self.pca_pre, float) and not 0 < self.pca_pre < 1:
            raise ValueError("a fractional pca_pre must be a variance target in (0, 1)")
        if isinstance(self.pca_pre, int) and not isinstance(self.pca_pre, bool) and self.pca_pre < 1:
            raise ValueError("an integer pca_pre must be a positive component count")


@dataclass(frozen=True)
class MethodFullSample:
    """Full-sample results for one method (fields None where not applicable)."""

    method: str
    status: str
    reason: str | None
    permutation: PermutationResult | None
    bootstrap: BootstrapResult | None
    bartlett: BartlettResult | None
    train_test_report: TrainTestReport | None
    split_half_report: SplitHalfReport | None


@dataclass(frozen=True)
class FullSampleResult:
    per_method: tuple[MethodFullSample, ...]
    pca_model: PcaModel | None
    n_components_used: int | None
    x_labels: tuple[str, ...]
    y_labels: tuple[str, ...]

    def method(self, name: str) -> MethodFullSample:
        for entry in self.per_method:
            if entry.method == name:
                return entry
        raise KeyError(name)


@dataclass(frozen=True)
class SubsampleCell:
    """One (method, sample size, LV) aggregate."""

    method: str
    sample_size: int
    lv: int
    status: str
    detectability: float | None = None
    train_test_z: float | None = None
    split_half_z_u: float | None = None
    split_half_z_v: float | None = None
    n_completed: int = 0
    n_skipped: int = 0
    skip_reason: str | None = None


@dataclass(frozen=True)
class AnyLvCell:
    method: str
    sample_size: int
    status: str
    fraction: float | None
    n_completed: int


@dataclass(frozen=True)
class SubsampleReport:
    kind: str
    alpha: float
    lv_count: int
    n_iterations: int
    cells: tuple[SubsampleCell, ...]
    any_lv: tuple[AnyLvCell, ...] = field(default=())

    def cell(self, method: str, sample_size: int, lv: int) -> SubsampleCell:
        for c in self.cells:
            if c.method == method and c.sample_size == sample_size and c.lv == lv:
                return c
        raise KeyError((method, sample_size, lv))

    def any_lv_cell(self, method: str, sample_size: int) -> AnyLvCell:
        for c in self.any_lv:
            if c.method == method and c.sample_size == sample_size:
                return c
        raise KeyError((method, sample_size))


def split_half_lv_z(report: SplitHalfReport) -> np.ndarray:
    """LV-level split-half z: the weaker of the X-side and Y-side vector z.

    An LV's pattern reproduces only if both its X weights and its Y weights
    reproduce, so the LV is summarized by min(z_u, z_v).
    """
    return np.minimum(report.z_u, report.z_v)


def _resolve_n_keep(pca_pre, model: PcaModel) -> int:
    if isinstance(pca_pre, bool) or pca_pre is None:
        raise ValueError("pca_pre is not set")
    if isinstance(pca_pre, int):
        return min(pca_pre, model.k)
    return int(np.searchsorted(model.variance_fraction, pca_pre - 1e-12) + 1)


def _reduce_x(x: DataBlock, config: ExperimentConfig):
    """Population PCA reduction of the X block when configured."""
    if config.pca_pre is None:
        return x, None, None
    model = fit_pca(x)
    n_keep = _resolve_n_keep(config.pca_pre, model)
    return component_scores(x, model, n_keep), model, n_keep


def _cca_sample_guard(n_rows: int, p: int) -> str | None:
    """Reason the within-block adjustment cannot be attempted, or None."""
    if n_rows <= p:
        return f"sample size {n_rows} does not exceed the {p} X variables"
    return None


def _cca_rank_guard(xz: np.ndarray) -> str | None:
    p = xz.shape[1]
    rank = effective_rank(_within_correlation(xz))
    if rank < p:
        return f"within-block correlation rank {rank} below {p}"
    return None


def run_full_sample(x: DataBlock, y: DataBlock, config: ExperimentConfig) -> FullSampleResult:
    """Population-level analysis: significance, reliability, reproducibility.

    Fits every configured method on the full blocks and collects permutation
    p-values, bootstrap stability masks, the chi-square sequence (CCA), and
    the train/test and split-half z tables. A CCA that fails the rank guard
    is reported as not-run while the other method's results stand.
    """
    x_used, pca_model, n_keep = _reduce_x(x, config)
    entries = []
    for method in config.methods:
        reason = None
        if method == CCA:
            reason = _cca_sample_guard(x_used.n, x_used.k)
            if reason is None:
                reason = _cca_rank_guard(_zscore_values(x_used.values))
        if reason is not None:
            entries.append(
                MethodFullSample(
                    method=method, status=NOT_RUN, reason=reason,
                    permutation=None, bootstrap=None, bartlett=None,
                    train_test_report=None, split_half_report=None,
                )
            )
            continue
        perm = permutation_test(
            x_used, y, method, n_perm=config.n_perm,
            seed=derive_seed(config.seed, "full-permutation"),
        )
        boot = bootstrap_ci(
            x_used, y, method, n_boot=config.n_boot,
            seed=derive_seed(config.seed, "full-bootstrap"),
            threads=config.threads,
        )
        tt = train_test(
            x_used, y, method, n_split=config.n_split,
            seed=derive_seed(config.seed, "full-train-test"),
            threads=config.threads,
        )
        sh = split_half(
            x_used, y, method, n_split=config.n_split,
            seed=derive_seed(config.seed, "full-split-half"),
            threads=config.threads,
        )
        bart = None
        if method == CCA:
            model = fit_cca(correlation_bundle(x_used, y, with_omega=True))
            bart = bartlett_test(model, n=x_used.n, p=x_used.k, q=y.k)
        entries.append(
            MethodFullSample(
                method=method, status=OK, reason=None,
                permutation=perm, bootstrap=boot, bartlett=bart,
                train_test_report=tt, split_half_report=sh,
            )
        )
    return FullSampleResult(
        per_method=tuple(entries),
        pca_model=pca_model,
        n_components_used=n_keep,
        x_labels=x_used.labels,
        y_labels=y.labels,
    )


def _check_population(x: DataBlock, y: DataBlock, config: ExperimentConfig):
    if x.n != y.n:
        raise ValueError(f"x has {x.n} rows, y has {y.n}")
    if max(config.sample_sizes) > x.n:
        raise ValueError(
            f"largest sample size {max(config.sample_sizes)} exceeds the "
            f"population row count {x.n}"
        )


def _draw_subsample(seed: int, size: int, iteration: int, n: int) -> np.ndarray:
    rng = substream(seed, "subsample", size, iteration)
    return rng.choice(n, size, replace=False)


def _subsample_blocks(x, y, idx, pca_reference):
    """Materialize one subsample, re-fitting and aligning the PCA reduction."""
    xs = DataBlock(x.values[idx], x.labels)
    ys = DataBlock(y.values[idx], y.labels)
    if pca_reference is not None:
        model = align_to_reference(fit_pca(xs), pca_reference[0])
        xs = component_scores(xs, model, pca_reference[1])
    return xs, ys


def run_detectability(x: DataBlock, y: DataBlock, config: ExperimentConfig) -> SubsampleReport:
    """Rejection rates by sample size.

    For each sample size, ``n_iterations`` subsamples are drawn without
    replacement; each gets a fresh permutation test per method and LV k
    counts as detected when its p-value is at or below alpha. Per-iteration
    failures (a constant column in a tiny draw, a rank-deficient CCA
    subsample above the size guard) are recorded as skips, not fatal.
    """
    _check_population(x, y, config)
    pca_reference = None
    if config.pca_pre is not None:
        pop_model = fit_pca(x)
        pca_reference = (pop_model, _resolve_n_keep(config.pca_pre, pop_model))
    p_effective = pca_reference[1] if pca_reference else x.k
    r = min(p_effective, y.k)
    cells = []
    any_cells = []
    for size in config.sample_sizes:
        blocked = {m: _cca_sample_guard(size, p_effective) if m == CCA else None
                   for m in config.methods}

        def one(i: int, size=size, blocked=blocked):
            idx = _draw_subsample(config.seed, size, i, x.n)
            try:
                xs, ys = _subsample_blocks(x, y, idx, pca_reference)
            except ConstantColumn as exc:
                return {m: ("skip", str(exc)) for m in config.methods}
            perm_seed = derive_seed(config.seed, "detect-permutation", size, i)
            out = {}
            for method in config.methods:
                if blocked[method] is not None:
                    out[method] = ("blocked", blocked[method])
                    continue
                try:
                    res = permutation_test(
                        xs, ys, method, n_perm=config.n_perm, seed=perm_seed
                    )
                except (RankDeficient, MissingOmega, ConstantColumn) as exc:
                    out[method] = ("skip", str(exc))
                    continue
                out[method] = ("ok", res.p_values)
            return out

        results = parallel_map(one, config.n_iterations, config.threads)
        for method in config.methods:
            if blocked[method] is not None:
                for lv in range(1, r + 1):
                    cells.append(
                        SubsampleCell(
                            method=method, sample_size=size, lv=lv, status=NOT_RUN,
                            n_skipped=config.n_iterations, skip_reason=blocked[method],
                        )
                    )
                any_cells.append(
                    AnyLvCell(method=method, sample_size=size, status=NOT_RUN,
                              fraction=None, n_completed=0)
                )
                continue
            pvals = [res[method][1] for res in results if res[method][0] == "ok"]
            skips = [res[method][1] for res in results if res[method][0] == "skip"]
            n_done = len(pvals)
            if n_done:
                stacked = np.stack(pvals)
                hit = stacked <= config.alpha
                rates = hit.mean(axis=0)
                # Family-wise decision by the max-statistic rule: the observed
                # leading singular value is the family maximum, so comparing it
                # against the permuted leading values controls the any-LV error
                # at alpha. A raw union over the positional p-values would not.
                any_rate = float(hit[:, 0].mean())
            for lv in range(1, r + 1):
                cells.append(
                    SubsampleCell(
                        method=method, sample_size=size, lv=lv,
                        status=OK if n_done else NOT_RUN,
                        detectability=float(rates[lv - 1]) if n_done else None,
                        n_completed=n_done,
                        n_skipped=config.n_iterations - n_done,
                        skip_reason=skips[0] if skips else None,
                    )
                )
            any_cells.append(
                AnyLvCell(
                    method=method, sample_size=size,
                    status=OK if n_done else NOT_RUN,
                    fraction=any_rate if n_done else None,
                    n_completed=n_done,
                )
            )
    return SubsampleReport(
        kind="detectability", alpha=config.alpha, lv_count=r,
        n_iterations=config.n_iterations, cells=tuple(cells), any_lv=tuple(any_cells),
    )


def run_reproducibility_by_n(x: DataBlock, y: DataBlock, config: ExperimentConfig) -> SubsampleReport:
    """Average train/test and split-half z per LV by sample size.

    Each subsample runs both reproducibility assessments at depth
    ``n_split``; the reported cell is the mean z over subsamples whose
    assessment completed. CCA cells whose half-samples cannot clear the
    rank guard are marked not-run up front.
    """
    _check_population(x, y, config)
    pca_reference = None
    if config.pca_pre is not None:
        pop_model = fit_pca(x)
        pca_reference = (pop_model, _resolve_n_keep(config.pca_pre, pop_model))
    p_effective = pca_reference[1] if pca_reference else x.k
    r = min(p_effective, y.k)
    cells = []
    for size in config.sample_sizes:
        blocked = {}
        for m in config.methods:
            reason = None
            if m == CCA:
                reason = _cca_sample_guard(size // 2, p_effective)
                if reason is not None:
                    reason = "half-sample rank guard: " + reason
            blocked[m] = reason

        def one(i: int, size=size, blocked=blocked):
            idx = _draw_subsample(config.seed, size, i, x.n)
            try:
                xs, ys = _subsample_blocks(x, y, idx, pca_reference)
            except ConstantColumn as exc:
                return {m: ("skip", str(exc)) for m in config.methods}
            out = {}
            for method in config.methods:
                if blocked[method] is not None:
                    out[method] = ("blocked", blocked[method])
                    continue
                try:
                    tt = train_test(
                        xs, ys, method, n_split=config.n_split,
                        seed=derive_seed(config.seed, "repro-train-test", size, i),
                    )
                    sh = split_half(
                        xs, ys, method, n_split=config.n_split,
                        seed=derive_seed(config.seed, "repro-split-half", size, i),
                    )
                except (RankDeficient, MissingOmega, ConstantColumn) as exc:
                    out[method] = ("skip", str(exc))
                    continue
                out[method] = ("ok", (tt.z, sh.z_u, sh.z_v))
            return out

        results = parallel_map(one, config.n_iterations, config.threads)
        for method in config.methods:
            if blocked[method] is not None:
                for lv in range(1, r + 1):
                    cells.append(
                        SubsampleCell(
                            method=method, sample_size=size, lv=lv, status=NOT_RUN,
                            n_skipped=config.n_iterations, skip_reason=blocked[method],
                        )
                    )
                continue
            done = [res[method][1] for res in results if res[method][0] == "ok"]
            skips = [res[method][1] for res in results if res[method][0] == "skip"]
            n_done = len(done)
            if n_done:
                tt_z = np.stack([d[0] for d in done])
                sh_u = np.stack([d[1] for d in done])
                sh_v = np.stack([d[2] for d in done])
                with np.errstate(invalid="ignore"):
                    tt_mean = np.nanmean(tt_z, axis=0)
                    u_mean = np.nanmean(sh_u, axis=0)
                    v_mean = np.nanmean(sh_v, axis=0)
            for lv in range(1, r + 1):
                cells.append(
                    SubsampleCell(
                        method=method, sample_size=size, lv=lv,
                        status=OK if n_done else NOT_RUN,
                        train_test_z=float(tt_mean[lv - 1]) if n_done else None,
                        split_half_z_u=float(u_mean[lv - 1]) if n_done else None,
                        split_half_z_v=float(v_mean[lv - 1]) if n_done else None,
                        n_completed=n_done,
                        n_skipped=config.n_iterations - n_done,
                        skip_reason=skips[0] if skips else None,
                    )
                )
    return SubsampleReport(
        kind="reproducibility", alpha=config.alpha, lv_count=r,
        n_iterations=config.n_iterations, cells=tuple(cells),
    )


def run_false_positive_sweep(
    config: ExperimentConfig, n: int = 10000, p: int = 10, q: int = 5
) -> SubsampleReport:
    """Detectability sweep on a freshly generated null population.

    Generates independent standard-normal blocks from the config seed, runs
    the detectability protocol, and reports the any-LV rejection fraction
    per method and sample size alongside the per-LV rates.
    """
    dataset = generate_null(n, p, q, seed=derive_seed(config.seed, "fpr-population"))
    report = run_detectability(dataset.x, dataset.y, config)
    return SubsampleReport(
        kind="false-positive-sweep", alpha=report.alpha, lv_count=report.lv_count,
        n_iterations=report.n_iterations, cells=report.cells, any_lv=report.any_lv,
    )
