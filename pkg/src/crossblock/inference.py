"""Resampling-based and parametric significance assessment.

Permutation tests break the row pairing between the two blocks by
reshuffling Y rows while X stays fixed; each LV's observed singular value
is compared position-wise against its permuted counterparts. Bootstrap
resampling keeps the row pairing, resamples rows with replacement, and
builds percentile confidence intervals for the singular-value-scaled
vector weights. The chi-square test applies to CCA only; there is no
parametric equivalent for PLS.

p-values are exact resampling counts (count / n_perm with a >= comparison),
so a singular value larger than every permuted draw reports p = 0.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from .blocks import DataBlock, _adjustment_roots, _within_correlation, _zscore_values
from .decomposition import (
    CCA,
    CrossBlockModel,
    _fit_zscored,
    align_reflections,
    check_method,
)
from .errors import ConstantColumn, MethodMismatch, ObservationMismatch, RankDeficient, ResamplingError
from .parallel import parallel_map
from .rng import substream

_PERM_CHUNK_ELEMENTS = 4_000_000
_BOOT_MAX_RETRIES = 100


@dataclass(frozen=True)
class PermutationResult:
    """Observed singular values, their permutation null draws, and p-values."""

    observed_s: np.ndarray
    null_s: np.ndarray
    p_values: np.ndarray
    n_perm: int

    @property
    def r(self) -> int:
        return self.observed_s.shape[0]


@dataclass(frozen=True)
class BootstrapResult:
    """Percentile confidence intervals for the scaled singular-vector weights.

    ``us_*`` matrices are p x r (X side), ``vs_*`` are q x r (Y side). A
    weight is stable when its interval excludes zero.
    """

    observed_us: np.ndarray
    observed_vs: np.ndarray
    us_lower: np.ndarray
    us_upper: np.ndarray
    vs_lower: np.ndarray
    vs_upper: np.ndarray
    us_stable: np.ndarray
    vs_stable: np.ndarray
    n_boot: int


@dataclass(frozen=True)
class BartlettTest:
    start_lv: int
    chi_square: float
    df: int
    p_value: float


@dataclass(frozen=True)
class BartlettResult:
    """Nested sequence of chi-square tests, one per starting LV."""

    tests: tuple[BartlettTest, ...]


def _prepared_arrays(x: DataBlock, y: DataBlock):
    if x.n != y.n:
        raise ObservationMismatch(f"x has {x.n} rows, y has {y.n}")
    xz = _zscore_values(x.values, x.labels)
    yz = _zscore_values(y.values, y.labels)
    return xz, yz


def permutation_test(
    x: DataBlock,
    y: DataBlock,
    method: str,
    n_perm: int = 1000,
    seed: int = 0,
    permutations: np.ndarray | None = None,
) -> PermutationResult:
    """Positional permutation test of the singular values.

    Y rows are reshuffled uniformly at random each iteration while X stays
    fixed, the model is refitted, and LV k's observed singular value is
    compared against the distribution of permuted LV-k values. Permutation
    i draws its indices from the (seed, "permutation", i) substream, so
    results are reproducible regardless of execution order.

    Because a row permutation leaves each block's own correlation matrix
    unchanged, the within-block adjustment for CCA is computed once from the
    observed data; a permuted draw can never newly fail the rank guard.

    Parameters
    ----------
    permutations : optional (n_perm, n) integer array
        Explicit permutations to use instead of random draws (for exact or
        forced-null checks).
    """
    method = check_method(method)
    if n_perm < 1:
        raise ValueError("n_perm must be at least 1")
    xz, yz = _prepared_arrays(x, y)
    n = xz.shape[0]
    scale = 1.0 / (n - 1)

    left = right = None
    m_obs = xz.T @ yz * scale
    if method == CCA:
        left, right = _adjustment_roots(_within_correlation(xz), _within_correlation(yz))
        m_obs = left @ m_obs @ right
    observed_s = np.linalg.svd(m_obs, compute_uv=False)
    if method == CCA:
        observed_s = np.minimum(observed_s, 1.0)

    if permutations is None:
        permutations = np.empty((n_perm, n), dtype=np.intp)
        for i in range(n_perm):
            permutations[i] = substream(seed, "permutation", i).permutation(n)
    else:
        permutations = np.asarray(permutations)
        if permutations.shape != (n_perm, n):
            raise ValueError(f"permutations must have shape ({n_perm}, {n})")

    r = observed_s.shape[0]
    null_s = np.empty((n_perm, r))
    xt = xz.T
    chunk = max(1, _PERM_CHUNK_ELEMENTS // (n * yz.shape[1]))
    for start in range(0, n_perm, chunk):
        rows = permutations[start : start + chunk]
        yp = yz[rows]                              # (c, n, q)
        m = np.matmul(xt[None, :, :], yp) * scale  # (c, p, q)
        if method == CCA:
            m = left @ m @ right
        null_s[start : start + len(rows)] = np.linalg.svd(m, compute_uv=False)
    if method == CCA:
        np.minimum(null_s, 1.0, out=null_s)

    p_values = (null_s >= observed_s).sum(axis=0) / n_perm
    return PermutationResult(
        observed_s=observed_s, null_s=null_s, p_values=p_values, n_perm=n_perm
    )


def bootstrap_ci(
    x: DataBlock,
    y: DataBlock,
    method: str,
    n_boot: int = 1000,
    seed: int = 0,
    threads: int = 1,
) -> BootstrapResult:
    """Bootstrap 95% percentile intervals for the scaled vector weights.

    Each iteration draws n row indices with replacement, applies them to
    both blocks so the row pairing is kept, refits, corrects each LV's
    reflection against the observed U (the flip is applied to the paired V
    column as well), and scales U and V by the singular values. The interval
    distribution includes the observed scaled weights alongside the n_boot
    resampled draws.

    Draws that produce a constant column, or that fail the CCA rank guard,
    are redrawn from the same iteration stream up to 100 times before the
    iteration aborts with a diagnostic; silently skipping draws would bias
    the distribution.
    """
    method = check_method(method)
    if n_boot < 100:
        raise ValueError("n_boot must be at least 100")
    xz, yz = _prepared_arrays(x, y)
    u_obs, s_obs, v_obs, _ = _fit_zscored(xz, yz, method)
    us_obs = u_obs * s_obs
    vs_obs = v_obs * s_obs
    xv, yv = x.values, y.values
    n = xv.shape[0]

    def one(i: int):
        rng = substream(seed, "bootstrap", i)
        for _ in range(_BOOT_MAX_RETRIES):
            idx = rng.integers(0, n, n)
            try:
                ub, sb, vb, _ = _fit_zscored(
                    _zscore_values(xv[idx]), _zscore_values(yv[idx]), method
                )
            except (ConstantColumn, RankDeficient):
                continue
            ub, vb, _ = align_reflections(u_obs, ub, vb)
            return ub * sb, vb * sb
        raise ResamplingError(
            f"bootstrap iteration {i} produced {_BOOT_MAX_RETRIES} degenerate draws in a row"
        )

    draws = parallel_map(one, n_boot, threads)
    us_draws = np.stack([d[0] for d in draws] + [us_obs])
    vs_draws = np.stack([d[1] for d in draws] + [vs_obs])
    us_lower, us_upper = np.percentile(us_draws, [2.5, 97.5], axis=0)
    vs_lower, vs_upper = np.percentile(vs_draws, [2.5, 97.5], axis=0)
    return BootstrapResult(
        observed_us=us_obs,
        observed_vs=vs_obs,
        us_lower=us_lower,
        us_upper=us_upper,
        vs_lower=vs_lower,
        vs_upper=vs_upper,
        us_stable=(us_lower > 0) | (us_upper < 0),
        vs_stable=(vs_lower > 0) | (vs_upper < 0),
        n_boot=n_boot,
    )


def bartlett_test(model: CrossBlockModel, n: int, p: int, q: int) -> BartlettResult:
    """Chi-square tests of the nested null hypotheses for a CCA model.

    The test starting at LV k asks whether canonical correlations k..r are
    jointly zero: chi_square = -(n - 1 - (p + q + 1)/2) * sum_{i>=k}
    ln(1 - s_i^2) on (p - k + 1)(q - k + 1) degrees of freedom, with the
    p-value from the upper tail.
    """
    if model.method != CCA:
        raise MethodMismatch("the chi-square test applies to CCA models only")
    if p != model.u.shape[0] or q != model.v.shape[0]:
        raise ValueError(
            f"stated dimensions ({p}, {q}) do not match the model "
            f"({model.u.shape[0]}, {model.v.shape[0]})"
        )
    if n <= p + q:
        raise ValueError(f"need n > p + q, got n={n}, p={p}, q={q}")
    s = model.s
    mult = n - 1 - (p + q + 1) / 2
    log_terms = np.log1p(-np.square(s))
    tests = []
    for k in range(1, model.r + 1):
        stat = -mult * float(np.sum(log_terms[k - 1 :]))
        df = (p - k + 1) * (q - k + 1)
        tests.append(
            BartlettTest(
                start_lv=k, chi_square=stat, df=df, p_value=float(chi2.sf(stat, df))
            )
        )
    return BartlettResult(tests=tuple(tests))
