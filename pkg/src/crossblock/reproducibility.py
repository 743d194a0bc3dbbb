"""Split-half reproducibility of singular values and singular vectors.

Two complementary assessments, both built on repeated random partitions of
the rows into disjoint halves:

* train/test: fit on one half, project the other half's cross-block matrix
  through the training singular vectors, and read the diagonal as the test
  singular values. The diagonal is kept signed; a pattern that fails to
  generalize can project negatively.
* split-half similarity: fit both halves independently and record the
  absolute diagonal cosines between their singular vectors (absolute,
  because the sign of a singular vector is arbitrary under resampling).

Each LV's distribution over splits is summarized as z = mean / sd. The z is
a heuristic: narrow distributions with a non-zero mean score high. Null
calibration repeats both assessments after permuting Y rows once per
iteration, which shows what z values to expect when no cross-block
structure exists.
"""

from dataclasses import dataclass

import numpy as np

from .blocks import DataBlock, _zscore_values
from .decomposition import _cross_matrix, _fit_zscored, check_method
from .errors import ConstantColumn, ObservationMismatch, RankDeficient
from .parallel import parallel_map
from .rng import substream


@dataclass(frozen=True)
class TrainTestReport:
    """Projected test singular values per split and their per-LV z scores.

    ``s_test_draws`` has one row per completed split (failed splits are
    counted in ``n_failed``). Where a distribution has zero spread the z is
    NaN and the LV is flagged degenerate instead of reporting infinity.
    """

    s_test_draws: np.ndarray
    z: np.ndarray
    degenerate: np.ndarray
    n_split: int
    n_failed: int


@dataclass(frozen=True)
class SplitHalfReport:
    """Absolute diagonal cosines between half-sample singular vectors."""

    u_cosine_draws: np.ndarray
    v_cosine_draws: np.ndarray
    z_u: np.ndarray
    z_v: np.ndarray
    degenerate_u: np.ndarray
    degenerate_v: np.ndarray
    n_split: int
    n_failed: int


def _distribution_z(draws: np.ndarray):
    mean = draws.mean(axis=0)
    sd = draws.std(axis=0, ddof=1)
    degenerate = sd == 0
    z = np.full(draws.shape[1], np.nan)
    ok = ~degenerate
    z[ok] = mean[ok] / sd[ok]
    return z, degenerate


def _half_indices(rng: np.random.Generator, n: int):
    """Random disjoint halves covering all rows; the larger half trains."""
    perm = rng.permutation(n)
    cut = (n + 1) // 2
    return perm[:cut], perm[cut:]


def _checked_blocks(x: DataBlock, y: DataBlock, n_split: int):
    if x.n != y.n:
        raise ObservationMismatch(f"x has {x.n} rows, y has {y.n}")
    if x.n < 4:
        raise ValueError("need at least 4 rows to form two halves of 2")
    if n_split < 1:
        raise ValueError("n_split must be at least 1")
    return x.values, y.values


def _split_train_test(xv, yv, method, rng):
    train, test = _half_indices(rng, xv.shape[0])
    u, s, v, _ = _fit_zscored(
        _zscore_values(xv[train]), _zscore_values(yv[train]), method
    )
    m_test = _cross_matrix(_zscore_values(xv[test]), _zscore_values(yv[test]), method)
    return np.einsum("ij,ik,kj->j", u, m_test, v)


def _split_cosines(xv, yv, method, rng):
    half1, half2 = _half_indices(rng, xv.shape[0])
    u1, _, v1, _ = _fit_zscored(
        _zscore_values(xv[half1]), _zscore_values(yv[half1]), method
    )
    u2, _, v2, _ = _fit_zscored(
        _zscore_values(xv[half2]), _zscore_values(yv[half2]), method
    )
    return (
        np.abs(np.einsum("ij,ij->j", u1, u2)),
        np.abs(np.einsum("ij,ij->j", v1, v2)),
    )


def _collect(results):
    """Split (draws, failures) out of a list of per-iteration outcomes."""
    ok = [r for r in results if r is not None]
    return ok, len(results) - len(ok)


def train_test(
    x: DataBlock,
    y: DataBlock,
    method: str,
    n_split: int = 500,
    seed: int = 0,
    threads: int = 1,
) -> TrainTestReport:
    """Train/test assessment of the singular values over random splits.

    Iteration i partitions the rows using the (seed, "train-test", i)
    substream, fits on the training half, and projects the test half's
    cross-block matrix through the training vectors. For CCA both halves
    must pass the rank guard; a failing split is recorded and skipped, and
    the whole call raises RankDeficient only if every split fails.
    """
    method = check_method(method)
    xv, yv = _checked_blocks(x, y, n_split)

    def one(i: int):
        rng = substream(seed, "train-test", i)
        try:
            return _split_train_test(xv, yv, method, rng)
        except (RankDeficient, ConstantColumn):
            return None

    draws, n_failed = _collect(parallel_map(one, n_split, threads))
    if not draws:
        raise RankDeficient("x", float("nan"), float("nan"))
    s_test = np.stack(draws)
    z, degenerate = _distribution_z(s_test)
    return TrainTestReport(
        s_test_draws=s_test, z=z, degenerate=degenerate, n_split=n_split, n_failed=n_failed
    )


def split_half(
    x: DataBlock,
    y: DataBlock,
    method: str,
    n_split: int = 500,
    seed: int = 0,
    threads: int = 1,
) -> SplitHalfReport:
    """Similarity of singular vectors fitted on disjoint half-samples.

    Iteration i partitions the rows using the (seed, "split-half", i)
    substream and records |diag(U1.T U2)| and |diag(V1.T V2)|.
    """
    method = check_method(method)
    xv, yv = _checked_blocks(x, y, n_split)

    def one(i: int):
        rng = substream(seed, "split-half", i)
        try:
            return _split_cosines(xv, yv, method, rng)
        except (RankDeficient, ConstantColumn):
            return None

    draws, n_failed = _collect(parallel_map(one, n_split, threads))
    if not draws:
        raise RankDeficient("x", float("nan"), float("nan"))
    u_cos = np.stack([d[0] for d in draws])
    v_cos = np.stack([d[1] for d in draws])
    z_u, degenerate_u = _distribution_z(u_cos)
    z_v, degenerate_v = _distribution_z(v_cos)
    return SplitHalfReport(
        u_cosine_draws=u_cos,
        v_cosine_draws=v_cos,
        z_u=z_u,
        z_v=z_v,
        degenerate_u=degenerate_u,
        degenerate_v=degenerate_v,
        n_split=n_split,
        n_failed=n_failed,
    )


def null_calibration(
    x: DataBlock,
    y: DataBlock,
    method: str,
    n_split: int = 500,
    seed: int = 0,
    threads: int = 1,
) -> tuple[TrainTestReport, SplitHalfReport]:
    """Null distributions of both reproducibility metrics.

    Iteration i permutes the Y rows once (breaking the cross-block
    association) before splitting, then computes the train/test diagonal
    and the split-half cosines on the same permuted data and partition.
    Comparing these reports against the unpermuted ones shows how much of
    an observed z score mere dimensionality produces.
    """
    method = check_method(method)
    xv, yv = _checked_blocks(x, y, n_split)
    n = xv.shape[0]

    def one(i: int):
        rng = substream(seed, "null-calibration", i)
        y_perm = yv[rng.permutation(n)]
        try:
            s_test = _split_train_test(xv, y_perm, method, rng)
            cos = _split_cosines(xv, y_perm, method, rng)
        except (RankDeficient, ConstantColumn):
            return None
        return s_test, cos

    results, n_failed = _collect(parallel_map(one, n_split, threads))
    if not results:
        raise RankDeficient("x", float("nan"), float("nan"))
    s_test = np.stack([r[0] for r in results])
    u_cos = np.stack([r[1][0] for r in results])
    v_cos = np.stack([r[1][1] for r in results])
    z, degenerate = _distribution_z(s_test)
    z_u, degenerate_u = _distribution_z(u_cos)
    z_v, degenerate_v = _distribution_z(v_cos)
    return (
        TrainTestReport(
            s_test_draws=s_test, z=z, degenerate=degenerate, n_split=n_split, n_failed=n_failed
        ),
        SplitHalfReport(
            u_cosine_draws=u_cos,
            v_cosine_draws=v_cos,
            z_u=z_u,
            z_v=z_v,
            degenerate_u=degenerate_u,
            degenerate_v=degenerate_v,
            n_split=n_split,
            n_failed=n_failed,
        ),
    )
