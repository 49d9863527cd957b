"""Rolling out-of-sample backtests of historical VaR and tail expectations.

Two evaluation schemes share the same no-look-ahead window: day t is always
judged against a forecast computed from the n days strictly before it.

* VaR rolls daily: one forecast and one violation check per evaluation day.
* The tail expectation is checked on consecutive non-overlapping n-day blocks;
  each block keeps the VaR and predicted tail expectation fixed from the n
  days immediately preceding it, and a trailing partial block is discarded.
  A block with zero violations has no realized tail mean -- the tail
  expectation "did not exist" there -- and is counted, not errored.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError
from .measures import Level, QuantileConvention, _as_level, quantile_index

# Default backtest grid: horizons from two trading weeks to two trading years,
# crossed with the confidence levels commonly quoted for daily risk reporting.
DEFAULT_GRID: tuple[tuple[int, float], ...] = (
    (10, 0.90),
    (20, 0.90),
    (20, 0.95),
    (50, 0.90),
    (100, 0.90),
    (100, 0.95),
    (100, 0.99),
    (250, 0.90),
    (250, 0.95),
    (250, 0.99),
    (500, 0.90),
    (500, 0.95),
    (500, 0.99),
)


@dataclass(frozen=True)
class ReturnSeries:
    """Dated daily returns for one asset, strictly increasing dates."""

    asset_id: str
    dates: tuple[dt.date, ...]
    returns: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.returns, dtype=float)
        dates = tuple(self.dates)
        if not self.asset_id:
            raise InputError("asset_id must be non-empty")
        if arr.ndim != 1:
            raise InputError(f"{self.asset_id}: returns must be one-dimensional")
        if arr.size != len(dates):
            raise InputError(f"{self.asset_id}: got {len(dates)} dates but {arr.size} returns")
        if arr.size == 0:
            raise InputError(f"{self.asset_id}: return series must contain at least one row")
        if not np.all(np.isfinite(arr)):
            raise InputError(f"{self.asset_id}: returns contain non-finite values")
        for prev, curr in zip(dates, dates[1:]):
            if curr <= prev:
                raise InputError(
                    f"{self.asset_id}: dates must be strictly increasing: {curr} does not follow {prev}"
                )
        arr.flags.writeable = False
        object.__setattr__(self, "returns", arr)
        object.__setattr__(self, "dates", dates)

    def __len__(self) -> int:
        return int(self.returns.size)


@dataclass(frozen=True)
class RiskSpec:
    """One backtest configuration: window length, level and conventions.

    ``strict_violation`` selects return < -VaR as the violation event (and the
    matching strict tail conditioning); the non-strict variant uses <=.
    """

    duration_n: int
    level: Level
    conv: QuantileConvention = QuantileConvention.LARGEST
    strict_violation: bool = True

    def __post_init__(self) -> None:
        n = int(self.duration_n)
        if n != self.duration_n or n < 2:
            raise InputError(f"duration must be an integer >= 2, got {self.duration_n!r}")
        object.__setattr__(self, "duration_n", n)
        object.__setattr__(self, "level", _as_level(self.level))

    def label(self) -> str:
        """Row label in the reporting tables, e.g. '250,95%'."""
        return f"{self.duration_n},{self.level.alpha * 100:g}%"


@dataclass(frozen=True)
class VarBacktestRow:
    asset_id: str
    spec: RiskSpec
    evaluation_days: int
    violations: int
    observed_rate: float
    relative_error: float


@dataclass(frozen=True)
class TceBacktestRow:
    asset_id: str
    spec: RiskSpec
    blocks_total: int
    blocks_nonexistent: int
    nonexistence_rate: float
    mean_error: float | None
    blocks_undefined_prediction: int = 0


@dataclass(frozen=True)
class SkippedPair:
    asset_id: str
    spec: RiskSpec
    kind: str  # "var" or "tce"
    reason: str


@dataclass(frozen=True)
class SuiteReport:
    asset_ids: tuple[str, ...]
    specs: tuple[RiskSpec, ...]
    var_rows: tuple[VarBacktestRow, ...]
    tce_rows: tuple[TceBacktestRow, ...]
    skips: tuple[SkippedPair, ...]


def _rolling_var_values(returns: np.ndarray, n: int, level: Level, conv: QuantileConvention) -> np.ndarray:
    """One VaR forecast per evaluation day, each from the n preceding returns."""
    k = quantile_index(n, level, conv)
    out = np.empty(returns.size - n)
    for t in range(n, returns.size):
        out[t - n] = -np.partition(returns[t - n:t], k)[k]
    return out + 0.0  # normalize -0.0 entries


def rolling_var_forecasts(series: ReturnSeries, spec: RiskSpec) -> list[tuple[dt.date, float]]:
    """Daily VaR forecasts as (date, var) pairs, dated by the day being forecast."""
    n = spec.duration_n
    if len(series) <= n:
        raise InputError(
            f"{series.asset_id}: need at least {n + 1} returns for duration {n}, got {len(series)}"
        )
    values = _rolling_var_values(series.returns, n, spec.level, spec.conv)
    return list(zip(series.dates[n:], values.tolist()))


def var_backtest(series: ReturnSeries, spec: RiskSpec) -> VarBacktestRow:
    """Count daily VaR violations over the evaluation region and compare to 1 - alpha."""
    n = spec.duration_n
    if len(series) <= n:
        raise InputError(
            f"{series.asset_id}: need at least {n + 1} returns for duration {n}, got {len(series)}"
        )
    forecasts = _rolling_var_values(series.returns, n, spec.level, spec.conv)
    realized = series.returns[n:]
    thresholds = -forecasts
    hits = realized < thresholds if spec.strict_violation else realized <= thresholds
    violations = int(hits.sum())
    evaluation_days = int(realized.size)
    observed_rate = violations / evaluation_days
    tail_probability = 1.0 - spec.level.alpha
    relative_error = (observed_rate - tail_probability) / tail_probability
    return VarBacktestRow(
        asset_id=series.asset_id,
        spec=spec,
        evaluation_days=evaluation_days,
        violations=violations,
        observed_rate=observed_rate,
        relative_error=relative_error,
    )


def tce_backtest(series: ReturnSeries, spec: RiskSpec) -> TceBacktestRow:
    """Blockwise tail-expectation backtest.

    For each non-overlapping n-day block the VaR and the predicted tail
    expectation come from the n days immediately preceding it.  A block with
    zero violations counts as nonexistent.  A block whose *prediction* is
    already undefined (empty conditioning tail in the window, possible under
    strict conditioning) is excluded from both counts and only tallied in
    ``blocks_undefined_prediction``.  Block error = realized mean of violating
    returns + predicted tail expectation.
    """
    n = spec.duration_n
    if len(series) < 2 * n:
        raise InputError(
            f"{series.asset_id}: need at least {2 * n} returns for one {n}-day block, got {len(series)}"
        )
    returns = series.returns
    k = quantile_index(n, spec.level, spec.conv)
    strict = spec.strict_violation

    evaluated = 0
    nonexistent = 0
    undefined = 0
    block_errors: list[float] = []
    for start in range(n, returns.size - n + 1, n):
        window = returns[start - n:start]
        q = np.partition(window, k)[k]
        predicted_tail = window[window < q] if strict else window[window <= q]
        if predicted_tail.size == 0:
            undefined += 1
            continue
        predicted_tce = -float(predicted_tail.mean())
        block = returns[start:start + n]
        hits = block < q if strict else block <= q
        evaluated += 1
        if not np.any(hits):
            nonexistent += 1
        else:
            block_errors.append(float(block[hits].mean()) + predicted_tce)
    if evaluated == 0:
        raise InputError(
            f"{series.asset_id}: predicted tail expectation undefined for every block "
            f"(duration {n}, level {spec.level.alpha:g}, strict conditioning)"
        )
    return TceBacktestRow(
        asset_id=series.asset_id,
        spec=spec,
        blocks_total=evaluated,
        blocks_nonexistent=nonexistent,
        nonexistence_rate=nonexistent / evaluated,
        mean_error=float(np.mean(block_errors)) if block_errors else None,
        blocks_undefined_prediction=undefined,
    )


def run_suite(series_set: Iterable[ReturnSeries], specs: Sequence[RiskSpec]) -> SuiteReport:
    """Run both backtests for every (asset, spec) pair, skipping short series.

    Rows come back sorted (asset id, then duration, then level) regardless of
    input order, so rendered tables are deterministic.  A pair too short for a
    backtest is recorded as a SkippedPair instead of failing the suite.
    """
    series_list = list(series_set)
    if not series_list:
        raise InputError("at least one return series is required")
    ids = [s.asset_id for s in series_list]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise InputError(f"duplicate asset ids: {', '.join(dupes)}")
    spec_list = list(dict.fromkeys(specs))
    if not spec_list:
        raise InputError("at least one risk spec is required")

    series_list.sort(key=lambda s: s.asset_id)
    spec_list.sort(key=lambda sp: (sp.duration_n, sp.level.alpha, sp.conv.value, sp.strict_violation))

    var_rows: list[VarBacktestRow] = []
    tce_rows: list[TceBacktestRow] = []
    skips: list[SkippedPair] = []
    for series in series_list:
        for spec in spec_list:
            n = spec.duration_n
            if len(series) > n:
                var_rows.append(var_backtest(series, spec))
            else:
                skips.append(SkippedPair(
                    series.asset_id, spec, "var",
                    f"{len(series)} returns < required {n + 1}",
                ))
            if len(series) >= 2 * n:
                try:
                    tce_rows.append(tce_backtest(series, spec))
                except InputError as exc:
                    # every block undefined under strict conditioning
                    skips.append(SkippedPair(series.asset_id, spec, "tce", str(exc)))
            else:
                skips.append(SkippedPair(
                    series.asset_id, spec, "tce",
                    f"{len(series)} returns < required {2 * n}",
                ))
    return SuiteReport(
        asset_ids=tuple(sorted(ids)),
        specs=tuple(spec_list),
        var_rows=tuple(var_rows),
        tce_rows=tuple(tce_rows),
        skips=tuple(skips),
    )
