"""Pure window-aggregation kernels: the numeric hot path of the engine.

Each kernel recomputes the aggregate over the full window extent at every
candidate emission, summing in arrival order — deliberately not a rolling
add/subtract sum, so results stay bit-identical to a from-scratch oracle
recomputation (the exactness contract shared with the live operators).

Window conventions:
  sliding (time W):   events with ts in (t_now - W, t_now]
  sliding (count N):  the last N events
  batch (time W):     blocks [t0 + k*W, t0 + (k+1)*W) aligned to the first
                      event (or to `origin` when given); a block emits when
                      something later closes it; empty blocks emit nothing
  batch (count N):    every N-th event closes a block
  latest (time W):    newest event per source, dropped once older than W;
                      W=None keeps every source's newest forever

Kernels are compiled with numba @njit when available; set GRIDCEP_NUMBA=0
to force the pure-NumPy fallback. Both paths execute the same statements,
so their outputs are identical to the bit.
"""

from __future__ import annotations

import os

import numpy as np

FN_SUM, FN_AVG, FN_COUNT = 0, 1, 2
_FN_CODES = {"SUM": FN_SUM, "AVG": FN_AVG, "COUNT": FN_COUNT}

# fn dispatch is inlined in every kernel: numba-friendly and keeps the
# interpreted fallback free of any compiled dependency.


def _sliding_time_kernel(ts, vals, width, fn):
    n = ts.shape[0]
    out_ts = np.empty(n, dtype=np.int64)
    out_val = np.empty(n, dtype=np.float64)
    left = 0
    for i in range(n):
        while ts[left] <= ts[i] - width:
            left += 1
        acc = 0.0
        cnt = 0
        for k in range(left, i + 1):
            acc += vals[k]
            cnt += 1
        out_ts[i] = ts[i]
        if fn == 1:
            out_val[i] = acc / cnt if cnt > 0 else 0.0
        elif fn == 2:
            out_val[i] = float(cnt)
        else:
            out_val[i] = acc
    return out_ts, out_val


def _sliding_count_kernel(ts, vals, nevents, fn):
    n = ts.shape[0]
    out_ts = np.empty(n, dtype=np.int64)
    out_val = np.empty(n, dtype=np.float64)
    for i in range(n):
        start = i - nevents + 1
        if start < 0:
            start = 0
        acc = 0.0
        cnt = 0
        for k in range(start, i + 1):
            acc += vals[k]
            cnt += 1
        out_ts[i] = ts[i]
        if fn == 1:
            out_val[i] = acc / cnt if cnt > 0 else 0.0
        elif fn == 2:
            out_val[i] = float(cnt)
        else:
            out_val[i] = acc
    return out_ts, out_val


def _batch_time_kernel(ts, vals, width, fn, origin, end_time):
    n = ts.shape[0]
    out_ts = np.empty(n + 1, dtype=np.int64)
    out_val = np.empty(n + 1, dtype=np.float64)
    m = 0
    t0 = origin if origin >= 0 else ts[0]
    cur_block = (ts[0] - t0) // width
    start_idx = 0
    for i in range(n):
        bi = (ts[i] - t0) // width
        if bi > cur_block:
            if i > start_idx:
                acc = 0.0
                cnt = 0
                for k in range(start_idx, i):
                    acc += vals[k]
                    cnt += 1
                out_ts[m] = ts[i - 1]
                if fn == 1:
                    out_val[m] = acc / cnt if cnt > 0 else 0.0
                elif fn == 2:
                    out_val[m] = float(cnt)
                else:
                    out_val[m] = acc
                m += 1
            cur_block = bi
            start_idx = i
    if end_time >= 0 and end_time >= t0 + (cur_block + 1) * width and n > start_idx:
        acc = 0.0
        cnt = 0
        for k in range(start_idx, n):
            acc += vals[k]
            cnt += 1
        out_ts[m] = ts[n - 1]
        if fn == 1:
            out_val[m] = acc / cnt if cnt > 0 else 0.0
        elif fn == 2:
            out_val[m] = float(cnt)
        else:
            out_val[m] = acc
        m += 1
    return out_ts[:m], out_val[:m]


def _batch_count_kernel(ts, vals, nevents, fn):
    n = ts.shape[0]
    out_ts = np.empty(n // nevents + 1, dtype=np.int64)
    out_val = np.empty(n // nevents + 1, dtype=np.float64)
    m = 0
    filled = 0
    start_idx = 0
    for i in range(n):
        filled += 1
        if filled == nevents:
            acc = 0.0
            cnt = 0
            for k in range(start_idx, i + 1):
                acc += vals[k]
                cnt += 1
            out_ts[m] = ts[i]
            if fn == 1:
                out_val[m] = acc / cnt if cnt > 0 else 0.0
            elif fn == 2:
                out_val[m] = float(cnt)
            else:
                out_val[m] = acc
            m += 1
            filled = 0
            start_idx = i + 1
    return out_ts[:m], out_val[:m]


def _latest_kernel(ts, vals, src, width, fn):
    n = ts.shape[0]
    nsrc = 0
    for i in range(n):
        if src[i] + 1 > nsrc:
            nsrc = src[i] + 1
    out_ts = np.empty(n, dtype=np.int64)
    out_val = np.empty(n, dtype=np.float64)
    last = np.full(nsrc, -1, dtype=np.int64)
    live = np.empty(nsrc, dtype=np.int64)
    for i in range(n):
        last[src[i]] = i
        nlive = 0
        for s in range(nsrc):
            k = last[s]
            if k >= 0 and (width < 0 or ts[k] > ts[i] - width):
                live[nlive] = k
                nlive += 1
        order = np.sort(live[:nlive])  # arrival order of the retained events
        acc = 0.0
        cnt = 0
        for j in range(nlive):
            acc += vals[order[j]]
            cnt += 1
        out_ts[i] = ts[i]
        if fn == 1:
            out_val[i] = acc / cnt if cnt > 0 else 0.0
        elif fn == 2:
            out_val[i] = float(cnt)
        else:
            out_val[i] = acc
    return out_ts, out_val


_PY_KERNELS = {
    "sliding_time": _sliding_time_kernel,
    "sliding_count": _sliding_count_kernel,
    "batch_time": _batch_time_kernel,
    "batch_count": _batch_count_kernel,
    "latest": _latest_kernel,
}

_JIT_KERNELS: dict | None = None


def _env_numba_enabled() -> bool:
    flag = os.environ.get("GRIDCEP_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


def _build_jit_kernels() -> dict:
    global _JIT_KERNELS
    if _JIT_KERNELS is None:
        try:
            from numba import njit
        except ImportError:
            _JIT_KERNELS = {}
        else:
            _JIT_KERNELS = {name: njit(cache=True)(fn) for name, fn in _PY_KERNELS.items()}
    return _JIT_KERNELS


def numba_enabled() -> bool:
    """True when the jitted kernels are both requested and importable."""
    return _env_numba_enabled() and bool(_build_jit_kernels())


def get_kernels(use_numba: bool | None = None) -> dict:
    """Kernel set selection: env default, or forced via `use_numba`."""
    if use_numba is None:
        use_numba = _env_numba_enabled()
    if use_numba:
        jit = _build_jit_kernels()
        if jit:
            return jit
    return _PY_KERNELS


def window_aggregate(events, *, fn: str, mode: str = "sliding",
                     width_seconds: int | None = None, width_events: int | None = None,
                     having=None, origin: int | None = None, end_time: int | None = None,
                     use_numba: bool | None = None) -> list[tuple[int, float]]:
    """Run one aggregate over a finished (timestamp, value[, source]) trace.

    Returns the gated emission list [(timestamp, value), ...]; `having` is
    an optional predicate over candidate values. `origin` aligns batch
    blocks (defaults to the first event's timestamp); `end_time` closes a
    trailing batch block the way a runtime tick would.
    """
    fn_code = _FN_CODES[fn.upper()]
    rows = list(events)
    if not rows:
        return []
    ts = np.asarray([r[0] for r in rows], dtype=np.int64)
    vals = np.asarray([float(r[1]) for r in rows], dtype=np.float64)
    kernels = get_kernels(use_numba)

    if mode == "sliding":
        if width_seconds is not None:
            out_ts, out_val = kernels["sliding_time"](ts, vals, np.int64(width_seconds), fn_code)
        elif width_events is not None:
            out_ts, out_val = kernels["sliding_count"](ts, vals, np.int64(width_events), fn_code)
        else:
            raise ValueError("sliding window needs width_seconds or width_events")
    elif mode == "batch":
        if width_seconds is not None:
            out_ts, out_val = kernels["batch_time"](
                ts, vals, np.int64(width_seconds), fn_code,
                np.int64(origin if origin is not None else -1),
                np.int64(end_time if end_time is not None else -1))
        elif width_events is not None:
            out_ts, out_val = kernels["batch_count"](ts, vals, np.int64(width_events), fn_code)
        else:
            raise ValueError("batch window needs width_seconds or width_events")
    elif mode == "latest":
        codes: dict = {}
        index = []
        for r in rows:
            key = r[2] if len(r) > 2 else ""
            index.append(codes.setdefault(key, len(codes)))
        src = np.asarray(index, dtype=np.int64)
        out_ts, out_val = kernels["latest"](
            ts, vals, src, np.int64(width_seconds if width_seconds is not None else -1), fn_code)
    else:
        raise ValueError(f"unknown window mode {mode!r}")

    out = []
    for t, v in zip(out_ts.tolist(), out_val.tolist()):
        if having is None or having(v):
            out.append((t, v))
    return out
