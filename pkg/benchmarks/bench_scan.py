"""Time the compiled scan kernel against the pure numpy fallback.

Both backends expose the same ``window_norms`` entry point, so this calls
them directly on identical prefix tables and window arrays. Two workloads:
the large cubic-window scan (many sites, one window shape) and a small
all-boxes scan (few sites, many window shapes).
"""

import math
import time

import numpy as np

from fieldscan import (
    AllWindows,
    CubicWindows,
    FieldDims,
    ScanSpace,
    SimConfig,
    build_prefix,
    enumerate_windows,
    generate,
)
from fieldscan import _scan_np
from fieldscan.scan import _boxes_to_arrays, active_backend

try:
    from fieldscan import _scanext
except ImportError:
    _scanext = None


def _prepare(dims, n, generator, m):
    fd = FieldDims(dims, n)
    field = generate(SimConfig(fd, m=m, sigma=1.0), 12345)
    space = ScanSpace(fd, generator)
    boxes = enumerate_windows(space)
    origins, sizes = _boxes_to_arrays(boxes)
    table = build_prefix(field).as_ndarray()
    return table, origins, sizes, fd.total_sites


def _time(backend, args, repeats=5):
    best = math.inf
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = backend.window_norms(*args, math.inf, want_l=False)
        best = min(best, time.perf_counter() - start)
    return best, result[0]


def _report(label, args):
    np_time, np_norms = _time(_scan_np, args)
    print(f"{label}")
    print(f"  numpy fallback : {np_time * 1e3:9.2f} ms")
    if _scanext is not None:
        ext_time, ext_norms = _time(_scanext, args)
        print(f"  cython kernel  : {ext_time * 1e3:9.2f} ms")
        print(f"  speedup        : {np_time / ext_time:9.2f}x")
        worst = float(np.max(np.abs(np_norms - ext_norms)))
        print(f"  max |diff|     : {worst:.3e}")
    else:
        print("  cython kernel  : not built")


def main():
    print(f"active backend at import: {active_backend()}")
    large = _prepare((50, 50, 50), 3, CubicWindows(30), m=5)
    print(f"windows: {len(large[1])}, sites: {large[3]}")
    _report("large field, cubic windows", large)
    small = _prepare((8, 8, 8), 2, AllWindows(), m=2)
    print(f"windows: {len(small[1])}, sites: {small[3]}")
    _report("small field, all boxes", small)


if __name__ == "__main__":
    main()
