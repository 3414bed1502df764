#!/usr/bin/env python3
"""Smoke test for the rbepwt_py extension module.

Builds nothing itself: it locates the cdylib produced by
`cargo build --release -p rbepwt-python` (or the debug build), copies it
next to a temp directory under the importable name and runs a short
segment/encode/decode/threshold/ROI round through the bindings.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def locate_cdylib() -> Path:
    names = ["librbepwt_py.so", "rbepwt_py.dll", "librbepwt_py.dylib"]
    for profile in ("release", "debug"):
        for name in names:
            p = REPO / "target" / profile / name
            if p.exists():
                return p
    sys.exit(
        "extension module not built; run `cargo build --release -p rbepwt-python` first"
    )


def import_module():
    lib = locate_cdylib()
    tmp = Path(tempfile.mkdtemp(prefix="rbepwt_py_"))
    suffix = ".pyd" if lib.suffix == ".dll" else ".so"
    shutil.copy2(lib, tmp / f"rbepwt_py{suffix}")
    sys.path.insert(0, str(tmp))
    import rbepwt_py

    return rbepwt_py


def cartoon(n: int):
    pixels = []
    for r in range(n):
        for c in range(n):
            q = (0 if r < n // 2 else 2) + (0 if c < n // 2 else 1)
            pixels.append([0.0, 80.0, 160.0, 240.0][q])
    return pixels


def main() -> None:
    m = import_module()

    n = 32
    img = m.GrayImage(n, n, cartoon(n))
    assert img.width == n and img.height == n

    lm = m.fh_segment(img, k=200.0, sigma=0.0, min_size=10)
    assert lm.region_count == 4, f"expected 4 regions, got {lm.region_count}"
    assert lm.perimeter() == 2 * n, f"unexpected perimeter {lm.perimeter()}"

    enc = m.encode(img, lm, mode="easy", wavelet="cdf97")
    assert enc.coeff_count == n * n
    dec = m.decode(enc)
    err = max(abs(a - b) for a, b in zip(dec.pixels(), img.pixels()))
    assert err < 1e-6, f"roundtrip error {err}"

    blob = enc.to_bytes()
    again = m.Encoded.from_bytes(blob)
    assert again.to_bytes() == blob, "container bytes not stable"

    thin = m.keep_n_largest(enc, 64)
    assert thin.nonzero_count == 64
    quality = m.psnr_std(img, m.decode(thin))
    assert quality > 30.0, f"cartoon at 64 coefficients should be clean, got {quality}"
    assert math.isinf(m.psnr_paper(img, img))

    haar = m.encode(img, lm, mode="easy", wavelet="haar")
    roi = m.keep_ancestors_only(haar, [3])
    roi_dec = m.decode(roi)
    for r in range(n // 2, n):
        for c in range(n // 2, n):
            assert abs(roi_dec.get(r, c) - img.get(r, c)) < 1e-9
    tiered = m.roi_threshold(haar, [3], 1.0, 0.0)
    # Keeping every ROI ancestor and nothing else drops the detail
    # coefficients of the other quadrant junctures but keeps the ROI exact.
    assert 0 < tiered.nonzero_count < haar.nonzero_count
    tiered_dec = m.decode(tiered)
    assert all(
        abs(tiered_dec.get(r, c) - img.get(r, c)) < 1e-9
        for r in range(n // 2, n)
        for c in range(n // 2, n)
    )

    basis = m.basis_element(haar, 0, 0)
    expect = (1.0 / math.sqrt(2.0)) ** haar.levels
    assert all(abs(v - expect) < 1e-12 for v in basis.pixels())

    epwt = m.encode(img, lm, mode="epwt", wavelet="haar", levels=6)
    assert epwt.mode == "epwt"
    err = max(abs(a - b) for a, b in zip(m.decode(epwt).pixels(), img.pixels()))
    assert err < 1e-9

    print("smoke test passed")


if __name__ == "__main__":
    main()
