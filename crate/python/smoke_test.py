"""Smoke test for the rwseg extension module.

Build it first with `pip install --no-build-isolation -e crates/py`, then run
`python python/smoke_test.py` from the repository root.
"""

import os
import tempfile

import rwseg

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CASE = os.path.join(ROOT, "data", "corpus", "04_two_lobes")


def midpoint():
    # 3x2 constant image, left column background, right column foreground.
    img = rwseg.Image(3, 2, [0.5] * 6)
    seeds = rwseg.Seeds(3, 2, foreground=[2, 5], background=[0, 3])
    out = rwseg.segment(img, seeds, "rw")
    values = out.map.values()
    assert out.stop == "single_pass" and out.iterations == 0
    assert abs(values[1] - 0.5) < 1e-9 and abs(values[4] - 0.5) < 1e-9
    assert out.map.labels() == [False, False, True, False, False, True]


def corpus_case():
    img = rwseg.Image.load(os.path.join(CASE, "image.png"))
    seeds = rwseg.Seeds.load(os.path.join(CASE, "seeds.png"))
    trimap = rwseg.Trimap.load(os.path.join(CASE, "trimap.png"))
    assert (img.width, img.height) == (48, 48)

    rw = rwseg.segment(img, seeds, "rw")
    ibrw = rwseg.segment(img, seeds, "ibrw", trimap=trimap)
    trace = ibrw.trace()
    assert len(trace) == ibrw.iterations + 1 == len(ibrw.potentials)
    assert trace[0]["error_count"] is not None
    assert ibrw.seeds.foreground_count >= seeds.foreground_count
    rw_err = rw.map.error_rate(trimap)[2]
    ibrw_err = ibrw.map.error_rate(trimap)[2]
    print(f"two_lobes: rw {rw_err:.4f}  ibrw {ibrw_err:.4f}  ({ibrw.iterations} iterations, {ibrw.stop})")

    # lambda = 0 makes IBRW and IRW the same run.
    a = rwseg.segment(img, seeds, "ibrw", lambda_=0.0, sample_fraction=0.5, rng_seed=4)
    b = rwseg.segment(img, seeds, "irw", lambda_=0.0, sample_fraction=0.5, rng_seed=4)
    assert a.map.labels() == b.map.labels() and a.trace() == b.trace()

    bound = img.min_weight()
    try:
        rwseg.segment(img, seeds, "ibrw", lambda_=2 * bound)
    except rwseg.ConvexityError as e:
        assert e.args[2] == bound
    else:
        raise AssertionError("expected ConvexityError")

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "p.pmap")
        ibrw.map.save_raster(path)
        back = rwseg.ProbabilityMap.load_raster(path)
        assert back.values() == ibrw.map.values()
        ibrw.map.save_png(os.path.join(tmp, "p.png"))
        ibrw.map.save_labels(os.path.join(tmp, "l.png"))


def strokes():
    seeds = rwseg.Seeds(8, 6)
    seeds.paint("background", 0.0, [(0, 0), (0, 5)])
    seeds.paint("foreground", 1.0, [(6, 3)])
    assert seeds.background_count == 6 and seeds.foreground_count == 5
    seeds.paint("erase", 0.0, [(6, 3)])
    assert seeds.foreground_count == 4
    try:
        seeds.paint("foreground", 0.0, [(9, 0)])
    except ValueError:
        pass
    else:
        raise AssertionError("expected an out-of-bounds error")


if __name__ == "__main__":
    midpoint()
    corpus_case()
    strokes()
    print("python smoke test passed")
