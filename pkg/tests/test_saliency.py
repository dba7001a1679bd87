import numpy as np
import pytest

from beamsense.classifier import build_model
from beamsense.dataset import ArrayWindows
from beamsense.saliency import (
    SaliencyMap, apply_permutation, central_mass_fraction, compute_saliency,
    export_saliency, load_saliency_csv, permute_beams,
)
from beamsense.sweepgen import generate_session


@pytest.fixture(scope="module")
def source():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((40, 20, 50, 56))
    y = rng.integers(0, 8, 40)
    return ArrayWindows(x, y)


def test_zero_weight_model_zero_map(source):
    model = build_model(0)
    model.head.weights[:] = 0.0
    model.head.bias[:] = 0.0
    smap = compute_saliency(model, source, n=10, seed=1)
    assert smap.values.shape == (50, 56)
    assert np.all(smap.values == 0.0)


def test_saliency_nonnegative_and_deterministic(source):
    model = build_model(1)
    a = compute_saliency(model, source, n=20, seed=2)
    b = compute_saliency(model, source, n=20, seed=2)
    assert np.all(a.values >= 0)
    assert np.array_equal(a.values, b.values)
    c = compute_saliency(model, source, n=20, seed=3)
    assert not np.array_equal(a.values, c.values)


def test_saliency_uses_all_when_short(source):
    model = build_model(1)
    with pytest.warns(UserWarning):
        smap = compute_saliency(model, source, n=1000, seed=0)
    assert smap.n_samples == len(source)


def test_permutation_identity_roundtrip():
    sess = generate_session(1, 1, seconds_per_gesture=0.2, seed=0)
    permuted, tx_perm, rx_perm = permute_beams(sess, seed=4)
    # applying the inverse permutation restores the original
    inv_tx = np.argsort(tx_perm)
    inv_rx = np.argsort(rx_perm)
    back = apply_permutation(permuted, inv_tx, inv_rx)
    assert np.array_equal(back.frames, sess.frames)
    ident = apply_permutation(sess, np.arange(50), np.arange(56))
    assert np.array_equal(ident.frames, sess.frames)


def test_permutation_preserves_value_multiset():
    sess = generate_session(1, 1, seconds_per_gesture=0.2, seed=1)
    permuted, _, _ = permute_beams(sess, seed=5)
    for i in range(0, len(sess.frames), 50):
        assert np.array_equal(np.sort(sess.frames[i], axis=None),
                              np.sort(permuted.frames[i], axis=None))


def test_central_mass_fraction():
    vals = np.zeros((50, 56))
    vals[20, 30] = 1.0
    assert central_mass_fraction(SaliencyMap(vals, 1)) == 1.0
    vals2 = np.ones((50, 56))
    assert central_mass_fraction(SaliencyMap(vals2, 1)) == pytest.approx(
        (25 * 28) / (50 * 56))


def test_central_axis_mass():
    from beamsense.saliency import central_axis_mass
    vals = np.zeros((50, 56))
    vals[20, 30] = 1.0
    assert central_axis_mass(SaliencyMap(vals, 1)) == (1.0, 1.0)
    uniform = central_axis_mass(SaliencyMap(np.ones((50, 56)), 1))
    assert uniform[0] == pytest.approx(0.5)
    assert uniform[1] == pytest.approx(0.5)
    assert central_axis_mass(SaliencyMap(np.zeros((50, 56)), 1)) == (0.0, 0.0)


def test_export_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(6)
    smap = SaliencyMap(np.abs(rng.standard_normal((50, 56))), 10)
    path = tmp_path / "map.csv"
    export_saliency(smap, path, fmt="csv")
    back = load_saliency_csv(path)
    assert back.shape == (50, 56)
    assert np.allclose(back, smap.values, rtol=1e-9)


def test_export_pgm(tmp_path):
    rng = np.random.default_rng(7)
    smap = SaliencyMap(np.abs(rng.standard_normal((50, 56))), 10)
    path = tmp_path / "map.pgm"
    export_saliency(smap, path, fmt="pgm")
    data = path.read_bytes()
    assert data.startswith(b"P5\n56 50\n255\n")
    pixels = np.frombuffer(data.split(b"255\n", 1)[1], dtype=np.uint8)
    assert pixels.max() == 255
    assert pixels[np.argmax(smap.values.ravel())] == 255


def test_export_pgm_zero_map(tmp_path):
    smap = SaliencyMap(np.zeros((50, 56)), 1)
    path = tmp_path / "zero.pgm"
    export_saliency(smap, path, fmt="pgm")
    pixels = np.frombuffer(path.read_bytes().split(b"255\n", 1)[1], dtype=np.uint8)
    assert np.all(pixels == 0)


def test_export_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        export_saliency(SaliencyMap(np.zeros((50, 56)), 1), tmp_path / "x", fmt="png")
