import numpy as np

from hypfrac.cache import atomic_write_npz, content_key, default_cache_dir, load_npz
from hypfrac.pipeline import build_forms


def test_env_var_overrides_cache_dir(monkeypatch, tmp_path):
    monkeypatch.setenv("HYPFRAC_CACHE", str(tmp_path / "elsewhere"))
    assert default_cache_dir() == tmp_path / "elsewhere"
    monkeypatch.delenv("HYPFRAC_CACHE")
    assert "hypfrac" in str(default_cache_dir())


def test_content_key_distinguishes_grids():
    a = content_key("forms", 3, "0.5", np.linspace(0, 1, 10))
    b = content_key("forms", 3, "0.5", np.linspace(0, 1, 11))
    c = content_key("forms", 3, "0.25", np.linspace(0, 1, 10))
    assert len({a, b, c}) == 3


def test_atomic_write_roundtrip(tmp_path):
    path = tmp_path / "nested" / "entry.npz"
    atomic_write_npz(path, x=np.arange(4.0))
    data = load_npz(path)
    assert np.array_equal(data["x"], np.arange(4.0))
    assert load_npz(tmp_path / "missing.npz") is None


def test_pipeline_cache_hit_reproduces(tmp_path):
    a = build_forms(3, 0.25, r_max=8.0, n=64, cache_dir=tmp_path)
    b = build_forms(3, 0.25, r_max=8.0, n=64, cache_dir=tmp_path)
    assert np.array_equal(a[2].nonlocal_mat, b[2].nonlocal_mat)
    assert np.array_equal(a[1].W, b[1].W)
    entries = list(tmp_path.glob("forms_*.npz"))
    assert len(entries) == 1


def test_pipeline_recovers_from_corrupt_entry(tmp_path):
    build_forms(3, 0.25, r_max=8.0, n=64, cache_dir=tmp_path)
    entry = next(tmp_path.glob("forms_*.npz"))
    entry.write_bytes(b"garbage")
    rebuilt = build_forms(3, 0.25, r_max=8.0, n=64, cache_dir=tmp_path)
    assert rebuilt[2].stiffness.shape == (64, 64)
