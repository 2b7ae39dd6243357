import pytest

from doublepool import _kernels_py, kernels

BACKENDS = ["python"]
try:
    from doublepool import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None
else:
    BACKENDS.append("cython")


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    impl = _kernels_py if request.param == "python" else _kernels_c
    monkeypatch.setattr(kernels, "scan_min_cost", impl.scan_min_cost)
    monkeypatch.setattr(kernels, "count_retests", impl.count_retests)
    return request.param
