import pytest

from app.core.file_storage import ReportStorage
from app.models.run import RunConfig, StopRule
from app.models.weights import NormSpec, ProfileSpec, WeightSpec
from app.weights import AlphaWeightFunction, NormPowerProfile, L1Norm


@pytest.fixture
def storage(tmp_path):
    return ReportStorage(str(tmp_path / "out"))


@pytest.fixture
def make_config():
    def _make(edges=200, alpha=0.0, dimension=2, seed=0, **kwargs):
        return RunConfig(dimension=dimension, weight=WeightSpec(alpha=alpha), seed=seed,
                         stop_rule=StopRule(kind="edge_count", edges=edges), **kwargs)
    return _make


@pytest.fixture
def l1_weight_spec():
    return WeightSpec(alpha=1.0, profile=ProfileSpec(kind="norm_power", norm=NormSpec(kind="l1")))


@pytest.fixture
def l1_power():
    """f(z) = |z|^alpha * |z/|z||_1, the anisotropic profile used across the metric tests."""
    def _make(alpha):
        return AlphaWeightFunction(alpha, NormPowerProfile(L1Norm(), 1.0), d=2)
    return _make
