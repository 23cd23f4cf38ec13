import dataclasses
from pathlib import Path

import numpy as np
import pytest

from sepkit.core.dataset import export_csv
from sepkit.core.models import DataMatrix, LabeledDataset
from sepkit.settings import settings


@pytest.fixture(autouse=True)
def default_settings(monkeypatch: pytest.MonkeyPatch):
    """
    Commands and settings tests change the global settings, restore them after each test.
    """
    saved = dataclasses.replace(settings)
    monkeypatch.delenv("SEPKIT_THREADS", raising=False)
    yield settings
    for field in dataclasses.fields(settings):
        setattr(settings, field.name, getattr(saved, field.name))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)


@pytest.fixture
def gaussian_cloud(rng: np.random.Generator) -> DataMatrix:
    return DataMatrix(rng.standard_normal((500, 20)))


@pytest.fixture
def labeled_cloud(rng: np.random.Generator) -> LabeledDataset:
    """
    200 points in dimension 6 around three class centers, some overlap between classes.
    """
    centers = rng.standard_normal((3, 6)) * 2
    labels = np.arange(200) % 3
    points = centers[labels] + rng.standard_normal((200, 6))
    return LabeledDataset(
        DataMatrix(points), tuple(f"c{x}" for x in labels), label_column="label"
    )


@pytest.fixture
def write_dataset(tmp_path: Path):
    def write(dataset: LabeledDataset | DataMatrix, name: str = "data.csv") -> Path:
        if isinstance(dataset, DataMatrix):
            dataset = LabeledDataset(dataset)
        path = tmp_path / name
        export_csv(dataset, path)
        return path

    return write
