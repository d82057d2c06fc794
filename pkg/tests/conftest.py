import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conceptviews import FormalContext, ManyValuedView


def random_context(rng: np.random.Generator, n_obj: int, n_attr: int, density: float) -> FormalContext:
    dense = rng.random((n_obj, n_attr)) < density
    objects = [f"g{i}" for i in range(n_obj)]
    attributes = [f"m{j}" for j in range(n_attr)]
    return FormalContext(objects, attributes, dense)


def random_view(
    rng: np.random.Generator,
    n_obj: int = 8,
    n_cls: int = 3,
    h: int = 4,
    with_bias: bool = False,
) -> ManyValuedView:
    object_view = rng.normal(size=(n_obj, h))
    class_view = rng.normal(size=(n_cls, h))
    return ManyValuedView(
        object_ids=tuple(f"g{i}" for i in range(n_obj)),
        class_ids=tuple(f"c{i}" for i in range(n_cls)),
        object_view=object_view,
        class_view=class_view,
        bias=rng.normal(size=n_cls) if with_bias else None,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(202608)
