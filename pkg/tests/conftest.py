import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from scenepaint.core import ObjectInstance, RoomSpec, assemble_scene, box_mesh


@pytest.fixture
def simple_room() -> RoomSpec:
    return RoomSpec(4.0, 4.0, 3.0)


@pytest.fixture
def cube_scene(simple_room):
    """4x4x3 room with a floor-standing unit cube offset from the center."""
    cube = ObjectInstance(
        object_id="cube",
        mesh=box_mesh((1.0, 1.0, 1.0)),
        translation=np.array([1.0, 0.0, 0.5]),
        description="a plain cube",
    )
    return assemble_scene(simple_room, [cube], style_prompt="test style")
