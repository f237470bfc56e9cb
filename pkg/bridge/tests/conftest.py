import numpy as np
import pytest
import torch
from PIL import Image

from vgg_bridge import ExtractionSpec, load_backbone

torch.set_num_threads(1)


@pytest.fixture(scope="session")
def backbone128():
    return load_backbone(ExtractionSpec(image_size=128))


def make_structured_image(seed, size, path):
    """Blobs over gradients: enough structure for matching to bite on."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size] / size
    img = np.zeros((size, size, 3))
    for _ in range(6):
        cx, cy, radius = rng.random(), rng.random(), 0.1 + 0.25 * rng.random()
        color = rng.random(3)
        img[((xx - cx) ** 2 + (yy - cy) ** 2) < radius**2] = color
    img = 0.6 * img + 0.4 * np.stack([yy, xx, 1 - yy], axis=-1)
    Image.fromarray((img * 255).astype(np.uint8)).save(path)
    return path


@pytest.fixture(scope="session")
def image_pair(tmp_path_factory):
    root = tmp_path_factory.mktemp("imgs")
    content = make_structured_image(10, 128, root / "content.png")
    style = make_structured_image(20, 128, root / "style.png")
    return content, style
