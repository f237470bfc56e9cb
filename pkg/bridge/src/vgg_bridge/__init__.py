"""Image-level adapter around the .dsfm swap pipeline."""

from .backbone import Backbone, ExtractionSpec, load_backbone
from .dsfm import DsfmError, read_dsfm, write_dsfm
from .extract import extract_features, extract_to_dsfm, load_image01
from .invert import ShapeMismatch, invert_features, to_uint8
from .perceptual import lpips_distance

__version__ = "0.1.0"
