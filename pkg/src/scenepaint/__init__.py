"""Scene texturing engine: coarse-to-fine iterative inpainting of
compositional indoor scene meshes into globally consistent colored point
clouds, with interactive region and object editing."""

__version__ = "0.1.0"
