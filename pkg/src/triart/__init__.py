"""Triangle-approximation art pipeline with a toy conditioning block.

Four layers: exact triangle geometry (`geometry`), stochastic image
approximation (`approximator`), dataset construction around it
(`dataset`), and a fully-inspectable locked/copy/zero-conv conditioning
block with handwritten gradients (`zeroconv`).  The `triart` entry point
exposes all of it on the command line.
"""

from .approximator import (
    ApproxConfig,
    ApproxState,
    PlacedShape,
    approximate,
    average_color,
    compute_optimal_color,
    draw_shape,
    export_svg,
    score_rmse,
)
from .dataset import (
    BuildConfig,
    BuildReport,
    DatasetError,
    build,
    dataset_stats,
    discover_inputs,
    validate_manifest,
)
from .geometry import (
    BoundingBox,
    Point,
    Scanline,
    Triangle,
    bounding_box,
    mutate_triangle,
    random_triangle,
    rasterize_triangle,
)
from .raster import Color, Raster, load_raster, resize_center_crop, save_png
from .zeroconv import (
    ControlNetBlock,
    NetBlock,
    Param,
    ToyTask,
    TrainConfig,
    ZeroConv,
    evaluation_set,
    init_controlnet,
    load_checkpoint,
    make_toy_task,
    run_verification,
    save_checkpoint,
    train_toy,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxConfig",
    "ApproxState",
    "BoundingBox",
    "BuildConfig",
    "BuildReport",
    "Color",
    "ControlNetBlock",
    "DatasetError",
    "NetBlock",
    "Param",
    "PlacedShape",
    "Point",
    "Raster",
    "Scanline",
    "ToyTask",
    "TrainConfig",
    "Triangle",
    "ZeroConv",
    "approximate",
    "average_color",
    "bounding_box",
    "build",
    "compute_optimal_color",
    "dataset_stats",
    "discover_inputs",
    "draw_shape",
    "evaluation_set",
    "export_svg",
    "init_controlnet",
    "load_checkpoint",
    "load_raster",
    "make_toy_task",
    "mutate_triangle",
    "random_triangle",
    "rasterize_triangle",
    "resize_center_crop",
    "run_verification",
    "save_checkpoint",
    "save_png",
    "score_rmse",
    "train_toy",
    "validate_manifest",
]
