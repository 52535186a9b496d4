from .camera import (
    COORDS,
    CameraState,
    CameraWalkParams,
    affine_matrix,
    camera_trajectory,
    camera_walk_step,
    clock_walk_defaults,
    mnist_walk_defaults,
    sample_stationary,
)
from .clock import ClockState, advance_clock, render_clock, render_clock_frames, render_hands
from .idx import IdxFormatError, load_mnist, read_idx_images, read_idx_labels, write_idx_images, write_idx_labels
from .movies import (
    ClockMovie,
    MovieClip,
    clip_rng,
    downsample,
    downsample_4x4,
    make_clock_clip,
    make_mnist_batch,
    make_mnist_clip,
)
from .pgm import read_pgm, write_pgm
from .warp import warp_affine, warp_frames
