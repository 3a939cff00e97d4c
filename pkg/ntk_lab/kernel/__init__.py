from .ntk import (
    DEFAULT_PROBE_SIZE,
    KernelMatrix,
    ProbeBatch,
    compute_ntk,
    draw_probe,
    kernel_correlation,
    read_kernel,
    relative_kernel_difference,
    write_kernel,
)
