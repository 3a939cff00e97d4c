from .layers import Edge, FixedAverage, Identity, Layer, Linear, Mode, MODES, Norm, NormState, ReLU, Zero
from .network import Network, Readout, READOUTS
from .gradients import (
    batch_gradients,
    forward,
    loss_and_grad,
    one_vs_all_targets,
    per_sample_gradient,
    scalar_readout,
)
