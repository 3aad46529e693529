"""Single-pixel imaging at desk scale: Hadamard sensing of MNIST digits,
variance-based compressive selection, and classification/reconstruction with
classical dense networks and statevector-simulated parameterized circuits."""

__version__ = "0.1.0"

from .sensing import (
    HadamardOrder,
    ImageObject,
    MeasurementVector,
    SelectionMask,
    apply_mask,
    export_pattern_image,
    fwht,
    hadamard_row,
    measure_full,
    reconstruct_linear,
    select_top_variance,
)
from .datasets import (
    DatasetSplit,
    LabeledImage,
    MeasurementDataset,
    build_measurement_dataset,
    build_reduced_dataset,
    load_idx_images,
    load_idx_labels,
    load_split,
    preprocess,
)
from .nn import (
    DenseNetwork,
    TrainConfig,
    adam_step,
    build_classifier,
    build_reconstructor,
    cross_entropy_loss,
    mse_loss,
    parameter_count,
    predict_class,
    predict_image,
    train,
)
from .qsim import (
    AnsatzSpec,
    Readout,
    StateVector,
    amplitude_embed,
    apply_cnot,
    apply_ry,
    expectation_z0,
    gradients_backprop,
    gradients_parameter_shift,
    probabilities,
    run_ansatz,
)
from .qmodels import (
    QuantumClassifier,
    QuantumReconstructor,
    build_quantum_classifier,
    build_quantum_reconstructor,
    classifier_predict,
    classifier_scores,
    margin_loss,
    reconstructor_forward,
    train_quantum_classifier,
    train_quantum_reconstructor,
)
from .metrics import SsimConfig, accuracy, dataset_ssim, ssim
from .qpu_time import (
    CircuitDepthProfile,
    HardwareProfile,
    depth_from_ansatz,
    element_time,
    epoch_time,
)
