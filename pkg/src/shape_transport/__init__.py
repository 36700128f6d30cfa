"""Transport of deformations between planar landmark trajectories.

Tools for Procrustes alignment, thin-plate splines, Levi-Civita and Direct
Transport of deformations, tangent-space PCA of the centred trajectories and
synthetic datasets with known ground truth.
"""

__version__ = "0.1.0"

from .errors import (
    AntipodalConfigurations,
    CardinalityMismatch,
    DegenerateShape,
    DuplicateLandmarks,
    EmptyTrajectory,
    InvalidConfiguration,
    NoConvergence,
    NumericalError,
    ParseError,
    SchemaError,
    ShapeTransportError,
    SingularConfiguration,
    SingularMatrix,
    SingularParameter,
    SingularSystem,
    ValidationError,
)
from .ordination import PcaResult, pca, tangent_project
from .pipelines import PipelineConfig, PipelineOutput, run_classic, run_dt, run_lc, run_pipeline
from .shapes import (
    Trajectory,
    TrajectorySet,
    center,
    gpa,
    hpa,
    mopa_align,
    opa_align,
    procrustes_distance,
    pseudo_inverse,
    size_and_shape_distance,
)
from .simulation import CycleSpec, DatasetCase, generate_case, make_reference_bodies
from .tps import TpsModel, tps_eval, tps_fit
from .transport import dt_affine, dt_pointpair, dt_size_and_shape, lc_transport, transport_quality
