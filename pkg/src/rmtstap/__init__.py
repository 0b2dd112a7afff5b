"""Space-time adaptive processing with random-matrix-theory eigenvalue correction."""
from .numerics import ContractError, EigenSystem, eigh, herm_sqrt, solve_or_pinv
from .scene import (ClutterScene, RadarConfig, SpaceTimeSteering, build_scene,
                    clutter_frequencies, clutter_rank, steering)
from .sampling import SampleCncm, SnapshotSet, draw_snapshots, sample_cncm
from .stap import (DegenerateInverseError, Method, PowerReport, StapWeights, fd_stap,
                   lcmv_weights, optimal_weights, output_power, scnr_loss)
from .reduced import (ReducedScene, ReducedTransform, efa_transform, rd_stap, reduce,
                      reduce_samples)
from .rmt import (CorrectedInverse, NotApplicable, SpikeCorrection, SpikedRatio,
                  deterministic_equivalent_power, estimate_k, estimate_rho, optimal_h,
                  rmt_fd_inverse, rmt_fd_stap, rmt_rd_inverse, rmt_rd_stap)
from .harness import ConfigError, ResultRow, Scenario, emit_csv, run_scenario

__version__ = "0.1.0"
