"""Central tolerance and limit table.

Every numerical threshold used across the package lives here so that tests
and library code agree on one set of values.
"""

# Hermiticity validation: max |A - A^dag| entry, relative to matrix scale.
HERMITICITY_TOL = 1e-12

# Jacobi eigensolver: stop when off-diagonal Frobenius norm <= JACOBI_TOL * ||A||_F.
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100

# Eigendecomposition contract: residual ||A v - lambda v|| <= EIG_RESIDUAL_TOL * ||A||.
EIG_RESIDUAL_TOL = 1e-10

# PSD check: min eigenvalue >= -PSD_TOL.
PSD_TOL = 1e-9

# Bloch vectors: physical states need |theta| <= 1 (+ rounding slack);
# derivative-based quantities (SLD, QFI) need strict interior.
BLOCH_NORM_SLACK = 1e-12
INTERIOR_MARGIN = 1e-9

# POVM checks.
COMPLETENESS_TOL = 1e-9          # max-entry deviation of sum(elements) from identity
REFERENCE_COMPLETENESS_TOL = 2e-3  # four-decimal hard-coded reference POVMs
PROB_NEGATIVE_TOL = 1e-12        # outcome probabilities may round to -1e-12
PROB_SUM_TOL = 1e-9
FISHER_PROB_CUTOFF = 1e-12       # outcomes below this need vanishing derivatives

# SLD defining-equation residual.
SLD_RESIDUAL_TOL = 1e-10

# SDP solver.
SDP_GAP_TOL = 1e-8
SDP_FEAS_TOL = 1e-8
SDP_MAX_ITER = 200
SDP_STEP_FRACTION = 0.98
SDP_BLOCH_LIMIT = 1 - 1e-6       # reject states closer to the Bloch sphere than this

# Maximum-likelihood estimation.
MLE_KKT_TOL = 1e-7
MLE_MAX_ITER = 2000
MLE_ARMIJO = 1e-4
MLE_BALL_RADIUS = 1 - 1e-6
MLE_POLISH_ITER = 500

# Trade-off surface scans.
SURFACE_FEAS_TOL = 1e-6
VERTEX_MERGE_TOL = 1e-7
PARALLEL_NORMAL_TOL = 1e-10
VERTEX_BOX_LIMIT = 50.0
BOUNDARY_RESIDUAL_TOL = 1e-6

# Monte Carlo experiment defaults.
DEFAULT_SEED = 42
BOOTSTRAP_RESAMPLES = 50
