# Blahut-Arimoto configs
BA_STOP = 1e-8
BA_MAX_ITER = 100000
BA_SEED = 0
DECODER_FLOOR = 1e-300
NORMALIZATION_ATOL = 1e-12

# Root tracking configs
TRACK_DELTA_BETA = -0.01
REDUCTION_DELTA1 = 1e-2
REDUCTION_DELTA2 = 1e-2
SINGULARITY_DELTA3 = 1e-2
CORRECTOR_STEPS = 1
SINGULARITY_CHECK = True
SINGULARITY_SETTLE = 1e-1

# Derivative configs
FINITE_DIFFERENCE_STEP = 1e-6
RHS_CONSISTENCY_ATOL = 1e-8

# Oracle configs
BRUTE_FORCE_MAX_X = 3
BRUTE_FORCE_MAX_CLUSTERS = 2
BRUTE_FORCE_MAX_RESOLUTION = 201
BRUTE_FORCE_POLISH_STOP = 1e-12
CRITICAL_BETA_RTOL = 1e-12

# Scan and study configs
EIG_SCAN_BA_STOP = 1e-9
ORDER_STUDY_MAX_WORKERS = None
ORDER_STUDY_FIT_POINTS = None

# Output configs
CSV_FLOAT_FORMAT = '%.17g'
CSV_SCHEMA_VERSION = 1
LOG_LEVEL = 'WARNING'
