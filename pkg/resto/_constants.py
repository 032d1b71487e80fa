DIVISION_EPSILON = 1e-12

DEFAULT_SAMPLE_RATE = 16000
SPEED_OF_SOUND = 340.0

SI_SDR_CAP = 120.0

LOG_FLOOR = 1e-7
WEIGHT_THRESHOLD = 1e-8

# production sizes, tests use much smaller stacks
CODEBOOK_SIZE = 1024
FEATURE_DIM = 256
N_QUANTIZERS = 8
SCALAR_LEVELS = 8
