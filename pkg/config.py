from decouple import config
from dotenv import load_dotenv

load_dotenv()


LOG_LEVEL = config("LOG_LEVEL", default="INFO").upper()

# 0 means "use every available core"
SURROGATE_THREADS = config("SURROGATE_THREADS", cast=int, default=0)

BOOTSTRAP_REPLICATES = config("BOOTSTRAP_REPLICATES", cast=int, default=500)
BOOTSTRAP_MIN_SUCCESS = config("BOOTSTRAP_MIN_SUCCESS", cast=float, default=0.9)
BOOTSTRAP_SEED = config("BOOTSTRAP_SEED", cast=int, default=2024)

EM_TOL = config("EM_TOL", cast=float, default=0.001)
EM_MAX_ITER = config("EM_MAX_ITER", cast=int, default=500)
EM_SIGMA_FLOOR = config("EM_SIGMA_FLOOR", cast=float, default=1e-6)

IRLS_TOL = config("IRLS_TOL", cast=float, default=1e-8)
IRLS_MAX_ITER = config("IRLS_MAX_ITER", cast=int, default=50)

# smallest / largest singular value of a weighted design below this is singular
RANK_TOL = config("RANK_TOL", cast=float, default=1e-10)

SIM_N = config("SIM_N", cast=int, default=2000)
SIM_REPS = config("SIM_REPS", cast=int, default=1000)
SIM_DESK_REPS = config("SIM_DESK_REPS", cast=int, default=200)
