from decouple import config

LOG_LEVEL = config("CRNASE_LOG_LEVEL", default="WARNING")
MONTE_CARLO_CHUNK = config("CRNASE_MC_CHUNK", default=1_000_000, cast=int)
MONTE_CARLO_SIGMAS = config("CRNASE_SIGMAS", default=3.0, cast=float)
