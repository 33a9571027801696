import os

# Load environment variables from .env file
try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    # dotenv not installed, skip loading .env file
    pass

class Config:
    # Reports
    OUTPUT_DIR = os.getenv("ONTOCHAIN_OUTPUT_DIR", "results")
    LOG_LEVEL = os.getenv("ONTOCHAIN_LOG_LEVEL", "INFO")
    DEFAULT_THREADS = 1

    # Numerical tolerances
    PRUNE_THRESHOLD = 1e-14
    NORM_TOLERANCE = 1e-12
    VERIFY_TOLERANCE = 1e-10
    SCHMIDT_THRESHOLD = 1e-10

    # Size limits
    MAX_INDEX_BITS = 62  # integer-encoded basis indices
    DENSE_MAX_SPINS = 10
    PAULI_MAX_SPINS = 6
    EXHAUSTIVE_BCH_MAX_SPINS = 16
    CENSUS_MAX_SPINS = 24
    MAX_COGWHEEL_STATES = 64
    SAMPLED_ORBITS = 64

    # Experiment defaults
    BELL_DEMO_SPINS = 12
    DEFAULT_SCHEDULE = (1, 1)  # updates before / after the interaction
    DEFAULT_SITES = (4, 5)
