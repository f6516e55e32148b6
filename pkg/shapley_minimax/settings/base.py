# Django settings for shapley_minimax project.
import os

# BASE_DIR = path/to/source/shapley_minimax
# E.g. this file is BASE_DIR/settings/base.py
BASE_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir))
# PROJECT_ROOT = path/to/source
# This file is PROJECT_ROOT/shapley_minimax/settings/base.py
PROJECT_ROOT = os.path.abspath(os.path.join(BASE_DIR, os.pardir))

DEBUG = False

# No models; the apps only need settings, management commands and the test runner.
DATABASES = {}

USE_I18N = False
USE_TZ = True
TIME_ZONE = 'UTC'

# Make this unique, and don't share it with anybody.
SECRET_KEY = os.environ.get('SHAPLEY_MINIMAX_SECRET_KEY', 'not-used-no-sessions-or-signing')

INSTALLED_APPS = (
    # Our apps
    'minimax',
    'api',
    # External apps
    'rest_framework',
)

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'basic': {
            'format': '%(asctime)s %(name)-20s %(levelname)-8s %(message)s',
        },
    },
    'handlers': {
        'console': {
            'level': 'WARNING',
            'class': 'logging.StreamHandler',
            'formatter': 'basic',
            'stream': 'ext://sys.stderr',
        },
        'file': {
            'level': 'DEBUG',
            'class': 'logging.handlers.RotatingFileHandler',
            'formatter': 'basic',
            'filename': os.path.join(PROJECT_ROOT, 'shapley_minimax.log'),
            'maxBytes': 10 * 1024 * 1024,  # 10 MB
            'backupCount': 10,
            'delay': True,
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        'minimax': {
            'handlers': ['file'],
            'level': 'INFO',
            'propagate': True,
        },
        'api': {
            'handlers': ['file'],
            'level': 'INFO',
            'propagate': True,
        },
    }
}

# Application settings
REST_FRAMEWORK = {
    # Serializers are used standalone for document validation; no views, no auth.
    'UNAUTHENTICATED_USER': None,
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [],
    'COERCE_DECIMAL_TO_STRING': False,
}

TEST_RUNNER = 'shapley_minimax.runner.CustomTestSuiteRunner'

# Numerical tolerances. Both must be positive and at most 1e-3.
MINIMAX_ABS_TOL = 1e-9
MINIMAX_REL_TOL = 1e-9

# Sampling defaults. The seed falls back to the environment, then to 42.
MINIMAX_SEED = int(os.environ.get('SHAPLEY_MINIMAX_SEED', 42))
MINIMAX_SAMPLES = 10000
MINIMAX_SAMPLE_BOX = (-10.0, 10.0)
MINIMAX_LAMBDA_RANGE = (0.0, 10.0)

# Brute-force oracle limits
MINIMAX_ORACLE_MAX_DIMENSION = 6
MINIMAX_GRID_MAX_POINTS = 10 ** 7
MINIMAX_EXHAUSTIVE_MAX_COMBINATIONS = 10 ** 6

# Recession of an operator handle: s = 2**MIN_DOUBLINGS, ..., 2**MAX_DOUBLINGS.
# F(s x) / s stays within max|payoff| / s of the limit, so comparisons start at 2**30.
MINIMAX_RECESSION_MIN_DOUBLINGS = 30
MINIMAX_RECESSION_MAX_DOUBLINGS = 60

# Significant digits for every float written to JSON (binary64 round trip)
MINIMAX_JSON_DIGITS = 17
