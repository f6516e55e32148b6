import sys

from shapley_minimax.settings.base import *  # noqa

DEBUG = True

LOGGING['handlers']['console']['level'] = 'INFO'
LOGGING['loggers']['minimax']['handlers'] = ['file', 'console']

# Special test settings
if 'test' in sys.argv:
    # Keep test output readable; failures are reported by the test runner.
    LOGGING['handlers']['console']['level'] = 'ERROR'
    LOGGING['loggers']['minimax']['handlers'] = ['console']
    LOGGING['loggers']['api']['handlers'] = ['console']
