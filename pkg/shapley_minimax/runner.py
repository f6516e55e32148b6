import logging

from django.conf import settings
from django.test.runner import DiscoverRunner


logger = logging.getLogger(__name__)


class FixedSeedMixin(object):
    "Mixin to pin the sampling seed while tests run, whatever the environment says."

    def setup_test_environment(self, **kwargs):
        "Remember the configured seed and force the documented default."
        super(FixedSeedMixin, self).setup_test_environment(**kwargs)
        settings._original_minimax_seed = settings.MINIMAX_SEED
        settings.MINIMAX_SEED = 42
        if settings._original_minimax_seed != 42:
            logger.info('Ignoring SHAPLEY_MINIMAX_SEED=%s during tests',
                        settings._original_minimax_seed)

    def teardown_test_environment(self, **kwargs):
        "Restore the configured seed."
        super(FixedSeedMixin, self).teardown_test_environment(**kwargs)
        settings.MINIMAX_SEED = settings._original_minimax_seed
        del settings._original_minimax_seed


class CustomTestSuiteRunner(FixedSeedMixin, DiscoverRunner):
    "Local test suite runner."
