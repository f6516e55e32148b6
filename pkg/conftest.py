# Configure Django for pytest the same way ``manage.py test`` does.
import os

import django
import pytest

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'shapley_minimax.settings.dev')
django.setup()


@pytest.fixture(scope='session', autouse=True)
def _django_test_environment():
    from shapley_minimax.runner import CustomTestSuiteRunner

    runner = CustomTestSuiteRunner(interactive=False)
    runner.setup_test_environment()
    yield
    runner.teardown_test_environment()
