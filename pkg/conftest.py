"""Run the Django test suite under plain pytest.

Mirrors ``python manage.py test``: configures the project settings and sets
up the test environment and test database through the project's
``SpinLabTestRunner``.
"""
import os

import django
import pytest

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "glauber_project.settings")
django.setup()


@pytest.fixture(scope="session", autouse=True)
def _django_test_environment():
    from spinlab.tests.runner import SpinLabTestRunner

    runner = SpinLabTestRunner(verbosity=0, interactive=False)
    runner.setup_test_environment()
    old_config = runner.setup_databases()
    yield
    runner.teardown_databases(old_config)
    runner.teardown_test_environment()
