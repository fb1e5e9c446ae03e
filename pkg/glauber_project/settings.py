"""
Django settings for glauber_project project.

The project hosts the ``spinlab`` app: Glauber dynamics, exact spectral
computations and approximate counting for small q-spin systems. Only the
management commands and the report database are used; there is no web
surface.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# The key only signs nothing here (no sessions, no forms) but Django
# refuses to start without one.
SECRET_KEY = os.environ.get("SPINLAB_SECRET_KEY", "spinlab-local-only")

DEBUG = os.environ.get("SPINLAB_DEBUG", "") == "1"

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "spinlab",
]


# Database
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases

DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": os.environ.get("SPINLAB_DB", BASE_DIR / "db.sqlite3"),
    }
}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True


# Default primary key field type
# https://docs.djangoproject.com/en/5.2/ref/settings/#default-auto-field

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# Logging
# https://docs.djangoproject.com/en/5.2/topics/logging/

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "plain"},
    },
    "loggers": {
        "spinlab": {
            "handlers": ["console"],
            "level": os.environ.get("SPINLAB_LOG_LEVEL", "WARNING"),
            "propagate": False,
        },
    },
}


# Toolkit tunables; see spinlab/conf.py for the defaults and their consumers.

SPINLAB = {
    "ENUMERATION_CAP": 2**22,
    "MATRIX_CAP": 20_000,
    "SI_EXHAUSTIVE_MAX_VERTICES": 10,
    "SI_SAMPLED_PINNINGS": 2000,
    "LEVEL_MAX_VERTICES": 6,
    "REGULAR_MAX_ATTEMPTS": 1000,
    "ANNEAL_MAX_RELATIVE_SE": 0.1,
    "CHECK_FEASIBILITY": DEBUG,
    "TOLERANCE": 1e-10,
}

# The test runner always asserts feasibility on every Glauber update.
TEST_RUNNER = "spinlab.tests.runner.SpinLabTestRunner"
