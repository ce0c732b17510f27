"""
Django settings for papr_lab project.

The project has no web surface: Django hosts the experiment harness
(management commands), the test runner and the logging configuration.

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get(
    "PAPR_LAB_SECRET_KEY", "django-insecure-papr-lab-local-experiments"
)

DEBUG = False

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "django.contrib.auth",
    "rest_framework",
    "waveform",
    "experiments",
]

# Experiments keep no database state; the entry only satisfies Django.
DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": ":memory:",
    }
}

# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = True

USE_TZ = False

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# Logging
LOG_LEVEL = os.environ.get("PAPR_LAB_LOG_LEVEL", "INFO")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{asctime} {levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "loggers": {
        "waveform": {
            "handlers": ["console"],
            "level": LOG_LEVEL,
            "propagate": False,
        },
        "experiments": {
            "handlers": ["console"],
            "level": LOG_LEVEL,
            "propagate": False,
        },
    },
}


# Tone-injection experiment defaults (simulation setup of the CCDF,
# SER and power-increase experiments)
TONE_INJECTION = {
    "WAVEFORM": "OFDM",
    "N_SUBCARRIERS": 256,
    "OVERSAMPLING": 8,
    "CONSTELLATION_ORDER": 64,
    "SCHEME": "CR",
    "BETA": 4.0,
    "MAX_ITERS": 20,
    "N_PEAKS": 16,
    "N_FILTERED": 32,
    "CLIP_THRESHOLD_DB": 5.0,
    "DFS_ENABLED": True,
    "N_BLOCKS": 10000,
    "SEED": 20260,
    "ES_N0_DB": [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
    "LIMITER_THRESHOLD_DB": 4.5,
    # samples per symbol period seen by the power amplifier
    "LIMITER_OVERSAMPLING": 1,
    "CALIBRATION_BLOCKS": 10000,
    "CCDF_GRID_DB": (0.0, 14.0, 0.1),
}
